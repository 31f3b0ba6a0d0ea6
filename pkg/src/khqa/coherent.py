"""Generalized (Barut-Girardello / Perelomov) coherent states on a truncated grid."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .algebra import Kind, Realization, char_f, char_h
from .errors import ParameterError, TailToleranceError

DEFAULT_TAIL_TOL = 1e-10
DEFAULT_DIM_CAP = 4096
_SERIES_CAP = 1 << 22


def log_bessel_i(nu: float, x: float) -> float:
    """log I_nu(x) from the power series, summed in log space.

    Valid for nu > -1 and x > 0; terms are added until they fall below
    1e-15 of the running sum past the peak.
    """
    if nu <= -1:
        raise ParameterError("order must exceed -1", nu=nu)
    if x < 0:
        raise ParameterError("argument must be nonnegative", x=x)
    if x == 0:
        return 0.0 if nu == 0 else -math.inf
    lhalf = math.log(x / 2.0)
    # largest term sits near m* where (x/2)^2 ~ m (m + nu)
    m_peak = max(0, int(0.5 * (-nu + math.sqrt(nu * nu + x * x))))
    lpeak = (2 * m_peak + nu) * lhalf - math.lgamma(m_peak + 1) - math.lgamma(m_peak + nu + 1)
    total = 1.0
    for direction in (-1, 1):
        m = m_peak + direction
        while m >= 0:
            lt = (2 * m + nu) * lhalf - math.lgamma(m + 1) - math.lgamma(m + nu + 1) - lpeak
            t = math.exp(lt)
            total += t
            if t < 1e-17 * total:
                break
            m += direction
    return lpeak + math.log(total)


def bessel_i(nu: float, x: float) -> float:
    """Modified Bessel function of the first kind, real order nu > -1, x >= 0."""
    return math.exp(log_bessel_i(nu, x))


@dataclass(frozen=True)
class CoherentState:
    realization: Realization
    z: complex
    dim: int
    amplitudes: np.ndarray
    tail_mass: float
    tail_bound: float

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class DensityReport:
    probabilities: np.ndarray
    max_index: int
    max_prob: float
    dominant: bool

    def to_dict(self):
        return {
            "max_index": self.max_index,
            "max_prob": self.max_prob,
            "dominant": self.dominant,
        }


def _log_weights(r: Realization, absz: float, n_terms: int) -> np.ndarray:
    """log of |z|^{2n} / (prod h(j))^2 f(n)! for n < n_terms."""
    n = np.arange(1, n_terms)
    steps = 2.0 * math.log(absz) - np.log(char_f(r, n)) - 2.0 * np.log(char_h(r, n - 1))
    return np.concatenate(([0.0], np.cumsum(steps)))


def _step_ratio(r: Realization, absz: float, n: int) -> float:
    """|C_{n+1} / C_n|^2."""
    return absz * absz / (char_h(r, n) ** 2 * char_f(r, n + 1))


def amplitudes_by_recurrence(r: Realization, z: complex, dim: int,
                             tail_tol: float = DEFAULT_TAIL_TOL) -> CoherentState:
    """Coherent-state coefficients from ``C_{n+1} h(n) sqrt(f(n+1)) = z C_n``.

    The normalization is the full (untruncated) series, so
    ``sum(|C_n|^2) + tail_mass == 1``. ``tail_bound`` is the geometric
    estimate of the omitted mass and is what the tolerance is checked against.
    """
    dim = int(dim)
    if dim < 2:
        raise ParameterError("dim must be >= 2", dim=dim)
    z = complex(z)
    absz = abs(z)
    if absz == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        return CoherentState(r, z, dim, amps, 0.0, 0.0)

    if r.nonlinear and absz >= 1:
        raise ParameterError("Perelomov-type state needs |z| < 1", z=absz)
    ratio = _step_ratio(r, absz, dim - 1)
    if ratio >= 1:
        raise TailToleranceError(
            f"amplitude ratio {ratio:.3g} >= 1 at the truncation edge; dim {dim} is too small for |z|={absz:g}",
            dim=dim, z=absz)

    # extend the series until the omitted terms no longer register
    n_terms = max(2 * dim, 64)
    while True:
        lw = _log_weights(r, absz, n_terms)
        edge_ratio = _step_ratio(r, absz, n_terms - 1)
        if edge_ratio < 1 and lw[-1] - lw.max() < math.log(1e-18 * (1 - edge_ratio)):
            break
        if n_terms >= _SERIES_CAP:
            raise ParameterError("normalization series does not converge", z=absz,
                                 realization=r.label())
        n_terms *= 2
    peak = lw.max()
    w = np.exp(lw - peak)
    total = math.fsum(w)
    probs = w / total
    tail_mass = math.fsum(probs[dim:])
    p_edge = probs[dim - 1]
    tail_bound = p_edge * ratio / (1.0 - ratio)
    if tail_bound > tail_tol:
        raise TailToleranceError(
            f"truncation tail {tail_bound:.3g} exceeds tolerance {tail_tol:.3g} (dim={dim}, |z|={absz:g})",
            dim=dim, z=absz, tail=tail_bound, tolerance=tail_tol)
    phase = np.exp(1j * cmath.phase(z) * np.arange(dim))
    amps = np.sqrt(probs[:dim]) * phase
    return CoherentState(r, z, dim, amps, float(tail_mass), float(tail_bound))


def density(s: CoherentState) -> DensityReport:
    p = s.probabilities
    i = int(np.argmax(p))
    return DensityReport(p, i, float(p[i]), bool(p[i] > 0.5))


def check_halting_precondition(s: CoherentState):
    """No number state may carry more than half the probability."""
    rep = density(s)
    return rep.max_prob <= 0.5, rep


def closed_form_bg(r: Realization, z: complex, n: int) -> complex:
    """n-th amplitude of the coherent state from its closed form.

    Bessel-normalized Barut-Girardello form for ``h = 1`` realizations,
    the Poisson form for the oscillator and the binomial Perelomov form for
    ``h(n) = 1/(n + 2k)``.
    """
    z = complex(z)
    absz = abs(z)
    if n < 0:
        raise ParameterError("n must be nonnegative", n=n)
    if absz == 0:
        return 1.0 + 0j if n == 0 else 0j
    phase = cmath.exp(1j * n * cmath.phase(z))
    if r.kind is Kind.SHO:
        lmag = -0.5 * absz**2 + n * math.log(absz) - 0.5 * math.lgamma(n + 1)
        return math.exp(lmag) * phase
    if r.nonlinear:
        if absz >= 1:
            raise ParameterError("Perelomov state needs |z| < 1", z=absz)
        k = r.params["bargmann_k"]
        m = 2.0 * k
        lbinom = math.lgamma(m + n) - math.lgamma(n + 1) - math.lgamma(m)
        lmag = k * math.log1p(-absz * absz) + 0.5 * lbinom + n * math.log(absz)
        return math.exp(lmag) * phase
    b = r.offset
    lmag = (0.5 * b * math.log(absz) - 0.5 * log_bessel_i(b, 2 * absz)
            + n * math.log(absz) - 0.5 * (math.lgamma(n + 1) + math.lgamma(n + b + 1)))
    return math.exp(lmag) * phase


def choose_dim(r: Realization, z: complex, tail_tol: float = DEFAULT_TAIL_TOL,
               cap: int = DEFAULT_DIM_CAP) -> int:
    """Smallest power of two whose truncation tail is within tolerance."""
    dim = 2
    while dim <= cap:
        try:
            amplitudes_by_recurrence(r, z, dim, tail_tol)
            return dim
        except TailToleranceError:
            dim *= 2
    raise TailToleranceError(f"no dim up to {cap} meets tail tolerance {tail_tol:g}", cap=cap)


def eigen_residual(s: CoherentState) -> float:
    """Norm of ``(h(N) K_- - z)|z>`` on the truncated grid."""
    r = s.realization
    n = np.arange(s.dim - 1)
    lowered = np.zeros(s.dim, dtype=complex)
    lowered[:-1] = char_h(r, n) * np.sqrt(char_f(r, n + 1)) * s.amplitudes[1:]
    return float(np.linalg.norm(lowered - s.z * s.amplitudes))


def auto_displacement(realizations, dims, target: float = 0.45,
                      tail_tol: float = DEFAULT_TAIL_TOL, step: float = 0.01,
                      z_max: float = 50.0) -> float:
    """Smallest real z (on a grid) whose product coherent state has max_prob <= target.

    The same z is used for every mode. Raises if the truncation tail fails
    before the target is met.
    """
    if not 0 < target <= 0.5:
        raise ParameterError("target must lie in (0, 1/2]", target=target)
    i = 1
    while i * step <= z_max:
        z = i * step
        i += 1
        prod = 1.0
        for r, d in zip(realizations, dims):
            prod *= density(amplitudes_by_recurrence(r, z, d, tail_tol)).max_prob
        if prod <= target:
            return round(z, 10)
    raise ParameterError("no displacement meets the target", target=target)
