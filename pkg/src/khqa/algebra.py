"""su(1,1) realizations and their ladder operators on a truncated Fock space.

Every supported system has a characteristic function of the form
``f(n) = n * (n + b)`` (the harmonic oscillator being the linear exception
``f(n) = n``), so a realization is fully described by its offset ``b`` and
by the nonlinearity ``h(n)`` used in the coherent-state eigen-equation
``h(N) K_- |z> = z |z>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError

# Linear fits of the Bessel zeros j_{0,n} and j_{1,n} used for the cylindrical
# wells; kept as the literal decimals so the spectra match the published ones.
ICW_ZERO_FIT = (3.115, 2.405)
PCW_ZERO_FIT = (3.14, 3.83)
ICW_OFFSET = 1.54
PCW_OFFSET = 2.43


class Kind(str, Enum):
    SHO = "sho"
    ISW = "isw"
    ICW = "icw"
    PCW = "pcw"
    PTP = "ptp"
    HP = "hp"
    LAGUERRE = "laguerre"
    GENERIC = "generic"


_REQUIRED = {
    Kind.PTP: ("lambda", "kappa"),
    Kind.HP: ("bargmann_k",),
    Kind.LAGUERRE: ("alpha",),
    Kind.GENERIC: ("bargmann_k",),
}
_ALLOWED = {
    Kind.PTP: {"lambda", "kappa"},
    Kind.HP: {"bargmann_k"},
    Kind.LAGUERRE: {"alpha"},
    Kind.GENERIC: {"bargmann_k", "perelomov"},
}


@dataclass(frozen=True)
class Realization:
    """A physical system whose dynamical algebra is su(1,1).

    Parameters are validated on construction; the characteristic
    functions themselves never raise.
    """

    kind: Kind
    params: dict = field(default_factory=dict)
    omega: float = 1.0

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        params = dict(self.params)
        for name in _REQUIRED.get(kind, ()):
            if name not in params:
                raise ParameterError(f"{kind.value} requires parameter {name!r}", kind=kind.value)
        extra = set(params) - _ALLOWED.get(kind, set())
        if extra:
            raise ParameterError(
                f"unexpected parameters for {kind.value}: {sorted(extra)}", kind=kind.value
            )
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ParameterError("omega must be positive", omega=self.omega)
        if kind is Kind.PTP:
            lam, kap = float(params["lambda"]), float(params["kappa"])
            if not (lam > 1 and kap > 1):
                raise ParameterError("Poschl-Teller needs lambda, kappa > 1", **params)
            params = {"lambda": lam, "kappa": kap}
        elif kind in (Kind.HP, Kind.GENERIC):
            k = float(params["bargmann_k"])
            if not k >= 0.5:
                raise ParameterError("Bargmann index must be >= 1/2", bargmann_k=k)
            params["bargmann_k"] = k
            if kind is Kind.GENERIC:
                params["perelomov"] = bool(params.get("perelomov", False))
        elif kind is Kind.LAGUERRE:
            alpha = float(params["alpha"])
            if not alpha > -1:
                raise ParameterError("Laguerre oscillator needs alpha > -1", alpha=alpha)
            params = {"alpha": alpha}
        object.__setattr__(self, "params", params)

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def sho(cls, omega=1.0):
        return cls(Kind.SHO, omega=omega)

    @classmethod
    def isw(cls, omega=1.0):
        return cls(Kind.ISW, omega=omega)

    @classmethod
    def icw(cls, omega=1.0):
        return cls(Kind.ICW, omega=omega)

    @classmethod
    def pcw(cls, omega=1.0):
        return cls(Kind.PCW, omega=omega)

    @classmethod
    def ptp(cls, lam, kappa, omega=1.0):
        return cls(Kind.PTP, {"lambda": lam, "kappa": kappa}, omega)

    @classmethod
    def hp(cls, k, omega=1.0):
        return cls(Kind.HP, {"bargmann_k": k}, omega)

    @classmethod
    def laguerre(cls, alpha, omega=1.0):
        return cls(Kind.LAGUERRE, {"alpha": alpha}, omega)

    @classmethod
    def generic(cls, k, perelomov=False, omega=1.0):
        return cls(Kind.GENERIC, {"bargmann_k": k, "perelomov": perelomov}, omega)

    # -- derived quantities ---------------------------------------------------------
    @property
    def offset(self):
        """``b`` in ``f(n) = n (n + b)``; ``None`` for the linear oscillator."""
        kind = self.kind
        if kind is Kind.SHO:
            return None
        if kind is Kind.ISW:
            return 2.0
        if kind is Kind.ICW:
            return ICW_OFFSET
        if kind is Kind.PCW:
            return PCW_OFFSET
        if kind is Kind.PTP:
            eta = self.eta
            return 2.0 * eta - 1.0
        if kind is Kind.LAGUERRE:
            return self.params["alpha"]
        return 2.0 * self.params["bargmann_k"] - 1.0

    @property
    def eta(self):
        if self.kind is not Kind.PTP:
            raise AttributeError("eta is only defined for Poschl-Teller")
        return (self.params["lambda"] + self.params["kappa"] + 1.0) / 2.0

    @property
    def nonlinear(self):
        """True when ``h(n) = 1/(n + 2k)`` (Perelomov-type states)."""
        if self.kind is Kind.HP:
            return True
        return self.kind is Kind.GENERIC and self.params["perelomov"]

    def label(self):
        if not self.params:
            return self.kind.value
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind.value}({inner})"

    def to_dict(self):
        return {"kind": self.kind.value, "params": dict(self.params), "omega": self.omega}


def char_f(r: Realization, n):
    """Squared ladder amplitude, ``K_+ K_- |n> = f(n) |n>``. Accepts arrays."""
    n = np.asarray(n, dtype=float) if not np.isscalar(n) else float(n)
    b = r.offset
    if b is None:
        return n
    return n * (n + b)


def char_h(r: Realization, n):
    """Nonlinearity of the coherent-state eigen-equation."""
    if r.nonlinear:
        k = r.params["bargmann_k"]
        return 1.0 / (np.asarray(n, dtype=float) + 2.0 * k) if not np.isscalar(n) else 1.0 / (n + 2.0 * k)
    return np.ones(np.shape(n)) if not np.isscalar(n) else 1.0


def char_g(r: Realization, n):
    """Diagonal of ``K_3``: ``f(n+1) - f(n)``."""
    return char_f(r, np.add(n, 1)) - char_f(r, n)


def energy(r: Realization, n):
    return r.omega * char_f(r, n)


def interpolated_bessel_zero(kind, n):
    """Linear Bessel-zero fit used to derive the ICW/PCW spectra (n = 0, 1, ...)."""
    slope, intercept = {Kind.ICW: ICW_ZERO_FIT, Kind.PCW: PCW_ZERO_FIT}[Kind(kind)]
    return slope * np.asarray(n, dtype=float) + intercept


def bessel_zero_fit_error(kind, count):
    """Absolute deviation of the linear fit from the true zeros j_{0,n+1} / j_{1,n+1}.

    Diagnostic only; the simulator always uses the fitted spectra.
    """
    from scipy.special import jn_zeros

    order = 0 if Kind(kind) is Kind.ICW else 1
    true = jn_zeros(order, count)
    return np.abs(interpolated_bessel_zero(kind, np.arange(count)) - true)


@dataclass(frozen=True)
class TruncatedMode:
    realization: Realization
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ParameterError("mode dimension must be an integer >= 2", dim=self.dim)
        object.__setattr__(self, "dim", int(self.dim))


@dataclass(frozen=True)
class ModeOperator:
    """Sparse single-mode operator stored as ``{(row, col): amplitude}``."""

    dim: int
    entries: dict

    def __post_init__(self):
        for (i, j) in self.entries:
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise ParameterError("operator index out of range", index=(i, j), dim=self.dim)

    def tocsr(self):
        if not self.entries:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        rows, cols = zip(*self.entries)
        vals = np.fromiter(self.entries.values(), dtype=complex, count=len(self.entries))
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))

    def toarray(self):
        return self.tocsr().toarray()

    def adjoint(self):
        return ModeOperator(self.dim, {(j, i): np.conj(v) for (i, j), v in self.entries.items()})


def build_lowering(m: TruncatedMode) -> ModeOperator:
    f = char_f(m.realization, np.arange(1, m.dim))
    return ModeOperator(m.dim, {(n - 1, n): complex(math.sqrt(f[n - 1])) for n in range(1, m.dim)})


def build_raising(m: TruncatedMode) -> ModeOperator:
    # outflow from the top state |dim-1> is dropped
    f = char_f(m.realization, np.arange(1, m.dim))
    return ModeOperator(m.dim, {(n + 1, n): complex(math.sqrt(f[n])) for n in range(m.dim - 1)})


def build_number(m: TruncatedMode) -> ModeOperator:
    return ModeOperator(m.dim, {(n, n): complex(n) for n in range(1, m.dim)})


def build_k3(m: TruncatedMode) -> ModeOperator:
    g = char_g(m.realization, np.arange(m.dim))
    return ModeOperator(m.dim, {(n, n): complex(g[n]) for n in range(m.dim)})


def number_from_k3(m: TruncatedMode) -> np.ndarray:
    """Recover ``N`` as ``(K_3 - (b + 1)) / 2`` for quadratic realizations."""
    b = m.realization.offset
    if b is None:
        raise ParameterError("K_3 is constant for the linear oscillator; N is not a function of it")
    return 0.5 * (build_k3(m).toarray() - (b + 1.0) * np.eye(m.dim))


def build_nonlinear_lowering(m: TruncatedMode) -> sp.csr_matrix:
    """``h(N) K_-`` as a CSR matrix."""
    h = char_h(m.realization, np.arange(m.dim))
    return (sp.diags(h.astype(complex)) @ build_lowering(m).tocsr()).tocsr()
