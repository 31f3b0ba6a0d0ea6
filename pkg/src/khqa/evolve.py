"""Adiabatic evolution, the T-doubling halting loop and gap/coupling diagnostics."""
from __future__ import annotations

import logging
import math
import warnings as _warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coherent import DEFAULT_TAIL_TOL, auto_displacement, density
from .diophantine import Polynomial, evaluate, oracle_search
from .encode import Hamiltonian, TensorSpace, build_hamiltonian, initial_state, mode_states
from .errors import (ArityError, BudgetExceeded, EigenSolverError, IntegrationError,
                     ParameterError, PreconditionError)
from .kernels import STATUS_OK, cayley_propagate

log = logging.getLogger(__name__)

NORM_ABORT = 1e-6


class Verdict(str, Enum):
    SOLUTION_FOUND = "SolutionFound"
    NO_SOLUTION = "NoSolutionWithinTruncation"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EvolveConfig:
    t_initial: float = 4.0
    t_max: float = 1e4
    t_growth: float = 2.0
    step_control: float = 1e-9
    halting_threshold: float = 0.5
    diagnostics_samples: int = 32
    tail_tol: float = DEFAULT_TAIL_TOL
    auto_z_target: float = 0.45
    degeneracy_margin: float = 0.05
    dense_eig_cap: int = 2048
    diagnostics_cap: int = 20000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.t_initial <= self.t_max:
            raise ParameterError("need 0 < t_initial <= t_max", t_initial=self.t_initial, t_max=self.t_max)
        if not self.t_growth > 1:
            raise ParameterError("t_growth must exceed 1", t_growth=self.t_growth)
        if not 0 < self.step_control < 1:
            raise ParameterError("step_control must lie in (0, 1)", step_control=self.step_control)
        if not 0 < self.halting_threshold < 1:
            raise ParameterError("halting_threshold must lie in (0, 1)", threshold=self.halting_threshold)
        if self.diagnostics_samples < 0:
            raise ParameterError("diagnostics_samples must be nonnegative")


@dataclass
class StepRecord:
    T: float
    p_T: float
    argmax: tuple
    norm_drift: float
    steps: int

    def to_dict(self):
        return {"T": self.T, "P_T": self.p_T, "argmax": list(self.argmax),
                "norm_drift": self.norm_drift, "steps": self.steps}


@dataclass
class RunResult:
    halted: bool
    T_final: float
    p_T: float
    argmax_tuple: tuple
    hd_value_at_argmax: int
    verdict: Verdict
    witness: tuple | None
    norm_drift: float
    min_gap: float | None
    min_coupling: float | None
    degenerate_ground: bool
    z: tuple = ()
    dims: tuple = ()
    precondition_max_prob: float = float("nan")
    precondition_tuple: tuple = ()
    schedule: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


# ---------------------------------------------------------------------------------
# integration

def _split(ham: Hamiltonian):
    hi = ham.h_i.tocsr()
    diag = hi.diagonal()
    if np.max(np.abs(diag.imag), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(diag), initial=0.0)):
        raise ParameterError("H_I diagonal is not real; matrix is not Hermitian")
    off = (hi - sp.diags(diag)).tocsr()
    off.eliminate_zeros()
    off.sort_indices()
    rowsum = np.asarray(abs(hi).sum(axis=1)).ravel()
    return diag.real.copy(), off, rowsum


def propagate(ham: Hamiltonian, psi0, T: float, cfg: EvolveConfig, backend=None):
    """Like :func:`integrate` but also returns the step count."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (ham.space.total_dim,):
        raise ArityError("state length differs from the tensor-space dimension")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ParameterError("initial state must be normalized", norm=float(np.linalg.norm(psi0)))
    if T < 0:
        raise ParameterError("T must be nonnegative", T=T)
    if T == 0:
        return psi0.copy(), 0
    diag, off, rowsum = _split(ham)
    h = cfg.step_control ** (1.0 / 3.0)
    psi, steps, iters, status = cayley_propagate(
        diag, off.indptr, off.indices, off.data, ham.h_d, rowsum, psi0, T, h, backend=backend)
    if status != STATUS_OK:
        raise IntegrationError("Jacobi solve of the midpoint system did not converge",
                               T=T, step=int(steps), iterations=int(iters))
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > NORM_ABORT:
        raise IntegrationError("norm drift beyond 1e-6", T=T, drift=float(drift))
    return psi, int(steps)


def integrate(ham: Hamiltonian, psi0, T: float, cfg: EvolveConfig | None = None, backend=None) -> np.ndarray:
    """Solve ``i d/dt psi = H_A(t) psi`` on ``[0, T]`` by implicit-midpoint steps."""
    return propagate(ham, psi0, T, cfg or EvolveConfig(), backend)[0]


def measure_max(psi, space: TensorSpace):
    """Most probable number state; ties go to the lexicographically smallest tuple."""
    p = np.abs(np.asarray(psi)) ** 2
    flat = int(np.argmax(p))
    return float(p[flat]), space.decode(flat)


# ---------------------------------------------------------------------------------
# diagnostics

def _two_lowest(h, cfg: EvolveConfig, rng):
    n = h.shape[0]
    if n <= cfg.dense_eig_cap:
        w, v = la.eigh(h.toarray(), subset_by_index=[0, 1])
        return w, v
    v0 = rng.standard_normal(n) + 0j
    try:
        w, v = spla.eigsh(h, k=2, which="SA", v0=v0, tol=1e-12, maxiter=20 * n)
    except spla.ArpackNoConvergence as exc:
        raise EigenSolverError("Lanczos did not converge", dim=n) from exc
    order = np.argsort(w)
    return w[order], v[:, order]


def gap_profile(ham: Hamiltonian, s_values, cfg: EvolveConfig | None = None):
    """Gap ``E_1 - E_0`` and coupling ``|<e| H_D - H_I |g>|`` at each ``s``."""
    cfg = cfg or EvolveConfig()
    if ham.space.total_dim < 2:
        raise ParameterError("diagnostics need at least two states")
    rng = np.random.default_rng(cfg.seed)
    hd = ham.h_d_matrix()
    delta = (hd - ham.h_i).tocsr()
    gaps, couplings = [], []
    for j, s in enumerate(s_values):
        h = ((1.0 - s) * ham.h_i + s * hd).tocsr()
        try:
            w, v = _two_lowest(h, cfg, rng)
        except EigenSolverError as exc:
            exc.context["sample"] = j
            exc.context["s"] = float(s)
            raise
        gaps.append(float(w[1] - w[0]))
        couplings.append(float(abs(np.vdot(v[:, 1], delta @ v[:, 0]))))
    return np.array(gaps), np.array(couplings)


def diagnostics(ham: Hamiltonian, cfg: EvolveConfig | None = None):
    """Minimum spectral gap and ground/first-excited coupling over sampled ``s``.

    Samples ``s = j / (S + 1)`` for ``j = 1..S``. Returns
    ``(min_gap, min_coupling, degenerate_ground)``; the minima are ``None``
    when no samples are requested.
    """
    cfg = cfg or EvolveConfig()
    S = cfg.diagnostics_samples
    if S == 0:
        return None, None, ham.degenerate_ground
    gaps, couplings = gap_profile(ham, [j / (S + 1) for j in range(1, S + 1)], cfg)
    return float(gaps.min()), float(couplings.min()), ham.degenerate_ground


# ---------------------------------------------------------------------------------
# the halting loop

def precondition_max_prob(states) -> tuple:
    """Largest product-state probability and the tuple carrying it."""
    reps = [density(s) for s in states]
    return math.prod(r.max_prob for r in reps), tuple(r.max_index for r in reps)


def resolve_z(space: TensorSpace, z, cfg: EvolveConfig):
    if isinstance(z, str):
        if z != "auto":
            raise ParameterError("z must be a list of complex numbers or 'auto'", z=z)
        z0 = auto_displacement([m.realization for m in space.modes], space.dims,
                               target=cfg.auto_z_target, tail_tol=cfg.tail_tol)
        return tuple(complex(z0) for _ in range(space.k))
    z = [complex(v) for v in z]
    if len(z) == 1:
        z = z * space.k
    if len(z) != space.k:
        raise ArityError("z needs one value or one per mode", z=len(z), modes=space.k)
    return tuple(z)


def run_khqa(p: Polynomial, space: TensorSpace, z="auto", cfg: EvolveConfig | None = None,
             with_diagnostics: bool = True, backend=None) -> RunResult:
    """Run the adiabatic search with T-doubling until P(T) exceeds the threshold."""
    cfg = cfg or EvolveConfig()
    if p.num_vars != space.k:
        raise ArityError(f"polynomial has {p.num_vars} variables, space has {space.k} modes")
    z = resolve_z(space, z, cfg)
    states = mode_states(space, z, cfg.tail_tol)
    pmax, where = precondition_max_prob(states)
    if pmax > 0.5:
        raise PreconditionError(
            f"initial state has a dominant component P{list(where)} = {pmax:.6g} > 1/2",
            tuple=list(where), probability=pmax)

    ham = build_hamiltonian(p, space, z)
    psi0 = initial_state(space, z, cfg.tail_tol)
    warn = list(ham.warnings)
    degenerate = ham.degenerate_ground
    if degenerate:
        warn.append("H_D ground level is degenerate on the truncated grid")

    min_gap = min_coupling = None
    if with_diagnostics and cfg.diagnostics_samples and space.total_dim <= cfg.diagnostics_cap:
        min_gap, min_coupling, _ = diagnostics(ham, cfg)
        if min_coupling is not None and min_coupling < 1e-12:
            warn.append("ground/excited coupling vanished at a sample")

    schedule = []
    halted = False
    T = cfg.t_initial
    psi = psi0
    best_p = 0.0
    while T <= cfg.t_max * (1 + 1e-12):
        psi, steps = propagate(ham, psi0, T, cfg, backend)
        p_T, arg = measure_max(psi, space)
        drift = abs(float(np.linalg.norm(psi)) - 1.0)
        schedule.append(StepRecord(T, p_T, arg, drift, steps))
        log.info("T=%g P(T)=%.6f argmax=%s", T, p_T, arg)
        if best_p > 0.2 and p_T < best_p - 0.02:
            warn.append(f"P(T) decreased from {best_p:.4f} to {p_T:.4f} at T={T:g}")
        best_p = max(best_p, p_T)
        if p_T > cfg.halting_threshold:
            halted = True
            break
        T *= cfg.t_growth

    last = schedule[-1]
    arg = last.argmax
    hd_value = evaluate(p, arg) ** 2
    witness = None
    edge = space.on_boundary(arg)
    if edge:
        msg = (f"argmax {list(arg)} lies on the truncation edge of mode(s) {edge}; "
               f"consider dims {[2 * d if i in edge else d for i, d in enumerate(space.dims)]}")
        warn.append(msg)
        _warnings.warn(msg, RuntimeWarning, stacklevel=2)

    if not halted:
        verdict = Verdict.INCONCLUSIVE
    else:
        probs = np.sort(np.abs(psi) ** 2)[::-1]
        if degenerate and probs[0] - probs[1] < cfg.degeneracy_margin:
            verdict = Verdict.INCONCLUSIVE
        elif hd_value == 0:
            verdict = Verdict.SOLUTION_FOUND
            witness = tuple(arg)
        elif edge:
            verdict = Verdict.INCONCLUSIVE
        else:
            verdict = Verdict.NO_SOLUTION

    return RunResult(
        halted=halted,
        T_final=last.T,
        p_T=last.p_T,
        argmax_tuple=tuple(arg),
        hd_value_at_argmax=int(hd_value),
        verdict=verdict,
        witness=witness,
        norm_drift=max(r.norm_drift for r in schedule),
        min_gap=min_gap,
        min_coupling=min_coupling,
        degenerate_ground=degenerate,
        z=z,
        dims=space.dims,
        precondition_max_prob=pmax,
        precondition_tuple=where,
        schedule=schedule,
        warnings=warn,
    )


def oracle_crosscheck(p: Polynomial, space: TensorSpace, result: RunResult, budget=None):
    """Compare a run against exhaustive search over ``{0..max(dims)-1}^k``."""
    kwargs = {} if budget is None else {"budget": budget}
    try:
        verdict = oracle_search(p, max(space.dims) - 1, **kwargs)
    except BudgetExceeded:
        return None
    if result.verdict is Verdict.SOLUTION_FOUND:
        agrees = verdict.solvable_in_box
    elif result.verdict is Verdict.NO_SOLUTION:
        agrees = not verdict.solvable_in_box and result.hd_value_at_argmax == verdict.min_value
    else:
        agrees = None
    return {"oracle": verdict, "agrees": agrees}
