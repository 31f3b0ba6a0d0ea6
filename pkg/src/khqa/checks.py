"""Invariant suite for one realization at one truncation, as run by ``khqa check``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import TruncatedMode, build_lowering, build_raising, char_f, char_g
from .coherent import amplitudes_by_recurrence, eigen_residual
from .errors import KhqaError

EXACT_TOL = 1e-12


@dataclass(frozen=True)
class CheckRow:
    name: str
    passed: bool
    value: float | None
    tolerance: float | None

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "value": self.value, "tolerance": self.tolerance}


def default_z(r) -> complex:
    return 0.5 if r.nonlinear else 1.0


def run_checks(r, dim: int, z=None, tail_tol: float = 1e-10) -> list:
    mode = TruncatedMode(r, dim)
    lower = build_lowering(mode).toarray()
    raise_ = build_raising(mode).toarray()
    n = np.arange(dim)
    rows = []

    comm = np.real(np.diag(lower @ raise_ - raise_ @ lower))[: dim - 1]
    err = float(np.max(np.abs(comm - char_g(r, n[: dim - 1]))))
    rows.append(CheckRow("commutator [K-,K+] = f(n+1) - f(n)", err <= EXACT_TOL, err, EXACT_TOL))

    kk = np.real(np.diag(raise_ @ lower))
    err = float(np.max(np.abs(kk - char_f(r, n))))
    rows.append(CheckRow("K+K- diagonal = f(n)", err <= EXACT_TOL, err, EXACT_TOL))

    second = np.diff(char_f(r, n), 2)
    want = 0.0 if r.offset is None else 2.0
    err = float(np.max(np.abs(second - want)))
    rows.append(CheckRow("second difference of f constant", err <= EXACT_TOL, err, EXACT_TOL))

    herm = float(np.max(np.abs(raise_ - lower.conj().T)))
    rows.append(CheckRow("K+ = (K-)^dagger", herm == 0.0, herm, 0.0))

    z = default_z(r) if z is None else complex(z)
    try:
        state = amplitudes_by_recurrence(r, z, dim, tail_tol)
    except KhqaError as exc:
        rows.append(CheckRow(f"coherent state: {exc.message}", False, None, tail_tol))
        return rows
    total = float(np.sum(state.probabilities)) + state.tail_mass
    rows.append(CheckRow("coherent normalization incl. tail", abs(total - 1) <= 1e-12, abs(total - 1), 1e-12))
    tol = max(1e-8, 3 * state.tail_mass)
    res = eigen_residual(state)
    rows.append(CheckRow("eigenstate residual", res <= tol, res, tol))
    return rows
