"""Problem and initial Hamiltonians on the k-mode truncated tensor space."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .algebra import TruncatedMode, build_lowering, char_h
from .coherent import DEFAULT_TAIL_TOL, amplitudes_by_recurrence
from .diophantine import Polynomial, evaluate_grid, magnitude_bound, square_exact
from .errors import ArityError, ConversionOverflow, ParameterError

_FLOAT_EXACT = 2**53


@dataclass(frozen=True)
class TensorSpace:
    modes: tuple

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ParameterError("tensor space needs at least one mode")
        for m in modes:
            if not isinstance(m, TruncatedMode):
                raise ParameterError("modes must be TruncatedMode instances")
        object.__setattr__(self, "modes", modes)

    @property
    def dims(self):
        return tuple(m.dim for m in self.modes)

    @property
    def k(self):
        return len(self.modes)

    @property
    def total_dim(self):
        return math.prod(self.dims)

    def encode(self, numbers) -> int:
        """Mixed-radix flat index of a number tuple (first mode most significant)."""
        numbers = tuple(int(n) for n in numbers)
        if len(numbers) != self.k:
            raise ArityError("tuple length differs from number of modes", tuple=numbers)
        flat = 0
        for n, d in zip(numbers, self.dims):
            if not 0 <= n < d:
                raise ParameterError("occupation number outside truncation", tuple=numbers, dims=self.dims)
            flat = flat * d + n
        return flat

    def decode(self, flat: int) -> tuple:
        flat = int(flat)
        if not 0 <= flat < self.total_dim:
            raise ParameterError("flat index out of range", index=flat)
        out = []
        for d in reversed(self.dims):
            flat, n = divmod(flat, d)
            out.append(n)
        return tuple(reversed(out))

    def on_boundary(self, numbers) -> list:
        """Indices of modes whose occupation sits on the truncation edge."""
        return [i for i, (n, d) in enumerate(zip(numbers, self.dims)) if n == d - 1]

    @classmethod
    def uniform(cls, realization, dims):
        return cls(tuple(TruncatedMode(realization, d) for d in dims))


@dataclass(frozen=True)
class Hamiltonian:
    """``h_d`` is the float diagonal of the problem Hamiltonian; ``h_d_exact``
    keeps the integer values. ``h_i`` is a CSR Hermitian matrix."""

    space: TensorSpace
    h_d: np.ndarray
    h_i: sp.csr_matrix
    z_params: tuple = ()
    h_d_exact: np.ndarray | None = None
    warnings: tuple = field(default=())

    @property
    def degenerate_ground(self) -> bool:
        vals = self.h_d_exact if self.h_d_exact is not None else self.h_d
        return int(np.count_nonzero(vals == vals.min())) > 1

    def h_d_matrix(self):
        return sp.diags(self.h_d.astype(complex)).tocsr()


def encode_hd(p: Polynomial, space: TensorSpace, return_exact: bool = False):
    """Diagonal of ``D(N_1, ..., N_k)^2`` on the flattened grid."""
    if p.num_vars != space.k:
        raise ArityError(f"polynomial has {p.num_vars} variables, space has {space.k} modes",
                         num_vars=p.num_vars, modes=space.k)
    dims = space.dims
    exact = square_exact(evaluate_grid(p, dims), magnitude_bound(p, dims)).reshape(-1)
    if exact.dtype == object:
        top = max(exact)
        if top > np.finfo(float).max:
            flat = int(np.argmax(exact))
            raise ConversionOverflow("D^2 too large for float evolution",
                                     tuple=space.decode(flat), value=str(top))
    hd = exact.astype(np.float64)
    return (hd, exact) if return_exact else hd


def _single_mode_a(mode: TruncatedMode, z: complex) -> sp.csr_matrix:
    """``h(N) K_- - z`` built from the shared truncated ladder operator."""
    lower = build_lowering(mode).tocsr()
    h = char_h(mode.realization, np.arange(mode.dim)).astype(complex)
    return (sp.diags(h) @ lower - complex(z) * sp.identity(mode.dim, dtype=complex, format="csr")).tocsr()


def _lift(op, space: TensorSpace, i: int):
    left = math.prod(space.dims[:i])
    right = math.prod(space.dims[i + 1:])
    out = op
    if left > 1:
        out = sp.kron(sp.identity(left, dtype=complex, format="csr"), out, format="csr")
    if right > 1:
        out = sp.kron(out, sp.identity(right, dtype=complex, format="csr"), format="csr")
    return out.tocsr()


def encode_hi(space: TensorSpace, z) -> sp.csr_matrix:
    """``sum_i (K_+ h(N_i) - z_i^*)(h(N_i) K_- - z_i)`` lifted to the tensor space."""
    z = list(z)
    if len(z) != space.k:
        raise ArityError("one displacement per mode required", z=len(z), modes=space.k)
    total = sp.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    for i, (mode, zi) in enumerate(zip(space.modes, z)):
        a = _single_mode_a(mode, zi)
        total = total + _lift((a.conj().T @ a).tocsr(), space, i)
    total.sum_duplicates()
    total.eliminate_zeros()
    return total.tocsr()


def build_hamiltonian(p: Polynomial, space: TensorSpace, z) -> Hamiltonian:
    hd, exact = encode_hd(p, space, return_exact=True)
    warnings = []
    if exact.dtype == object and max(exact) > _FLOAT_EXACT:
        warnings.append("h_d entries exceed 2^53; float copy is rounded")
    return Hamiltonian(space, hd, encode_hi(space, z), tuple(complex(v) for v in z), exact, tuple(warnings))


def h_at(ham: Hamiltonian, t: float, T: float) -> sp.csr_matrix:
    """``(1 - t/T) H_I + (t/T) H_D``."""
    if not T > 0:
        raise ParameterError("T must be positive", T=T)
    if not 0 <= t <= T:
        raise ParameterError("t must lie in [0, T]", t=t, T=T)
    s = t / T
    return ((1.0 - s) * ham.h_i + s * ham.h_d_matrix()).tocsr()


def mode_states(space: TensorSpace, z, tail_tol: float = DEFAULT_TAIL_TOL):
    """Per-mode coherent states for the displacements ``z``."""
    z = list(z)
    if len(z) != space.k:
        raise ArityError("one displacement per mode required", z=len(z), modes=space.k)
    return [amplitudes_by_recurrence(m.realization, zi, m.dim, tail_tol) for m, zi in zip(space.modes, z)]


def initial_state(space: TensorSpace, z, tail_tol: float = DEFAULT_TAIL_TOL) -> np.ndarray:
    """Product of per-mode coherent states, renormalized on the grid."""
    psi = np.ones(1, dtype=complex)
    for s in mode_states(space, z, tail_tol):
        psi = np.kron(psi, s.amplitudes)
    return psi / np.linalg.norm(psi)
