"""Hot loop: implicit-midpoint (Cayley) propagation under the interpolated Hamiltonian.

``H(s) = (1 - s) H_I + s diag(h_d)`` with ``s = t / T``. ``H_I`` is passed
split into its real diagonal and a CSR off-diagonal part. Each step solves

    (1 + i dt/2 H_mid) x = (1 - i dt/2 H_mid) psi

by Jacobi iteration against the diagonal. The step size keeps
``dt * rho <= h`` where ``rho`` is the max row-sum norm of ``H`` over the
step (convex in ``s``, so checking the endpoints suffices); with ``h < 1``
the iteration contracts by at least a factor ``h / 2`` per sweep.

Two interchangeable implementations live here: a numba kernel and a
pure-numpy fallback. ``cayley_propagate`` picks one according to
``KHQA_DISABLE_NUMBA``.
"""
import numpy as np

from ._jit import njit, numba_enabled

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1


@njit(cache=True)
def _rho(s, rowsum_i, hd_abs):
    best = 0.0
    for r in range(rowsum_i.shape[0]):
        v = (1.0 - s) * rowsum_i[r] + s * hd_abs[r]
        if v > best:
            best = v
    return best


@njit(cache=True)
def _cayley_numba(hi_diag, indptr, indices, data, hd, rowsum_i, psi0, T, h, tol, max_iter):
    n = psi0.shape[0]
    psi = psi0.copy()
    b = np.empty(n, dtype=np.complex128)
    x = np.empty(n, dtype=np.complex128)
    x_new = np.empty(n, dtype=np.complex128)
    inv = np.empty(n, dtype=np.complex128)
    hd_abs = np.abs(hd)
    tol2 = tol * tol
    t = 0.0
    steps = 0
    worst_iter = 0
    while t < T:
        s0 = t / T
        rho0 = _rho(s0, rowsum_i, hd_abs)
        dt = T - t
        if rho0 > 0.0 and h / rho0 < dt:
            dt = h / rho0
        s1 = (t + dt) / T
        rho1 = _rho(s1, rowsum_i, hd_abs)
        if rho1 > rho0 and dt * rho1 > h:
            dt = h / rho1
        if T - (t + dt) <= 1e-12 * T:
            dt = T - t
        sm = (t + 0.5 * dt) / T
        a = 1.0 - sm
        theta = 0.5 * dt
        ta = theta * a
        # rhs = (1 - i theta H) psi; the first sweep starts from psi and reuses H_off psi
        for r in range(n):
            dm = a * hi_diag[r] + sm * hd[r]
            inv[r] = 1.0 / (1.0 + 1j * theta * dm)
            off = 0j
            for p in range(indptr[r], indptr[r + 1]):
                off += data[p] * psi[indices[p]]
            b[r] = psi[r] - 1j * theta * dm * psi[r] - 1j * ta * off
            x[r] = (b[r] - 1j * ta * off) * inv[r]
        it = 0
        while True:
            it += 1
            diff = 0.0
            for r in range(n):
                off = 0j
                for p in range(indptr[r], indptr[r + 1]):
                    off += data[p] * x[indices[p]]
                v = (b[r] - 1j * ta * off) * inv[r]
                dv = v - x[r]
                d = dv.real * dv.real + dv.imag * dv.imag
                if d > diff:
                    diff = d
                x_new[r] = v
            x, x_new = x_new, x
            if diff <= tol2:
                break
            if it >= max_iter:
                return psi, steps, it, STATUS_NO_CONVERGENCE
        if it > worst_iter:
            worst_iter = it
        psi, x = x, psi
        t += dt
        steps += 1
    return psi, steps, worst_iter, STATUS_OK


def _cayley_numpy(hi_diag, indptr, indices, data, hd, rowsum_i, psi0, T, h, tol, max_iter):
    import scipy.sparse as sp

    n = psi0.shape[0]
    off_mat = sp.csr_matrix((data, indices, indptr), shape=(n, n))
    psi = psi0.copy()
    hd_abs = np.abs(hd)
    t = 0.0
    steps = 0
    worst_iter = 0

    def rho(s):
        return float(np.max((1.0 - s) * rowsum_i + s * hd_abs))

    while t < T:
        rho0 = rho(t / T)
        dt = T - t
        if rho0 > 0.0 and h / rho0 < dt:
            dt = h / rho0
        rho1 = rho((t + dt) / T)
        if rho1 > rho0 and dt * rho1 > h:
            dt = h / rho1
        if T - (t + dt) <= 1e-12 * T:
            dt = T - t
        sm = (t + 0.5 * dt) / T
        a = 1.0 - sm
        theta = 0.5 * dt
        dmid = a * hi_diag + sm * hd
        denom = 1.0 + 1j * theta * dmid
        off_psi = a * (off_mat @ psi)
        b = psi - 1j * theta * (dmid * psi + off_psi)
        x = (b - 1j * theta * off_psi) / denom
        it = 0
        while True:
            it += 1
            x_new = (b - 1j * theta * a * (off_mat @ x)) / denom
            diff = np.max(np.abs(x_new - x))
            x = x_new
            if diff <= tol:
                break
            if it >= max_iter:
                return psi, steps, it, STATUS_NO_CONVERGENCE
        worst_iter = max(worst_iter, it)
        psi = x
        t += dt
        steps += 1
    return psi, steps, worst_iter, STATUS_OK


def cayley_propagate(hi_diag, indptr, indices, data, hd, rowsum_i, psi0, T, h,
                     tol=1e-15, max_iter=200, backend=None):
    """Propagate ``psi0`` from ``s = 0`` to ``s = 1`` over physical time ``T``.

    Returns ``(psi, steps, worst_iterations, status)``.
    """
    if backend is None:
        backend = "numba" if numba_enabled() else "numpy"
    fn = _cayley_numba if backend == "numba" else _cayley_numpy
    return fn(
        np.ascontiguousarray(hi_diag, dtype=np.float64),
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(data, dtype=np.complex128),
        np.ascontiguousarray(hd, dtype=np.float64),
        np.ascontiguousarray(rowsum_i, dtype=np.float64),
        np.ascontiguousarray(psi0, dtype=np.complex128),
        float(T), float(h), float(tol), int(max_iter),
    )
