"""Compare the numba and pure-numpy Cayley propagation kernels.

Usage: python3 benchmarks/bench_integrate.py [--repeat N] [--step-control X]

Both backends integrate the same instances; the script reports wall time,
step counts, time per step and the max amplitude difference between them.
"""
import argparse
import time

import numpy as np

from khqa import Realization, TensorSpace, build_hamiltonian, initial_state, parse
from khqa.evolve import _split
from khqa.kernels import cayley_propagate

CASES = [
    ("x1 - 3", (16,), 1.63, 4.0),
    ("x1^2 + 1", (16,), 1.63, 0.5),
    ("(x1 - 1)^2 + (x2 - 2)^2", (8, 8), 1.13, 2.0),
    ("x1 + x2 + x3 - 2", (8, 8, 8), 1.0, 0.5),
]


def run(backend, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = cayley_propagate(*args, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--step-control", type=float, default=1e-6)
    ns = ap.parse_args()
    h = ns.step_control ** (1.0 / 3.0)
    isw = Realization.isw()

    # compile outside the timed region
    warm = build_hamiltonian(parse("x1"), TensorSpace.uniform(isw, (16,)), [1.0])
    d, off, rs = _split(warm)
    cayley_propagate(d, off.indptr, off.indices, off.data, warm.h_d, rs,
                     initial_state(warm.space, [1.0]), 0.1, h, backend="numba")

    print(f"{'equation':<26}{'dim':>6}{'steps':>10}{'numba s':>10}{'numpy s':>10}"
          f"{'us/step nb':>12}{'us/step np':>12}{'speedup':>9}{'max diff':>11}")
    for eq, dims, z, T in CASES:
        space = TensorSpace.uniform(isw, dims)
        ham = build_hamiltonian(parse(eq), space, [z] * len(dims))
        psi0 = initial_state(space, [z] * len(dims))
        d, off, rs = _split(ham)
        args = (d, off.indptr, off.indices, off.data, ham.h_d, rs, psi0, T, h)
        t_nb, (psi_nb, steps, _, _) = run("numba", args, ns.repeat)
        t_np, (psi_np, _, _, _) = run("numpy", args, 1)
        diff = float(np.max(np.abs(psi_nb - psi_np)))
        print(f"{eq:<26}{space.total_dim:>6}{steps:>10}{t_nb:>10.3f}{t_np:>10.3f}"
              f"{1e6 * t_nb / steps:>12.3f}{1e6 * t_np / steps:>12.3f}{t_np / t_nb:>9.1f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
