"""Acceptance gate. Each test checks one criterion at its stated tolerance and
prints a single PASS/FAIL line; the lines are repeated in the session summary.

Default evolution settings are used throughout (step_control 1e-9), so the
end-to-end cases take a couple of minutes with the numba kernel.
"""
import math
import time

import numpy as np
import pytest
import scipy.sparse as sp

from khqa.algebra import Realization, TruncatedMode, build_lowering, build_raising, char_f, char_g
from khqa.cli import main
from khqa.coherent import amplitudes_by_recurrence, auto_displacement, closed_form_bg, density, eigen_residual
from khqa.diophantine import oracle_search, parse
from khqa.encode import Hamiltonian, TensorSpace
from khqa.errors import PreconditionError
from khqa.evolve import EvolveConfig, Verdict, integrate, run_khqa

ISW = Realization.isw()
DEFAULT = EvolveConfig()


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def a3_single():
    p = parse("x1 - 3")
    space = TensorSpace.uniform(ISW, (16,))
    res, dt = timed(run_khqa, p, space, "auto", DEFAULT)
    return p, space, res, dt


@pytest.fixture(scope="module")
def a3_double():
    p = parse("(x1 - 1)^2 + (x2 - 2)^2")
    space = TensorSpace.uniform(ISW, (8, 8))
    res, dt = timed(run_khqa, p, space, "auto", DEFAULT)
    return p, space, res, dt


@pytest.fixture(scope="module")
def a4_run():
    p = parse("x1^2 + 1")
    space = TensorSpace.uniform(ISW, (16,))
    res, dt = timed(run_khqa, p, space, "auto", DEFAULT)
    return p, space, res, dt


def test_a1_algebra_suite(acceptance_line):
    systems = [Realization.sho(), ISW, Realization.icw(), Realization.pcw(), Realization.ptp(2, 2),
               Realization.hp(0.5), Realization.hp(1), Realization.laguerre(2)]
    t0 = time.perf_counter()
    worst_comm = worst_diag = 0.0
    for r in systems:
        m = TruncatedMode(r, 32)
        low, up = build_lowering(m).toarray(), build_raising(m).toarray()
        n = np.arange(31)
        comm = np.diag(low @ up - up @ low).real[:31]
        worst_comm = max(worst_comm, float(np.max(np.abs(comm - char_g(r, n)))))
        diag = np.diag(up @ low).real
        worst_diag = max(worst_diag, float(np.max(np.abs(diag - char_f(r, np.arange(32))))))
    elapsed = time.perf_counter() - t0
    ok = worst_comm <= 1e-12 and worst_diag <= 1e-12 and elapsed < 1.0
    acceptance_line("A1", ok, f"8 systems dim 32: max commutator err {worst_comm:.2e}, "
                              f"max K+K- err {worst_diag:.2e}, {elapsed:.3f} s")
    assert ok


def test_a2_coherent_suite(acceptance_line):
    t0 = time.perf_counter()
    cases = [(ISW, 1.5), (ISW, 0.5), (ISW, 1.0), (ISW, 2.0), (Realization.laguerre(2), 1.2),
             (Realization.sho(), 1.0), (Realization.hp(0.5), 0.5), (Realization.hp(1), 0.5)]
    worst_rel = 0.0
    residual_ok = True
    for r, z in cases:
        s = amplitudes_by_recurrence(r, z, 32)
        for n in range(32):
            ref = closed_form_bg(r, z, n)
            if abs(ref) ** 2 > 1e-14:
                worst_rel = max(worst_rel, abs(s.amplitudes[n] - ref) / abs(ref))
        residual_ok &= eigen_residual(s) <= max(1e-8, 3 * s.tail_mass)
    dominance = {}
    for z in (0.5, 1.0, 2.0):
        p = amplitudes_by_recurrence(ISW, z, 32).probabilities
        dominance[z] = float(np.max(p / p[0]))
    elapsed = time.perf_counter() - t0
    dom_ok = all(v <= 1.0 for v in dominance.values())
    ok = worst_rel <= 1e-10 and residual_ok and dom_ok and elapsed < 1.0
    dom_txt = ", ".join(f"z={z:g}: max P_n/P_0={v:.4f}" for z, v in dominance.items())
    acceptance_line("A2", ok, f"closed-form max rel err {worst_rel:.2e}; residual bound "
                              f"{'met' if residual_ok else 'violated'}; ISW dominance {dom_txt}; "
                              f"{elapsed:.3f} s")
    assert ok


def test_a3_solvable(acceptance_line, a3_single, a3_double):
    p, space, res, dt1 = a3_single
    z = res.z[0]
    margin = density(amplitudes_by_recurrence(ISW, z, 16)).max_prob
    oracle = oracle_search(p, 15)
    ok1 = (res.halted and res.p_T > 0.5 and res.T_final <= 1e4 and res.argmax_tuple == (3,)
           and res.hd_value_at_argmax == 0 and res.verdict is Verdict.SOLUTION_FOUND
           and oracle.solvable_in_box and oracle.witness == (3,) and margin <= 0.45)
    p2, space2, res2, dt2 = a3_double
    ok2 = res2.verdict is Verdict.SOLUTION_FOUND and res2.argmax_tuple == (1, 2)
    ok = ok1 and ok2 and dt1 + dt2 < 300
    acceptance_line("A3", ok, f"x1-3: z={z.real:g} (max_prob {margin:.4f}), {res.verdict.value} "
                              f"{list(res.argmax_tuple)} P={res.p_T:.4f} at T={res.T_final:g}; "
                              f"(x1-1)^2+(x2-2)^2: {res2.verdict.value} {list(res2.argmax_tuple)} "
                              f"P={res2.p_T:.4f} at T={res2.T_final:g}; {dt1 + dt2:.1f} s")
    assert ok


def test_a4_unsolvable(acceptance_line, a4_run):
    p, space, res, dt = a4_run
    oracle = oracle_search(p, 15)
    ok = (res.halted and res.argmax_tuple == (0,) and res.hd_value_at_argmax == 1
          and res.verdict is Verdict.NO_SOLUTION and oracle.min_value == 1 and dt < 120)
    acceptance_line("A4", ok, f"x1^2+1: {res.verdict.value} argmax {list(res.argmax_tuple)} "
                              f"hd={res.hd_value_at_argmax}, oracle min {oracle.min_value}; {dt:.1f} s")
    assert ok


def test_a5_precondition(acceptance_line, monkeypatch):
    import khqa.evolve as evolve

    calls = []
    monkeypatch.setattr(evolve, "propagate", lambda *a, **k: calls.append(1))
    reports = []
    for space, z in [(TensorSpace.uniform(ISW, (16,)), [0]),
                     (TensorSpace.uniform(Realization.sho(), (16,)), [0.1])]:
        try:
            run_khqa(parse("x1 - 3"), space, z, DEFAULT)
            reports.append(None)
        except PreconditionError as exc:
            reports.append(exc.context["probability"])
    ok = (not calls and reports[0] == 1.0 and reports[1] is not None
          and math.isclose(reports[1], math.exp(-0.01), rel_tol=1e-12))
    acceptance_line("A5", ok, f"z=0 rejected with P_0={reports[0]}; SHO z=0.1 rejected with "
                              f"P_0={reports[1]}; evolution calls {len(calls)}")
    assert ok


def test_a6_integrator(acceptance_line, a3_single, a3_double, a4_run):
    d = np.arange(8.0)
    space = TensorSpace.uniform(ISW, (8,))
    ham = Hamiltonian(space, d, sp.diags(d.astype(complex)).tocsr())
    psi0 = np.ones(8, complex) / np.sqrt(8)
    T = 1.0
    psi = integrate(ham, psi0, T, DEFAULT)
    phase_err = float(np.max(np.abs(np.angle(psi / (np.exp(-1j * d * T) * psi0)))))
    drifts = [r[2].norm_drift for r in (a3_single, a3_double, a4_run)]
    ok = phase_err <= 1e-6 and max(drifts) <= 1e-8
    acceptance_line("A6", ok, f"diag(0..7), T=1 max phase err {phase_err:.2e}; "
                              f"norm drift on A3/A4 runs {', '.join(f'{x:.1e}' for x in drifts)}")
    assert ok


def test_a7_degeneracy(acceptance_line):
    p = parse("x1 + x2 - 3")
    space = TensorSpace.uniform(ISW, (8, 8))
    cfg = EvolveConfig(t_max=64.0)
    res = run_khqa(p, space, "auto", cfg)
    oracle = oracle_search(p, 3)
    ok = (res.degenerate_ground and res.verdict is not Verdict.SOLUTION_FOUND and res.witness is None
          and oracle.minimizers == [(0, 3), (1, 2), (2, 1), (3, 0)])
    acceptance_line("A7", ok, f"degenerate_ground={res.degenerate_ground}, verdict {res.verdict.value} "
                              f"(P={res.p_T:.3f} at T={res.T_final:g}); oracle minimizers "
                              f"{[list(m) for m in oracle.minimizers]}")
    assert ok


def test_a8_diagnostics(acceptance_line, a3_single):
    res = a3_single[2]
    ok = res.min_coupling is not None and res.min_coupling > 0 and res.min_gap > 0
    acceptance_line("A8", ok, f"x1-3 over {DEFAULT.diagnostics_samples} samples: min_gap {res.min_gap:.4f}, "
                              f"min_coupling {res.min_coupling:.4f}")
    assert ok


def test_a9_determinism(acceptance_line, tmp_path):
    paths = [tmp_path / "first.json", tmp_path / "second.json"]
    codes = [main(["solve", "x1 - 3", "--system", "isw", "--quiet", "--out", str(p)]) for p in paths]
    same = paths[0].read_bytes() == paths[1].read_bytes()
    ok = codes == [0, 0] and same
    acceptance_line("A9", ok, f"two solve runs, exit codes {codes}, reports byte-identical: {same} "
                              f"({len(paths[0].read_bytes())} bytes)")
    assert ok
