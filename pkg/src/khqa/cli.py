"""Command-line front end: ``khqa solve | coherent | spectrum | oracle | check``."""
from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
import warnings

import numpy as np

from .algebra import Kind, Realization
from .checks import default_z, run_checks
from .coherent import DEFAULT_TAIL_TOL, amplitudes_by_recurrence, density
from .diophantine import evaluate_grid, format_polynomial, magnitude_bound, oracle_search, parse, square_exact
from .encode import TensorSpace
from .errors import KhqaError, ParameterError
from .evolve import EvolveConfig, Verdict, oracle_crosscheck, run_khqa
from .report import SCHEMA_VERSION, dumps, format_complex, parse_complex, to_csv

log = logging.getLogger("khqa")

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2

# config keys per section; the flag destination doubles as the key name
_REALIZATION_KEYS = ("system", "lam", "kappa", "bargmann_k", "alpha", "perelomov", "omega")
_RUN_KEYS = ("equation", "dims", "z", "seed", "num_vars", "bound", "budget", "dim", "oracle")
_EVOLVE_KEYS = tuple(f.name for f in dataclasses.fields(EvolveConfig) if f.name != "seed")


def auto_dims(k: int) -> tuple:
    """Default truncation: 16 levels for one unknown, 8 for two, 4 beyond."""
    d = 16 if k == 1 else 8 if k == 2 else 4
    return (d,) * k


def _broadcast(values, k, what):
    if len(values) == 1:
        return list(values) * k
    if len(values) != k:
        raise ParameterError(f"{what} needs 1 or {k} entries, got {len(values)}", **{what: len(values)})
    return list(values)


def _split_list(text):
    return [t for t in str(text).replace(";", ",").split(",") if t.strip()]


def build_realization(ns) -> Realization:
    kind = Kind(str(ns.system).lower())
    omega = float(ns.omega) if ns.omega is not None else 1.0

    def need(name, flag):
        v = getattr(ns, name)
        if v is None:
            raise ParameterError(f"{kind.value} requires --{flag}", kind=kind.value)
        return float(v)

    if kind is Kind.PTP:
        return Realization.ptp(need("lam", "lambda"), need("kappa", "kappa"), omega)
    if kind is Kind.HP:
        return Realization.hp(need("bargmann_k", "k"), omega)
    if kind is Kind.GENERIC:
        return Realization.generic(need("bargmann_k", "k"), _truthy(ns.perelomov), omega)
    if kind is Kind.LAGUERRE:
        return Realization.laguerre(need("alpha", "alpha"), omega)
    return Realization(kind, {}, omega)


def _truthy(v):
    if isinstance(v, str):
        return v.strip().lower() in ("1", "true", "yes", "on")
    return bool(v)


def _evolve_config(ns) -> EvolveConfig:
    kwargs = {}
    for f in dataclasses.fields(EvolveConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            kwargs[f.name] = int(v) if isinstance(f.default, int) else float(v)
    return EvolveConfig(**kwargs)


def _apply_config(ns, path):
    """Fill unset options from an INI file; command-line flags win."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ParameterError(f"cannot read config file {path}", path=path)
    known = {"realization": _REALIZATION_KEYS, "run": _RUN_KEYS, "evolve": _EVOLVE_KEYS}
    for section in cp.sections():
        if section not in known:
            raise ParameterError(f"unknown config section [{section}]", section=section)
        for key, value in cp.items(section):
            dest = "lam" if key == "lambda" else "bargmann_k" if key == "k" else key
            if dest not in known[section]:
                raise ParameterError(f"unknown key {key!r} in [{section}]", section=section, key=key)
            if getattr(ns, dest, None) is None:
                setattr(ns, dest, value)


# ---------------------------------------------------------------------------------
# commands

def cmd_solve(ns):
    if ns.equation is None:
        raise ParameterError("solve needs an equation")
    p = parse(ns.equation, num_vars=int(ns.num_vars) if ns.num_vars is not None else None)
    if p.num_vars == 0:
        raise ParameterError("equation has no unknowns", equation=ns.equation)
    r = build_realization(ns)
    dims_arg = ns.dims if ns.dims is not None else "auto"
    if str(dims_arg).strip() == "auto":
        dims = auto_dims(p.num_vars)
    else:
        dims = tuple(int(d) for d in _broadcast(_split_list(dims_arg), p.num_vars, "dims"))
    space = TensorSpace.uniform(r, dims)
    z_arg = ns.z if ns.z is not None else "auto"
    z = "auto" if str(z_arg).strip() == "auto" else _broadcast(
        [parse_complex(v) for v in _split_list(z_arg)], p.num_vars, "z")
    cfg = _evolve_config(ns)
    if ns.seed is not None:
        cfg = dataclasses.replace(cfg, seed=int(ns.seed))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = run_khqa(p, space, z, cfg)
    cross = None
    if _truthy(ns.oracle if ns.oracle is not None else True):
        budget = int(ns.budget) if ns.budget is not None else None
        cc = oracle_crosscheck(p, space, res, budget)
        if cc is not None:
            cross = {"agrees": cc["agrees"], "verdict": cc["oracle"].to_dict()}

    report = {
        "schema": SCHEMA_VERSION,
        "equation": format_polynomial(p),
        "realization": r.to_dict(),
        "dims": list(dims),
        "z": [format_complex(v) for v in res.z],
        "precondition": {"max_prob": res.precondition_max_prob, "pass": True,
                         "tuple": list(res.precondition_tuple)},
        "schedule": [s.to_dict() for s in res.schedule],
        "verdict": res.verdict.value,
        "halted": res.halted,
        "T_final": res.T_final,
        "P_T": res.p_T,
        "argmax": list(res.argmax_tuple),
        "witness": list(res.witness) if res.witness is not None else None,
        "hd_value_at_argmax": res.hd_value_at_argmax,
        "degenerate_ground": res.degenerate_ground,
        "min_gap": res.min_gap,
        "min_coupling": res.min_coupling,
        "norm_drift": res.norm_drift,
        "oracle_crosscheck": cross,
        "warnings": list(res.warnings),
        "config": {k: v for k, v in dataclasses.asdict(cfg).items()},
    }
    code = EXIT_INCONCLUSIVE if res.verdict is Verdict.INCONCLUSIVE else EXIT_OK
    rows = [s.to_dict() for s in res.schedule]
    return report, code, ("schedule", rows, ["T", "P_T", "argmax", "norm_drift", "steps"])


def cmd_coherent(ns):
    r = build_realization(ns)
    z = parse_complex(ns.z) if ns.z is not None else default_z(r)
    dim = int(ns.dim) if ns.dim is not None else 32
    tail_tol = float(ns.tail_tol) if getattr(ns, "tail_tol", None) is not None else DEFAULT_TAIL_TOL
    state = amplitudes_by_recurrence(r, z, dim, tail_tol)
    rep = density(state)
    cumulative = np.cumsum(state.probabilities)
    rows = [{"n": n, "P_n": float(state.probabilities[n]), "cumulative": float(cumulative[n])}
            for n in range(dim)]
    report = {
        "schema": SCHEMA_VERSION,
        "realization": r.to_dict(),
        "z": format_complex(z),
        "dim": dim,
        "tail_mass": state.tail_mass,
        "tail_bound": state.tail_bound,
        "max_index": rep.max_index,
        "max_prob": rep.max_prob,
        "dominant": rep.dominant,
        "rows": rows,
    }
    return report, EXIT_OK, ("rows", rows, ["n", "P_n", "cumulative"])


def cmd_spectrum(ns):
    if ns.equation is None:
        raise ParameterError("spectrum needs an equation")
    p = parse(ns.equation, num_vars=int(ns.num_vars) if ns.num_vars is not None else None)
    if ns.dims is None or str(ns.dims).strip() == "auto":
        dims = auto_dims(max(p.num_vars, 1)) if p.num_vars else ()
    else:
        dims = tuple(int(d) for d in _broadcast(_split_list(ns.dims), p.num_vars, "dims"))
    if any(d < 1 for d in dims):
        raise ParameterError("dims must be positive", dims=list(dims))
    values = evaluate_grid(p, dims).reshape(-1)
    squares = square_exact(values, magnitude_bound(p, dims))
    order = sorted(range(len(values)), key=lambda i: (squares[i], i))
    rows = [{"tuple": [int(v) for v in np.unravel_index(i, dims)] if dims else [],
             "D": int(values[i]), "D2": int(squares[i])} for i in order]
    report = {"schema": SCHEMA_VERSION, "equation": format_polynomial(p), "dims": list(dims), "rows": rows}
    return report, EXIT_OK, ("rows", rows, ["tuple", "D", "D2"])


def cmd_oracle(ns):
    if ns.equation is None:
        raise ParameterError("oracle needs an equation")
    p = parse(ns.equation, num_vars=int(ns.num_vars) if ns.num_vars is not None else None)
    bound = int(ns.bound) if ns.bound is not None else 15
    kwargs = {"budget": int(ns.budget)} if ns.budget is not None else {}
    verdict = oracle_search(p, bound, **kwargs)
    report = {"schema": SCHEMA_VERSION, "equation": format_polynomial(p), **verdict.to_dict()}
    rows = [{"tuple": list(m)} for m in verdict.minimizers]
    return report, EXIT_OK, ("minimizers", rows, ["tuple"])


def cmd_check(ns):
    r = build_realization(ns)
    dim = int(ns.dim) if ns.dim is not None else 32
    z = parse_complex(ns.z) if ns.z is not None else default_z(r)
    rows = [c.to_dict() for c in run_checks(r, dim, z)]
    passed = all(c["passed"] for c in rows)
    report = {"schema": SCHEMA_VERSION, "realization": r.to_dict(), "dim": dim,
              "z": format_complex(z), "passed": passed, "checks": rows}
    return report, EXIT_OK if passed else EXIT_ERROR, ("checks", rows, ["name", "passed", "value", "tolerance"])


COMMANDS = {"solve": cmd_solve, "coherent": cmd_coherent, "spectrum": cmd_spectrum,
            "oracle": cmd_oracle, "check": cmd_check}


# ---------------------------------------------------------------------------------
# argument parsing

def _add_realization(p):
    g = p.add_argument_group("realization")
    g.add_argument("--system", choices=[k.value for k in Kind], default=None,
                   help="su(1,1) system (default isw)")
    g.add_argument("--lambda", dest="lam", type=float, help="Poschl-Teller lambda")
    g.add_argument("--kappa", type=float, help="Poschl-Teller kappa")
    g.add_argument("--k", dest="bargmann_k", type=float, help="Bargmann index (hp, generic)")
    g.add_argument("--alpha", type=float, help="Laguerre alpha")
    g.add_argument("--perelomov", action="store_const", const=True, default=None,
                   help="generic system with h(n) = 1/(n + 2k)")
    g.add_argument("--omega", type=float, help="energy scale")


def _add_evolve(p):
    g = p.add_argument_group("evolution")
    for f in dataclasses.fields(EvolveConfig):
        if f.name == "seed":
            continue
        kind = int if isinstance(f.default, int) else float
        g.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=kind,
                       help=f"default {f.default}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [realization], [run], [evolve]")
    common.add_argument("--output", choices=["json", "csv"], default="json")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    common.add_argument("--quiet", action="store_true", help="suppress progress logging")

    parser = argparse.ArgumentParser(prog="khqa", parents=[common],
                                     description="Adiabatic Diophantine search on su(1,1) modes")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="run the adiabatic halting loop")
    s.add_argument("equation", nargs="?")
    s.add_argument("--dims", help="'auto', one size, or a comma list per unknown")
    s.add_argument("--z", help="'auto', one value, or a comma list like 1.5+0i,1-0.5i")
    s.add_argument("--num-vars", dest="num_vars", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--no-oracle", dest="oracle", action="store_const", const=False, default=None)
    s.add_argument("--budget", type=int, help="oracle enumeration budget")
    _add_realization(s)
    _add_evolve(s)

    c = sub.add_parser("coherent", parents=[common], help="tabulate a coherent-state density")
    c.add_argument("--z")
    c.add_argument("--dim", type=int)
    _add_realization(c)

    sp_ = sub.add_parser("spectrum", parents=[common], help="list D and D^2 over the truncated grid")
    sp_.add_argument("equation", nargs="?")
    sp_.add_argument("--dims")
    sp_.add_argument("--num-vars", dest="num_vars", type=int)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive search over a box")
    o.add_argument("equation", nargs="?")
    o.add_argument("--bound", type=int)
    o.add_argument("--budget", type=int)
    o.add_argument("--num-vars", dest="num_vars", type=int)

    k = sub.add_parser("check", parents=[common], help="run the algebra/coherent invariant suite")
    k.add_argument("--dim", type=int)
    k.add_argument("--z")
    _add_realization(k)
    return parser


def _fill_defaults(ns):
    for name in _REALIZATION_KEYS + _RUN_KEYS + _EVOLVE_KEYS:
        if not hasattr(ns, name):
            setattr(ns, name, None)
    if ns.system is None:
        ns.system = "isw"


def _emit_error(exc, stream):
    if isinstance(exc, KhqaError):
        code, msg, ctx = exc.code, exc.message, exc.context
    else:
        code, msg, ctx = "invalid_parameter", str(exc), {}
    stream.write(dumps({"error": {"code": code, "message": msg, "context": _plain(ctx)}}))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, int, float, complex, str, np.generic)) or obj is None:
        return obj.item() if isinstance(obj, np.generic) else obj
    return str(obj)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if ns.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if ns.config:
            _apply_config(ns, ns.config)
        _fill_defaults(ns)
        report, code, (_, rows, columns) = COMMANDS[ns.command](ns)
        text = dumps(report) if ns.output == "json" else to_csv(rows, columns)
    except (KhqaError, ValueError, OverflowError) as exc:
        _emit_error(exc, sys.stderr)
        return EXIT_ERROR
    if ns.out:
        with open(ns.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
