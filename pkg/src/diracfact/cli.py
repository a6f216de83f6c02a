"""Command-line front end.

Every command echoes its effective inputs and writes a deterministic JSON
report. Exit status: 0 all checks pass, 1 a numerical check failed, 2 invalid
input or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    EvolutionPlan,
    LandauParams,
    ZitterParams,
    evolve,
    exact_oracle,
    generalized_jc_hamiltonian,
    landau_identity_check,
    measure_frequency,
    wavepacket,
    zitter_oracle,
    zitter_precession,
)
from .expression import ExpressionError
from .factorization import PotentialSpec, partner_decomposition
from .grid import parse_grid
from .multi_hermite import HermiteArgs, hermite_eval, hermite_series_oracle
from .operator_algebra import BUILTIN_RELATIONS, FockSpec, check_relations, relations_from_json
from .quartic_states import QuarticParams, closed_vs_ladder, states_table, vacuum_residual
from .report import emit_report, write_atomic

SUITES = {
    "osp12": [r.name for r in BUILTIN_RELATIONS],
    "su11": ["[H,K±] = ±2 K±", "[K+,K-] = -H"],
    "canonical": ["[q,p] = i", "[a-,a+] = 1"],
}
SPINS = {"up": (1.0, 0.0), "down": (0.0, 1.0), "x": (2**-0.5, 2**-0.5)}


class InputError(Exception):
    """Invalid parameters; reported with exit status 2."""


def _check(name: str, value: float, tol: float) -> dict:
    return {"name": name, "value": value, "tolerance": tol, "pass": bool(value < tol)}


# --- commands -----------------------------------------------------------------


def cmd_verify(a) -> tuple[dict, dict | None]:
    if a.relations:
        try:
            rels = relations_from_json(Path(a.relations).read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot load relations from {a.relations}: {exc}") from exc
    else:
        wanted = set(SUITES[a.suite])
        rels = [r for r in BUILTIN_RELATIONS if r.name in wanted]
    spec = FockSpec(a.fock_dim, a.margin)
    try:
        results = check_relations(rels, spec, a.tol)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc
    checks = [
        {"name": r.name, "residual": r.residual, "margin": r.margin, "tolerance": r.tolerance,
         "pass": r.passed}
        for r in results
    ]
    table = {
        "header": ["index", "residual", "margin", "pass"],
        "rows": [(i, r.residual, r.margin, int(r.passed)) for i, r in enumerate(results)],
    }
    return {"relations": checks}, table


def _parse_hermite_args(text: str):
    vals = []
    for part in text.split(","):
        part = part.strip()
        try:
            vals.append(Fraction(part))
        except ValueError:
            try:
                vals.append(float(part))
            except ValueError:
                raise InputError(f"bad Hermite argument {part!r}") from None
    if any(isinstance(v, float) for v in vals):
        vals = [float(v) for v in vals]
    return HermiteArgs(vals)


def cmd_hermite(a):
    args = _parse_hermite_args(a.args)
    rec = [hermite_eval(n, args) for n in range(a.n_max + 1)]
    ora = hermite_series_oracle(a.n_max, args)
    exact = args.is_exact
    rows, mismatch = [], 0.0
    for n, (x, y) in enumerate(zip(rec, ora)):
        if exact:
            diff = 0.0 if x == y else float("inf")
        else:
            diff = abs(x - y) / max(1.0, abs(y))
        mismatch = max(mismatch, diff)
        rows.append((n, float(x), float(y)))
    values = [str(Fraction(v)) if exact else float(v) for v in rec]
    tol = 0.0 if exact else a.tol
    check = {"name": "recursion vs series oracle", "value": mismatch, "tolerance": tol,
             "pass": bool(mismatch <= tol)}
    return {"values": values, "exact": exact, "checks": [check]}, {
        "header": ["n", "recursion", "series_oracle"], "rows": rows}


def cmd_factorize(a):
    grid = parse_grid(a.grid, a.scheme)
    dec = partner_decomposition(PotentialSpec(a.f, a.floor), grid)
    res = dec.identity_residual()
    table = {
        "header": ["q", "f", "gap", "f_plus", "f_minus"],
        "rows": np.column_stack([grid.q, dec.f, dec.gap_term, dec.f_plus, dec.f_minus]),
    }
    return {"checks": [_check("partner identity residual", res, a.tol)]}, table


def cmd_quartic(a):
    grid = parse_grid(a.grid, a.scheme)
    params = QuarticParams(a.lam, grid)
    dists = closed_vs_ladder(a.n_max, params)
    checks = [_check(f"closed vs ladder L2 distance n={n}", d, a.tol) for n, d in enumerate(dists)]
    checks.append(_check("vacuum annihilation residual", vacuum_residual(params), a.tol_vacuum))
    table = {
        "header": ["q"] + [f"phi_{n}" for n in range(a.n_max + 1)],
        "rows": states_table(a.n_max, params),
    }
    return {"distances": dists, "checks": checks}, table


def cmd_evolve(a):
    grid = parse_grid(a.grid, "spectral")
    jc = generalized_jc_hamiltonian(PotentialSpec(a.f, a.floor), grid, a.omega_prefactor)
    plan = EvolutionPlan.uniform(jc.outer, jc.inner, a.dt, a.T, scheme=a.integrator, swap=a.swap)
    psi0 = wavepacket(grid, a.center, a.width, a.k0, SPINS[a.spin])
    traj = evolve(plan, psi0)
    checks = [_check("norm drift", traj.norm_drift, a.tol_norm)]
    summary = {"final": {k: float(v[-1]) for k, v in traj.observables.items()},
               "steps": len(plan.steps)}
    if a.oracle:
        ref = exact_oracle(plan.total, float(plan.times[-1]), psi0)
        checks.append(_check("final-state error vs exact propagator",
                             float(np.linalg.norm(traj.states[-1] - ref)), a.tol_oracle))
    obs = traj.observables
    table = {
        "header": ["t", "s1", "s2", "s3", "norm"],
        "rows": np.column_stack([traj.times, obs["s1"], obs["s2"], obs["s3"], obs["norm"]]),
    }
    return {"summary": summary, "checks": checks}, table


def cmd_zitter(a):
    zp = ZitterParams(a.p, a.m, a.c, a.hbar)
    s0 = np.array([float(x) for x in a.sigma0.split(",")])
    if s0.shape != (3,):
        raise InputError("--sigma0 needs three comma-separated components")
    s0 = s0 / np.linalg.norm(s0)
    period = 2 * np.pi / zp.angular_frequency
    times = np.linspace(0.0, a.periods * period, a.samples)
    series = zitter_precession(zp, s0, times)
    oracle = zitter_oracle(zp, s0, times)
    axis = zp.field / np.linalg.norm(zp.field)
    along = series @ axis
    checks = [
        _check("axis component drift", float(np.max(np.abs(along - along[0]))), a.tol),
        _check("exact propagator disagreement", float(np.max(np.abs(series - oracle))), a.tol_oracle),
    ]
    summary = {"angular_frequency": zp.angular_frequency,
               "omega_vector_quoted": zp.omega_vector_quoted.tolist()}
    # frequency is measured on the propagator series, independent of the closed form
    perp = oracle - np.outer(oracle @ axis, axis)
    if np.max(np.abs(perp)) > 1e-6:
        ref = np.cross(axis, [0.0, 1.0, 0.0]) if abs(axis[1]) < 0.9 else np.array([1.0, 0, 0])
        comp = perp @ (ref / np.linalg.norm(ref))
        measured = measure_frequency(times, comp)
        summary["measured_frequency"] = measured
        checks.append(_check("relative frequency error",
                             abs(measured - zp.angular_frequency) / zp.angular_frequency,
                             a.tol_freq))
    table = {"header": ["t", "s1", "s2", "s3"], "rows": np.column_stack([times, series])}
    return {"summary": summary, "checks": checks}, table


def cmd_landau(a):
    lp = LandauParams(a.B, a.ky, a.m, a.e, a.hbar, a.c)
    res = landau_identity_check(lp, lp.grid(a.n_points, a.lengths))
    summary = {"omega_c": lp.omega_c, "x_B": lp.x_B, "magnetic_length": lp.magnetic_length,
               "sigma3_coefficient": res.sigma3_coefficient, "residual": res.residual}
    return {"summary": summary,
            "checks": [_check("dimensionless squared-form residual",
                              res.dimensionless_residual, a.tol)]}, None


COMMANDS = {
    "verify": cmd_verify,
    "hermite": cmd_hermite,
    "factorize": cmd_factorize,
    "quartic-states": cmd_quartic,
    "evolve": cmd_evolve,
    "zitter": cmd_zitter,
    "landau": cmd_landau,
}


# --- argument handling ----------------------------------------------------------


def _positive_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diracfact", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file whose keys mirror the flags")
        p.add_argument("--out", help="output path (default: report on stdout)")
        p.add_argument("--format", choices=("json", "csv"),
                       help="json report or csv data table (default: from --out suffix)")
        p.add_argument("--report", help="where to write the JSON report when --format csv")
        return p

    p = common(sub.add_parser("verify", help="check the superalgebra relation set"))
    p.add_argument("--suite", choices=sorted(SUITES), default="osp12")
    p.add_argument("--relations", help="JSON relation file instead of a built-in suite")
    p.add_argument("--fock-dim", type=int, default=64)
    p.add_argument("--margin", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-10)

    p = common(sub.add_parser("hermite", help="higher-order Hermite values, cross-checked"))
    p.add_argument("--n-max", type=_positive_int, default=12)
    p.add_argument("--args", default="1,1,1", help="comma-separated x1,...,xm (rationals allowed)")
    p.add_argument("--tol", type=float, default=1e-12)

    p = common(sub.add_parser("factorize", help="partner decomposition of (p^2 + f)/2"))
    p.add_argument("--f", required=True)
    p.add_argument("--grid", required=True, help="min:max:n")
    p.add_argument("--scheme", choices=("spectral", "fd4"), default="spectral")
    p.add_argument("--floor", type=float, default=1e-10)
    p.add_argument("--tol", type=float, default=1e-8)

    p = common(sub.add_parser("quartic-states", help="quartic oscillator states"))
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--n-max", type=_positive_int, default=6)
    p.add_argument("--grid", default="1e-3:14:2048")
    p.add_argument("--scheme", choices=("spectral", "fd4"), default="fd4")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--tol-vacuum", type=float, default=1e-6)

    p = common(sub.add_parser("evolve", help="split-step generalized Jaynes-Cummings evolution"))
    p.add_argument("--model", choices=("gen-jc",), default="gen-jc")
    p.add_argument("--f", required=True)
    p.add_argument("--grid", required=True, help="min:max:n (spectral)")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--omega-prefactor", type=float, default=0.5)
    p.add_argument("--integrator", choices=("strang", "exact-oracle"), default="strang")
    p.add_argument("--swap", action="store_true", help="use the s3 part as the outer half-step")
    p.add_argument("--center", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--k0", type=float, default=0.0)
    p.add_argument("--spin", choices=sorted(SPINS), default="up")
    p.add_argument("--floor", type=float, default=1e-10)
    p.add_argument("--oracle", action="store_true", help="compare the final state with exp(-iHT)")
    p.add_argument("--tol-norm", type=float, default=1e-10)
    p.add_argument("--tol-oracle", type=float, default=1e-2)

    p = common(sub.add_parser("zitter", help="spin precession under c (p s1 + m c s3)"))
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--sigma0", default="1,0,0")
    p.add_argument("--periods", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=4001)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--tol-oracle", type=float, default=1e-10)
    p.add_argument("--tol-freq", type=float, default=1e-3)

    p = common(sub.add_parser("landau", help="squared Landau operator identity"))
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--ky", type=float, default=0.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--e", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--n-points", type=int, default=1024)
    p.add_argument("--lengths", type=float, default=10.0, help="half-width in magnetic lengths")
    p.add_argument("--tol", type=float, default=1e-8)
    return parser


def _config_argv(path: str) -> list[str]:
    """Translate a JSON config into flags; nested objects are flattened."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must hold a JSON object")
    argv = []
    command = data.pop("command", None)
    if command is not None:
        argv.append(str(command))
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    for key, value in flat.items():
        flag = "--" + str(key).replace("_", "-")
        if key == "lambda":
            flag = "--lambda"
        if isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list):
            argv.append(f"{flag}={','.join(str(v) for v in value)}")
        else:
            argv.append(f"{flag}={value}")
    return argv


def _expand_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise InputError("--config needs a file path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    cfg = _config_argv(path)
    if cfg and cfg[0] in COMMANDS:
        if rest and rest[0] in COMMANDS:
            if rest[0] != cfg[0]:
                raise InputError(f"config command {cfg[0]!r} conflicts with {rest[0]!r}")
            rest = rest[1:]
        return [cfg[0]] + cfg[1:] + rest
    if not rest or rest[0] not in COMMANDS:
        raise InputError("no command given on the command line or in the config")
    # command-line flags come last so they override the config
    return [rest[0]] + cfg + rest[1:]


def _inputs(ns: argparse.Namespace) -> dict:
    skip = {"config", "out", "format", "report"}
    return {k: v for k, v in sorted(vars(ns).items()) if k not in skip}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    fmt = ns.format or ("csv" if ns.out and ns.out.endswith(".csv") else "json")
    try:
        body, table = COMMANDS[ns.command](ns)
    except (InputError, ExpressionError, ValueError, KeyError, OverflowError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2

    checks = body.get("checks", body.get("relations", []))
    passed = all(c["pass"] for c in checks)
    report = {"command": ns.command, "inputs": _inputs(ns), "version": __version__,
              "pass": passed, **body}

    try:
        if fmt == "csv":
            if table is None:
                print(f"error: command {ns.command!r} has no tabular output", file=sys.stderr)
                return 2
            text = emit_report(table, "csv")
            if ns.out:
                write_atomic(ns.out, text)
            else:
                sys.stdout.write(text)
            rep = emit_report(report, "json")
            if ns.report:
                write_atomic(ns.report, rep)
            elif ns.out:
                sys.stdout.write(rep)
        else:
            text = emit_report(report, "json")
            if ns.out:
                write_atomic(ns.out, text)
            else:
                sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for c in checks:
        if not c["pass"]:
            value = c.get("residual", c.get("value"))
            print(f"FAIL: {c['name']}: {value:.3e} >= tolerance {c['tolerance']:.3e}",
                  file=sys.stderr)
    return 0 if passed else 1


def main():
    sys.exit(run())
