"""Command-line front end: ``zetabound coeffs|verify|optimize|zeta|audit|replay``.

Exit codes: 0 everything passed, 1 a check failed, 2 usage or infeasible
input, 3 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
import traceback
from pathlib import Path

from . import verify as vf
from .derivative_tests import subdivision_audit
from .errors import DomainError, InfeasibleError, PrecisionError, RefusalError
from .expsum import PhaseSpec
from .optimizer import Objective, SearchSpace, grid_search
from .pipeline import (
    PUBLISHED_LARGE,
    PUBLISHED_MEDIUM,
    RegionParams,
    compute_coefficients,
    theorem_bound,
)
from .precision import set_dps, workdps
from .zeta import gabcke_remainder_bound, reference_zeta, rs_main_sum, rs_zeta_upper, rsl_bound

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config


def read_config_file(path: str | Path) -> dict:
    """Parse a ``key = value`` file.  ``samples.<routine> = N`` sets one sample count."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out: dict = {"sample_counts": {}}
    conv = {"precision_digits": int, "oracle_cap": int, "seed": int, "output_format": str,
            "tmax": float, "workers": int}
    for key, value in parser["run"].items():
        if key.startswith("samples."):
            out["sample_counts"][key.split(".", 1)[1]] = int(value)
        elif key in conv:
            out[key] = conv[key](value)
        else:
            raise UsageError(f"unknown config key {key!r}")
    return out


def build_config(args, suite: str | None = None) -> vf.RunConfig:
    values: dict = {"sample_counts": dict(vf.DEFAULT_SAMPLES)}
    if args.config:
        from_file = read_config_file(args.config)
        values["sample_counts"].update(from_file.pop("sample_counts"))
        values.update(from_file)
    flags = {
        "precision_digits": args.precision,
        "oracle_cap": args.oracle_cap,
        "seed": args.seed,
        "output_format": args.format,
        "tmax": args.tmax,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.samples is not None:
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        for name in _suite_routines(suite):
            values["sample_counts"][name] = args.samples
    try:
        return vf.RunConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _suite_routines(suite: str | None) -> list[str]:
    if suite in (None, "all"):
        return list(vf.DEFAULT_SAMPLES)
    if suite == "theorem":
        return ["theorem"]
    return list(vf.SUITE_ROUTINES[suite])


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def _published_for(region: str, params: RegionParams):
    if region == "large":
        eta, r0, t0 = PUBLISHED_LARGE
        printed = vf.PUBLISHED["large/t0=1e+12"]
        same = (params.eta, params.r0, params.t0) == (eta, r0, t0)
        return printed if same else None
    entry = PUBLISHED_MEDIUM.get(params.t0)
    if entry is None:
        return None
    (phi, eta, r0), _ = entry
    if (float(params.phi), params.eta, params.r0) != (phi, eta, r0):
        return None
    return vf.PUBLISHED[f"medium/t0={params.t0:g}"]


def cmd_coeffs(args) -> int:
    cfg = build_config(args)
    set_dps(cfg.precision_digits)
    if args.region == "large":
        if args.phi is not None:
            raise UsageError("the large region fixes phi = 1/3")
        eta_d, r0_d, t0_d = PUBLISHED_LARGE
        phi = "1/3"
    else:
        (phi_d, eta_d, r0_d), _ = PUBLISHED_MEDIUM[5.5e7]
        t0_d = 5.5e7
        phi = args.phi if args.phi is not None else phi_d
    params = RegionParams(phi, args.eta if args.eta is not None else eta_d,
                          args.r0 if args.r0 is not None else r0_d,
                          args.t0 if args.t0 is not None else t0_d)
    tup = compute_coefficients(params)
    printed = _published_for(args.region, params)
    names = [f"{'a' if args.region == 'medium' else 'b'}{i + 1}" for i in range(len(tup.coeffs))]
    if (args.format or "text") == "json":
        doc = {
            "region": args.region,
            "params": params.as_dict(),
            "coefficients": {n: str(c) for n, c in zip(names, tup.coeffs)},
            "published": dict(zip(names, printed)) if printed else None,
            "constants": {k: str(v) for k, v in vars(tup.constants).items() if k != "alternatives"},
        }
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
        return EXIT_OK
    lines = [f"region {args.region}: {params.as_dict()}"]
    with workdps():
        for i, (n, c) in enumerate(zip(names, tup.coeffs)):
            line = f"{n} = {c}"
            if printed:
                line += f"   published {printed[i]}   delta {float(c) - printed[i]:+.3e}"
            lines.append(line)
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = build_config(args, args.suite)
    report = vf.run_suite(args.suite, cfg)
    _emit(report.render(), args.out)
    s = report.summary
    print(f"{s['pass']} passed, {s['fail']} failed, {s['skip']} skipped", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_replay(args) -> int:
    if args.report:
        try:
            doc = json.loads(Path(args.report).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read report {args.report}: {exc}") from exc
        stored = {k: v for k, v in doc["config"].items() if k in vf.config_fields()}
        cfg = vf.RunConfig(**stored)
        matches = [r for r in doc["records"] if r["check_id"] == args.check_id]
        if not matches:
            raise UsageError(f"check {args.check_id!r} is not in {args.report}")
        original = matches[0]
    else:
        cfg = build_config(args)
        suite = args.check_id.split("/", 1)[0]
        tasks = [t for t in vf.build_tasks(suite, cfg) if t.check_id == args.check_id]
        if not tasks:
            raise UsageError(f"check {args.check_id!r} is not generated by this configuration")
        original = {"check_id": tasks[0].check_id, "inputs": tasks[0].inputs}
    set_dps(cfg.precision_digits)
    rec = vf.replay(original, cfg)
    print(json.dumps(rec.to_dict(), indent=1))
    if "margin" in original and original["margin"] != rec.margin:
        print(f"margin differs from the report: {original['margin']!r} vs {rec.margin!r}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK if rec.passed or rec.skipped else EXIT_FAIL


def _range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) == 1:
        return float(parts[0]), float(parts[0]), 1.0
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected lo:hi:step or a single value")
    return tuple(float(p) for p in parts)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(p) for p in text.split(","))


def cmd_optimize(args) -> int:
    cfg = build_config(args)
    set_dps(cfg.precision_digits)
    if args.region == "large" and args.phi is not None:
        raise UsageError("the large region fixes phi = 1/3")
    t0 = args.t0 if args.t0 is not None else (1e12 if args.region == "large" else 5.5e7)
    phi_range = None if args.region == "large" else (args.phi or (0.339, 0.345, 0.0002))
    space = SearchSpace(phi_range, args.eta or (1.5, 2.1, 0.05), args.r0 or (2, 3, 4, 5, 6), t0,
                        Objective(args.objective), args.t_eval)
    result = grid_search(space, workers=cfg.workers)
    print(f"evaluated {result.evaluated} points, {result.infeasible} infeasible", file=sys.stderr)
    if not result.candidates:
        print("no feasible candidate on this grid (every r0 exceeds R0)", file=sys.stderr)
        return EXIT_USAGE
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    width = len(result.best.coefficients.coeffs)
    w.writerow(["rank", "phi", "eta", "r0", "t0", "objective", *(f"c{i + 1}" for i in range(width))])
    with workdps():
        for rank, c in enumerate(result.candidates[: args.top], 1):
            p = c.params
            w.writerow([rank, p.as_dict()["phi"], p.eta, p.r0, p.t0, mpmath_str(c.objective),
                        *(mpmath_str(x) for x in c.coefficients.coeffs)])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def mpmath_str(x, digits: int = 12) -> str:
    import mpmath

    return mpmath.nstr(x, digits)


def cmd_zeta(args) -> int:
    cfg = build_config(args)
    set_dps(cfg.precision_digits)
    t = args.t
    out: dict
    if args.mode == "reference":
        z = reference_zeta(t)
        out = {"t": t, "abs_value": mpmath_str(z.abs_value, 15), "est_error": z.est_error,
               "method": z.method.value}
        if t >= 3:
            out["theorem_bound"] = mpmath_str(theorem_bound(t).bound, 15)
    elif args.mode == "rs_upper":
        s = rs_main_sum(t)
        out = {"t": t, "rs_upper": mpmath_str(rs_zeta_upper(t), 15), "main_sum_abs": abs(s),
               "main_sum_err": s.err, "remainder": mpmath_str(gabcke_remainder_bound(t), 15),
               "rsl_bound": mpmath_str(rsl_bound(t), 15)}
    else:
        tb = theorem_bound(t)
        out = {"t": t, "bound": mpmath_str(tb.bound, 15), "region": tb.region.value,
               "window": list(tb.window), "certificate": list(tb.certificate)}
    if (args.format or "text") == "json":
        _emit(json.dumps(out, indent=1) + "\n", args.out)
    else:
        _emit("".join(f"{k}: {v}\n" for k, v in out.items()), args.out)
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = build_config(args)
    set_dps(cfg.precision_digits)
    spec = PhaseSpec(args.t, args.r, args.K, m=args.m, L=args.L if args.L is not None else args.K)
    a = subdivision_audit(spec, args.K0)
    lines = [f"delta = {mpmath_str(a.delta)}"]
    if a.skipped:
        lines.append("skipped: delta >= 1/2, the bound is weaker than the trivial one")
    else:
        lines.append(f"H_max = {a.H_max!r}  limit = {mpmath_str(a.H_limit)}  margin = {a.margin!r}")
        lines.append(f"identity residual = {mpmath_str(a.identity_residual, 5)}")
        lines += [f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in a.checks.items()]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if a.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="working precision in decimal digits (>= 30)")
    common.add_argument("--seed", type=int, help="seed for the randomized suites")
    common.add_argument("--samples", type=int, help="sample count for every routine of the selected suite")
    common.add_argument("--format", choices=("json", "csv", "text"))
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--oracle-cap", type=int, help="refuse brute-force sums longer than this")
    common.add_argument("--config", help="key = value file; command-line flags take precedence")
    common.add_argument("--workers", type=int, help="process pool size")
    common.add_argument("--tmax", type=float, help="upper end of the theorem sample range")

    p = argparse.ArgumentParser(prog="zetabound", description="Explicit bounds for zeta on the critical line.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("coeffs", parents=[common], help="compute a coefficient tuple")
    c.add_argument("region", choices=("medium", "large"))
    c.add_argument("--phi", type=str)
    c.add_argument("--eta", type=float)
    c.add_argument("--r0", type=int)
    c.add_argument("--t0", type=float)
    c.set_defaults(func=cmd_coeffs)

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite", choices=(*vf.SUITES, "all"))
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("optimize", parents=[common], help="grid search over region parameters")
    o.add_argument("region", choices=("medium", "large"))
    o.add_argument("--phi", type=_range, help="lo:hi:step")
    o.add_argument("--eta", type=_range, help="lo:hi:step")
    o.add_argument("--r0", type=_int_list, help="comma-separated values")
    o.add_argument("--t0", type=float)
    o.add_argument("--objective", choices=[x.value for x in Objective], default=Objective.MINIMIZE_A1.value)
    o.add_argument("--t-eval", type=float)
    o.add_argument("--top", type=int, default=10)
    o.set_defaults(func=cmd_optimize)

    z = sub.add_parser("zeta", parents=[common], help="evaluate zeta(1/2 + it) or its bounds")
    z.add_argument("t", type=float)
    z.add_argument("--mode", choices=("reference", "rs_upper", "theorem"), default="reference")
    z.set_defaults(func=cmd_zeta)

    a = sub.add_parser("audit", parents=[common], help="audit the subdivision argument for one spec")
    a.add_argument("--t", type=float, required=True)
    a.add_argument("--r", type=int, required=True)
    a.add_argument("--K", type=int, required=True)
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--L", type=int)
    a.add_argument("--K0", type=float, required=True)
    a.set_defaults(func=cmd_audit)

    r = sub.add_parser("replay", parents=[common], help="re-run one check")
    r.add_argument("check_id")
    r.add_argument("--report", help="JSON report holding the check's inputs and config")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, DomainError, InfeasibleError, RefusalError, PrecisionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
