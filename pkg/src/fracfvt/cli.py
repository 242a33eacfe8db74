"""``fracfvt`` command line: ``fvt``, ``fode`` and ``verify`` subcommands.

Exit codes: 0 when every record passes (``fvt`` also accepts inconclusive
records), 1 on a numeric failure, 2 on a usage or configuration error.
Options may also come from a JSON ``--config`` file whose keys are the
long option names; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance, finval, fodesim
from .report import Report, ReportRecord, write_csv
from .xform import catalog_names, make_catalog_function

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CONTRAST_RATIO = 10.0


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _scan(text: str) -> tuple[float, float, int]:
    parts = str(text).split(":")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except (IndexError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"scan must be LO:HI:N, got {text!r}") from exc
    if not (0 < lo < hi and n >= 2):
        raise argparse.ArgumentTypeError("scan needs 0 < LO < HI and N >= 2")
    return lo, hi, n


def _threads() -> int:
    raw = os.environ.get("FRACFVT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"FRACFVT_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"FRACFVT_THREADS must be a positive integer, got {raw!r}")
    return n


def _emit(report: Report, out):
    if out:
        report.write(out)
    else:
        print(report.dumps())


# -- fvt ----------------------------------------------------------------------

_FN_PARAMS = ("c", "rate", "offset", "omega", "q")


def cmd_fvt(args) -> int:
    if args.fn not in catalog_names():
        raise UsageError(f"unknown function {args.fn!r}; valid names: {', '.join(catalog_names())}")
    params = {k: getattr(args, k) for k in _FN_PARAMS if getattr(args, k) is not None}
    try:
        f = make_catalog_function(args.fn, **params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {args.fn}: {exc}")
    alphas = args.alpha
    if any(a < 0 for a in alphas):
        raise UsageError("alpha values must be non-negative")
    probes = finval.default_t_probes(args.t_max)

    def one(alpha):
        return finval.cross_validate(f, alpha, s_seq=tuple(args.s_seq), t_probes=probes, tol=args.tol)

    with ThreadPoolExecutor(max_workers=min(_threads(), len(alphas))) as pool:
        records = list(pool.map(one, alphas))
    report = Report("fvt", records)
    for r in records:
        o = r.outputs
        print(f"{r.experiment_id}: {r.status}  L={o['L']:.6g} G={o['G']:.6g} K={o['K']:.6g}", file=sys.stderr)
    _emit(report, args.out)
    if args.csv:
        rows = [(f.name, r.inputs["alpha"], r.outputs["L"], r.outputs["G"], r.outputs["K"], r.status) for r in records]
        write_csv(args.csv, ("function", "alpha", "L", "G", "K", "status"), rows)
    return EXIT_FAIL if any(r.status == "fail" for r in records) else EXIT_OK


# -- fode ---------------------------------------------------------------------


def _rhs_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = str(item).partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise UsageError(f"--param value must be numeric, got {item!r}")
    return out


def cmd_fode(args) -> int:
    start = time.perf_counter()
    try:
        rhs, x0 = fodesim.make_rhs(args.rhs, **_rhs_params(args.param))
    except KeyError as exc:
        raise UsageError(str(exc.args[0]))
    except TypeError as exc:
        raise UsageError(f"bad parameters for {args.rhs}: {exc}")
    if args.x0 is not None:
        x0 = np.array(args.x0, dtype=float)
    try:
        rhs(x0)
        problem = fodesim.FodeProblem(args.alpha, rhs, x0, args.horizon, args.h)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc))
    lo, hi, n = args.scan
    periods = np.linspace(lo, hi, n)
    try:
        traj = fodesim.solve(problem)
        scan = fodesim.periodicity_residual(traj, periods, args.window, t_skip=args.t_skip)
        ref = fodesim.solve_classical(rhs, x0, args.horizon, args.h)
        ref_scan = fodesim.periodicity_residual(ref, periods, args.window, t_skip=args.t_skip)
    except fodesim.WindowError as exc:
        raise UsageError(str(exc))
    certificates = {
        f"{T:.6g}": fodesim.certificate_integral(traj, T, args.alpha) for T in (scan.best_T, ref_scan.best_T)
    }
    r_frac, r_ref = scan.min_residual, ref_scan.min_residual
    shortfall = max(0.0, CONTRAST_RATIO * r_ref - r_frac)
    if scan.nonconstancy <= 1e-12:
        status = "inconclusive"
    else:
        status = "pass" if shortfall == 0.0 else "fail"
    record = ReportRecord(
        experiment_id=f"fode:{args.rhs}:alpha={args.alpha:g}",
        inputs={
            "rhs": args.rhs,
            "params": _rhs_params(args.param),
            "alpha": args.alpha,
            "x0": x0,
            "horizon": args.horizon,
            "h": args.h,
            "scan": [lo, hi, n],
            "t_skip": scan.t_skip,
            "window": scan.window,
        },
        outputs={
            "final_state": traj.states[-1],
            "max_norm": float(np.max(np.abs(traj.states))),
            "rhs_evals": traj.rhs_evals,
            "min_residual": r_frac,
            "best_T": scan.best_T,
            "nonconstancy": scan.nonconstancy,
            "reference_min_residual": r_ref,
            "reference_best_T": ref_scan.best_T,
            "contrast_ratio": r_frac / r_ref if r_ref > 0 else None,
            "contrast_shortfall": shortfall,
            "certificates": certificates,
            "residual_curve": scan.pairs,
        },
        status=status,
        tolerances={"contrast_shortfall": 0.0},
        wall_time_ms=int(1000 * (time.perf_counter() - start)),
    )
    print(
        f"{record.experiment_id}: {status}  min_residual={r_frac:.4g} at T={scan.best_T:.4g}, "
        f"reference={r_ref:.3g}",
        file=sys.stderr,
    )
    _emit(Report("fode", [record]), args.out)
    if args.csv:
        write_csv(args.csv, ("T", "residual"), [(float(T), float(r)) for T, r in scan.pairs])
    return EXIT_FAIL if status == "fail" else EXIT_OK


# -- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    only = None
    if args.only:
        only = [g.strip() for g in args.only.split(",") if g.strip()]
        bad = [g for g in only if g not in acceptance.GROUPS]
        if bad:
            raise UsageError(f"unknown group(s) {bad}; valid: {', '.join(acceptance.GROUPS)}")
    if not args.tol_scale > 0:
        raise UsageError("--tol-scale must be positive")
    results = []
    for check in acceptance.CRITERIA:
        if only is not None and check.meta[1] not in only:
            continue
        res = check(args.tol_scale)
        print(res.line(), flush=True)
        results.append(res)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} passed")
    if args.out:
        records = [
            ReportRecord(
                experiment_id=f"criterion:{r.number}",
                inputs={"title": r.title, "group": r.group, "tol_scale": args.tol_scale},
                outputs=r.details,
                status="pass" if r.passed else "fail",
                wall_time_ms=int(1000 * r.runtime_s),
            )
            for r in results
        ]
        Report("verify", records).write(args.out)
    return EXIT_OK if passed == len(results) else EXIT_FAIL


# -- parser -------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="fracfvt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("fvt", help="cross-validate the three final-value routes for a catalog function")
    p.add_argument("--fn", required=True, help="catalog name: " + ", ".join(catalog_names()))
    p.add_argument("--alpha", type=_floats, default=[0.0], help="comma-separated orders")
    for name in _FN_PARAMS:
        p.add_argument(f"--{name}", type=float, default=None)
    p.add_argument("--s-seq", type=_floats, default=list(finval.DEFAULT_S_SEQ))
    p.add_argument("--t-max", type=float, default=1e3, help="largest time probe")
    p.add_argument("--tol", type=float, default=1e-2)
    p.set_defaults(handler=cmd_fvt)
    subs["fvt"] = p

    p = sub.add_parser("fode", help="solve a Caputo system and scan for periods")
    p.add_argument("--rhs", required=True, help="registry name: " + ", ".join(sorted(fodesim.RHS_REGISTRY)))
    p.add_argument("--param", action="append", help="rhs parameter as key=value (repeatable)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0", type=_floats, default=None)
    p.add_argument("--horizon", type=float, default=acceptance.ROTATION_HORIZON)
    p.add_argument("--h", type=float, default=acceptance.ROTATION_STEP)
    p.add_argument("--scan", type=_scan, default=(1.0, 20.0, 60), help="LO:HI:N period candidates")
    p.add_argument("--window", type=float, default=None)
    p.add_argument("--t-skip", type=float, default=None)
    p.set_defaults(handler=cmd_fode)
    subs["fode"] = p

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", default=None, help="comma-separated groups: " + ", ".join(acceptance.GROUPS))
    p.add_argument("--tol-scale", type=float, default=1.0)
    p.set_defaults(handler=cmd_verify)
    subs["verify"] = p

    for p in subs.values():
        p.add_argument("--config", default=None, help="JSON file of option defaults")
        p.add_argument("--out", default=None, help="JSON report path (stdout if omitted)")
        if p is not subs["verify"]:
            p.add_argument("--csv", default=None, help="CSV table path")
    return parser, subs


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("config", "help", "handler"):
            raise UsageError(f"unknown config key {key!r}")
        action = actions[dest]
        try:
            if isinstance(value, list) and action.type is _floats:
                value = [float(v) for v in value]
            elif action.type in (_floats, _scan):
                value = action.type(str(value))
            elif action.type is not None and value is not None:
                value = action.type(value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for config key {key!r}: {exc}")
        defaults[dest] = value
        # an option supplied by the config no longer needs the flag
        action.required = False
    sub.set_defaults(**defaults)


def main(argv=None) -> int:
    parser, subs = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    try:
        known, _ = pre.parse_known_args(argv)
        if known.config and argv and argv[0] in subs:
            _apply_config(subs[argv[0]], known.config)
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (UsageError, OSError, json.JSONDecodeError, argparse.ArgumentTypeError) as exc:
        print(f"fracfvt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
