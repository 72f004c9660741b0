"""``circleprev`` command line: every computation emitted as CSV or JSON data.

Exit codes: 0 success, 2 a mathematical validation failed (for instance a map
that is not a diffeomorphism lift), 1 bad flags, unreadable files or schema errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import evaluation, group, lifting, measure_lab, probe, qks, rotation
from .errors import CirclePrevError, SchemaError

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2
SUBCOMMANDS = ("validate", "group", "probe-domain", "foliate", "eval-map", "critical",
               "rotation", "qks", "ccc", "measure")
CSV_DEFAULT = {"foliate", "eval-map", "qks"}
CSV_CAPABLE = CSV_DEFAULT | {"ccc"}
GROUP_TOL = 1e-9
MEASURE_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for mathematical validation failures
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"need finite numbers: {text!r}")
    return vals


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}") from exc


def _window(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise argparse.ArgumentTypeError("--lambda-window needs a,b with a < b")
    return vals[0], vals[1]


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="circleprev", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--input", "--probe", dest="input", help="input JSON file")
    ap.add_argument("--output", help="output file (stdout when omitted)")
    ap.add_argument("--format", choices=("csv", "json"))
    ap.add_argument("--grid", type=int, help="x-grid size")
    ap.add_argument("--nmax", type=int, help="period (eval-map, critical) or largest period (qks)")
    ap.add_argument("--gammas", type=_float_list, default=[0.01, 0.05, 0.1])
    ap.add_argument("--branches", type=_int_list)
    ap.add_argument("--lambda-window", type=_window)
    ap.add_argument("--lambdas", type=_float_list, help="lambda values (foliate, measure)")
    ap.add_argument("--terms", type=int, default=10_000)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--qmax", type=int, default=10_000)
    ap.add_argument("--iters", type=int, help="orbit length (rotation) or number of random checks")
    ap.add_argument("--seed", type=int, default=0)
    return ap


def _validate(args) -> None:
    fmt = args.format or ("csv" if args.subcommand in CSV_DEFAULT else "json")
    if fmt == "csv" and args.subcommand not in CSV_CAPABLE:
        raise UsageError(f"{args.subcommand} only writes JSON")
    args.format = fmt
    for name in ("grid", "nmax", "terms", "qmax", "iters"):
        v = getattr(args, name)
        if v is not None and v < 1:
            raise UsageError(f"--{name} must be positive")
    if any(g < 0 for g in args.gammas):
        raise UsageError("--gammas must be non-negative")
    if not args.beta > 0:
        raise UsageError("--beta must be positive")
    needs_input = {"validate", "probe-domain", "foliate", "eval-map", "critical", "rotation", "qks"}
    if args.subcommand in needs_input and not args.input:
        raise UsageError(f"{args.subcommand} needs --input")


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not JSON: {exc}") from exc


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _clean(v):
    """JSON-safe scalar: non-finite floats become null."""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _deep_clean(obj):
    if isinstance(obj, dict):
        return {k: _deep_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_deep_clean(v) for v in obj]
    return _clean(obj)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            raise SchemaError(f"cannot write {args.output}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def _probe(args) -> probe.Probe:
    return probe.probe_from_dict(_read_json(args.input), args.grid or lifting.DEFAULT_GRID)


# -- subcommands -------------------------------------------------------------
# Each returns (text, exit_code).

def cmd_validate(args):
    F = lifting.lifting_from_dict(_read_json(args.input))
    grid = args.grid or lifting.DEFAULT_GRID
    cert = lifting.validate_diffeo(F, grid)
    doc = {"is_diffeo": cert.is_diffeo, "min_derivative": cert.min_derivative,
           "method": cert.method, "has_fixed_point": lifting.has_fixed_point(F, grid)}
    return _json_text(_deep_clean(doc)), EXIT_OK if cert.is_diffeo else EXIT_INVALID


def _random_lifting(rng, r=2):
    harmonics = tuple((k, float(rng.uniform(-0.02, 0.02)), float(rng.uniform(-0.02, 0.02)))
                      for k in (1, 2))
    return lifting.Lifting(float(rng.uniform(-1, 1)), harmonics, r)


def _random_lam(rng):
    lam = float(rng.uniform(-3, 3))
    return lam if abs(lam - 1.0) > 1e-3 and abs(lam) > 1e-3 else 0.5


def group_self_check(seed: int, checks: int, grid: int = 256) -> dict:
    """Randomised identity, inverse, composition, centre-of-mass and transitivity laws."""
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(("identity", "inverse", "composition", "fixed_point", "transitivity"), 0.0)
    for _ in range(checks):
        v, w, u = (_random_lifting(rng) for _ in range(3))
        lam, sig = _random_lam(rng), _random_lam(rng)
        r, s = group.Reflection(lam, w), group.Reflection(sig, u)
        e = group.GroupElement.identity()
        worst["identity"] = max(worst["identity"], lifting.cr_metric(e(v), v, grid))
        worst["inverse"] = max(worst["inverse"],
                               lifting.cr_metric(group.inverse(r)(r(v)), v, grid))
        try:
            g = group.compose(r, s)
        except ArithmeticError:
            continue
        worst["composition"] = max(worst["composition"], lifting.cr_metric(g(v), r(s(v)), grid))
        if g.delta != 0.0:
            c = group.fixed_point(g)
            worst["fixed_point"] = max(worst["fixed_point"], lifting.cr_metric(g(c), c, grid))
        t = group.solve_transitivity(v, u, lam)
        worst["transitivity"] = max(worst["transitivity"], lifting.cr_metric(t(v), u, grid))
    return {"seed": seed, "checks": checks, "tolerance": GROUP_TOL, "max_error": worst,
            "holds": all(e <= GROUP_TOL for e in worst.values())}


def cmd_group(args):
    if not args.input:
        doc = group_self_check(args.seed, args.iters or 500)
        return _json_text(doc), EXIT_OK if doc["holds"] else EXIT_INVALID
    g = group.element_from_dict(_read_json(args.input))
    doc = group.element_to_dict(g)
    doc["is_identity"] = g.is_identity()
    doc["fixed_point"] = lifting.lifting_to_dict(group.fixed_point(g)) if g.delta != 0.0 else None
    doc["conditional"] = group.is_conditional(g, args.grid or lifting.DEFAULT_GRID)
    return _json_text(_deep_clean(doc)), EXIT_OK


def cmd_probe_domain(args):
    p = _probe(args)
    doc = probe.domain_to_dict(p, args.grid or lifting.DEFAULT_GRID)
    return _json_text(_deep_clean(doc)), EXIT_OK


def cmd_foliate(args):
    p = _probe(args)
    lambdas = args.lambdas or [0.0, 0.5, 1.0]
    samples = probe.foliation_samples(p, lambdas, args.grid or 256)
    if args.format == "json":
        doc = [{"lambda": s.lam, "in_h0": s.in_h0, "x": s.x.tolist(), "y": s.y.tolist()}
               for s in samples]
        return _json_text(_deep_clean(doc)), EXIT_OK
    rows = [(s.lam, float(x), float(y), int(s.in_h0)) for s in samples for x, y in zip(s.x, s.y)]
    return _csv_text(("lambda", "x", "y", "in_h0"), rows), EXIT_OK


def _branches(args, p, n):
    return args.branches if args.branches is not None else evaluation.branches_for(
        p, n, args.lambda_window)


def cmd_eval_map(args):
    p = _probe(args)
    n = args.nmax or 1
    rows = []
    for m in _branches(args, p, n):
        xs, lam, dx, dl, dprime = evaluation.scan(p, n, m, args.grid or 1024, args.lambda_window)
        for i in np.flatnonzero(~np.isnan(lam)):
            rows.append((float(xs[i]), float(lam[i]), float(dx[i]), float(dprime[i]), m))
    if args.format == "json":
        doc = [dict(zip(("x", "lambda", "d_x", "delta_prime", "branch"), r)) for r in rows]
        return _json_text(_deep_clean(doc)), EXIT_OK
    return _csv_text(("x", "lambda", "d_x", "delta_prime", "branch"), rows), EXIT_OK


def cmd_critical(args):
    p = _probe(args)
    n = args.nmax or 1
    pts = []
    for m in _branches(args, p, n):
        pts += evaluation.critical_points(p, n, m, args.grid or 1024, args.lambda_window)
    doc = [{"x": q.x, "lambda": q.lam, "n": q.n, "branch": q.branch, "d_x": q.d_x,
            "d_lambda": q.d_lambda, "delta_prime": q.delta_prime} for q in pts]
    return _json_text(_deep_clean(doc)), EXIT_OK


def cmd_rotation(args):
    F = lifting.lifting_from_dict(_read_json(args.input))
    est = rotation.rotation_number(F, args.iters or 10_000)
    report = rotation.check_star_beta(est, args.beta, args.qmax, lifting=F)
    doc = {"rho": est.value, "error": est.error_bound, "iterations": est.iterations,
           "convergents": [[p, q] for p, q in rotation.convergents(est.value, args.qmax)],
           "star_beta": report.to_dict()}
    return _json_text(_deep_clean(doc)), EXIT_OK


def qks_detail(report: qks.QKSReport) -> dict:
    return _deep_clean({
        "sigma": report.sigma,
        "domain": list(report.domain),
        "x_grid": report.x_grid,
        "slack": report.slack,
        "all_hold": report.all_hold,
        "rows": [{"n": r.n, "gamma": r.gamma, "measured": r.measured, "u": r.u, "b_n": r.b_n,
                  "c_n": r.c_n, "bound": r.bound, "ratio": r.ratio, "holds": r.holds,
                  "entries": r.entries, "intervals": [list(iv) for iv in r.intervals]}
                 for r in report.rows],
        "inverse_b_partial_sums": {repr(g): v for g, v in report.inverse_b_partial_sums.items()},
        "u_above_one": {repr(g): v for g, v in report.u_above_one.items()},
    })


def cmd_qks(args):
    p = _probe(args)
    report = qks.qks_report(p, args.nmax or 3, args.gammas, args.grid or 16384,
                            args.branches, window=args.lambda_window)
    detail = qks_detail(report)
    code = EXIT_OK if report.all_hold else EXIT_INVALID
    if args.format == "json":
        return _json_text(detail), code
    if args.output:
        side = Path(args.output).with_suffix(".json")
        try:
            side.write_text(_json_text(detail))
        except OSError as exc:
            raise SchemaError(f"cannot write {side}: {exc.strerror}") from exc
    header = ("n", "gamma", "measured", "u", "b_n", "c_n", "bound", "ratio", "holds")
    rows = [(r.n, r.gamma, r.measured, r.u, r.b_n, r.c_n, r.bound, r.ratio, int(r.holds))
            for r in report.rows]
    return _csv_text(header, rows), code


def cmd_ccc(args):
    c = measure_lab.ccc_coefficients(args.terms)
    if args.format == "csv":
        rows = [(i + 1, c.lambdas[i], c.partial_products[i], c.coefficients[i])
                for i in range(c.n_terms)]
        return _csv_text(("i", "lambda_i", "p_i", "coefficient_i_minus_1"), rows), EXIT_OK
    doc = {"n_terms": c.n_terms, "limit": c.limit, "product_gap": c.product_gap,
           "renormalization_gap": abs(c.coefficient_sum - 1.0),
           "lambdas": c.lambdas.tolist(), "partial_products": c.partial_products.tolist(),
           "coefficients": c.coefficients.tolist()}
    return _json_text(_deep_clean(doc)), EXIT_OK


def _random_box_union(rng) -> measure_lab.BoxUnion:
    dim = int(rng.integers(1, 5))
    boxes = []
    for _ in range(int(rng.integers(1, 5))):
        lo = rng.uniform(-5, 5, dim)
        boxes.append(np.stack([lo, lo + rng.uniform(0.01, 3, dim)], axis=1))
    return measure_lab.BoxUnion(dim, boxes)


def measure_self_check(seed: int, checks: int) -> dict:
    """Random unions and ``lam`` in (-3, 3): the functional should scale by ``|1 - lam|^dim``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(checks):
        bu = _random_box_union(rng)
        lam = _random_lam(rng)
        before, after, _ = measure_lab.invariance_check(bu, lam, rng.uniform(-5, 5, bu.dim))
        expected = abs(1.0 - lam) ** bu.dim * before
        worst = max(worst, abs(after - expected) / expected)
    return {"seed": seed, "checks": checks, "tolerance": MEASURE_TOL,
            "max_relative_error": worst, "holds": bool(worst <= MEASURE_TOL)}


def cmd_measure(args):
    if not args.input:
        doc = measure_self_check(args.seed, args.iters or 200)
        return _json_text(doc), EXIT_OK if doc["holds"] else EXIT_INVALID
    bu = measure_lab.box_union_from_dict(_read_json(args.input))
    doc = measure_lab.box_union_to_dict(bu)
    doc["measure"] = measure_lab.product_projection_measure(bu)
    rng = np.random.default_rng(args.seed)
    checks = []
    for lam in args.lambdas or []:
        if lam == 1.0:
            raise UsageError("lambda 1 is not a reflection")
        h = rng.uniform(-1, 1, bu.dim)
        before, after, ratio = measure_lab.invariance_check(bu, lam, h)
        checks.append({"lambda": lam, "h": h.tolist(), "before": before, "after": after,
                       "ratio": ratio, "expected_ratio": abs(1.0 - lam) ** bu.dim})
    doc["reflections"] = checks
    return _json_text(_deep_clean(doc)), EXIT_OK


COMMANDS = {
    "validate": cmd_validate, "group": cmd_group, "probe-domain": cmd_probe_domain,
    "foliate": cmd_foliate, "eval-map": cmd_eval_map, "critical": cmd_critical,
    "rotation": cmd_rotation, "qks": cmd_qks, "ccc": cmd_ccc, "measure": cmd_measure,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        text, code = COMMANDS[args.subcommand](args)
        _emit(args, text)
        return code
    except UsageError as exc:
        print(f"circleprev: usage error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SchemaError, OSError) as exc:
        print(f"circleprev: {exc}", file=sys.stderr)
        return EXIT_IO
    except (CirclePrevError, ValueError, ArithmeticError) as exc:
        print(f"circleprev: validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
