"""Command-line interface.

    henonbif predict --dimension 2 --alpha 0 --nodal-zones 2
    henonbif morse -N 3 -a 0 -m 1 -p 2
    henonbif scan -N 3 -a 0 -m 2 --out atlas.json
    henonbif reproduce --out report.md

Options may also come from a ``key=value`` file given with ``--config``;
flags on the command line win. Exit status is 0 on success, 1 on a domain
error (its category is printed on stderr) and 2 on usage errors.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .bessel import beta_table, bessel_zero, eval_bessel
from .bifurcation import predicted_ranges, scan
from .cache import EigenCache, default_cache_dir
from .errors import HenonError, UnsupportedCaseError
from .morse import asymptotic_index_p1, asymptotic_index_sup, index_from_spectrum, morse_lower_bounds
from .params import ProblemParams
from .radial import solve_radial
from .reproduce import render_report, run_criteria
from .spectrum import DEFAULT_RESOLUTION, compute_spectrum, eigenvalue_curve

SIG_DIGITS = 12
MIN_GRID = 256

log = logging.getLogger("henonbif")


class UsageError(Exception):
    pass


def fmt(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _round(obj):
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):
        return _round(obj.item())
    return obj


def _json(obj):
    return json.dumps(_round(obj), indent=2, sort_keys=True) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_output(text, out):
    """Print ``text`` or write it atomically to ``out``."""
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=path.name, suffix=".tmp")
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from exc
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------- parsing

def _add_params(p, power=False):
    p.add_argument("-N", "--dimension", type=int)
    p.add_argument("-a", "--alpha", type=float)
    p.add_argument("-m", "--nodal-zones", type=int)
    if power:
        p.add_argument("-p", "--power", type=float)


def _add_output(p, formats=("json", "csv")):
    p.add_argument("--format", dest="output_format", choices=formats)
    p.add_argument("-o", "--out", help="write to this file instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="henonbif", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key=value file with default option values")
    parser.add_argument("--cache-dir", help="eigenvalue cache directory (default: $HENONBIF_CACHE_DIR)")
    parser.add_argument("--no-cache", action="store_true", help="do not read or write the eigenvalue cache")
    parser.add_argument("--jobs", type=int, help="worker processes for sweeps")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("bessel", help="Bessel function values and zeros")
    p.add_argument("--order", type=float)
    p.add_argument("--zeros", "--zero-index", dest="zeros", type=int, help="list zeros z_1 .. z_k")
    p.add_argument("--at", "--eval-at", dest="at", type=float, nargs="*", default=[], help="evaluate J at these points")
    _add_output(p)

    p = sub.add_parser("beta-table", help="orders beta_i matching the m-th base zero")
    _add_params(p)
    _add_output(p)

    p = sub.add_parser("radial", help="radial profile with m nodal zones")
    _add_params(p, power=True)
    p.add_argument("--grid-size", "--grid", dest="grid_size", type=int)
    _add_output(p)

    p = sub.add_parser("spectrum", help="negative singular eigenvalues")
    _add_params(p, power=True)
    p.add_argument("--count", type=int)
    p.add_argument("--resolution", type=int, help="log-grid points per unit (default 256)")
    p.add_argument("--eigenfunctions", action="store_true", help="include sampled eigenfunctions (json)")
    _add_output(p)

    p = sub.add_parser("nu1-curve", help="singular eigenvalues along a p-grid")
    _add_params(p)
    p.add_argument("--p-min", type=float)
    p.add_argument("--p-max", type=float)
    p.add_argument("--p-step", type=float)
    p.add_argument("--resolution", type=int)
    _add_output(p, ("csv", "json"))

    p = sub.add_parser("morse", help="Morse index from the singular spectrum")
    _add_params(p, power=True)
    p.add_argument("--resolution", type=int)
    _add_output(p)

    p = sub.add_parser("morse-asymptotics", help="closed-form indices and p->1 lower bounds")
    _add_params(p)
    _add_output(p, ("csv", "json"))

    p = sub.add_parser("scan", help="locate nonradial degeneracy points")
    _add_params(p)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--p-min", type=float)
    p.add_argument("--p-max", type=float)
    p.add_argument("--p-step", type=float)
    p.add_argument("--resolution", type=int)
    _add_output(p, ("json",))

    p = sub.add_parser("predict", help="predicted ranges of bifurcating modes")
    _add_params(p)
    _add_output(p, ("csv", "json"))

    p = sub.add_parser("reproduce", help="run all acceptance checks, write a Markdown report")
    p.add_argument("--only", nargs="*", help="criterion numbers to run")
    p.add_argument("-o", "--out", help="report path (default: stdout)")
    return parser


def read_config(path):
    """Parse ``key=value`` lines; '#' starts a comment. Keys use option names."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


_CONFIG_TYPES = {
    "dimension": int, "alpha": float, "nodal_zones": int, "power": float, "grid_size": int,
    "count": int, "resolution": int, "p_min": float, "p_max": float, "p_step": float,
    "n_min": int, "n_max": int, "order": float, "zeros": int, "jobs": int,
    "output_format": str, "format": str, "cache_dir": str, "out": str,
}


def merge_config(args, config):
    for key, raw in config.items():
        dest = "output_format" if key == "format" else key
        if dest not in _CONFIG_TYPES:
            raise UsageError(f"unknown config key {key!r}")
        if not hasattr(args, dest) or getattr(args, dest) is not None:
            continue
        try:
            setattr(args, dest, _CONFIG_TYPES[dest](raw))
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _positive(args, *names):
    for n in names:
        v = getattr(args, n, None)
        if v is not None and v <= 0:
            raise UsageError(f"--{n.replace('_', '-')} must be positive")


def _params(args, power=False):
    names = ["dimension", "alpha", "nodal_zones"] + (["power"] if power else [])
    _require(args, *names)
    return ProblemParams(args.dimension, args.alpha, args.nodal_zones, args.power if power else None)


def _cache(args):
    if args.no_cache:
        return None
    return EigenCache(args.cache_dir or default_cache_dir())


# ---------------------------------------------------------------- commands

def cmd_bessel(args):
    _require(args, "order")
    k = args.zeros if args.zeros is not None else 5
    _positive(args, "zeros")
    zeros = [bessel_zero(args.order, i) for i in range(1, k + 1)]
    values = [eval_bessel(args.order, r) for r in args.at]
    if args.output_format == "json":
        return _json({"order": args.order, "zeros": zeros, "values": [{"r": r, "J": v} for r, v in zip(args.at, values)]})
    text = _csv(["i", "z"], [(i, z) for i, z in enumerate(zeros, start=1)])
    if values:
        text += "\n" + _csv(["r", "J"], zip(args.at, values))
    return text


def cmd_beta_table(args):
    params = _params(args)
    rows = beta_table(params)
    if args.output_format == "json":
        return _json({"params": params.as_dict(), "rows": [{"i": i, "beta": b, "z": z} for i, b, z in rows]})
    return _csv(["i", "beta_i", "z_i(beta_i)"], rows)


def cmd_radial(args):
    params = _params(args, power=True)
    grid = args.grid_size if args.grid_size is not None else 2048
    if grid < MIN_GRID:
        raise UsageError(f"--grid-size must be at least {MIN_GRID}")
    prof = solve_radial(params, grid_size=grid)
    if args.output_format == "csv":
        return _csv(["t", "v", "dv", "a"], zip(prof.grid, prof.values, prof.derivatives, prof.potential))
    return _json(prof.to_dict())


def cmd_spectrum(args):
    params = _params(args, power=True)
    _positive(args, "count", "resolution")
    from .radial import shoot

    spec = compute_spectrum(shoot(params), args.count, args.resolution or DEFAULT_RESOLUTION)
    if args.output_format == "csv":
        return _csv(["i", "nu"], [(i, nu) for i, nu in enumerate(spec.eigenvalues, start=1)])
    if args.eigenfunctions:
        return _json(spec.to_dict())
    return _json({
        "params": params.as_dict(),
        "eigenvalues": list(spec.eigenvalues),
        "admissibility_threshold": spec.admissibility_threshold,
        "negative_count": spec.negative_count,
    })


def _grid(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = [round(lo + k * step, 12) for k in range(n + 1)]
    if hi - pts[-1] > 1e-9:
        pts.append(hi)
    return pts


def cmd_nu1_curve(args):
    params = _params(args)
    _require(args, "p_min", "p_max")
    step = args.p_step if args.p_step is not None else 0.05
    _positive(args, "p_step", "resolution")
    curve = eigenvalue_curve(params, _grid(args.p_min, args.p_max, step),
                             args.resolution or DEFAULT_RESOLUTION, _cache(args), args.jobs or 1)
    m = params.m
    if args.output_format == "json":
        return _json({"params": params.as_dict(), "points": [
            {"p": pt.p, "eigenvalues": None if pt.eigenvalues is None else list(pt.eigenvalues), "error": pt.error}
            for pt in curve]})
    header = ["p"] + [f"nu{i}" for i in range(1, m + 1)] + ["error"]
    rows = []
    for pt in curve:
        eig = list(pt.eigenvalues) if pt.ok else [""] * m
        rows.append([pt.p] + eig + [pt.error or ""])
    return _csv(header, rows)


def cmd_morse(args):
    params = _params(args, power=True)
    from .radial import shoot

    spec = compute_spectrum(shoot(params), resolution=args.resolution or DEFAULT_RESOLUTION)
    report = index_from_spectrum(spec)
    if args.output_format == "csv":
        return _csv(["i", "nu", "J", "ceiling", "contribution"],
                    zip(range(1, params.m + 1), report.nu, report.J, report.ceilings, report.contributions))
    return _json(report.to_dict())


def cmd_morse_asymptotics(args):
    params = _params(args)
    rows = []
    p1 = asymptotic_index_p1(params)
    rows.append(("p->1", p1.lower, p1.upper, "; ".join(p1.flags)))
    try:
        sup = asymptotic_index_sup(params)
        rows.append((sup.formula, sup.lower, sup.upper, "; ".join(sup.flags)))
        for name, v in sup.alternatives.items():
            rows.append((f"{sup.formula} ({name})", v, v, ""))
    except UnsupportedCaseError as exc:
        rows.append(("sup", "", "", str(exc)))
    for name, v in morse_lower_bounds(params).items():
        rows.append((f"p->1 lower bound ({name})", v, v, ""))
    if args.output_format == "json":
        return _json({"params": params.as_dict(), "rows": [
            {"quantity": q, "lower": lo, "upper": hi, "note": note} for q, lo, hi, note in rows]})
    return _csv(["quantity", "lower", "upper", "note"], rows)


def cmd_scan(args):
    params = _params(args)
    _positive(args, "p_step", "resolution")
    window = None
    if args.p_min is not None or args.p_max is not None:
        from .bifurcation import default_window

        lo, hi = default_window(params)
        window = (args.p_min if args.p_min is not None else lo, args.p_max if args.p_max is not None else hi)
    atlas = scan(params, n_min=args.n_min or 1, n_max=args.n_max, p_window=window, p_step=args.p_step,
                 cache=_cache(args), resolution=args.resolution or DEFAULT_RESOLUTION, jobs=args.jobs or 1)
    return _json(atlas.to_dict())


def cmd_predict(args):
    _require(args, "dimension", "alpha", "nodal_zones")
    pred = predicted_ranges(args.dimension, args.alpha, args.nodal_zones)
    if args.output_format == "json":
        return _json(pred.to_dict())
    lo, hi = pred.n_range
    return _csv(["theorem", "n_range", "n_min", "n_max", "count"], [(pred.theorem, f"{lo}..{hi}", lo, hi, pred.count)])


def cmd_reproduce(args):
    verdicts = run_criteria(cache=_cache(args), only=set(args.only) if args.only else None)
    for v in verdicts:
        status = "PASS" if v.passed and v.in_time else "FAIL"
        print(f"criterion {v.key:>2} {status}  {v.seconds:7.2f}s  {v.detail}", file=sys.stderr)
    return render_report(verdicts)


COMMANDS = {
    "bessel": cmd_bessel,
    "beta-table": cmd_beta_table,
    "radial": cmd_radial,
    "spectrum": cmd_spectrum,
    "nu1-curve": cmd_nu1_curve,
    "morse": cmd_morse,
    "morse-asymptotics": cmd_morse_asymptotics,
    "scan": cmd_scan,
    "predict": cmd_predict,
    "reproduce": cmd_reproduce,
}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help / --version exit 0, bad flags exit 2
        return exc.code if isinstance(exc.code, int) else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            merge_config(args, read_config(args.config))
        _positive(args, "jobs")
        text = COMMANDS[args.command](args)
        write_output(text, getattr(args, "out", None))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"henonbif: error: {exc}", file=sys.stderr)
        return 2
    except HenonError as exc:
        print(f"henonbif: {exc.category}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
