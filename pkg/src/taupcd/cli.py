"""Command-line interface.

Subcommands::

    pcd test      data.csv --tau 1 [--direction segregation] [--format json|csv]
    pcd generate  --pattern segregation --eps 0.433 -n 1000 --seed 7 -o out.csv
    pcd power     campaign.cfg --output-prefix results/seg_n10
    pcd simulate  campaign.cfg --output-prefix results/rho
    pcd pae       --kind association --tau-grid 0.05:1:0.05 -o pae.csv

Exit status: 0 success, 1 usage or data error, 2 rejection (with ``--exit-on-reject``).
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

from . import __version__
from .delaunay import triangulate
from .digraph import build_pcd, relative_density
from .errors import NumericalInstability, PCDError
from .geometry import STANDARD_EQUILATERAL
from .inference import Direction, pitman_efficiency, run_test
from .montecarlo import (
    ExperimentConfig,
    estimate_size_power,
    kde_export,
    simulate_rho_samples,
    summarize_moments,
)
from .patterns import PatternSpec, sample_pattern, seeded_rng

EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 1, 2


class UsageError(Exception):
    pass


# -- input -------------------------------------------------------------------------


def read_points_csv(source, x_label="X", y_label="Y") -> tuple[np.ndarray, np.ndarray]:
    """Split an ``x,y,class`` CSV into (X, Y) coordinate arrays."""
    text = Path(source).read_text(encoding="utf-8") if not isinstance(source, io.IOBase) else source.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise UsageError("input CSV is empty") from None
    try:
        ix, iy, ic = header.index("x"), header.index("y"), header.index("class")
    except ValueError:
        raise UsageError(f"CSV header must contain x,y,class; got {header}") from None
    xs, ys = [], []
    xl, yl = x_label.lower(), y_label.lower()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            p = (float(row[ix]), float(row[iy]))
            label = row[ic].strip().lower()
        except (ValueError, IndexError):
            raise UsageError(f"malformed CSV row {lineno}: {row}") from None
        if not all(map(math.isfinite, p)):
            raise UsageError(f"non-finite coordinate on row {lineno}")
        if label == xl:
            xs.append(p)
        elif label == yl:
            ys.append(p)
        elif not label:
            raise UsageError(f"empty class label on row {lineno}")
    return np.array(xs, dtype=float).reshape(-1, 2), np.array(ys, dtype=float).reshape(-1, 2)


def _read_y_points(path: str, y_label="Y") -> np.ndarray:
    """Y points from an ``x,y,class`` CSV (Y rows) or a headerless/``x,y`` two-column file."""
    text = Path(path).read_text(encoding="utf-8")
    first = text.splitlines()[0].lower() if text.strip() else ""
    if "class" in first:
        return read_points_csv(path, y_label=y_label)[1]
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        return np.array([[float(r[0]), float(r[1])] for r in rows])
    except (ValueError, IndexError):
        raise UsageError(f"could not parse Y points from {path}") from None


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_tau_grid(spec) -> list[float]:
    """``"0.1,0.5,1"``, ``"start:stop:step"`` (inclusive) or a list."""
    if isinstance(spec, (list, tuple)):
        return [float(t) for t in spec]
    spec = str(spec).strip()
    if ":" in spec:
        a, b, s = (float(v) for v in spec.split(":"))
        k = int(math.floor((b - a) / s + 1e-9))
        return [round(a + i * s, 12) for i in range(k + 1)]
    return [float(t) for t in spec.replace(";", ",").split(",") if t.strip()]


CONFIG_KEYS = {
    "n", "replicates", "tau_grid", "pattern", "eps", "alpha", "seed",
    "y_points_file", "direction", "workers",
}


def load_config(path: str) -> dict:
    """Campaign config from JSON or ``key = value`` lines (``#`` comments)."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"bad JSON config: {e}") from None
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config line {lineno} is not key=value: {line!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            raw[k] = v
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    if "n" not in raw:
        raise UsageError("config must set n")
    return raw


def config_from_dict(raw: dict, base_dir: Path | None = None) -> tuple[ExperimentConfig, int | None]:
    try:
        pattern = str(raw.get("pattern", "null"))
        eps = float(raw.get("eps", 0.0))
        spec = PatternSpec(pattern, eps)
        y_file = raw.get("y_points_file")
        y_points = None
        if y_file:
            p = Path(y_file)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            y_points = _read_y_points(str(p))
        cfg = ExperimentConfig(
            n=int(raw["n"]),
            replicates=int(raw.get("replicates", 2000)),
            tau_grid=tuple(parse_tau_grid(raw.get("tau_grid", "1.0"))),
            pattern=spec,
            alpha=float(raw.get("alpha", 0.05)),
            seed=int(raw.get("seed", 0)),
            y_points=y_points,
            direction=raw.get("direction"),
            y_points_file=str(y_file) if y_file else None,
        )
    except (ValueError, TypeError, KeyError) as e:
        raise UsageError(f"invalid config: {e}") from None
    workers = raw.get("workers")
    return cfg, (int(workers) if workers not in (None, "") else None)


# -- output ------------------------------------------------------------------------


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _dict_to_csv(d: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(d)
    w.writerow(keys)
    w.writerow([";".join(map(repr, v)) if isinstance(v, list) else v for v in d.values()])
    return buf.getvalue()


# -- commands -----------------------------------------------------------------------


def cmd_test(args) -> int:
    if args.tau == 0.0:
        raise UsageError("degenerate statistic at tau=0")
    if not 0.0 < args.tau <= 1.0:
        raise UsageError(f"tau must lie in (0, 1], got {args.tau}")
    x, y = read_points_csv(args.input, args.x_label, args.y_label)
    if len(y) < 3:
        raise UsageError(f"need at least 3 {args.y_label}-labelled points, got {len(y)}")
    tri = triangulate(y)
    d = build_pcd(tri, x, args.tau)
    if d.n < 2:
        raise UsageError(f"need at least 2 {args.x_label} points inside the hull, got {d.n}")
    res = run_test(relative_density(d), d.n, args.tau, tri.weights, args.direction, d.excluded_count)
    reject = res.p_value < args.alpha
    report = {
        "rho": res.rho,
        "n": res.n,
        "J": res.J,
        "tau": args.tau,
        "mu": res.mu_used,
        "nu": res.nu_used,
        "R": res.R,
        "p_value": res.p_value,
        "direction": res.direction.value,
        "excluded_count": res.excluded_count,
        "weights": [float(w) for w in tri.weights],
        "arcs": d.arc_count,
        "alpha": args.alpha,
        "reject": reject,
        "input": str(args.input),
        "version": __version__,
    }
    if args.format == "json":
        _emit(json.dumps(report, indent=2) + "\n", args.output)
    else:
        _emit(_dict_to_csv(report), args.output)
    return EXIT_REJECT if (reject and args.exit_on_reject) else EXIT_OK


def cmd_generate(args) -> int:
    spec = PatternSpec(args.pattern, args.eps)
    if args.y_points:
        y = _read_y_points(args.y_points, args.y_label)
        geom = triangulate(y)
    else:
        y = STANDARD_EQUILATERAL.vertices
        geom = STANDARD_EQUILATERAL
    if args.n < 1:
        raise UsageError("n must be at least 1")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        x = sample_pattern(seeded_rng(args.seed, 0), geom, spec, args.n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "class"])
    for p in y:
        w.writerow([repr(float(p[0])), repr(float(p[1])), args.y_label])
    for p in x:
        w.writerow([repr(float(p[0])), repr(float(p[1])), args.x_label])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _campaign(args):
    raw = load_config(args.config)
    cfg, workers = config_from_dict(raw, Path(args.config).resolve().parent)
    if args.workers is not None:
        workers = args.workers
    return cfg, workers


def cmd_power(args) -> int:
    cfg, workers = _campaign(args)
    rep = estimate_size_power(cfg, workers)
    meta = {"version": __version__, "seed": cfg.seed, "runtime_s": rep.runtime_s}
    data = rep.to_dict()
    data.update(meta)
    prefix = args.output_prefix
    if prefix:
        _emit(rep.to_csv(), prefix + ".csv")
        _emit(json.dumps(data, indent=2) + "\n", prefix + ".json")
    else:
        _emit(rep.to_csv(), None)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg, workers = _campaign(args)
    rho = simulate_rho_samples(cfg, workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["replicate"] + [f"rho_tau={t:g}" for t in cfg.tau_grid])
    for r, row in enumerate(rho):
        w.writerow([r] + [repr(float(v)) for v in row])
    summary = []
    for k, t in enumerate(cfg.tau_grid):
        mean, var, skew = summarize_moments(rho[:, k])
        entry = {"tau": t, "mean": mean, "variance": var, "n_times_variance": cfg.n * var, "skewness": skew}
        if args.kde:
            entry["kde"] = kde_export(rho[:, k])
        summary.append(entry)
    out = {"config": cfg.describe(), "version": __version__, "seed": cfg.seed, "summary": summary}
    if args.output_prefix:
        _emit(buf.getvalue(), args.output_prefix + ".csv")
        _emit(json.dumps(out, indent=2) + "\n", args.output_prefix + ".json")
    else:
        _emit(json.dumps(out, indent=2) + "\n", None)
    return EXIT_OK


def cmd_pae(args) -> int:
    grid = parse_tau_grid(args.tau_grid)
    for t in grid:
        if not 0.0 < t <= 1.0:
            raise UsageError(f"tau grid values must lie in (0, 1], got {t}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "pae", "status"])
    for t in grid:
        try:
            w.writerow([repr(t), repr(pitman_efficiency(t, args.kind)), "ok"])
        except NumericalInstability:
            w.writerow([repr(t), "", "unstable"])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcd", description="Proximity catch digraph tests of spatial randomness")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def labels(sp):
        sp.add_argument("--x-label", default="X", help="class label of the tested points")
        sp.add_argument("--y-label", default="Y", help="class label of the reference points")

    t = sub.add_parser("test", help="run the relative-density test on an x,y,class CSV")
    t.add_argument("input")
    t.add_argument("--tau", type=float, default=1.0)
    t.add_argument("--direction", type=Direction.parse, default=Direction.SEGREGATION)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--format", choices=("json", "csv"), default="json")
    t.add_argument("-o", "--output")
    t.add_argument("--exit-on-reject", action="store_true")
    labels(t)
    t.set_defaults(func=cmd_test)

    g = sub.add_parser("generate", help="write Y points and a simulated X pattern as CSV")
    g.add_argument("--pattern", default="null", choices=("null", "segregation", "association"))
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("-n", type=int, required=True)
    g.add_argument("--y-points", help="CSV of Y points; default is the standard equilateral triangle")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    labels(g)
    g.set_defaults(func=cmd_generate)

    for name, func, helptext in (
        ("power", cmd_power, "empirical size and power over a tau grid"),
        ("simulate", cmd_simulate, "replicated relative densities with moment summaries"),
    ):
        c = sub.add_parser(name, help=helptext)
        c.add_argument("config")
        c.add_argument("--output-prefix")
        c.add_argument("--workers", type=int, help="overrides PCD_THREADS")
        if name == "simulate":
            c.add_argument("--kde", action="store_true", help="include Gaussian KDE on a 512-point grid")
        c.set_defaults(func=func)

    a = sub.add_parser("pae", help="Pitman asymptotic efficiency curve")
    a.add_argument("--kind", default="segregation", choices=("segregation", "association"))
    a.add_argument("--tau-grid", default="0.1:1:0.1")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_pae)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (UsageError, PCDError, OSError) as e:
        print(f"pcd {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
