"""Command line: ``nullgeo report | verify | sweep``.

Exit codes: 0 success, 2 bad configuration, 3 chart degeneracy, 4 a
verification suite failed.

A configuration file (``--config``) is a JSON object naming a catalog family
and its parameters, for example ``{"family": "hyperplane", "dir": [1, 1, 0, 0]}``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import catalog
from .catalog import CatalogEntry, ConfigError
from .classify import (DEFAULT_VERDICT_TOL, classify_point, normal_pair, quasi_screen_conformal_proxy,
                       sphere_containment)
from .forms import PointGeometry
from .nullframe import DEFAULT_FRAME_TOL, ChartError, DomainError, Grid, validate_chart
from .suites import SUITES, run_suites

SCHEMA = "nullgeo/1"
EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_SUITE = 0, 2, 3, 4


class UsageError(Exception):
    pass


# -- output --------------------------------------------------------------------------------

def _plain(x):
    """Convert numpy scalars/arrays to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0:
        x = 0.0     # drop the sign of negative zero
    return format(x, ".17g")


def dumps(doc, indent: int = 1) -> str:
    """JSON with every float written to 17 significant digits."""
    def enc(x, level):
        pad = "\n" + " " * (indent * (level + 1))
        end = "\n" + " " * (indent * level)
        if isinstance(x, dict):
            if not x:
                return "{}"
            items = [f"{json.dumps(k)}: {enc(v, level + 1)}" for k, v in x.items()]
            return "{" + pad + ("," + pad).join(items) + end + "}"
        if isinstance(x, list):
            if not x:
                return "[]"
            if all(isinstance(v, (int, float)) and not isinstance(v, bool) or v is None for v in x):
                return "[" + ", ".join(enc(v, level) for v in x) + "]"
            return "[" + pad + ("," + pad).join(enc(v, level + 1) for v in x) + end + "]"
        if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
            return json.dumps(x)
        if isinstance(x, float):
            return _fmt_float(x)
        raise TypeError(f"cannot serialise {type(x).__name__}")
    return enc(_plain(doc), 0) + "\n"


def _csv_cell(v):
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, list):
        return ";".join(str(_csv_cell(x)) for x in v)
    if v is None:
        return ""
    return str(v)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_cell(_plain(r.get(c))) for c in cols])
    return buf.getvalue()


def to_text(doc: dict) -> str:
    lines = [f"{doc['command']} {doc['config']['surface']['name']}"]
    for s in doc.get("suites", []):
        state = "n/a " if not s["applicable"] else ("PASS" if s["passed"] else "FAIL")
        lines.append(f"  {state} {s['name']:<18} worst={s['worst']:.3e} tol={s['tol']:.1e}")
    if doc.get("verdicts"):
        lines.append("  verdicts: " + ", ".join(f"{k}={v}" for k, v in doc["verdicts"].items()))
    for r in doc.get("per_leaf", []) + doc.get("rows", []):
        cells = [f"{k}={_csv_cell(v) if v is not None else '-'}" for k, v in r.items()
                 if not isinstance(v, (list, dict))]
        lines.append("  leaf " + " ".join(cells))
    if "validity" in doc:
        v = doc["validity"]
        lines.append(f"  chart valid: {not v['failures']} ({v['npoints']} points)")
    return "\n".join(lines) + "\n"


# -- configuration -----------------------------------------------------------------------------

def _parse_grid(spec: str | None, dim: int) -> tuple[int, ...]:
    if spec is None:
        return (5,) * dim
    try:
        counts = tuple(int(c) for c in spec.lower().split("x"))
    except ValueError:
        raise UsageError(f"bad grid {spec!r}; expected e.g. 5x5x5")
    if len(counts) != dim:
        raise UsageError(f"grid {spec!r} needs {dim} counts for this surface")
    if any(c < 1 for c in counts):
        raise UsageError("grid counts must be positive")
    return counts


def _parse_ranges(specs, chart) -> list[tuple[float, float]]:
    ranges = [tuple(d) for d in chart.domain]
    for spec in specs or []:
        try:
            name, rng = spec.split("=", 1)
            lo, hi = (float(v) for v in rng.split(":"))
        except ValueError:
            raise UsageError(f"bad range {spec!r}; expected coord=lo:hi")
        if name in chart.coord_names:
            i = chart.coord_names.index(name)
        elif name.isdigit() and int(name) < chart.dim:
            i = int(name)
        else:
            raise UsageError(f"unknown coordinate {name!r}; known: {list(chart.coord_names)}")
        ranges[i] = (lo, hi)
    return ranges


def surface_record(args) -> dict:
    if args.config:
        try:
            with open(args.config) as fh:
                rec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read configuration file: {exc}")
        if not isinstance(rec, dict):
            raise UsageError("configuration file must hold a JSON object")
        return {"source": "config", **rec}
    rec = {"source": "catalog", "family": args.surface}
    if args.n is not None:
        rec["n"] = args.n
    return rec


def build_entry(rec: dict) -> CatalogEntry:
    """Catalog entries keep their closed forms; configuration files do not."""
    rec = dict(rec)
    source = rec.pop("source", "config")
    if source == "catalog":
        makers = {"cone": catalog.make_null_cone, "hyperplane": catalog.make_null_hyperplane,
                  "twisted": catalog.make_twisted}
        fam = rec.pop("family")
        if fam not in makers:
            raise ConfigError(f"unknown surface {fam!r}; known: {sorted(makers)}")
        return makers[fam](**rec)
    return catalog.load_custom(rec)


# -- per-point and per-leaf records --------------------------------------------------------------

def _point_record(entry: CatalogEntry, idx, p, tol_verdict: float) -> dict:
    geom = PointGeometry(entry.chart, p)
    t = geom.tables
    rec = {"index": list(idx), "p": np.asarray(p).tolist(),
           "tau": t.tau.tolist(),
           "B_screen": t.screen_block("B").tolist(),
           "C_screen": t.screen_block("C").T.tolist(),
           "Astar_screen": t.screen_block("Astar").tolist(),
           "AN_screen": t.screen_block("AN").tolist()}
    rec.update(classify_point(geom, tol_verdict))
    return rec


_WORKER_ENTRY: dict = {}


def _worker_point(args):
    rec, idx, p, tol = args
    key = json.dumps(rec, sort_keys=True)
    if key not in _WORKER_ENTRY:
        _WORKER_ENTRY[key] = build_entry(rec)
    return _point_record(_WORKER_ENTRY[key], idx, p, tol)


def per_point_records(entry, rec, grid, tol_verdict, jobs: int) -> list[dict]:
    items = list(grid.indexed_points())
    if jobs <= 1:
        return [_point_record(entry, idx, p, tol_verdict) for idx, p in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        # map preserves grid order whatever the completion order
        return list(ex.map(_worker_point, [(rec, idx, p, tol_verdict) for idx, p in items],
                           chunksize=max(1, len(items) // (4 * jobs))))


def _mean(vals):
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


def leaf_summary(entry: CatalogEntry, grid: Grid, t0: float, tol: float) -> dict:
    """Leaf aggregate: form factors, the A_V eigenvalue and pseudo-sphere containment."""
    chart = entry.chart
    leaf = grid.leaf(t0)
    geoms = [PointGeometry(chart, p) for p in leaf.points()]
    recs = [classify_point(g, tol) for g in geoms]
    name = chart.coord_names[0]
    row = {name: float(t0),
           "rho": _mean(r["rho"] for r in recs),
           "varrho": _mean(r["varrho"] for r in recs),
           "psi": _mean(r["psi"] for r in recs)}
    if "V1" in entry.normal_fields and "lambda" in entry.expected:
        V = entry.normal_fields["V1"]
        lam = float(entry.expected["lambda"](np.r_[t0, np.zeros(chart.dim - 1)]))
    else:
        # first normal direction with 2ab = 1; usable only if A_V is a constant multiple of I
        pairs = [normal_pair(g.tables) for g in geoms]
        a, b = pairs[0]
        lams = [float(np.trace(g.tables.A_V(*pairs[0])[1:, 1:])) / chart.n for g in geoms]
        same = all(np.allclose(pq, pairs[0], atol=tol) for pq in pairs)
        V, lam = (a, b), (float(np.mean(lams)) if same else 0.0)
    proxy = quasi_screen_conformal_proxy([g.tables for g in geoms], tol)
    row["lambda"] = lam if lam != 0 else None
    if lam != 0:
        c = sphere_containment(chart, t0, V, lam, grid, tol)
        row.update(kind=c.kind, epsilon=c.epsilon, r2=c.r2,
                   center=None if c.center is None else c.center.tolist(),
                   center_deviation=c.center_deviation if c.preconditions else None,
                   containment_residual=c.worst_residual, preconditions=c.preconditions,
                   notes=list(c.messages))
    else:
        row.update(kind=None, epsilon=None, r2=None, center=None, center_deviation=None,
                   containment_residual=None, preconditions=False,
                   notes=["no normal with A_V = lambda I, lambda != 0"])
    row["quasi_screen_conformal_proxy"] = proxy.verdict
    return row


# -- commands --------------------------------------------------------------------------------

def _prepare(args):
    rec = surface_record(args)
    entry = build_entry(rec)
    chart = entry.chart
    counts = _parse_grid(args.grid, chart.dim)
    ranges = _parse_ranges(args.range, chart)
    if not (args.tol_frame > 0 and args.tol_verdict > 0):
        raise UsageError("tolerances must be positive")
    grid = Grid.over(chart, counts, ranges)
    config = {"surface": {"name": entry.name, **{k: v for k, v in rec.items()}},
              "grid": {"counts": list(counts), "ranges": [list(r) for r in grid.ranges]},
              "tolerances": {"frame": args.tol_frame, "verdict": args.tol_verdict}}
    return rec, entry, grid, config


def cmd_report(args) -> tuple[int, dict]:
    rec, entry, grid, config = _prepare(args)
    validity = validate_chart(entry.chart, grid, args.tol_frame)
    doc = {"schema": SCHEMA, "command": "report", "config": config,
           "validity": {"npoints": validity.npoints, "worst": validity.worst,
                        "failures": validity.failures}}
    if validity.failures:
        return EXIT_DEGENERATE, doc
    per_point = per_point_records(entry, rec, grid, args.tol_verdict, args.jobs)
    keys = ("umbilic", "screen_umbilic", "screen_conformal", "minimal", "totally_geodesic",
            "leaf_minimal")
    doc["verdicts"] = {k: all(bool(r[k]) for r in per_point) for k in keys}
    doc["per_point"] = per_point
    doc["per_leaf"] = [leaf_summary(entry, grid, t0, args.tol_verdict) for t0 in grid.axis(0)]
    return EXIT_OK, doc


def cmd_verify(args) -> tuple[int, dict]:
    names = []
    for s in args.suite or ["all"]:
        names += [x for x in s.split(",") if x]
    bad = [x for x in names if x != "all" and x not in SUITES]
    if bad:
        raise UsageError(f"unknown suite(s) {bad}; known: all, {', '.join(SUITES)}")
    rec, entry, grid, config = _prepare(args)
    results = run_suites(entry, grid, names)
    doc = {"schema": SCHEMA, "command": "verify", "config": config,
           "suites": [r.as_dict() for r in results]}
    ok = all(r.passed for r in results if r.applicable)
    return (EXIT_OK if ok else EXIT_SUITE), doc


def _parse_values(spec: str) -> list[float]:
    try:
        if spec.count(":") == 2:
            lo, hi, k = spec.split(":")
            return np.linspace(float(lo), float(hi), int(k)).tolist()
        return [float(v) for v in spec.split(",") if v]
    except ValueError:
        raise UsageError(f"bad sweep values {spec!r}; use v1,v2,... or lo:hi:count")


def cmd_sweep(args) -> tuple[int, dict]:
    rec, entry, grid, config = _prepare(args)
    values = _parse_values(args.values) if args.values else list(entry.leaves)
    if not values:
        raise UsageError("nothing to sweep: give --values")
    lo, hi = entry.chart.domain[0]
    for v in values:
        if not lo - 1e-12 <= v <= hi + 1e-12:
            raise UsageError(f"sweep value {v} leaves the domain [{lo}, {hi}]")
    config["sweep"] = {"parameter": entry.chart.coord_names[0], "values": values}
    rows = []
    for v in values:
        leaf = grid.leaf(v)
        validity = validate_chart(entry.chart, leaf, args.tol_frame)
        if validity.failures:
            return EXIT_DEGENERATE, {"schema": SCHEMA, "command": "sweep", "config": config,
                                     "validity": {"npoints": validity.npoints,
                                                  "worst": validity.worst,
                                                  "failures": validity.failures}}
        rows.append(leaf_summary(entry, grid, v, args.tol_verdict))
    return EXIT_OK, {"schema": SCHEMA, "command": "sweep", "config": config, "rows": rows}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nullgeo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", default="cone", help="cone, hyperplane or twisted")
    common.add_argument("--n", type=int, default=None, help="screen dimension (ambient is n+2)")
    common.add_argument("--config", help="JSON configuration record (overrides --surface)")
    common.add_argument("--grid", help="sample counts per coordinate, e.g. 5x5x5")
    common.add_argument("--range", action="append", metavar="COORD=LO:HI",
                        help="restrict one coordinate (repeatable)")
    common.add_argument("--tol-frame", type=float, default=DEFAULT_FRAME_TOL)
    common.add_argument("--tol-verdict", type=float, default=DEFAULT_VERDICT_TOL)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", help="write here instead of stdout")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    sub.add_parser("report", parents=[common], help="forms and classification per grid point")
    v = sub.add_parser("verify", parents=[common], help="run identity suites")
    v.add_argument("--suite", action="append",
                   help=f"suite name or comma list; 'all' or any of {', '.join(SUITES)}")
    s = sub.add_parser("sweep", parents=[common], help="leaf summaries over the first coordinate")
    s.add_argument("--values", help="v1,v2,... or lo:hi:count (default: catalog leaves)")
    return p


def _render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return dumps(doc)
    if fmt == "csv":
        if "per_point" in doc:
            return to_csv(doc["per_point"])
        if "rows" in doc:
            return to_csv(doc["rows"])
        return to_csv(doc.get("suites", []))
    return to_text(doc)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    commands = {"report": cmd_report, "verify": cmd_verify, "sweep": cmd_sweep}
    try:
        code, doc = commands[args.command](args)
    except (UsageError, ConfigError, DomainError, KeyError, TypeError) as exc:
        print(f"nullgeo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChartError as exc:
        print(f"nullgeo: chart degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    text = _render(doc, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
