"""Command-line interface and the on-disk result cache.

Every command writes JSON (or a graph export) to stdout or ``--out``. Results
of the expensive commands are cached as JSON under ``--cache-dir`` or
``$SIERPOLY_CACHE``, keyed by a hash of the normalized run configuration; a
cached result is byte-identical to a fresh one.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
import warnings
from pathlib import Path
from typing import Callable, Sequence

from . import boundary, limit
from .construction import build_level_graph, export_graph
from .core import SierpolyError, make_spec, parse_sequence, parse_word
from .metric import PointedBall, distance, hierarchical_dist

SCHEMA_VERSION = 1
CACHE_ENV = "SIERPOLY_CACHE"


# ---------------------------------------------------------------- cache


def cache_dir(explicit: str | None) -> Path | None:
    path = explicit or os.environ.get(CACHE_ENV)
    return Path(path) if path else None


def cache_key(config: dict) -> str:
    blob = json.dumps({"schemaVersion": SCHEMA_VERSION, **config}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def cache_load(root: Path | None, config: dict) -> str | None:
    if root is None:
        return None
    path = root / f"{cache_key(config)}.json"
    try:
        return path.read_text()
    except FileNotFoundError:
        return None


def cache_store(root: Path | None, config: dict, text: str) -> None:
    if root is None:
        return
    root.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=root, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, root / f"{cache_key(config)}.json")


def cache_clear(root: Path | None) -> int:
    if root is None or not root.exists():
        return 0
    n = 0
    for p in root.glob("*.json"):
        p.unlink()
        n += 1
    return n


def dump(doc: dict) -> str:
    return json.dumps({"schemaVersion": SCHEMA_VERSION, **doc}, sort_keys=True, indent=2) + "\n"


def cached(args, config: dict, compute: Callable[[], dict]) -> str:
    root = None if args.no_cache else cache_dir(args.cache_dir)
    hit = cache_load(root, config)
    if hit is not None:
        if args.verbose:
            print("cache hit", file=sys.stderr)
        return hit
    text = dump(compute())
    cache_store(root, config, text)
    return text


# ---------------------------------------------------------------- commands


def _ball_json(b: PointedBall, xi) -> dict:
    doc = b.to_json()
    doc["labels"] = [str(v.as_sequence(xi)) for v in b.labels]
    return doc


def cmd_build(args) -> str:
    spec = make_spec(args.r)
    g = build_level_graph(spec, args.k, args.mode)
    return export_graph(g, args.format)


def cmd_dist(args) -> str:
    spec = make_spec(args.r)
    u, v = parse_word(args.u, spec.r), parse_word(args.v, spec.r)
    if len(u) != args.k or len(v) != args.k:
        raise SierpolyError(f"addresses must have length k={args.k}")
    if args.engine == "hier":
        return f"{hierarchical_dist(spec, args.k, u, v)}\n"
    d = distance(build_level_graph(spec, args.k), u, v)
    if args.engine == "both" and hierarchical_dist(spec, args.k, u, v) != d:
        raise SierpolyError("distance engines disagree")
    return f"{d}\n"


def cmd_gh(args) -> str:
    spec = make_spec(args.r)
    xi = parse_sequence(args.xi, spec.r)
    config = {"cmd": "gh", "r": spec.r, "xi": str(xi), "radius": args.radius, "mode": args.mode,
              "window": args.window}

    def compute():
        cert = limit.stabilization_level(spec, xi, args.radius, args.mode, args.window)
        return {"command": "gh", "certificate": cert.to_json()}
    return cached(args, config, compute)


def cmd_ball(args) -> str:
    spec = make_spec(args.r)
    xi = parse_sequence(args.xi, spec.r)
    center = limit.limit_vertex(spec, xi, parse_word(args.center, spec.r)) if args.center else limit.LimitVertex(())
    config = {"cmd": "ball", "r": spec.r, "xi": str(xi), "radius": args.radius, "center": str(center)}

    def compute():
        cert = limit.stabilization_level(spec, xi, args.radius, center=center)
        b = limit.stable_ball(spec, xi, args.radius, center)
        return {"command": "ball", "certificate": cert.to_json(), "ball": _ball_json(b, xi)}
    return cached(args, config, compute)


def cmd_iso(args) -> str:
    spec = make_spec(args.r)
    xi, eta = parse_sequence(args.xi, spec.r), parse_sequence(args.eta, spec.r)
    config = {"cmd": "iso", "r": spec.r, "xi": str(xi), "eta": str(eta), "maxRadius": args.max_radius}

    def compute():
        return {"command": "iso", **limit.iso_check_theorem(spec, xi, eta, args.max_radius).to_json()}
    return cached(args, config, compute)


def cmd_equivariance(args) -> str:
    spec = make_spec(args.r)
    reports = limit.dihedral_equivariance_check(spec, args.k)
    return dump({"command": "equivariance", "r": spec.r, "k": args.k,
                 "elements": [rep.to_json() for rep in reports]})


def parse_range(text: str) -> list[int]:
    """``a..b`` inclusive, or a comma-separated list."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise SierpolyError(f"cannot parse integer range {text!r}") from None


def _write_csv(path: Path, report: dict) -> None:
    path.mkdir(parents=True, exist_ok=True)
    ids = list(report["distinctness"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["profile"] + ids)
    for a in ids:
        w.writerow([a] + [report["distinctness"][a][b] or "" for b in ids])
    (path / "distinctness.csv").write_text(buf.getvalue())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    profiles = report["profiles"]
    points = profiles[ids[0]]["points"]
    w.writerow(["point"] + ids)
    for i, p in enumerate(points):
        w.writerow([p] + [profiles[pid]["values"][i] for pid in ids])
    (path / "profiles.csv").write_text(buf.getvalue())


def _write_svg(path: Path, report: dict) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    matplotlib.rcParams["svg.hashsalt"] = "sierpoly"
    ids = list(report["profiles"])
    values = np.array([report["profiles"][pid]["values"] for pid in ids])
    fig, ax = plt.subplots(figsize=(10, 0.4 * len(ids) + 1.5))
    im = ax.imshow(values, aspect="auto", cmap="viridis", interpolation="nearest")
    ax.set_yticks(range(len(ids)), labels=ids)
    ax.set_xlabel("ball point (canonical order)")
    ax.set_title(f"horofunction profiles, r={report['spec']['r']}, xi={report['xi']}")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    path.mkdir(parents=True, exist_ok=True)
    fig.savefig(path / "profiles.svg", format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_census(args) -> str:
    spec = make_spec(args.r)
    xi = parse_sequence(args.xi, spec.r)
    m_range, shifts = parse_range(args.levels), parse_range(args.shifts)
    config = {"cmd": "census", "r": spec.r, "xi": str(xi), "levels": m_range, "radius": args.radius,
              "weakRadius": args.weak_radius, "shifts": shifts, "NBudget": args.n_budget}

    def compute():
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return {"command": "census", **boundary.boundary_census(
                spec, xi, m_range, args.radius, shifts, args.weak_radius, args.n_budget)}
    text = cached(args, config, compute)
    if args.csv or args.svg:
        report = json.loads(text)
        if args.csv:
            _write_csv(Path(args.csv), report)
        if args.svg:
            _write_svg(Path(args.svg), report)
    return text


def cmd_cache_clear(args) -> str:
    n = cache_clear(cache_dir(args.cache_dir))
    return dump({"command": "cache-clear", "removed": n})


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--cache-dir", help=f"cache directory (default: ${CACHE_ENV})")
    common.add_argument("--no-cache", action="store_true", help="neither read nor write the cache")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sierpoly", description="Sierpinski polygon graphs and their limits.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", parents=[common], help="export a level graph")
    b.add_argument("--r", type=int, required=True)
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--format", choices=["edgelist", "dot", "graphml", "json"], default="edgelist")
    b.add_argument("--mode", choices=["auto", "materialized", "implicit"], default="auto")
    b.set_defaults(func=cmd_build)

    d = sub.add_parser("dist", parents=[common], help="distance between two addresses")
    d.add_argument("--r", type=int, required=True)
    d.add_argument("--k", type=int, required=True)
    d.add_argument("u")
    d.add_argument("v")
    d.add_argument("--engine", choices=["bfs", "hier", "both"], default="both")
    d.set_defaults(func=cmd_dist)

    for name, func, helptext in [("gh", cmd_gh, "stabilization certificate"),
                                 ("ball", cmd_ball, "certified stable ball")]:
        g = sub.add_parser(name, parents=[common], help=helptext)
        g.add_argument("--r", type=int, required=True)
        g.add_argument("--xi", required=True, help="basepoint, e.g. '1(54)*' or '4*'")
        g.add_argument("--radius", type=int, required=True)
        if name == "gh":
            g.add_argument("--mode", choices=["certified", "heuristic"], default="certified")
            g.add_argument("--window", type=int, default=2)
        else:
            g.add_argument("--center", help="finite word preceding the tail of xi")
        g.set_defaults(func=func)

    i = sub.add_parser("iso", parents=[common], help="isomorphism experiment for two basepoints")
    i.add_argument("--r", type=int, required=True)
    i.add_argument("--xi", required=True)
    i.add_argument("--eta", required=True)
    i.add_argument("--max-radius", type=int, default=4)
    i.set_defaults(func=cmd_iso)

    e = sub.add_parser("equivariance", parents=[common], help="letterwise dihedral maps as automorphisms")
    e.add_argument("--r", type=int, required=True)
    e.add_argument("--k", type=int, default=2)
    e.set_defaults(func=cmd_equivariance)

    c = sub.add_parser("census", parents=[common], help="boundary census for an eventually constant basepoint")
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--xi", required=True)
    c.add_argument("--levels", default="2..7", help="frame levels, 'a..b' or a list")
    c.add_argument("--radius", type=int, default=8)
    c.add_argument("--weak-radius", type=int, default=None)
    c.add_argument("--shifts", default="-3..3")
    c.add_argument("--n-budget", type=int, default=None)
    c.add_argument("--csv", help="directory for CSV tables")
    c.add_argument("--svg", help="directory for the profile heatmap")
    c.set_defaults(func=cmd_census)

    x = sub.add_parser("cache-clear", parents=[common], help="delete cached results")
    x.set_defaults(func=cmd_cache_clear)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except SierpolyError as exc:
        print(f"sierpoly: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
