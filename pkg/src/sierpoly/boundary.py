"""Horofunction experiments on ``Gamma_xi`` for eventually constant ``xi``.

Everything here is exact integer arithmetic. Distances between limit vertices
are read off a finite level ``Gamma_K`` deep enough to contain all arguments;
that level embeds isometrically in the limit graph, so nothing is approximate.
Bulk distances use BFS on a materialized ``Gamma_K``, single distances use the
hierarchical oracle.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np

from .construction import LevelGraph, build_level_graph, neighbors
from .core import Address, BasepointSeq, PolygonSpec, SierpolyError, canonical, cofinal, format_word
from .metric import PointedBall, geodesics_between, oracle_for, pair_distances
from .limit import LimitVertex, at_level, from_level, limit_vertex, stable_ball

AMBIENT_BUDGET = 4 * 10**6
XI = LimitVertex(())


class NotStabilized(SierpolyError):
    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        super().__init__(f"profile of probe {kind!r} is not constant over the final window; extend the level range"
                         + (f" ({detail})" if detail else ""))


class OddSpan(SierpolyError):
    """The A-B boundary geodesic has odd length, so it has no midpoint vertex."""


def _require_constant_tail(xi: BasepointSeq):
    if not xi.is_eventually_constant:
        raise SierpolyError(f"basepoint {xi} is not eventually constant")


# ---------------------------------------------------------------- ambient level


@lru_cache(maxsize=2)
def _level_graph(spec: PolygonSpec, k: int) -> LevelGraph:
    return build_level_graph(spec, k, "materialized", AMBIENT_BUDGET)


class Ambient:
    """``Gamma_{xi[k]}`` as a materialized graph with limit-vertex lookups."""

    def __init__(self, spec: PolygonSpec, xi: BasepointSeq, k: int):
        self.spec, self.xi, self.k = spec, xi, max(k, 1)
        self.graph = _level_graph(spec, self.k)

    @classmethod
    def covering(cls, spec: PolygonSpec, xi: BasepointSeq, vertices: Iterable[LimitVertex], k: int = 1):
        return cls(spec, xi, max([k] + [v.depth for v in vertices]))

    def index(self, v: LimitVertex) -> int:
        return self.graph.index(at_level(self.spec, self.xi, v, self.k))

    def indices(self, vs: Iterable[LimitVertex]) -> np.ndarray:
        return np.array([self.index(v) for v in vs], dtype=np.int64)

    def vertex(self, i: int) -> LimitVertex:
        return from_level(self.spec, self.xi, self.graph.address(int(i)))

    def distances(self, us: Sequence[LimitVertex], vs: Sequence[LimitVertex]) -> np.ndarray:
        return pair_distances(self.graph, self.indices(us), self.indices(vs))


def _level_distance(spec: PolygonSpec, xi: BasepointSeq, u: LimitVertex, v: LimitVertex) -> int:
    k = max(u.depth, v.depth, 1)
    return oracle_for(spec).dist(at_level(spec, xi, u, k), at_level(spec, xi, v, k))


def canonical_geodesic(spec: PolygonSpec, k: int, u: Address, v: Address) -> tuple[Address, ...]:
    """Lexicographically least geodesic from ``u`` to ``v`` in ``Gamma_k``, by oracle descent."""
    oracle = oracle_for(spec)
    cur, goal = canonical(spec, tuple(u)), canonical(spec, tuple(v))
    d = oracle.dist(cur, goal)
    path = [cur]
    while d > 0:
        cur = next(w for w in neighbors(spec, k, cur) if oracle.dist(w, goal) == d - 1)
        path.append(cur)
        d -= 1
    return tuple(path)


# ---------------------------------------------------------------- frames


@dataclass(frozen=True)
class HoleFrame:
    level: int
    copy_index: int
    b_up: Address
    b_down: Address
    antipodal_copies: tuple[int, ...]
    a_vertex: Address
    b_vertex: Address
    boundary: tuple[Address, ...]
    """Canonical geodesic from A to B kept inside the antipodal copies (``Gamma_m`` addresses)."""

    @property
    def span(self) -> int:
        return len(self.boundary) - 1

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "copyIndex": self.copy_index,
            "bUp": format_word(self.b_up),
            "bDown": format_word(self.b_down),
            "antipodalCopies": list(self.antipodal_copies),
            "A": format_word(self.a_vertex),
            "B": format_word(self.b_vertex),
            "span": self.span,
        }


def _corner(spec: PolygonSpec, i: int, offset: int, m: int) -> Address:
    return (((i + offset) % spec.r),) * (m - 1)


def _within_copy(spec: PolygonSpec, i: int, m: int) -> tuple[Address, ...]:
    """Canonical geodesic of copy ``i`` from its up corner to its down corner, as ``Gamma_m`` vertices."""
    f = spec.f
    u, v = _corner(spec, i, f, m), _corner(spec, i, 2 * f, m)
    if m == 1:
        return ((i,),)
    return tuple(canonical(spec, x + (i,)) for x in canonical_geodesic(spec, m - 1, u, v))


def frame(spec: PolygonSpec, xi: BasepointSeq, m: int) -> HoleFrame:
    if m < 2:
        raise SierpolyError("frames start at level 2")
    r, f = spec.r, spec.f
    c = xi.letter(m)
    up = canonical(spec, _corner(spec, c, f, m) + (c,))
    down = canonical(spec, _corner(spec, c, 2 * f, m) + (c,))
    if r % 2 == 0:
        a = (c + r // 2) % r
        copies = (a,)
        boundary = _within_copy(spec, a, m)
    else:
        a1, a2 = (c + r // 2) % r, (c + r // 2 + 1) % r
        copies = (a1, a2)
        # A sits on the far side of a2, B on the far side of a1; the path crosses their shared corner
        first, second = _within_copy(spec, a2, m), _within_copy(spec, a1, m)
        if first[-1] != second[0]:
            raise RuntimeError("antipodal copies do not share a gluing vertex")
        boundary = first + second[1:]
    return HoleFrame(m, c, up, down, copies, boundary[0], boundary[-1], boundary)


def antipodal_point(spec: PolygonSpec, xi: BasepointSeq, m: int) -> LimitVertex:
    fr = frame(spec, xi, m)
    if fr.span % 2:
        raise OddSpan(f"d(A, B) = {fr.span} is odd at level {m} for r={spec.r}; no antipodal midpoint")
    p = fr.boundary[fr.span // 2]
    oracle = oracle_for(spec)
    if oracle.dist(fr.b_up, p) != oracle.dist(fr.b_down, p):
        raise RuntimeError(f"antipodal point {format_word(p)} is not equidistant from the gluing vertices")
    return limit_vertex(spec, xi, p)


# ---------------------------------------------------------------- probes


@dataclass(frozen=True)
class RayProbe:
    xi: BasepointSeq
    samples: tuple[tuple[int, LimitVertex], ...]
    kind: str
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ts = self.times
        if not ts or ts[0] != 0 or self.samples[0][1] != XI:
            raise SierpolyError("a probe starts at (0, xi)")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise SierpolyError("probe times must increase strictly")

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.samples)

    @property
    def vertices(self) -> tuple[LimitVertex, ...]:
        return tuple(v for _, v in self.samples)

    @property
    def level(self) -> int:
        return max(1, max(v.depth for v in self.vertices))

    def __len__(self):
        return len(self.samples)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "xi": str(self.xi),
            "samples": [[t, str(v.as_sequence(self.xi))] for t, v in self.samples],
            "meta": self.meta,
        }


def verify_probe(spec: PolygonSpec, probe: RayProbe) -> None:
    """Check ``d(xi, v) = t`` for every sample with the hierarchical oracle."""
    for t, v in probe.samples:
        if _level_distance(spec, probe.xi, XI, v) != t:
            raise RuntimeError(f"sample {v} of probe {probe.kind} is not at distance {t}")


def probe_from_points(spec: PolygonSpec, xi: BasepointSeq, points: Sequence[LimitVertex], kind: str,
                      **meta) -> RayProbe:
    samples = [(0, XI)] + [(_level_distance(spec, xi, XI, p), p) for p in points]
    return RayProbe(xi, tuple(samples), kind, dict(meta))


def antipodal_sequence(spec: PolygonSpec, xi: BasepointSeq, m_range: Iterable[int]) -> RayProbe:
    _require_constant_tail(xi)
    ms = list(m_range)
    return probe_from_points(spec, xi, [antipodal_point(spec, xi, m) for m in ms], "antipodal", levels=ms)


def shifted_sequence(spec: PolygonSpec, xi: BasepointSeq, t: int, m_range: Iterable[int]) -> RayProbe:
    _require_constant_tail(xi)
    points, kept, dropped = [], [], []
    for m in m_range:
        fr = frame(spec, xi, m)
        if fr.span % 2:
            raise OddSpan(f"d(A, B) = {fr.span} is odd at level {m} for r={spec.r}; no midpoint to shift from")
        mid = fr.span // 2
        if not 0 < mid + t < fr.span:
            dropped.append(m)
            continue
        points.append(limit_vertex(spec, xi, fr.boundary[mid + t]))
        kept.append(m)
    if dropped:
        warnings.warn(f"shift {t} out of range at levels {dropped}; dropped", stacklevel=2)
    return probe_from_points(spec, xi, points, f"shifted({t})", shift=t, levels=kept, dropped=dropped)


def _gluing_vertex(spec: PolygonSpec, xi: BasepointSeq, m: int, direction: str) -> LimitVertex:
    fr = frame(spec, xi, m)
    return limit_vertex(spec, xi, fr.b_up if direction == "up" else fr.b_down)


def gluing_ray(spec: PolygonSpec, xi: BasepointSeq, direction: Literal["up", "down"], depth: int) -> RayProbe:
    """Geodesic ray from ``xi`` through the gluing vertices of one side, sampled at every integer time.

    The ray follows canonical geodesics between consecutive gluing vertices. It
    joins them from the least level after which the waypoints are additive, so
    a basepoint with a non-constant prefix still gets a geodesic.
    """
    _require_constant_tail(xi)
    if direction not in ("up", "down"):
        raise SierpolyError(f"direction must be 'up' or 'down', got {direction!r}")
    if depth < 2:
        raise SierpolyError("gluing rays need depth >= 2")
    ways = [_gluing_vertex(spec, xi, m, direction) for m in range(2, depth + 1)]
    amb = Ambient.covering(spec, xi, ways, depth)
    d0 = amb.distances([XI], ways)[0]
    step = [int(amb.distances([a], [b])[0, 0]) for a, b in zip(ways, ways[1:])]
    start = len(ways) - 1
    while start > 0 and d0[start] == d0[start - 1] + step[start - 1]:
        start -= 1
    g = amb.graph
    route = [XI] + ways[start:]
    path: list[Address] = [g.canonical(at_level(spec, xi, XI, amb.k))]
    for a, b in zip(route, route[1:]):
        seg = geodesics_between(g, at_level(spec, xi, a, amb.k), at_level(spec, xi, b, amb.k))[0]
        path.extend(seg.vertices[1:])
    points = [from_level(spec, xi, p) for p in path]
    probe = RayProbe(xi, tuple(enumerate(points)), f"gluing-{direction}",
                     {"direction": direction, "depth": depth, "joinLevel": start + 2})
    report = test_geodesic(spec, probe)
    if not report.passed:
        raise RuntimeError(f"gluing ray {direction} is not geodesic (max defect {report.max_defect})")
    return probe


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class HoroProfile:
    ball: PointedBall
    values: tuple[int, ...]
    stabilized_at: int
    kind: str

    @property
    def labels(self) -> tuple[LimitVertex, ...]:
        return self.ball.labels

    def value(self, y: LimitVertex) -> int:
        return self.values[self.labels.index(y)]

    def as_dict(self) -> dict[LimitVertex, int]:
        return dict(zip(self.labels, self.values))

    def to_json(self, xi: BasepointSeq) -> dict:
        return {
            "kind": self.kind,
            "radius": self.ball.radius,
            "stabilizedAt": self.stabilized_at,
            "points": [str(v.as_sequence(xi)) for v in self.labels],
            "values": list(self.values),
        }


def _profile_matrix(spec: PolygonSpec, probe: RayProbe, points: Sequence[LimitVertex]) -> np.ndarray:
    """``h[y, i] = d(y, v_i) - t_i``."""
    amb = Ambient.covering(spec, probe.xi, list(points) + list(probe.vertices))
    d = amb.distances(points, probe.vertices)
    return d - np.asarray(probe.times, dtype=np.int64)[None, :]


def _tail_start(h: np.ndarray) -> np.ndarray:
    """Per row, the first column from which the row is constant."""
    n = h.shape[1]
    same = h == h[:, -1:]
    # index after the last column differing from the final value
    differ = ~same
    last = np.where(differ.any(axis=1), n - 1 - np.argmax(differ[:, ::-1], axis=1), -1)
    return last + 1


def horoprofile(spec: PolygonSpec, xi: BasepointSeq, probe: RayProbe, radius: int, window: int = 2,
                ball: PointedBall | None = None) -> HoroProfile:
    """The horofunction of ``probe`` restricted to ``B(xi, radius)``.

    The restriction must be constant over the last ``window`` samples;
    ``stabilized_at`` is the first sample index of its constant tail.
    """
    if probe.xi != xi:
        raise SierpolyError("probe and profile use different basepoints")
    ball = ball or stable_ball(spec, xi, radius)
    h = _profile_matrix(spec, probe, ball.labels)
    if len(probe) < window or not (h[:, -window:] == h[:, -1:]).all():
        raise NotStabilized(probe.kind)
    start = int(_tail_start(h).max())
    return HoroProfile(ball, tuple(int(x) for x in h[:, -1]), start, probe.kind)


def profile_at(spec: PolygonSpec, probe: RayProbe, points: Sequence[LimitVertex], window: int = 2) -> tuple[int, ...]:
    """Stabilized values ``d(y, v) - t`` of the probe at arbitrary points of its limit graph."""
    h = _profile_matrix(spec, probe, points)
    if len(probe) < window or not (h[:, -window:] == h[:, -1:]).all():
        raise NotStabilized(probe.kind)
    return tuple(int(x) for x in h[:, -1])


def profiles_distinct(p1: HoroProfile, p2: HoroProfile) -> LimitVertex | None:
    """Least ball point where the two profiles differ, or None."""
    if p1.ball.points != p2.ball.points:
        raise SierpolyError("profiles live on different balls")
    for y, a, b in zip(p1.labels, p1.values, p2.values):
        if a != b:
            return y
    return None


# ---------------------------------------------------------------- defect tests


@dataclass
class DefectReport:
    condition: str
    passed: bool
    max_defect: int
    triples: list[tuple[int, int, LimitVertex | None, int]]
    pairs_checked: int
    witness_n: dict[LimitVertex, int | None] | None = None

    def to_json(self, xi: BasepointSeq) -> dict:
        name = lambda v: None if v is None else str(v.as_sequence(xi))  # noqa: E731
        doc = {
            "condition": self.condition,
            "passed": self.passed,
            "maxDefect": self.max_defect,
            "pairsChecked": self.pairs_checked,
            "triples": [[s, t, name(y), d] for s, t, y, d in self.triples],
        }
        if self.witness_n is not None:
            doc["witnessN"] = {name(y): n for y, n in self.witness_n.items()}
        return doc


@lru_cache(maxsize=16)
def _pairwise(spec: PolygonSpec, xi: BasepointSeq, vertices: tuple[LimitVertex, ...]) -> np.ndarray:
    amb = Ambient.covering(spec, xi, vertices)
    d = amb.distances(vertices, vertices)
    d.setflags(write=False)
    return d


def _sample_distances(spec: PolygonSpec, probe: RayProbe) -> np.ndarray:
    return _pairwise(spec, probe.xi, probe.vertices)


def test_geodesic(spec: PolygonSpec, probe: RayProbe, keep: int = 100) -> DefectReport:
    """Defects ``|d(g(t), g(s)) - |t - s||`` over all sampled pairs."""
    t = np.asarray(probe.times, dtype=np.int64)
    defect = np.abs(_sample_distances(spec, probe) - np.abs(t[:, None] - t[None, :]))
    iu = np.triu_indices(len(t), 1)
    bad = [(int(t[i]), int(t[j]), None, int(defect[i, j])) for i, j in zip(*iu) if defect[i, j]]
    return DefectReport("geodesic", not bad, int(defect.max()), bad[:keep], len(iu[0]))


def test_almost_geodesic(spec: PolygonSpec, probe: RayProbe, n: int = 0, keep: int = 100) -> DefectReport:
    """Defects ``|d(g(t), g(s)) + s - t|`` over sampled ``t >= s >= n``."""
    t = np.asarray(probe.times, dtype=np.int64)
    d = _sample_distances(spec, probe)
    defect = np.abs(d + t[:, None] - t[None, :])
    pairs = [(i, j) for i in range(len(t)) for j in range(i + 1, len(t)) if t[i] >= n]
    bad = [(int(t[i]), int(t[j]), None, int(defect[i, j])) for i, j in pairs if defect[i, j]]
    worst = max((int(defect[i, j]) for i, j in pairs), default=0)
    return DefectReport("almost", not bad, worst, bad[:keep], len(pairs))


def almost_failure_certificate(spec: PolygonSpec, probe: RayProbe) -> DefectReport:
    """For each sampled start ``N`` up to the penultimate time, the worst pair ``t > s >= N``.

    ``passed`` means every ``N`` has a pair with defect at least 1, which is the
    finite evidence that the probe is not almost-geodesic.
    """
    t = np.asarray(probe.times, dtype=np.int64)
    d = _sample_distances(spec, probe)
    defect = np.abs(d + t[:, None] - t[None, :])
    upper = np.triu(defect, 1)
    triples, ok = [], True
    for i in range(len(t) - 1):
        block = upper[i:, i:]
        s, u = np.unravel_index(int(np.argmax(block)), block.shape)
        worst = int(block[s, u])
        triples.append((int(t[i + s]), int(t[i + u]), None, worst))
        ok &= worst >= 1
    return DefectReport("almost", ok, int(upper.max()), triples,
                        len(t) * (len(t) - 1) // 2,
                        None)


def _weak_report(probe: RayProbe, points: Sequence[LimitVertex], h: np.ndarray, budget: int) -> DefectReport:
    t = probe.times
    start = _tail_start(h)
    witness, triples, ok = {}, [], True
    for y, i, row in zip(points, start, h):
        i = int(i)
        n = 0 if i == 0 else t[i - 1] + 1
        if n <= budget:
            witness[y] = n
        else:
            witness[y] = None
            ok = False
            triples.append((t[i - 1], t[-1], y, int(abs(row[i - 1] - row[-1]))))
    worst = max((d for *_, d in triples), default=0)
    return DefectReport("weakly", ok, worst, triples, len(points) * len(t), witness)


def test_weakly_geodesic(spec: PolygonSpec, probe: RayProbe, ball: PointedBall | Sequence[LimitVertex],
                         n_budget: int | None = None) -> DefectReport:
    """For each ball point ``y``, the least ``N(y)`` after which ``d(g(t), y) - t`` is constant.

    ``N(y)`` must not exceed ``n_budget`` (default: the penultimate sample
    time, so at least two samples witness the constant tail).
    """
    points = list(ball.labels if isinstance(ball, PointedBall) else ball)
    budget = probe.times[-2] if n_budget is None else n_budget
    h = _profile_matrix(spec, probe, points)
    return _weak_report(probe, points, h, budget)


def splitting_counterexample(spec: PolygonSpec, xi: BasepointSeq, n: int, m_range: Iterable[int],
                             alternate: bool = True) -> DefectReport:
    """Weak-geodesy test at ``y = bUp_n`` of a sequence that alternates between the two sides.

    The samples are gluing vertices of levels above ``n``, taken on the up side
    and the down side in turn. With ``alternate=False`` they all stay on the up
    side, which is the control case.
    """
    _require_constant_tail(xi)
    ms = [m for m in m_range if m > n]
    pts = [_gluing_vertex(spec, xi, m, "down" if alternate and i % 2 else "up") for i, m in enumerate(ms)]
    probe = probe_from_points(spec, xi, pts, "alternating" if alternate else "up-only", levels=ms)
    y = _gluing_vertex(spec, xi, n, "up")
    h = _profile_matrix(spec, probe, [y])
    report = _weak_report(probe, [y], h, probe.times[-2])
    # every consecutive pair of samples is itself a witness
    row = h[0]
    report.triples = [(probe.times[i], probe.times[i + 1], y, int(abs(row[i + 1] - row[i])))
                      for i in range(1, len(row) - 1)]
    report.max_defect = max((d for *_, d in report.triples), default=0)
    return report


# ---------------------------------------------------------------- choice independence


def antipodal_alternatives(spec: PolygonSpec, xi: BasepointSeq, m: int, max_count: int = 16) -> list[LimitVertex]:
    """Midpoints of other geodesics from A to B inside the antipodal copies, canonical one first."""
    fr = frame(spec, xi, m)
    f = spec.f
    if spec.r % 2:
        # the midpoint of any such path is the shared gluing vertex
        return [antipodal_point(spec, xi, m)]
    a = fr.antipodal_copies[0]
    if m == 2:
        g = None
        paths = [canonical_geodesic(spec, 1, _corner(spec, a, f, 2), _corner(spec, a, 2 * f, 2))]
    else:
        g = _level_graph(spec, m - 1)
        paths = [p.vertices for p in geodesics_between(g, _corner(spec, a, f, m), _corner(spec, a, 2 * f, m),
                                                       max_count)]
    out = []
    for p in paths:
        v = limit_vertex(spec, xi, canonical(spec, p[len(p) // 2] + (a,)))
        if v not in out:
            out.append(v)
    return out


def choice_independence(spec: PolygonSpec, xi: BasepointSeq, m_range: Iterable[int], radius: int,
                        max_count: int = 16) -> dict:
    """Profiles of antipodal sequences built from alternative midpoints, compared with the canonical one."""
    ms = list(m_range)
    alts = [antipodal_alternatives(spec, xi, m, max_count) for m in ms]
    base = horoprofile(spec, xi, probe_from_points(spec, xi, [a[0] for a in alts], "antipodal"), radius)
    variants = max(len(a) for a in alts)
    mismatches = []
    for j in range(1, variants):
        pts = [a[min(j, len(a) - 1)] for a in alts]
        prof = horoprofile(spec, xi, probe_from_points(spec, xi, pts, f"antipodal-alt{j}"), radius)
        w = profiles_distinct(base, prof)
        if w is not None:
            mismatches.append((j, w))
    return {"levels": ms, "alternatives": [len(a) for a in alts], "variantsTested": variants - 1,
            "mismatches": [[j, str(w.as_sequence(xi))] for j, w in mismatches]}


# ---------------------------------------------------------------- census


def rebase(spec: PolygonSpec, v: LimitVertex, old: BasepointSeq, new: BasepointSeq) -> LimitVertex:
    """The same vertex of the limit graph, written relative to a cofinal basepoint."""
    seq = v.as_sequence(old)
    ok, n = cofinal(seq, new)
    if not ok:
        raise SierpolyError(f"{seq} is not a vertex of the limit graph at {new}")
    return limit_vertex(spec, new, seq.prefix(n - 1))


def boundary_census(spec: PolygonSpec, xi: BasepointSeq, m_range: Sequence[int], radius: int,
                    shift_range: Sequence[int] = (-3, -2, -1, 0, 1, 2, 3),
                    weak_radius: int | None = None, n_budget: int | None = None) -> dict:
    """Gluing rays, the antipodal sequence and shifted sequences with all their certificates.

    Profiles live on ``B(xi, radius)``; the weak-geodesy tests use
    ``B(xi, weak_radius)`` (default ``radius``).
    """
    _require_constant_tail(xi)
    m_range = list(m_range)
    depth = max(m_range)
    ball = stable_ball(spec, xi, radius)
    weak_ball = ball if weak_radius in (None, radius) else stable_ball(spec, xi, weak_radius)

    def weak(probe):
        rep = test_weakly_geodesic(spec, probe, weak_ball, n_budget)
        return {"passed": rep.passed, "N": {str(y.as_sequence(xi)): n for y, n in rep.witness_n.items()},
                "maxN": max((n for n in rep.witness_n.values() if n is not None), default=None)}

    profiles: dict[str, HoroProfile] = {}
    probes: dict[str, RayProbe] = {}
    busemann = []
    for direction in ("up", "down"):
        probe = gluing_ray(spec, xi, direction, depth)
        geo = test_geodesic(spec, probe)
        pid = f"gluing-{direction}"
        probes[pid] = probe
        try:
            profiles[pid] = horoprofile(spec, xi, probe, radius, ball=ball)
        except NotStabilized as exc:
            raise NotStabilized(pid, str(exc)) from None
        busemann.append({"direction": direction, "geodesicDefects": geo.max_defect,
                         "pairsChecked": geo.pairs_checked, "samples": len(probe),
                         "joinLevel": probe.meta["joinLevel"], "profileId": pid})

    anti = antipodal_sequence(spec, xi, m_range)
    probes["antipodal"] = anti
    profiles["antipodal"] = horoprofile(spec, xi, anti, radius, ball=ball)
    cert = almost_failure_certificate(spec, anti)
    antipodal = {"weakly": weak(anti), "almostFailures": cert.to_json(xi)["triples"],
                 "notAlmostCertified": cert.passed, "profileId": "antipodal",
                 "times": list(anti.times)}

    shifted = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for t in shift_range:
            probe = shifted_sequence(spec, xi, t, m_range)
            pid = f"shifted({t})"
            probes[pid] = probe
            profiles[pid] = horoprofile(spec, xi, probe, radius, ball=ball)
            shifted.append({"t": t, "profileId": pid, "weakly": weak(probe),
                            "levels": probe.meta["levels"], "dropped": probe.meta["dropped"]})

    ids = list(profiles)
    distinct = {a: {b: (lambda w: None if w is None else str(w.as_sequence(xi)))(
        profiles_distinct(profiles[a], profiles[b])) for b in ids} for a in ids}
    shift_ids = [s["profileId"] for s in shifted]
    bus_ids = ["gluing-up", "gluing-down"]
    claims = {
        "busemannGeodesic": all(b["geodesicDefects"] == 0 for b in busemann),
        "busemannDistinct": distinct["gluing-up"]["gluing-down"] is not None,
        "antipodalWeaklyGeodesic": antipodal["weakly"]["passed"],
        "antipodalNotAlmostGeodesic": cert.passed,
        "antipodalDistinctFromBusemann": all(distinct["antipodal"][b] is not None for b in bus_ids),
        "shiftedWeaklyGeodesic": all(s["weakly"]["passed"] for s in shifted),
        "shiftedPairwiseDistinct": all(distinct[a][b] is not None
                                       for i, a in enumerate(shift_ids) for b in shift_ids[i + 1:]),
        "shiftedDistinctFromBusemann": all(distinct[a][b] is not None for a in shift_ids for b in bus_ids),
        "shiftZeroIsAntipodal": (0 not in shift_range) or distinct["shifted(0)"]["antipodal"] is None,
    }
    return {
        "schemaVersion": 1,
        "spec": {"r": spec.r, "f": spec.f, "ftilde": spec.ftilde},
        "xi": str(xi),
        "params": {"mRange": m_range, "radius": radius, "weakRadius": weak_ball.radius,
                   "shiftRange": list(shift_range), "NBudget": n_budget},
        "frames": [frame(spec, xi, m).to_json() for m in m_range],
        "busemann": busemann,
        "antipodal": antipodal,
        "shifted": shifted,
        "distinctness": distinct,
        "profiles": {pid: p.to_json(xi) for pid, p in profiles.items()},
        "claims": claims,
    }


# these are library functions, not pytest tests
for _fn in (test_geodesic, test_almost_geodesic, test_weakly_geodesic):
    _fn.__test__ = False
