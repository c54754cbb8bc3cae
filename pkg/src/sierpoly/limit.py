"""The limit graph ``Gamma_xi`` seen through certified stable balls.

A vertex of ``Gamma_xi`` is a sequence cofinal with ``xi``; it is stored as a
finite word that is followed by the tail of ``xi``. The copy ``Gamma_{xi[M]}``
sits isometrically inside every later level and is attached to the rest of the
graph only through its two exit corners, so a ball that stays at distance at
most its radius from those corners is already the limit ball.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

from .construction import ImplicitLevelGraph, LevelGraph
from .core import (
    Address,
    BasepointSeq,
    DihedralElement,
    PolygonSpec,
    SierpolyError,
    apply_dihedral,
    canonical,
    class_members,
    cofinal,
    dihedral_group,
    format_word,
)
from .metric import PointedBall, ball, oracle_for, pointed_isometric

DEFAULT_MAX_LEVEL = 40


class StabilizationFailed(SierpolyError):
    def __init__(self, message: str, largest_level: int):
        self.largest_level = largest_level
        super().__init__(f"{message} (largest level tried: {largest_level})")


@dataclass(frozen=True, order=True)
class LimitVertex:
    """``word`` followed by the tail of the base sequence from position ``len(word)+1``."""

    word: Address

    @property
    def depth(self) -> int:
        return len(self.word)

    def __str__(self):
        return format_word(self.word) + "|"

    def as_sequence(self, base: BasepointSeq) -> BasepointSeq:
        n, pre = len(self.word), len(base.preperiod)
        if n <= pre:
            return BasepointSeq(self.word + base.preperiod[n:], base.period)
        p = len(base.period)
        off = (n - pre) % p
        return BasepointSeq(self.word, base.period[off:] + base.period[:off])


def _pad(base: BasepointSeq, word: Address, k: int) -> Address:
    return tuple(word) + base.tail(len(word) + 1, k)


def limit_vertex(spec: PolygonSpec, base: BasepointSeq, word: Address) -> LimitVertex:
    """Normal form: canonicalize once the leading run is settled, then trim the shared tail."""
    word = tuple(word)
    k = max(len(word), 1)
    bound = len(word) + len(base.preperiod) + len(base.period) + 1
    padded = _pad(base, word, k)
    while len(set(padded)) == 1 and k < bound:
        k += 1
        padded = _pad(base, word, k)
    w = canonical(spec, padded)
    while w and w[-1] == base.letter(len(w)):
        w = w[:-1]
    return LimitVertex(w)


def at_level(spec: PolygonSpec, base: BasepointSeq, v: LimitVertex, k: int) -> Address:
    """Canonical ``Gamma_k`` address of ``v`` inside ``Gamma_{base[k]}``."""
    if k < max(v.depth, 1):
        raise SierpolyError(f"vertex {v} does not live at level {k}")
    return canonical(spec, _pad(base, v.word, k))


def from_level(spec: PolygonSpec, base: BasepointSeq, a: Address) -> LimitVertex:
    return limit_vertex(spec, base, a)


def exit_distance(spec: PolygonSpec, base: BasepointSeq, center: LimitVertex, level: int) -> int:
    """Distance from ``center`` to the two corners through which ``Gamma_{base[level]}`` is attached."""
    r, f = spec.r, spec.f
    c = base.letter(level + 1)
    a = at_level(spec, base, center, level)
    oracle = oracle_for(spec)
    up = ((c + f) % r,) * level
    down = ((c + 2 * f) % r,) * level
    return min(oracle.dist(a, up), oracle.dist(a, down))


def limit_distance(spec: PolygonSpec, base: BasepointSeq, u: LimitVertex, v: LimitVertex) -> int:
    k = max(u.depth, v.depth, 1)
    return oracle_for(spec).dist(at_level(spec, base, u, k), at_level(spec, base, v, k))


# ---------------------------------------------------------------- stabilization


@dataclass(frozen=True)
class StabilizationCertificate:
    xi: BasepointSeq
    radius: int
    level: int
    window: int
    mode: str
    center: LimitVertex = LimitVertex(())
    exit_distance: int | None = None
    verified_levels: tuple[int, ...] = ()

    def to_json(self) -> dict:
        doc = {
            "xi": str(self.xi),
            "radius": self.radius,
            "level": self.level,
            "window": self.window,
            "mode": self.mode,
            "verifiedLevels": list(self.verified_levels),
        }
        if self.center.word:
            doc["center"] = str(self.center.as_sequence(self.xi))
        if self.exit_distance is not None:
            doc["exitDistance"] = self.exit_distance
        return doc


@lru_cache(maxsize=4096)
def level_ball(spec: PolygonSpec, base: BasepointSeq, center: LimitVertex, radius: int, k: int) -> PointedBall:
    g = ImplicitLevelGraph(spec, k)
    b = ball(g, at_level(spec, base, center, k), radius)
    b.labels = tuple(from_level(spec, base, p) for p in b.points)
    return b


def _window_ok(spec, base, center, radius, m, window) -> bool:
    for k in range(m, m + window):
        b1 = level_ball(spec, base, center, radius, k)
        b2 = level_ball(spec, base, center, radius, k + 1)
        if pointed_isometric(b1, b2) is None:
            return False
    return True


@lru_cache(maxsize=4096)
def stabilization_level(
    spec: PolygonSpec,
    xi: BasepointSeq,
    radius: int,
    mode: Literal["certified", "heuristic"] = "certified",
    window: int = 2,
    max_level: int = DEFAULT_MAX_LEVEL,
    center: LimitVertex = LimitVertex(()),
) -> StabilizationCertificate:
    """Least level whose ball of ``radius`` is the limit ball, with window isometries checked.

    ``certified``: least ``M`` whose exit corners are at distance >= radius, so the
    ball can no longer grow. ``heuristic``: least ``M`` whose balls at levels
    ``M .. M+window`` are consecutively pointed-isometric.
    """
    if radius < 0:
        raise SierpolyError("radius must be nonnegative")
    start = max(center.depth, 1)
    if mode == "certified":
        m = start
        while True:
            if m > max_level:
                raise StabilizationFailed(f"no certified level for radius {radius}", max_level)
            e = exit_distance(spec, xi, center, m)
            if e >= radius:
                break
            m += 1
        if not _window_ok(spec, xi, center, radius, m, window):
            raise RuntimeError(f"certified level {m} failed the isometry window; construction bug")
        return StabilizationCertificate(xi, radius, m, window, mode, center, e,
                                        tuple(range(m, m + window + 1)))
    if mode != "heuristic":
        raise SierpolyError(f"unknown mode {mode!r}")
    for m in range(start, max_level - window + 1):
        if _window_ok(spec, xi, center, radius, m, window):
            return StabilizationCertificate(xi, radius, m, window, mode, center, None,
                                            tuple(range(m, m + window + 1)))
    raise StabilizationFailed(f"no stable window for radius {radius}", max_level)


def stable_ball(spec: PolygonSpec, xi: BasepointSeq, radius: int,
                center: LimitVertex | None = None) -> PointedBall:
    """The ball ``B(center, radius)`` of ``Gamma_xi`` realized at its certified level."""
    center = center or LimitVertex(())
    cert = stabilization_level(spec, xi, radius, "certified", center=center)
    return level_ball(spec, xi, center, radius, cert.level)


def vertex_in_limit(xi: BasepointSeq, eta: BasepointSeq) -> bool:
    return cofinal(xi, eta)[0]


# ---------------------------------------------------------------- dihedral checks


@dataclass
class EquivarianceReport:
    sigma: DihedralElement
    edges_preserved: bool
    classes_preserved: bool
    bijective: bool
    edge_counterexamples: list[tuple[Address, Address]] = field(default_factory=list)
    class_counterexamples: list[tuple[tuple[Address, Address], tuple[Address, Address]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.edges_preserved and self.classes_preserved and self.bijective

    def to_json(self) -> dict:
        return {
            "sigma": str(self.sigma),
            "action": self.sigma.describe(),
            "edgesPreserved": self.edges_preserved,
            "classesPreserved": self.classes_preserved,
            "bijective": self.bijective,
            "passed": self.passed,
            "edgeCounterexamples": [[format_word(u), format_word(v)] for u, v in self.edge_counterexamples],
            "classCounterexamples": [
                {"pair": [format_word(a), format_word(b)], "image": [format_word(x), format_word(y)]}
                for (a, b), (x, y) in self.class_counterexamples
            ],
        }


def _check_sigma(spec: PolygonSpec, g: LevelGraph, sigma: DihedralElement, limit: int) -> EquivarianceReport:
    verts = list(g.vertices())
    image = {v: canonical(spec, apply_dihedral(sigma, v)) for v in verts}
    class_bad = []
    for v in verts:
        members = class_members(spec, v)
        if len(members) == 2:
            a, b = members
            x, y = apply_dihedral(sigma, a), apply_dihedral(sigma, b)
            if canonical(spec, x) != canonical(spec, y):
                class_bad.append(((a, b), (x, y)))
    edge_bad = []
    for u, v in g.edges():
        fu, fv = image[u], image[v]
        if fv not in g.neighbors(fu):
            edge_bad.append((u, v))
    bijective = len(set(image.values())) == len(verts)
    return EquivarianceReport(sigma, not edge_bad, not class_bad, bijective,
                              edge_bad[:limit], class_bad[:limit])


def dihedral_equivariance_check(spec: PolygonSpec, k: int, limit: int = 10) -> list[EquivarianceReport]:
    """Whether each letterwise dihedral map is an automorphism of ``Gamma_k``.

    The vertex map sends a class to the class of the image of its canonical
    member; classes are preserved when both members land in one class.
    """
    if k < 2:
        raise SierpolyError("equivariance check needs k >= 2")
    g = LevelGraph(spec, k)
    return [_check_sigma(spec, g, s, limit) for s in dihedral_group(spec.r)]


@lru_cache(maxsize=None)
def letterwise_automorphisms(spec: PolygonSpec, k: int = 4) -> frozenset[DihedralElement]:
    return frozenset(rep.sigma for rep in dihedral_equivariance_check(spec, k, limit=0) if rep.passed)


# ---------------------------------------------------------------- isomorphism experiments


@dataclass
class IsoVerdict:
    xi: BasepointSeq
    eta: BasepointSeq
    found: bool
    sigma: DihedralElement | None
    agree_from: int | None
    skipped: list[DihedralElement]
    geometric: list[dict]
    agreement: str

    def to_json(self) -> dict:
        return {
            "xi": str(self.xi),
            "eta": str(self.eta),
            "algebraic": {
                "found": self.found,
                "sigma": str(self.sigma) if self.sigma else None,
                "N": self.agree_from,
                "skippedReflections": [str(s) for s in self.skipped],
            },
            "geometric": self.geometric,
            "agreement": self.agreement,
        }


def iso_check_theorem(spec: PolygonSpec, xi: BasepointSeq, eta: BasepointSeq, max_radius: int,
                      check_level: int = 4) -> IsoVerdict:
    """Cofinality search over the dihedral group against stable-ball comparisons.

    Reflections that are not letterwise automorphisms at ``check_level`` are
    skipped on the algebraic side and listed. When a witness ``sigma`` exists,
    the ball of ``Gamma_xi`` at ``xi`` is compared with the ball of ``Gamma_eta``
    at the vertex ``sigma(xi)``; otherwise the two basepoint balls are compared.
    """
    good = letterwise_automorphisms(spec, check_level)
    found, witness, agree_from, skipped = False, None, None, []
    for sigma in dihedral_group(spec.r):
        if sigma not in good:
            skipped.append(sigma)
            continue
        ok, n = cofinal(eta, apply_dihedral(sigma, xi))
        if ok:
            found, witness, agree_from = True, sigma, n
            break
    if found:
        image = apply_dihedral(witness, xi)
        center = limit_vertex(spec, eta, image.prefix(agree_from - 1)) if agree_from > 1 else LimitVertex(())
    else:
        center = LimitVertex(())
    geometric = []
    for radius in range(1, max_radius + 1):
        b1 = stable_ball(spec, xi, radius)
        b2 = stable_ball(spec, eta, radius, center)
        iso = pointed_isometric(b1, b2) is not None
        geometric.append({"radius": radius, "center": str(center.as_sequence(eta)),
                          "size": [len(b1), len(b2)], "isometric": iso})
    if found:
        agreement = "consistent" if all(g["isometric"] for g in geometric) else "violation"
    else:
        differ = [g["radius"] for g in geometric if not g["isometric"]]
        agreement = f"consistent: pointed balls differ at radius {differ[0]}" if differ else "inconclusive"
    return IsoVerdict(xi, eta, found, witness, agree_from, skipped, geometric, agreement)
