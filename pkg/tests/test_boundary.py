from __future__ import annotations

import itertools

import numpy as np
import pytest

from sierpoly import boundary as bd
from sierpoly.boundary import (
    XI,
    Ambient,
    NotStabilized,
    OddSpan,
    RayProbe,
    antipodal_point,
    antipodal_sequence,
    frame,
    gluing_ray,
    horoprofile,
    profiles_distinct,
    shifted_sequence,
    splitting_counterexample,
)
from sierpoly.core import SierpolyError, canonical, make_spec, parse_sequence, parse_word
from sierpoly.limit import LimitVertex, limit_distance, limit_vertex, stable_ball

w = parse_word
S6, S5, S3 = make_spec(6), make_spec(5), make_spec(3)
FOUR, ZERO = parse_sequence("4*"), parse_sequence("0*")
LEVELS = range(2, 8)


@pytest.fixture(scope="module")
def rays():
    return gluing_ray(S6, FOUR, "up", 5), gluing_ray(S6, FOUR, "down", 5)


@pytest.fixture(scope="module")
def shifted_profiles():
    with pytest.warns(UserWarning):
        probes = {t: shifted_sequence(S6, FOUR, t, LEVELS) for t in range(-3, 4)}
    return {t: horoprofile(S6, FOUR, p, 6) for t, p in probes.items()}


def glue(m, side, spec=S6, xi=FOUR):
    fr = frame(spec, xi, m)
    return limit_vertex(spec, xi, fr.b_up if side == "up" else fr.b_down)


def test_frame_r6():
    fr = frame(S6, FOUR, 2)
    assert fr.copy_index == 4
    assert fr.b_up == canonical(S6, w("35")) == w("04")
    assert fr.b_down == canonical(S6, w("53")) == w("24")
    assert fr.antipodal_copies == (1,)
    assert fr.a_vertex == canonical(S6, w("31")) == w("02")
    assert fr.b_vertex == canonical(S6, w("51")) == w("20")
    assert antipodal_point(S6, FOUR, 2) == LimitVertex((4, 1))


def test_frame_r5_odd_rule():
    fr = frame(S5, ZERO, 2)
    assert fr.antipodal_copies == (2, 3)
    p = antipodal_point(S5, ZERO, 2)
    assert p == LimitVertex((2, 3)) == limit_vertex(S5, ZERO, w("42"))


def test_frame_depends_only_on_mth_letter():
    a, b = parse_sequence("1(54)*"), parse_sequence("3(54)*")
    for m in (2, 3, 4):
        assert frame(S6, a, m) == frame(S6, b, m)


@pytest.mark.parametrize("r", [6, 14])
def test_even_span_when_f_is_even(r):
    spec = make_spec(r)
    for m in (2, 3, 4):
        assert frame(spec, ZERO, m).span % 2 == 0


def test_odd_span_at_r10():
    spec = make_spec(10)
    assert [frame(spec, ZERO, m).span for m in (2, 3)] == [3, 13]
    with pytest.raises(OddSpan):
        antipodal_point(spec, ZERO, 2)


def test_r3_frame_outer_vertices_are_gluing_vertices():
    fr = frame(S3, ZERO, 4)
    assert (fr.a_vertex, fr.b_vertex) == (fr.b_down, fr.b_up)


def test_antipodal_times_scale():
    probe = antipodal_sequence(S6, FOUR, range(2, 7))
    assert probe.times == (0, 7, 21, 63, 189, 567)
    assert probe.samples[0] == (0, XI)
    bd.verify_probe(S6, probe)


def test_antipodal_equidistance_everywhere():
    for spec, xi in [(S6, FOUR), (S5, ZERO), (S3, ZERO), (make_spec(7), ZERO)]:
        for m in range(2, 6):
            fr = frame(spec, xi, m)
            p = antipodal_point(spec, xi, m)
            up, down = limit_vertex(spec, xi, fr.b_up), limit_vertex(spec, xi, fr.b_down)
            assert limit_distance(spec, xi, up, p) == limit_distance(spec, xi, down, p)


def test_gluing_rays(rays):
    up, down = rays
    for probe in rays:
        assert probe.samples[0] == (0, XI)
        assert probe.times == tuple(range(len(probe)))
        assert bd.test_geodesic(S6, probe).max_defect == 0
    assert glue(3, "up") in up.vertices and glue(5, "down") in down.vertices
    n = min(len(up), len(down))
    amb = Ambient.covering(S6, FOUR, up.vertices + down.vertices)
    d = np.diag(amb.distances(up.vertices[:n], down.vertices[:n]))
    # the rays split right away
    assert (d[1:] >= 2).all()
    assert d[:6].tolist() == [0, 2, 2, 4, 6, 8]


def test_gluing_ray_with_prefix():
    probe = gluing_ray(S6, parse_sequence("134*"), "up", 5)
    assert probe.meta["joinLevel"] == 3
    assert bd.test_geodesic(S6, probe).passed


def test_gluing_ray_needs_constant_tail():
    with pytest.raises(SierpolyError, match="eventually constant"):
        gluing_ray(S6, parse_sequence("(45)*"), "up", 4)


def test_profile_invariants(rays, shifted_profiles):
    profiles = [horoprofile(S6, FOUR, p, 6) for p in rays] + list(shifted_profiles.values())
    for prof in profiles:
        b = prof.ball
        vals = np.array(prof.values)
        assert prof.value(XI) == 0
        assert (np.abs(vals[:, None] - vals[None, :]) <= b.matrix).all()
        assert (vals >= -b.distances_from_center()).all()


def test_busemann_values_at_gluing_vertices(rays):
    up = horoprofile(S6, FOUR, rays[0], 6)
    for m in (2, 3):
        y = glue(m, "up")
        assert up.value(y) == -limit_distance(S6, FOUR, XI, y)


def test_shifted_values_at_gluing_vertices(shifted_profiles):
    table = {t: [p.value(glue(m, s)) for m in (2, 3) for s in ("up", "down")]
             for t, p in shifted_profiles.items()}
    assert table == {
        -3: [0, -2, 0, -6], -2: [0, -2, -2, -6], -1: [0, -2, -4, -6], 0: [-2, -2, -6, -6],
        1: [-2, 0, -6, -4], 2: [-2, 0, -6, -2], 3: [-2, 0, -6, 0],
    }


def test_shift_zero_is_the_antipodal_profile(shifted_profiles):
    anti = horoprofile(S6, FOUR, antipodal_sequence(S6, FOUR, LEVELS), 6)
    assert profiles_distinct(anti, shifted_profiles[0]) is None
    assert shifted_sequence(S6, FOUR, 0, LEVELS).vertices == antipodal_sequence(S6, FOUR, LEVELS).vertices


def test_shift_range_and_midpoint():
    for m in (2, 3, 4):
        fr = frame(S6, FOUR, m)
        mid = fr.span // 2
        assert 2 * mid == fr.span
    with pytest.warns(UserWarning, match="dropped"):
        probe = shifted_sequence(S6, FOUR, 3, range(2, 6))
    assert probe.meta["dropped"] == [2, 3]


def test_profile_stable_under_longer_range():
    short = horoprofile(S6, FOUR, antipodal_sequence(S6, FOUR, range(2, 6)), 5)
    long = horoprofile(S6, FOUR, antipodal_sequence(S6, FOUR, range(2, 8)), 5)
    assert short.values == long.values


def test_not_stabilized():
    probe = antipodal_sequence(S6, FOUR, [2])
    with pytest.raises(NotStabilized):
        horoprofile(S6, FOUR, probe, 6)


def test_probe_validation():
    with pytest.raises(SierpolyError):
        RayProbe(FOUR, ((0, XI), (0, LimitVertex((3,)))), "custom")
    with pytest.raises(SierpolyError):
        RayProbe(FOUR, ((1, LimitVertex((3,))),), "custom")


def test_distinctness(rays, shifted_profiles):
    up, down = (horoprofile(S6, FOUR, p, 6) for p in rays)
    assert profiles_distinct(up, up) is None
    assert profiles_distinct(up, down) is not None
    one, two = shifted_profiles[1], shifted_profiles[2]
    assert profiles_distinct(one, two) is not None
    assert one.value(glue(3, "down")) != two.value(glue(3, "down"))
    other = horoprofile(S6, FOUR, rays[0], 5)
    with pytest.raises(SierpolyError, match="different balls"):
        profiles_distinct(up, other)


def test_weak_and_almost_conditions():
    anti = antipodal_sequence(S6, FOUR, LEVELS)
    weak = bd.test_weakly_geodesic(S6, anti, stable_ball(S6, FOUR, 4))
    assert weak.passed and all(n is not None for n in weak.witness_n.values())
    cert = bd.almost_failure_certificate(S6, anti)
    assert cert.passed and min(d for *_, d in cert.triples) >= 1
    assert not bd.test_almost_geodesic(S6, anti).passed


def test_defects_are_nonnegative_integers(rays):
    rep = bd.test_almost_geodesic(S6, rays[0], 3)
    assert rep.passed and rep.max_defect == 0
    for *_, d in bd.almost_failure_certificate(S6, antipodal_sequence(S6, FOUR, LEVELS)).triples:
        assert isinstance(d, int) and d >= 0


def test_splitting_counterexample():
    bad = splitting_counterexample(S6, FOUR, 2, LEVELS)
    assert not bad.passed and bad.max_defect >= 1
    assert all(d >= 1 for *_, d in bad.triples)
    good = splitting_counterexample(S6, FOUR, 2, LEVELS, alternate=False)
    assert good.passed


def test_choice_independence():
    rep = bd.choice_independence(S6, FOUR, range(2, 6), 5)
    assert rep["mismatches"] == []


@pytest.mark.parametrize("kind", ["antipodal", "up", "shift2"])
def test_basepoint_shift_recentres_profiles(kind):
    moved = parse_sequence("134*")

    def make(x):
        if kind == "antipodal":
            return antipodal_sequence(S6, x, LEVELS)
        if kind == "up":
            return gluing_ray(S6, x, "up", 7)
        with pytest.warns(UserWarning):
            return shifted_sequence(S6, x, 2, LEVELS)

    prof = horoprofile(S6, moved, make(moved), 6)
    pts = [bd.rebase(S6, y, moved, FOUR) for y in prof.labels]
    vals = bd.profile_at(S6, make(FOUR), pts + [bd.rebase(S6, XI, moved, FOUR)])
    assert tuple(v - vals[-1] for v in vals[:-1]) == prof.values


def test_census_small_r3():
    rep = bd.boundary_census(S3, ZERO, range(2, 9), 4, (-1, 0, 1))
    assert all(rep["claims"].values()), rep["claims"]
    assert set(rep["profiles"]) == {"gluing-up", "gluing-down", "antipodal", "shifted(-1)", "shifted(0)",
                                    "shifted(1)"}
    for a, b in itertools.combinations(rep["profiles"], 2):
        same = rep["distinctness"][a][b] is None
        assert same == ({a, b} == {"antipodal", "shifted(0)"})
