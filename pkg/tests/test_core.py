from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sierpoly.core import (
    BasepointSeq,
    DihedralElement,
    InvalidSideCount,
    MalformedAddress,
    MultipleOfFour,
    SequenceParseError,
    apply_dihedral,
    canonical,
    class_members,
    cofinal,
    dihedral_group,
    format_word,
    gluing_partner,
    make_spec,
    parse_sequence,
    parse_word,
    prefix,
    vertex_id,
)

VALID_R = [3, 5, 6, 7, 9, 10]


def w(text: str) -> tuple[int, ...]:
    return parse_word(text)


def union_find_classes(r: int, k: int) -> dict[tuple, frozenset]:
    """Gluing classes of all length-k addresses, built level by level from the copy rule.

    Level j glues copy i to copy i+1 by identifying ``(i+f)^(j-1) i`` with
    ``(i+1+2f)^(j-1) (i+1)``; identifications made at lower levels are carried
    into every copy by appending the remaining letters.
    """
    f = r // 4 + 1
    parent = {a: a for a in itertools.product(range(r), repeat=k)}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in range(2, k + 1):
        for i in range(r):
            left = ((i + f) % r,) * (j - 1) + (i,)
            right = ((i + 1 + 2 * f) % r,) * (j - 1) + ((i + 1) % r,)
            for tail in itertools.product(range(r), repeat=k - j):
                a, b = find(left + tail), find(right + tail)
                if a != b:
                    parent[a] = b
    groups: dict = {}
    for a in parent:
        groups.setdefault(find(a), set()).add(a)
    return {a: frozenset(groups[find(a)]) for a in parent}


def test_spec_offsets():
    assert (make_spec(6).f, make_spec(6).ftilde) == (2, 4)
    assert (make_spec(3).f, make_spec(3).ftilde) == (1, 2)
    with pytest.raises(MultipleOfFour, match="multiple of 4"):
        make_spec(8)
    with pytest.raises(InvalidSideCount):
        make_spec(2)


@pytest.mark.parametrize("r", VALID_R)
def test_f_is_least_with_4f_above_r(r):
    f = make_spec(r).f
    assert 4 * f > r and 4 * (f - 1) <= r


def test_gluing_examples():
    s6 = make_spec(6)
    assert gluing_partner(s6, w("004")) == w("335")
    assert gluing_partner(s6, w("115")) == w("440")
    assert gluing_partner(s6, w("0040")) == w("3350")
    assert gluing_partner(s6, w("012")) is None
    assert canonical(s6, w("335")) == w("004")
    assert canonical(s6, w("440")) == w("115")
    assert canonical(s6, w("012")) == w("012")
    assert vertex_id(s6, "335") == (w("004"), 2)
    with pytest.raises(MalformedAddress):
        vertex_id(s6, [0, 6])


@pytest.mark.parametrize("r,k", [(3, 4), (5, 3), (6, 4), (7, 3)])
def test_classes_match_union_find(r, k):
    spec = make_spec(r)
    classes = union_find_classes(r, k)
    for a, cls in classes.items():
        assert set(class_members(spec, a)) == cls
        assert canonical(spec, a) == min(cls)


@st.composite
def addresses(draw, r=None):
    r = r or draw(st.sampled_from(VALID_R))
    word = draw(st.lists(st.integers(0, r - 1), min_size=1, max_size=8))
    return make_spec(r), tuple(word)


@given(addresses())
def test_partner_is_involution(case):
    spec, a = case
    p = gluing_partner(spec, a)
    if p is not None:
        assert p != a
        assert gluing_partner(spec, p) == a
        assert canonical(spec, p) == canonical(spec, a)


@given(addresses(), st.integers(0, 20))
def test_rotations_respect_gluing(case, shift):
    spec, a = case
    sigma = DihedralElement(spec.r, shift)
    p = gluing_partner(spec, a)
    image = gluing_partner(spec, apply_dihedral(sigma, a))
    assert image == (None if p is None else apply_dihedral(sigma, p))


@pytest.mark.parametrize("r", VALID_R)
def test_dihedral_group_laws(r):
    group = dihedral_group(r)
    assert len(group) == 2 * r and len(set(group)) == 2 * r
    e = DihedralElement(r)
    for a in group:
        assert a.compose(a.inverse()) == e
        for x in range(r):
            for b in group[:: max(1, r // 3)]:
                assert a.compose(b)(x) == a(b(x))


def test_dihedral_examples():
    assert apply_dihedral(DihedralElement(6, 1), w("004")) == w("115")
    assert apply_dihedral(DihedralElement(5, 0, True), w("20")) == w("30")
    xi = parse_sequence("1(54)*")
    assert apply_dihedral(DihedralElement(6), xi) == xi
    assert str(DihedralElement(5, 2, True)) == "s2"


def test_parse_sequence_forms():
    assert parse_sequence("1(54)*") == BasepointSeq((1,), (5, 4))
    assert parse_sequence("134*") == BasepointSeq((1, 3), (4,))
    assert parse_sequence("(4)*") == parse_sequence("4*") == parse_sequence("44(44)*")
    assert parse_sequence("[10,3]([11])*") == BasepointSeq((10, 3), (11,))
    assert parse_sequence("[10,3](11)*") == BasepointSeq((10, 3), (1,))
    assert str(parse_sequence("1(54)*")) == "1(54)*"
    assert parse_sequence("545(45)*") == parse_sequence("(54)*")


@pytest.mark.parametrize("text,pos", [("4(5", 3), ("", 0), ("12", 2), ("(4)*x", 4), ("()*", 1)])
def test_parse_errors_report_position(text, pos):
    with pytest.raises(SequenceParseError) as info:
        parse_sequence(text)
    assert info.value.position == pos


def test_parse_rejects_out_of_range_letter():
    with pytest.raises(SequenceParseError):
        parse_sequence("7*", r=6)


@st.composite
def sequences(draw):
    pre = draw(st.lists(st.integers(0, 9), max_size=4))
    per = draw(st.lists(st.integers(0, 9), min_size=1, max_size=3))
    return BasepointSeq(tuple(pre), tuple(per))


@given(sequences())
def test_format_parse_round_trip(xi):
    assert parse_sequence(str(xi)) == xi
    assert [xi.letter(i) for i in range(1, 30)] == list(xi.prefix(29))


def test_prefixes():
    assert prefix(parse_sequence("1(54)*"), 3) == w("154")
    assert prefix(parse_sequence("4*"), 1) == (4,)
    assert prefix(parse_sequence("1(54)*"), 6) == w("154545")
    assert format_word(w("154")) == "154"
    assert format_word((10, 2), 11) == "[10,2]"


def test_cofinal_examples():
    four = parse_sequence("4*")
    assert cofinal(four, parse_sequence("134*")) == (True, 3)
    assert cofinal(four, parse_sequence("5*")) == (False, None)
    assert cofinal(parse_sequence("1(54)*"), parse_sequence("(45)*"))[0]


def brute_cofinal(xi, eta, n=100):
    a, b = xi.prefix(n), eta.prefix(n)
    tail = max(len(xi.preperiod), len(eta.preperiod)) + len(xi.period) * len(eta.period)
    if a[tail:] != b[tail:]:
        return False, None
    i = n
    while i > 0 and a[i - 1] == b[i - 1]:
        i -= 1
    return True, i + 1


@given(sequences(), sequences())
def test_cofinal_matches_letterwise_comparison(xi, eta):
    assert cofinal(xi, eta) == brute_cofinal(xi, eta)


@given(sequences(), sequences(), sequences())
def test_cofinality_is_an_equivalence(a, b, c):
    assert cofinal(a, a) == (True, 1)
    assert cofinal(a, b)[0] == cofinal(b, a)[0]
    if cofinal(a, b)[0] and cofinal(b, c)[0]:
        assert cofinal(a, c)[0]
