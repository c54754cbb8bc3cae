"""Alphabet, polygon parameters, addresses, gluing arithmetic and the dihedral group.

Addresses are plain tuples of ints. The first letter is the finest copy index
(the position on the base cycle ``P_r``); the last letter is the coarsest copy
index, so a vertex ``v`` of copy ``i`` is written ``v + (i,)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

Address = tuple[int, ...]


class SierpolyError(ValueError):
    """Base class for user-facing errors."""


class InvalidSideCount(SierpolyError):
    pass


class MultipleOfFour(SierpolyError):
    pass


class MalformedAddress(SierpolyError):
    pass


class SequenceParseError(SierpolyError):
    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        super().__init__(f"cannot parse {text!r} at position {position}: {reason}")


@dataclass(frozen=True)
class PolygonSpec:
    r: int
    f: int
    ftilde: int

    def __post_init__(self):
        r, f = self.r, self.f
        if r < 3:
            raise InvalidSideCount(f"r must be at least 3, got {r}")
        if r % 4 == 0:
            raise MultipleOfFour(f"r must not be a multiple of 4, got {r}")
        if not (4 * f > r and 4 * (f - 1) <= r) or self.ftilde != 2 * f:
            raise SierpolyError(f"inconsistent gluing offsets f={f}, ftilde={self.ftilde} for r={r}")


def make_spec(r: int) -> PolygonSpec:
    """Polygon parameters for ``r`` sides with the minimal offset ``f = min{i : 4i > r}``."""
    r = int(r)
    if r < 3:
        raise InvalidSideCount(f"r must be at least 3, got {r}")
    if r % 4 == 0:
        raise MultipleOfFour(f"r must not be a multiple of 4, got {r}")
    f = r // 4 + 1
    return PolygonSpec(r, f, 2 * f)


def check_address(spec: PolygonSpec, a: Sequence[int]) -> Address:
    a = tuple(int(x) for x in a)
    if not a:
        raise MalformedAddress("address must have at least one letter")
    for x in a:
        if not 0 <= x < spec.r:
            raise MalformedAddress(f"letter {x} out of range for r={spec.r}")
    return a


def gluing_partner(spec: PolygonSpec, a: Address) -> Address | None:
    """The other member of the gluing class of ``a``, or None if ``a`` is unglued.

    A glued address has a prefix ``c^(l-1) b`` with ``c - b`` equal to ``f`` or
    ``2f`` mod r; the suffix after position ``l`` is carried over unchanged.
    """
    r, f = spec.r, spec.f
    c = a[0]
    run = 1
    n = len(a)
    while run < n and a[run] == c:
        run += 1
    if run == n:
        return None
    b = a[run]
    diff = (c - b) % r
    if diff == f % r:
        x, y = (b + 1 + 2 * f) % r, (b + 1) % r
    elif diff == (2 * f) % r:
        x, y = (b - 1 + f) % r, (b - 1) % r
    else:
        return None
    return (x,) * run + (y,) + a[run + 1:]


def canonical(spec: PolygonSpec, a: Address) -> Address:
    """Lexicographically least member of the gluing class of ``a``."""
    p = gluing_partner(spec, a)
    if p is not None and p < a:
        return p
    return a


class VertexId(NamedTuple):
    canonical: Address
    class_size: int

    def __str__(self):
        return format_word(self.canonical)


def vertex_id(spec: PolygonSpec, a: Sequence[int]) -> VertexId:
    a = check_address(spec, a)
    p = gluing_partner(spec, a)
    if p is None:
        return VertexId(a, 1)
    return VertexId(min(a, p), 2)


def class_members(spec: PolygonSpec, a: Address) -> tuple[Address, ...]:
    p = gluing_partner(spec, a)
    if p is None:
        return (a,)
    return (a, p) if a < p else (p, a)


# ---------------------------------------------------------------- words


def format_word(word: Sequence[int], r: int | None = None) -> str:
    """Digits for r <= 10 (or when every letter is a digit), bracketed CSV otherwise."""
    if (r is not None and r > 10) or any(x > 9 for x in word):
        return "[" + ",".join(str(x) for x in word) + "]"
    return "".join(str(x) for x in word)


_BRACKET = re.compile(r"\[(\d+(?:,\d+)*)?\]")


def _parse_word_at(text: str, pos: int) -> tuple[Address, int]:
    if pos < len(text) and text[pos] == "[":
        m = _BRACKET.match(text, pos)
        if not m:
            raise SequenceParseError(text, pos, "unterminated or malformed bracketed word")
        body = m.group(1)
        letters = tuple(int(x) for x in body.split(",")) if body else ()
        return letters, m.end()
    end = pos
    while end < len(text) and text[end].isdigit():
        end += 1
    return tuple(int(ch) for ch in text[pos:end]), end


def parse_word(text: str, r: int | None = None) -> Address:
    text = text.strip()
    word, end = _parse_word_at(text, 0)
    if end != len(text):
        raise SequenceParseError(text, end, "unexpected character")
    if not word:
        raise SequenceParseError(text, 0, "empty word")
    if r is not None:
        for i, x in enumerate(word):
            if x >= r:
                raise SequenceParseError(text, i, f"letter {x} out of range for r={r}")
    return word


# ---------------------------------------------------------------- sequences


def _primitive(word: Address) -> Address:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class BasepointSeq:
    """Eventually periodic sequence ``preperiod . period^inf`` in normal form."""

    preperiod: Address
    period: Address

    def __post_init__(self):
        if not self.period:
            raise SierpolyError("period must be nonempty")
        pre, per = tuple(self.preperiod), _primitive(tuple(self.period))
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def letter(self, i: int) -> int:
        """The ``i``-th letter, 1-based."""
        if i < 1:
            raise IndexError(i)
        n = len(self.preperiod)
        if i <= n:
            return self.preperiod[i - 1]
        return self.period[(i - n - 1) % len(self.period)]

    def prefix(self, k: int) -> Address:
        return tuple(self.letter(i) for i in range(1, k + 1))

    def tail(self, start: int, stop: int) -> Address:
        """Letters at 1-based positions ``start .. stop`` inclusive."""
        return tuple(self.letter(i) for i in range(start, stop + 1))

    @property
    def is_eventually_constant(self) -> bool:
        return len(self.period) == 1

    @property
    def max_letter(self) -> int:
        return max(self.preperiod + self.period)

    def format(self, r: int | None = None) -> str:
        pre = format_word(self.preperiod, r) if self.preperiod else ""
        return f"{pre}({format_word(self.period, r)})*"

    def __str__(self):
        return self.format()


def parse_sequence(text: str, r: int | None = None) -> BasepointSeq:
    """Parse ``WORD(WORD)*``; ``WORDx*`` is shorthand for ``WORD(x)*``.

    >>> str(parse_sequence("1(54)*"))
    '1(54)*'
    >>> str(parse_sequence("134*"))
    '13(4)*'
    """
    raw = text
    text = text.strip()
    pre, pos = _parse_word_at(text, 0)
    if pos < len(text) and text[pos] == "(":
        period, end = _parse_word_at(text, pos + 1)
        if not period:
            raise SequenceParseError(raw, pos + 1, "empty period")
        if text[end:end + 2] != ")*":
            raise SequenceParseError(raw, end, "expected ')*'")
        pos = end + 2
    elif pos < len(text) and text[pos] == "*":
        if not pre:
            raise SequenceParseError(raw, pos, "'*' needs a preceding letter")
        # the star repeats the last letter only
        pre, period = pre[:-1], pre[-1:]
        pos += 1
    else:
        raise SequenceParseError(raw, pos, "expected '(' or '*' introducing the period")
    if pos != len(text):
        raise SequenceParseError(raw, pos, "trailing characters")
    seq = BasepointSeq(pre, period)
    if r is not None and seq.max_letter >= r:
        raise SequenceParseError(raw, 0, f"letter {seq.max_letter} out of range for r={r}")
    return seq


def prefix(xi: BasepointSeq, k: int) -> Address:
    if k < 1:
        raise SierpolyError("prefix length must be at least 1")
    return xi.prefix(k)


def cofinal(xi: BasepointSeq, eta: BasepointSeq) -> tuple[bool, int | None]:
    """Whether the sequences agree from some index on, with the least such 1-based index."""
    if len(xi.period) != len(eta.period):
        return False, None
    p = len(xi.period)
    start = max(len(xi.preperiod), len(eta.preperiod)) + 1
    for i in range(start, start + p):
        if xi.letter(i) != eta.letter(i):
            return False, None
    n = start - 1
    while n >= 1 and xi.letter(n) == eta.letter(n):
        n -= 1
    return True, n + 1


# ---------------------------------------------------------------- dihedral group


@dataclass(frozen=True)
class DihedralElement:
    r: int
    shift: int = 0
    reflect: bool = False

    def __post_init__(self):
        object.__setattr__(self, "shift", self.shift % self.r)

    def __call__(self, x: int) -> int:
        return (self.shift - x) % self.r if self.reflect else (self.shift + x) % self.r

    def compose(self, other: "DihedralElement") -> "DihedralElement":
        """``self o other`` (apply ``other`` first)."""
        if self.r != other.r:
            raise SierpolyError("cannot compose elements of different dihedral groups")
        s = other.shift if not self.reflect else -other.shift
        return DihedralElement(self.r, self.shift + s, self.reflect != other.reflect)

    def inverse(self) -> "DihedralElement":
        if self.reflect:
            return self
        return DihedralElement(self.r, -self.shift, False)

    @property
    def is_identity(self) -> bool:
        return self.shift == 0 and not self.reflect

    def __str__(self):
        return f"{'s' if self.reflect else 'r'}{self.shift}"

    def describe(self) -> str:
        if self.reflect:
            return f"x -> ({self.shift} - x) mod {self.r}"
        return f"x -> (x + {self.shift}) mod {self.r}"


def dihedral_group(r: int) -> list[DihedralElement]:
    """Rotations first, then reflections, each ordered by shift."""
    return [DihedralElement(r, s, False) for s in range(r)] + [
        DihedralElement(r, s, True) for s in range(r)
    ]


Operand = Union[int, Address, BasepointSeq]


def apply_dihedral(sigma: DihedralElement, x: Operand) -> Operand:
    if isinstance(x, BasepointSeq):
        return BasepointSeq(tuple(map(sigma, x.preperiod)), tuple(map(sigma, x.period)))
    if isinstance(x, tuple):
        return tuple(map(sigma, x))
    return sigma(x)
