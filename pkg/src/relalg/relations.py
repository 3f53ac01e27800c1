"""Exact finite relations over an explicit universe.

An n-ary relation over a universe of size s is a bitset over the s**n tuple
indices.  Tuple (x1,...,xn) gets index sum(x_i * s**(n-i)), i.e. x1 is the
most significant base-s digit.  File formats and frozen test vectors depend
on this encoding, so it must not change.

Substitutions are index maps alpha: {1..n} -> {1..k}; they act on k-tuples
by selection and on n-ary relations by inverse image, landing in arity k.
All surface syntax uses 1-based indices; conversion to 0-based is internal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct
from typing import Iterable, Iterator, Sequence

from .errors import ArityError, FormatError, UniverseMismatchError


@dataclass(frozen=True)
class Universe:
    """Ground set {0, .., size-1}; size 0 is legal."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError(f"universe size must be >= 0, got {self.size}")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.size))


def tuple_index(size: int, tup: Sequence[int]) -> int:
    idx = 0
    for x in tup:
        idx = idx * size + x
    return idx


def index_tuple(size: int, arity: int, idx: int) -> tuple[int, ...]:
    out = [0] * arity
    for i in range(arity - 1, -1, -1):
        idx, out[i] = divmod(idx, size)
    return tuple(out)


@dataclass(frozen=True)
class Substitution:
    """Index map {1..dom} -> {1..cod}, stored 1-based as in all surface syntax."""

    dom: int
    cod: int
    map: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "map", tuple(self.map))
        if self.dom < 0 or self.cod < 0:
            raise ArityError(f"negative sort in substitution {self.dom}->{self.cod}")
        if len(self.map) != self.dom:
            raise ArityError(f"substitution map has length {len(self.map)}, expected {self.dom}")
        for entry in self.map:
            if not 1 <= entry <= self.cod:
                raise ArityError(f"substitution entry {entry} outside 1..{self.cod}")

    @classmethod
    def identity(cls, n: int) -> "Substitution":
        return cls(n, n, tuple(range(1, n + 1)))

    @property
    def is_cylindrification(self) -> bool:
        """True when the index map is strictly increasing."""
        return all(a < b for a, b in zip(self.map, self.map[1:]))

    def __str__(self) -> str:
        return f"[{','.join(str(i) for i in self.map)}]:{self.dom}->{self.cod}"


def all_substitutions(dom: int, cod: int) -> Iterator[Substitution]:
    """All index maps {1..dom} -> {1..cod}, in lexicographic order."""
    for entries in iproduct(range(1, cod + 1), repeat=dom):
        yield Substitution(dom, cod, entries)


def tuple_apply(alpha: Substitution, x: Sequence[int]) -> tuple[int, ...]:
    """Select coordinates: result[i] = x[alpha(i)].  Needs len(x) == alpha.cod."""
    if len(x) != alpha.cod:
        raise ArityError(f"tuple of length {len(x)} fed to substitution expecting {alpha.cod}")
    return tuple(x[i - 1] for i in alpha.map)


@dataclass(frozen=True)
class Relation:
    universe: Universe
    arity: int
    bits: int

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise ArityError(f"negative arity {self.arity}")
        if not 0 <= self.bits < (1 << self.num_tuples):
            raise ValueError(f"bitset out of range for arity {self.arity} over size {self.universe.size}")

    @property
    def num_tuples(self) -> int:
        return self.universe.size ** self.arity

    @property
    def full_mask(self) -> int:
        return (1 << self.num_tuples) - 1

    @classmethod
    def from_tuples(cls, universe: Universe, arity: int, tuples: Iterable[Sequence[int]]) -> "Relation":
        bits = 0
        for tup in tuples:
            if len(tup) != arity:
                raise ArityError(f"tuple {tuple(tup)} has length {len(tup)}, expected {arity}")
            for x in tup:
                if not 0 <= x < universe.size:
                    raise ValueError(f"element {x} outside universe of size {universe.size}")
            bits |= 1 << tuple_index(universe.size, tup)
        return cls(universe, arity, bits)

    def contains(self, tup: Sequence[int]) -> bool:
        if len(tup) != self.arity:
            raise ArityError(f"tuple of length {len(tup)} tested against arity {self.arity}")
        for x in tup:
            if not 0 <= x < self.universe.size:
                return False
        return bool(self.bits >> tuple_index(self.universe.size, tup) & 1)

    def tuples(self) -> Iterator[tuple[int, ...]]:
        size, arity, bits = self.universe.size, self.arity, self.bits
        idx = 0
        while bits:
            if bits & 1:
                yield index_tuple(size, arity, idx)
            bits >>= 1
            idx += 1

    def __and__(self, other: "Relation") -> "Relation":
        return meet(self, other)

    def __or__(self, other: "Relation") -> "Relation":
        return join(self, other)

    def __invert__(self) -> "Relation":
        return complement(self)

    def __str__(self) -> str:
        return relation_literal(self)


def _check_same_sort(r: Relation, s: Relation) -> None:
    if r.universe != s.universe:
        raise UniverseMismatchError(f"universes of sizes {r.universe.size} and {s.universe.size}")
    if r.arity != s.arity:
        raise ArityError(f"arities {r.arity} and {s.arity} differ")


def meet(r: Relation, s: Relation) -> Relation:
    _check_same_sort(r, s)
    return Relation(r.universe, r.arity, r.bits & s.bits)


def join(r: Relation, s: Relation) -> Relation:
    _check_same_sort(r, s)
    return Relation(r.universe, r.arity, r.bits | s.bits)


def complement(r: Relation) -> Relation:
    return Relation(r.universe, r.arity, r.bits ^ r.full_mask)


def top(universe: Universe, arity: int) -> Relation:
    return Relation(universe, arity, (1 << universe.size ** arity) - 1)


def bottom(universe: Universe, arity: int) -> Relation:
    return Relation(universe, arity, 0)


def leq(r: Relation, s: Relation) -> bool:
    _check_same_sort(r, s)
    return r.bits & s.bits == r.bits


@lru_cache(maxsize=None)
def _index_map(alpha: Substitution, size: int) -> tuple[int, ...]:
    """For each target tuple index (arity cod) the source index (arity dom)."""
    out = []
    for ti in range(size ** alpha.cod):
        x = index_tuple(size, alpha.cod, ti)
        out.append(tuple_index(size, tuple(x[i - 1] for i in alpha.map)))
    return tuple(out)


def _rel_apply_bits(alpha: Substitution, size: int, bits: int) -> int:
    out = 0
    for ti, si in enumerate(_index_map(alpha, size)):
        if bits >> si & 1:
            out |= 1 << ti
    return out


def rel_apply(alpha: Substitution, r: Relation) -> Relation:
    """Inverse image: x in result iff tuple_apply(alpha, x) in r.  Arity dom -> cod."""
    if r.arity != alpha.dom:
        raise ArityError(f"relation of arity {r.arity} fed to substitution {alpha}")
    return Relation(r.universe, alpha.cod, _rel_apply_bits(alpha, r.universe.size, r.bits))


def compose(beta: Substitution, alpha: Substitution) -> Substitution:
    """Composite with rel_apply(compose(beta, alpha), r) == rel_apply(beta, rel_apply(alpha, r))."""
    if beta.dom != alpha.cod:
        raise ArityError(f"cannot compose {beta} after {alpha}")
    return Substitution(alpha.dom, beta.cod, tuple(beta.map[a - 1] for a in alpha.map))


def exists_last(r: Relation) -> Relation:
    """Project away the last coordinate: x in result iff xy in r for some y."""
    if r.arity < 1:
        raise ArityError("cannot project a relation of arity 0")
    size = r.universe.size
    chunk_mask = (1 << size) - 1
    out = 0
    for t in range(size ** (r.arity - 1)):
        if r.bits >> (t * size) & chunk_mask:
            out |= 1 << t
    return Relation(r.universe, r.arity - 1, out)


def delta(universe: Universe, arity: int, i: int, j: int) -> Relation:
    """The n-ary relation holding of a tuple iff coordinates i and j agree (1-based)."""
    if not (1 <= i <= arity and 1 <= j <= arity):
        raise ArityError(f"diagonal indices ({i},{j}) outside 1..{arity}")
    size = universe.size
    bits = 0
    for idx in range(size ** arity):
        t = index_tuple(size, arity, idx)
        if t[i - 1] == t[j - 1]:
            bits |= 1 << idx
    return Relation(universe, arity, bits)


def partitioning(*arities: int) -> list[Substitution]:
    """Block-inclusion cylindrifications c_i: k_i -> k_1+..+k_m, with
    tuple_apply(c_i, x_1...x_m) = x_i.  The empty call yields the empty family
    on target sort 0."""
    total = sum(arities)
    out = []
    offset = 0
    for k in arities:
        if k < 0:
            raise ArityError(f"negative block arity {k}")
        out.append(Substitution(k, total, tuple(range(offset + 1, offset + k + 1))))
        offset += k
    return out


def assoc_cylindrification(n: int) -> Substitution:
    """The cylindrification n -> n+1 dropping the last coordinate:
    tuple_apply(c, xy) = x."""
    return Substitution(n, n + 1, tuple(range(1, n + 1)))


_LITERAL_RE = re.compile(r"arity=(\d+)universe=(\d+)\{(.*)\}\Z")


def relation_literal(r: Relation) -> str:
    body = ",".join("(" + ",".join(str(x) for x in t) + ")" for t in r.tuples())
    return f"arity={r.arity} universe={r.universe.size} {{{body}}}"


def parse_relation_literal(text: str) -> Relation:
    """Parse ``arity=2 universe=3 {(0,1),(2,0)}``; whitespace-insensitive."""
    squeezed = re.sub(r"\s+", "", text)
    m = _LITERAL_RE.match(squeezed)
    if m is None:
        raise FormatError(f"malformed relation literal: {text!r}")
    arity, size, body = int(m.group(1)), int(m.group(2)), m.group(3)
    universe = Universe(size)
    if body == "":
        return bottom(universe, arity)
    parts = re.findall(r"\(([\d,]*)\)", body)
    if ",".join(f"({p})" for p in parts) != body:
        raise FormatError(f"malformed tuple list in relation literal: {text!r}")
    tuples = []
    for p in parts:
        if p and not re.fullmatch(r"\d+(,\d+)*", p):
            raise FormatError(f"malformed tuple ({p}) in relation literal")
        tuples.append(tuple(int(x) for x in p.split(",")) if p else ())
    try:
        return Relation.from_tuples(universe, arity, tuples)
    except (ArityError, ValueError) as exc:
        raise FormatError(f"bad relation literal: {exc}") from exc
