"""Finite, sort-truncated multisorted algebras of relations.

An algebra carries sorts 0..max_sort; sort n is a finite list of elements
addressed by indices 0..size-1.  Operation symbols: the lattice constants and
operations on every sort, all substitutions between in-bounds sorts,
projection (per fragment), negation (per fragment) and diagonal constants
(per fragment).  Operations whose sorts exceed the bound raise
InsufficientSortsError; algebras with concrete, product or generated
provenance can materialize higher sorts via extend().

All algebras are immutable after construction; caches are lock-guarded so
concurrent readers see consistent tables.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    ArityError,
    ElementCapExceededError,
    FormatError,
    FragmentError,
    InsufficientSortsError,
)
from .fragments import Fragment, parse_fragment
from .relations import (
    Relation,
    Substitution,
    Universe,
    all_substitutions,
    _rel_apply_bits,
    delta as rel_delta,
    relation_literal,
)

DEFAULT_ELEMENT_CAP = 1 << 20


class FiniteAlgebra:
    """Base interface.  Elements of sort n are the integers 0..sort_size(n)-1
    in the algebra's canonical order; every deterministic tie-break in the
    package uses this order."""

    fragment: Fragment
    max_sort: int
    element_cap: int
    provenance: str

    def __init__(self, fragment: Fragment, max_sort: int, element_cap: int, provenance: str):
        if max_sort < 0:
            raise ArityError(f"max_sort must be >= 0, got {max_sort}")
        self.fragment = fragment
        self.max_sort = max_sort
        self.element_cap = element_cap
        self.provenance = provenance
        self._cache_lock = threading.Lock()
        self._subst_cache: dict[Substitution, list[int]] = {}
        self._exists_cache: dict[int, list[int]] = {}
        self._neg_cache: dict[int, list[int]] = {}

    # -- sizes and guards ---------------------------------------------------

    def sort_size(self, n: int) -> int:
        raise NotImplementedError

    def _check_sort(self, n: int) -> None:
        if not 0 <= n <= self.max_sort:
            raise InsufficientSortsError(
                f"sort {n} outside bounds 0..{self.max_sort} ({self.provenance})"
            )

    def ensure_enumerable(self, n: int) -> None:
        self._check_sort(n)
        if self.sort_size(n) > self.element_cap:
            raise ElementCapExceededError(
                f"sort {n} has {self.sort_size(n)} elements, cap is {self.element_cap}"
            )

    def elements(self, n: int) -> range:
        self.ensure_enumerable(n)
        return range(self.sort_size(n))

    # -- operations ---------------------------------------------------------

    def zero(self, n: int) -> int:
        raise NotImplementedError

    def one(self, n: int) -> int:
        raise NotImplementedError

    def meet(self, n: int, a: int, b: int) -> int:
        raise NotImplementedError

    def join(self, n: int, a: int, b: int) -> int:
        raise NotImplementedError

    def neg(self, n: int, a: int) -> int:
        raise NotImplementedError

    def subst(self, alpha: Substitution, a: int) -> int:
        """Apply the substitution symbol alpha: dom -> cod to a sort-dom element."""
        raise NotImplementedError

    def exists(self, n: int, a: int) -> int:
        """Project a sort-(n+1) element to sort n."""
        raise NotImplementedError

    def delta(self, n: int, i: int, j: int) -> int:
        raise NotImplementedError

    def leq(self, n: int, a: int, b: int) -> bool:
        return self.meet(n, a, b) == a

    def _require(self, feature: str) -> None:
        have = {"negation": self.fragment.negation, "exists": self.fragment.exists,
                "equality": self.fragment.equality}[feature]
        if not have:
            raise FragmentError(f"{feature} not available in fragment {self.fragment}")

    # -- tables (for the schema checker; cached) -----------------------------

    def subst_table(self, alpha: Substitution) -> list[int]:
        with self._cache_lock:
            table = self._subst_cache.get(alpha)
        if table is not None:
            return table
        table = [self.subst(alpha, a) for a in self.elements(alpha.dom)]
        with self._cache_lock:
            self._subst_cache[alpha] = table
        return table

    def exists_table(self, n: int) -> list[int]:
        with self._cache_lock:
            table = self._exists_cache.get(n)
        if table is not None:
            return table
        table = [self.exists(n, a) for a in self.elements(n + 1)]
        with self._cache_lock:
            self._exists_cache[n] = table
        return table

    def neg_table(self, n: int) -> list[int]:
        with self._cache_lock:
            table = self._neg_cache.get(n)
        if table is not None:
            return table
        table = [self.neg(n, a) for a in self.elements(n)]
        with self._cache_lock:
            self._neg_cache[n] = table
        return table

    # -- extension ----------------------------------------------------------

    def extend(self, new_max_sort: int) -> "FiniteAlgebra":
        if new_max_sort <= self.max_sort:
            return self
        raise InsufficientSortsError(
            f"{self.provenance} algebra cannot materialize sorts above {self.max_sort}"
        )

    # -- reporting ----------------------------------------------------------

    def element_label(self, n: int, a: int) -> str:
        return str(a)


def ensure_sort(algebra: FiniteAlgebra, n: int) -> FiniteAlgebra:
    """The algebra itself, or a lazily extended copy carrying sort n."""
    return algebra if n <= algebra.max_sort else algebra.extend(n)


# ---------------------------------------------------------------------------
# Concrete algebras of relations


class ConcreteAlgebra(FiniteAlgebra):
    """All relations over a fixed universe.  The element index of sort n IS
    the relation's bitset, so canonical order is numeric bitset order."""

    def __init__(self, universe: Universe, fragment: Fragment, max_sort: int,
                 element_cap: int = DEFAULT_ELEMENT_CAP):
        super().__init__(fragment, max_sort, element_cap, f"concrete({universe.size})")
        self.universe = universe
        if self.sort_size(max_sort) > element_cap:
            raise ElementCapExceededError(
                f"sort {max_sort} over universe of size {universe.size} has "
                f"{self.sort_size(max_sort)} elements, cap is {element_cap}"
            )

    def sort_size(self, n: int) -> int:
        return 1 << self.universe.size**n

    def zero(self, n: int) -> int:
        self._check_sort(n)
        return 0

    def one(self, n: int) -> int:
        self._check_sort(n)
        return (1 << self.universe.size**n) - 1

    def meet(self, n: int, a: int, b: int) -> int:
        self._check_sort(n)
        return a & b

    def join(self, n: int, a: int, b: int) -> int:
        self._check_sort(n)
        return a | b

    def neg(self, n: int, a: int) -> int:
        self._require("negation")
        self._check_sort(n)
        return a ^ ((1 << self.universe.size**n) - 1)

    def subst(self, alpha: Substitution, a: int) -> int:
        self._check_sort(alpha.dom)
        self._check_sort(alpha.cod)
        return _rel_apply_bits(alpha, self.universe.size, a)

    def exists(self, n: int, a: int) -> int:
        self._require("exists")
        self._check_sort(n)
        self._check_sort(n + 1)
        size = self.universe.size
        chunk = (1 << size) - 1
        out = 0
        for t in range(size**n):
            if a >> (t * size) & chunk:
                out |= 1 << t
        return out

    def delta(self, n: int, i: int, j: int) -> int:
        self._require("equality")
        self._check_sort(n)
        return rel_delta(self.universe, n, i, j).bits

    def extend(self, new_max_sort: int) -> "ConcreteAlgebra":
        if new_max_sort <= self.max_sort:
            return self
        return ConcreteAlgebra(self.universe, self.fragment, new_max_sort, self.element_cap)

    def relation(self, n: int, a: int) -> Relation:
        return Relation(self.universe, n, a)

    def element_label(self, n: int, a: int) -> str:
        return relation_literal(self.relation(n, a))


def concrete(universe: Universe, fragment: Fragment, max_sort: int,
             element_cap: int = DEFAULT_ELEMENT_CAP) -> ConcreteAlgebra:
    return ConcreteAlgebra(universe, fragment, max_sort, element_cap)


# ---------------------------------------------------------------------------
# Products


class ProductAlgebra(FiniteAlgebra):
    """Componentwise product.  Sort-n elements encode component element tuples
    in mixed radix, first factor most significant."""

    def __init__(self, factors: Sequence[FiniteAlgebra], element_cap: int = DEFAULT_ELEMENT_CAP):
        factors = list(factors)
        if not factors:
            raise ArityError("product needs at least one factor")
        first = factors[0]
        for f in factors[1:]:
            if f.fragment != first.fragment:
                raise FragmentError(
                    f"product factors have different fragments {first.fragment} and {f.fragment}"
                )
            if f.max_sort != first.max_sort:
                raise ArityError(
                    f"product factors have different sort bounds {first.max_sort} and {f.max_sort}"
                )
        super().__init__(first.fragment, first.max_sort, element_cap,
                         f"product({', '.join(f.provenance for f in factors)})")
        self.factors = factors

    def sort_size(self, n: int) -> int:
        size = 1
        for f in self.factors:
            size *= f.sort_size(n)
        return size

    def decode(self, n: int, a: int) -> tuple[int, ...]:
        out = [0] * len(self.factors)
        for i in range(len(self.factors) - 1, -1, -1):
            a, out[i] = divmod(a, self.factors[i].sort_size(n))
        return tuple(out)

    def encode(self, n: int, components: Sequence[int]) -> int:
        a = 0
        for f, c in zip(self.factors, components):
            a = a * f.sort_size(n) + c
        return a

    def _map(self, n_in: int, n_out: int, a: int, op) -> int:
        comps = self.decode(n_in, a)
        return self.encode(n_out, [op(f, c) for f, c in zip(self.factors, comps)])

    def zero(self, n: int) -> int:
        self._check_sort(n)
        return self.encode(n, [f.zero(n) for f in self.factors])

    def one(self, n: int) -> int:
        self._check_sort(n)
        return self.encode(n, [f.one(n) for f in self.factors])

    def meet(self, n: int, a: int, b: int) -> int:
        self._check_sort(n)
        ca, cb = self.decode(n, a), self.decode(n, b)
        return self.encode(n, [f.meet(n, x, y) for f, x, y in zip(self.factors, ca, cb)])

    def join(self, n: int, a: int, b: int) -> int:
        self._check_sort(n)
        ca, cb = self.decode(n, a), self.decode(n, b)
        return self.encode(n, [f.join(n, x, y) for f, x, y in zip(self.factors, ca, cb)])

    def neg(self, n: int, a: int) -> int:
        self._require("negation")
        self._check_sort(n)
        return self._map(n, n, a, lambda f, c: f.neg(n, c))

    def subst(self, alpha: Substitution, a: int) -> int:
        self._check_sort(alpha.dom)
        self._check_sort(alpha.cod)
        return self._map(alpha.dom, alpha.cod, a, lambda f, c: f.subst(alpha, c))

    def exists(self, n: int, a: int) -> int:
        self._require("exists")
        self._check_sort(n + 1)
        return self._map(n + 1, n, a, lambda f, c: f.exists(n, c))

    def delta(self, n: int, i: int, j: int) -> int:
        self._require("equality")
        self._check_sort(n)
        return self.encode(n, [f.delta(n, i, j) for f in self.factors])

    def extend(self, new_max_sort: int) -> "ProductAlgebra":
        if new_max_sort <= self.max_sort:
            return self
        return ProductAlgebra([f.extend(new_max_sort) for f in self.factors], self.element_cap)

    def projection(self, i: int, bound: int | None = None) -> dict[int, list[int]]:
        """The i-th projection as a per-sort element map."""
        bound = self.max_sort if bound is None else bound
        return {
            n: [self.decode(n, a)[i] for a in self.elements(n)]
            for n in range(bound + 1)
        }

    def element_label(self, n: int, a: int) -> str:
        comps = self.decode(n, a)
        return "(" + ", ".join(f.element_label(n, c) for f, c in zip(self.factors, comps)) + ")"


def product(factors: Sequence[FiniteAlgebra], element_cap: int = DEFAULT_ELEMENT_CAP) -> ProductAlgebra:
    return ProductAlgebra(factors, element_cap)


# ---------------------------------------------------------------------------
# Generated subalgebras


class GeneratedSubalgebra(FiniteAlgebra):
    """Least subset of the parent closed under all in-bounds operations.

    Elements are identified by their parent value; the local index is the rank
    in parent canonical order.  Each element records the first witnessing term
    found by breadth-first closure (generators in input order), written in the
    term grammar over the generator names."""

    def __init__(self, parent: FiniteAlgebra, generators: Sequence[tuple[int, int]],
                 names: Sequence[str] | None = None,
                 element_cap: int = DEFAULT_ELEMENT_CAP):
        super().__init__(parent.fragment, parent.max_sort, element_cap,
                         f"generated({parent.provenance})")
        self.parent = parent
        self.generators = tuple((int(s), int(g)) for s, g in generators)
        if names is None:
            names = [f"g{i + 1}" for i in range(len(self.generators))]
        if len(names) != len(self.generators):
            raise ArityError("one name per generator required")
        self.generator_names = tuple(names)
        for sort, g in self.generators:
            self._check_sort(sort)
            if not 0 <= g < parent.sort_size(sort):
                raise ArityError(f"generator {g} outside parent sort {sort}")
        self._close()

    def _close(self) -> None:
        parent, frag, bound = self.parent, self.fragment, self.max_sort
        found: list[dict[int, str]] = [dict() for _ in range(bound + 1)]
        queue: list[tuple[int, int]] = []

        def add(n: int, val: int, term: str) -> None:
            if val not in found[n]:
                if len(found[n]) >= self.element_cap:
                    raise ElementCapExceededError(
                        f"closure of sort {n} exceeds element cap {self.element_cap}"
                    )
                found[n][val] = term
                queue.append((n, val))

        for n in range(bound + 1):
            add(n, parent.zero(n), f"bot {n}")
            add(n, parent.one(n), f"top {n}")
            if frag.equality:
                for i in range(1, n + 1):
                    for j in range(1, n + 1):
                        add(n, parent.delta(n, i, j), f"delta {n} {i} {j}")
        for (sort, g), name in zip(self.generators, self.generator_names):
            add(sort, g, name)

        head = 0
        while head < len(queue):
            n, val = queue[head]
            head += 1
            term = found[n][val]
            if frag.negation:
                add(n, parent.neg(n, val), f"not({term})")
            if frag.exists and n >= 1:
                add(n - 1, parent.exists(n - 1, val), f"exists({term})")
            for k in range(bound + 1):
                for alpha in all_substitutions(n, k):
                    entries = ",".join(str(i) for i in alpha.map)
                    arrow = "" if alpha.cod == max(alpha.map, default=0) else f"->{alpha.cod}"
                    add(k, parent.subst(alpha, val), f"sub [{entries}]{arrow} {term}")
            for other, other_term in list(found[n].items()):
                add(n, parent.meet(n, val, other), f"and({term}, {other_term})")
                add(n, parent.join(n, val, other), f"or({term}, {other_term})")

        self._to_parent = [sorted(found[n]) for n in range(bound + 1)]
        self._from_parent = [
            {val: idx for idx, val in enumerate(vals)} for vals in self._to_parent
        ]
        self._witness = [
            [found[n][val] for val in self._to_parent[n]] for n in range(bound + 1)
        ]
        # memo tables for the binary operations; closure-sized sorts make the
        # per-call parent decode/encode the dominant cost otherwise
        self._memo_meet: dict[tuple[int, int, int], int] = {}
        self._memo_join: dict[tuple[int, int, int], int] = {}

    def sort_size(self, n: int) -> int:
        self._check_sort(n)
        return len(self._to_parent[n])

    def to_parent(self, n: int, a: int) -> int:
        return self._to_parent[n][a]

    def from_parent(self, n: int, val: int) -> int:
        return self._from_parent[n][val]

    def witness_term(self, n: int, a: int) -> str:
        return self._witness[n][a]

    def _wrap(self, n: int, val: int) -> int:
        idx = self._from_parent[n].get(val)
        if idx is None:
            raise AssertionError(f"closure not closed: sort {n} value {val}")
        return idx

    def zero(self, n: int) -> int:
        self._check_sort(n)
        return self._wrap(n, self.parent.zero(n))

    def one(self, n: int) -> int:
        self._check_sort(n)
        return self._wrap(n, self.parent.one(n))

    def meet(self, n: int, a: int, b: int) -> int:
        key = (n, a, b)
        out = self._memo_meet.get(key)
        if out is None:
            out = self._wrap(n, self.parent.meet(n, self._to_parent[n][a], self._to_parent[n][b]))
            self._memo_meet[key] = out
        return out

    def join(self, n: int, a: int, b: int) -> int:
        key = (n, a, b)
        out = self._memo_join.get(key)
        if out is None:
            out = self._wrap(n, self.parent.join(n, self._to_parent[n][a], self._to_parent[n][b]))
            self._memo_join[key] = out
        return out

    def neg(self, n: int, a: int) -> int:
        self._require("negation")
        return self._wrap(n, self.parent.neg(n, self._to_parent[n][a]))

    def subst(self, alpha: Substitution, a: int) -> int:
        self._check_sort(alpha.dom)
        self._check_sort(alpha.cod)
        return self._wrap(alpha.cod, self.parent.subst(alpha, self._to_parent[alpha.dom][a]))

    def exists(self, n: int, a: int) -> int:
        self._require("exists")
        self._check_sort(n + 1)
        return self._wrap(n, self.parent.exists(n, self._to_parent[n + 1][a]))

    def delta(self, n: int, i: int, j: int) -> int:
        self._require("equality")
        self._check_sort(n)
        return self._wrap(n, self.parent.delta(n, i, j))

    def extend(self, new_max_sort: int) -> "GeneratedSubalgebra":
        """Re-close over the extended parent.  Only conservative extensions are
        allowed: if closure through the new sorts would add elements to an old
        sort (possible once projection is in the signature), the old element
        indices would shift, so we refuse instead."""
        if new_max_sort <= self.max_sort:
            return self
        bigger = GeneratedSubalgebra(
            self.parent.extend(new_max_sort), self.generators, self.generator_names,
            self.element_cap,
        )
        for n in range(self.max_sort + 1):
            if bigger._to_parent[n] != self._to_parent[n]:
                raise InsufficientSortsError(
                    f"extension to sort {new_max_sort} is not conservative: "
                    f"sort {n} grows from {len(self._to_parent[n])} to "
                    f"{len(bigger._to_parent[n])} elements"
                )
        return bigger

    def element_label(self, n: int, a: int) -> str:
        return self._witness[n][a]


def generated_subalgebra(parent: FiniteAlgebra, generators: Sequence[tuple[int, int]],
                         names: Sequence[str] | None = None,
                         element_cap: int = DEFAULT_ELEMENT_CAP) -> GeneratedSubalgebra:
    return GeneratedSubalgebra(parent, generators, names, element_cap)


# ---------------------------------------------------------------------------
# Explicit table presentations


class TableAlgebra(FiniteAlgebra):
    """Operation tables given explicitly.  Cannot materialize sorts above the
    bound unless a backing algebra was attached at construction."""

    def __init__(self, fragment: Fragment, max_sort: int, sizes: Sequence[int],
                 meets: Sequence[Sequence[Sequence[int]]],
                 joins: Sequence[Sequence[Sequence[int]]],
                 zeros: Sequence[int], ones: Sequence[int],
                 substs: dict[Substitution, Sequence[int]],
                 negs: Sequence[Sequence[int]] | None = None,
                 exists_tables: dict[int, Sequence[int]] | None = None,
                 deltas: dict[tuple[int, int, int], int] | None = None,
                 extension: FiniteAlgebra | None = None,
                 element_cap: int = DEFAULT_ELEMENT_CAP):
        super().__init__(fragment, max_sort, element_cap, "tables")
        self.sizes = [int(s) for s in sizes]
        self.meets = [[list(row) for row in t] for t in meets]
        self.joins = [[list(row) for row in t] for t in joins]
        self.zeros = list(zeros)
        self.ones = list(ones)
        self.substs = {a: list(t) for a, t in substs.items()}
        self.negs = [list(t) for t in negs] if negs is not None else None
        self.exists_tables = {int(n): list(t) for n, t in (exists_tables or {}).items()}
        self.deltas = dict(deltas or {})
        self._extension = extension
        self._validate()

    def _validate(self) -> None:
        n_sorts = self.max_sort + 1
        if not (len(self.sizes) == len(self.meets) == len(self.joins)
                == len(self.zeros) == len(self.ones) == n_sorts):
            raise FormatError(f"expected data for {n_sorts} sorts")
        for n, size in enumerate(self.sizes):
            if size <= 0:
                raise FormatError(f"sort {n} has non-positive size {size}")

            def check_elem(x, what):
                if not isinstance(x, int) or not 0 <= x < size:
                    raise FormatError(f"{what} of sort {n} out of range: {x!r}")

            check_elem(self.zeros[n], "zero")
            check_elem(self.ones[n], "one")
            for name, table in (("meet", self.meets[n]), ("join", self.joins[n])):
                if len(table) != size or any(len(row) != size for row in table):
                    raise FormatError(f"{name} table of sort {n} is not {size}x{size}")
                for row in table:
                    for x in row:
                        check_elem(x, f"{name} entry")
        if self.fragment.negation:
            if self.negs is None or len(self.negs) != n_sorts:
                raise FormatError("negation tables required for this fragment")
            for n, table in enumerate(self.negs):
                if len(table) != self.sizes[n]:
                    raise FormatError(f"negation table of sort {n} has wrong length")
        for n in range(n_sorts):
            for k in range(n_sorts):
                for alpha in all_substitutions(n, k):
                    table = self.substs.get(alpha)
                    if table is None:
                        raise FormatError(f"missing substitution table for {alpha}")
                    if len(table) != self.sizes[n]:
                        raise FormatError(f"substitution table for {alpha} has wrong length")
                    for x in table:
                        if not 0 <= x < self.sizes[k]:
                            raise FormatError(f"substitution table for {alpha} out of range")
        if self.fragment.exists:
            for n in range(n_sorts - 1):
                table = self.exists_tables.get(n)
                if table is None:
                    raise FormatError(f"missing projection table onto sort {n}")
                if len(table) != self.sizes[n + 1]:
                    raise FormatError(f"projection table onto sort {n} has wrong length")
                for x in table:
                    if not 0 <= x < self.sizes[n]:
                        raise FormatError(f"projection table onto sort {n} out of range")
        if self.fragment.equality:
            for n in range(n_sorts):
                for i in range(1, n + 1):
                    for j in range(1, n + 1):
                        if (n, i, j) not in self.deltas:
                            raise FormatError(f"missing diagonal constant ({n},{i},{j})")
                        if not 0 <= self.deltas[(n, i, j)] < self.sizes[n]:
                            raise FormatError(f"diagonal constant ({n},{i},{j}) out of range")

    def sort_size(self, n: int) -> int:
        self._check_sort(n)
        return self.sizes[n]

    def zero(self, n: int) -> int:
        self._check_sort(n)
        return self.zeros[n]

    def one(self, n: int) -> int:
        self._check_sort(n)
        return self.ones[n]

    def meet(self, n: int, a: int, b: int) -> int:
        self._check_sort(n)
        return self.meets[n][a][b]

    def join(self, n: int, a: int, b: int) -> int:
        self._check_sort(n)
        return self.joins[n][a][b]

    def neg(self, n: int, a: int) -> int:
        self._require("negation")
        self._check_sort(n)
        return self.negs[n][a]

    def subst(self, alpha: Substitution, a: int) -> int:
        self._check_sort(alpha.dom)
        self._check_sort(alpha.cod)
        return self.substs[alpha][a]

    def exists(self, n: int, a: int) -> int:
        self._require("exists")
        self._check_sort(n + 1)
        return self.exists_tables[n][a]

    def delta(self, n: int, i: int, j: int) -> int:
        self._require("equality")
        self._check_sort(n)
        return self.deltas[(n, i, j)]

    def subst_table(self, alpha: Substitution) -> list[int]:
        self._check_sort(alpha.dom)
        self._check_sort(alpha.cod)
        return self.substs[alpha]

    def extend(self, new_max_sort: int) -> "TableAlgebra":
        if new_max_sort <= self.max_sort:
            return self
        if self._extension is None:
            raise InsufficientSortsError(
                f"table algebra has no sorts above {self.max_sort}"
            )
        return as_table_algebra(self._extension.extend(new_max_sort), with_extension=True,
                                element_cap=self.element_cap)

    # -- JSON ----------------------------------------------------------------

    @classmethod
    def from_json(cls, text: str, extension: FiniteAlgebra | None = None) -> "TableAlgebra":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad algebra file: {exc}") from exc
        try:
            fragment = parse_fragment(data["fragment"])
            max_sort = int(data["max_sort"])
            sorts = data["sorts"]
            sizes = [s["size"] for s in sorts]
            meets = [s["meet"] for s in sorts]
            joins = [s["join"] for s in sorts]
            zeros = [s["zero"] for s in sorts]
            ones = [s["one"] for s in sorts]
            negs = [s["neg"] for s in sorts] if fragment.negation else None
            substs = {}
            for key, table in data.get("subst", {}).items():
                substs[_parse_subst_key(key)] = table
            exists_tables = {int(k): v for k, v in data.get("exists", {}).items()}
            deltas = {}
            for key, val in data.get("delta", {}).items():
                n_part, ij = key.split(":")
                i_part, j_part = ij.split(",")
                deltas[(int(n_part), int(i_part), int(j_part))] = val
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise FormatError(f"bad algebra file: {exc!r}") from exc
        return cls(fragment, max_sort, sizes, meets, joins, zeros, ones, substs,
                   negs=negs, exists_tables=exists_tables, deltas=deltas, extension=extension)

    def to_json(self) -> str:
        sorts = []
        for n in range(self.max_sort + 1):
            entry = {
                "size": self.sizes[n],
                "meet": self.meets[n],
                "join": self.joins[n],
                "zero": self.zeros[n],
                "one": self.ones[n],
            }
            if self.negs is not None:
                entry["neg"] = self.negs[n]
            sorts.append(entry)
        data = {
            "fragment": str(self.fragment),
            "max_sort": self.max_sort,
            "sorts": sorts,
            "subst": {_subst_key(a): t for a, t in sorted(self.substs.items(),
                                                          key=lambda kv: _subst_key(kv[0]))},
        }
        if self.exists_tables:
            data["exists"] = {str(n): t for n, t in sorted(self.exists_tables.items())}
        if self.deltas:
            data["delta"] = {f"{n}:{i},{j}": v for (n, i, j), v in sorted(self.deltas.items())}
        return json.dumps(data, sort_keys=True)


def _subst_key(alpha: Substitution) -> str:
    return f"{alpha.dom}->{alpha.cod}:[{','.join(str(i) for i in alpha.map)}]"


def _parse_subst_key(key: str) -> Substitution:
    m = key.split(":")
    if len(m) != 2:
        raise FormatError(f"bad substitution key {key!r}")
    doms, brack = m
    dom_s, cod_s = doms.split("->")
    if not (brack.startswith("[") and brack.endswith("]")):
        raise FormatError(f"bad substitution key {key!r}")
    inner = brack[1:-1]
    entries = tuple(int(x) for x in inner.split(",")) if inner else ()
    return Substitution(int(dom_s), int(cod_s), entries)


def as_table_algebra(algebra: FiniteAlgebra, with_extension: bool = False,
                     element_cap: int = DEFAULT_ELEMENT_CAP) -> TableAlgebra:
    """Re-present an algebra as anonymous operation tables.  With
    with_extension=True the original is kept as a backing so higher sorts can
    still be materialized (as tables) on demand."""
    n_sorts = algebra.max_sort + 1
    sizes = []
    meets, joins, zeros, ones = [], [], [], []
    negs = [] if algebra.fragment.negation else None
    for n in range(n_sorts):
        algebra.ensure_enumerable(n)
        size = algebra.sort_size(n)
        sizes.append(size)
        meets.append([[algebra.meet(n, a, b) for b in range(size)] for a in range(size)])
        joins.append([[algebra.join(n, a, b) for b in range(size)] for a in range(size)])
        zeros.append(algebra.zero(n))
        ones.append(algebra.one(n))
        if negs is not None:
            negs.append([algebra.neg(n, a) for a in range(size)])
    substs = {}
    for n in range(n_sorts):
        for k in range(n_sorts):
            for alpha in all_substitutions(n, k):
                substs[alpha] = list(algebra.subst_table(alpha))
    exists_tables = {}
    if algebra.fragment.exists:
        for n in range(n_sorts - 1):
            exists_tables[n] = [algebra.exists(n, a) for a in algebra.elements(n + 1)]
    deltas = {}
    if algebra.fragment.equality:
        for n in range(n_sorts):
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    deltas[(n, i, j)] = algebra.delta(n, i, j)
    return TableAlgebra(algebra.fragment, algebra.max_sort, sizes, meets, joins,
                        zeros, ones, substs, negs=negs, exists_tables=exists_tables,
                        deltas=deltas, extension=algebra if with_extension else None,
                        element_cap=element_cap)


# ---------------------------------------------------------------------------
# Morphism verification


@dataclass
class MorphismReport:
    ok: bool
    checks: int
    violations: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_morphism(fmap: dict[int, Sequence[int]], src: FiniteAlgebra, dst: FiniteAlgebra,
                    mode: str = "full", max_sort: int | None = None,
                    violation_cap: int = 5) -> MorphismReport:
    """Check that the per-sort element map preserves constants, lattice
    operations, substitutions, and the fragment's extra symbols.  mode
    "almost" demands only the containment exists(f(r)) <= f(exists(r)) for
    projection instead of equality."""
    if mode not in ("full", "almost"):
        raise ValueError(f"unknown mode {mode!r}")
    bound = src.max_sort if max_sort is None else min(max_sort, src.max_sort)
    bound = min(bound, dst.max_sort)
    violations: list[str] = []
    checks = 0

    def bad(msg: str) -> None:
        if len(violations) < violation_cap:
            violations.append(msg)

    for n in range(bound + 1):
        f = fmap[n]
        checks += 2
        if f[src.zero(n)] != dst.zero(n):
            bad(f"constant 0 of sort {n} not preserved")
        if f[src.one(n)] != dst.one(n):
            bad(f"constant 1 of sort {n} not preserved")
        for a in src.elements(n):
            for b in src.elements(n):
                checks += 2
                if f[src.join(n, a, b)] != dst.join(n, f[a], f[b]):
                    bad(f"join of sort-{n} elements {a},{b} not preserved")
                if f[src.meet(n, a, b)] != dst.meet(n, f[a], f[b]):
                    bad(f"meet of sort-{n} elements {a},{b} not preserved")
        if src.fragment.negation:
            for a in src.elements(n):
                checks += 1
                if f[src.neg(n, a)] != dst.neg(n, f[a]):
                    bad(f"negation of sort-{n} element {a} not preserved")
        if src.fragment.equality:
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    checks += 1
                    if f[src.delta(n, i, j)] != dst.delta(n, i, j):
                        bad(f"diagonal ({n},{i},{j}) not preserved")
    for n in range(bound + 1):
        for k in range(bound + 1):
            for alpha in all_substitutions(n, k):
                fk = fmap[k]
                fn = fmap[n]
                for a in src.elements(n):
                    checks += 1
                    if fk[src.subst(alpha, a)] != dst.subst(alpha, fn[a]):
                        bad(f"substitution {alpha} at sort-{n} element {a} not preserved")
    if src.fragment.exists:
        for n in range(bound):
            f_lo, f_hi = fmap[n], fmap[n + 1]
            for a in src.elements(n + 1):
                checks += 1
                lhs = dst.exists(n, f_hi[a])
                rhs = f_lo[src.exists(n, a)]
                if mode == "full":
                    if lhs != rhs:
                        bad(f"projection of sort-{n + 1} element {a} not preserved")
                else:
                    if not dst.leq(n, lhs, rhs):
                        bad(f"projection containment fails at sort-{n + 1} element {a}")
    return MorphismReport(not violations, checks, violations)


def kernel(fmap: dict[int, Sequence[int]], sort: int) -> set[tuple[int, int]]:
    """Pairs of same-sort elements identified by the map."""
    f = fmap[sort]
    out = set()
    for a in range(len(f)):
        for b in range(a + 1, len(f)):
            if f[a] == f[b]:
                out.add((a, b))
    return out


def is_injective(fmap: dict[int, Sequence[int]], sorts: Iterable[int]) -> bool:
    return all(len(set(fmap[n])) == len(fmap[n]) for n in sorts)
