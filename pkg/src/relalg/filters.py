"""Order theory of one sort of a finite algebra: the lattice structure is
verified on construction, join-irreducibles are computed, and prime filters
are realized as their principal up-sets.

Every filter and ideal here is principal (the lattices are finite), stored by
generator.  Prime-filter existence arguments are replaced by a deterministic
choice: the least join-irreducible in the algebra's canonical element order
that witnesses the required separation.  The three amalgamation constructions
(sum_filters, project_filter, witness_filter) build their filter/ideal pair
from generators, extend to a prime filter, and by default re-verify their
postconditions exhaustively.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import Sequence

from .algebras import FiniteAlgebra, ensure_sort
from .errors import ObstructionError, PreconditionError, RelAlgError
from .relations import Substitution, assoc_cylindrification, partitioning


@dataclass(frozen=True)
class PrincipalFilter:
    sort: int
    generator: int


@dataclass(frozen=True)
class PrincipalIdeal:
    sort: int
    generator: int


@dataclass(frozen=True)
class PrimeFilter:
    """A prime filter, stored as the up-set of its witnessing join-irreducible."""

    sort: int
    generator: int
    members: frozenset[int]

    def __contains__(self, element: int) -> bool:
        return element in self.members


class NotALatticeError(RelAlgError):
    pass


class SortLattice:
    """One sort of an algebra, as a bounded distributive lattice.

    Construction verifies that meet/join are greatest lower and least upper
    bounds of the order a <= b iff a = a^b, that 0 and 1 bound everything, and
    that the lattice is distributive (join-irreducible membership masks must
    turn joins into unions).  Order rows are int bitmasks.
    """

    def __init__(self, algebra: FiniteAlgebra, sort: int):
        algebra.ensure_enumerable(sort)
        self.algebra = algebra
        self.sort = sort
        self.size = algebra.sort_size(sort)
        self.zero = algebra.zero(sort)
        self.one = algebra.one(sort)
        self._build_order()
        self._find_join_irreducibles()
        self._check_distributive()
        self._prime_filters: list[PrimeFilter] | None = None

    def _build_order(self) -> None:
        alg, n, size = self.algebra, self.sort, self.size
        up = [0] * size
        down = [0] * size
        for a in range(size):
            row = 0
            for b in range(size):
                if alg.meet(n, a, b) == a:
                    row |= 1 << b
                    down[b] |= 1 << a
            up[a] = row
        self.up = up
        self.down = down
        for a in range(size):
            if not up[a] >> a & 1:
                raise NotALatticeError(f"meet not idempotent at sort-{n} element {a}")
            if up[a] & down[a] != 1 << a:
                raise NotALatticeError(f"order not antisymmetric at sort-{n} element {a}")
            if not up[self.zero] >> a & 1 or not up[a] >> self.one & 1:
                raise NotALatticeError(f"bounds fail at sort-{n} element {a}")
        for a in range(size):
            for b in range(size):
                m = alg.meet(n, a, b)
                if down[a] & down[b] != down[m]:
                    raise NotALatticeError(
                        f"meet of sort-{n} elements {a},{b} is not their greatest lower bound"
                    )
                j = alg.join(n, a, b)
                if up[a] & up[b] != up[j]:
                    raise NotALatticeError(
                        f"join of sort-{n} elements {a},{b} is not their least upper bound"
                    )

    def _find_join_irreducibles(self) -> None:
        alg, n = self.algebra, self.sort
        irr = []
        for j in range(self.size):
            below = self.down[j] & ~(1 << j)
            fold = self.zero
            a = 0
            rest = below
            while rest:
                if rest & 1:
                    fold = alg.join(n, fold, a)
                rest >>= 1
                a += 1
            if fold != j:
                irr.append(j)
        self.join_irreducibles = tuple(irr)

    def _check_distributive(self) -> None:
        alg, n = self.algebra, self.sort
        # ji_mask[a]: which join-irreducibles sit below a.
        ji_mask = [0] * self.size
        for p, j in enumerate(self.join_irreducibles):
            row = self.up[j]
            a = 0
            while row:
                if row & 1:
                    ji_mask[a] |= 1 << p
                row >>= 1
                a += 1
        for a in range(self.size):
            for b in range(self.size):
                if ji_mask[alg.join(n, a, b)] != ji_mask[a] | ji_mask[b]:
                    raise NotALatticeError(
                        f"sort {n} is not distributive: join of {a},{b} gains "
                        f"join-irreducibles below neither"
                    )
        self._ji_mask = ji_mask

    def leq(self, a: int, b: int) -> bool:
        return bool(self.up[a] >> b & 1)

    def up_set(self, a: int) -> frozenset[int]:
        out = set()
        row = self.up[a]
        b = 0
        while row:
            if row & 1:
                out.add(b)
            row >>= 1
            b += 1
        return frozenset(out)


_lattice_cache: "weakref.WeakKeyDictionary[FiniteAlgebra, dict[int, SortLattice]]" = (
    weakref.WeakKeyDictionary()
)


def sort_lattice(algebra: FiniteAlgebra, sort: int) -> SortLattice:
    per_alg = _lattice_cache.setdefault(algebra, {})
    lattice = per_alg.get(sort)
    if lattice is None:
        lattice = SortLattice(algebra, sort)
        per_alg[sort] = lattice
    return lattice


def join_irreducibles(lattice: SortLattice) -> list[int]:
    """Nonzero elements that are not the join of two strictly smaller ones."""
    return list(lattice.join_irreducibles)


def is_prime_filter(algebra: FiniteAlgebra, sort: int, members: frozenset[int] | set[int]) -> bool:
    """Direct primality predicate, independent of the join-irreducible route:
    proper, upward-closed, meet-closed, and join-prime."""
    size = algebra.sort_size(sort)
    if not members or algebra.zero(sort) in members:
        return False
    if any(not 0 <= a < size for a in members):
        return False
    for a in members:
        for b in range(size):
            if algebra.leq(sort, a, b) and b not in members:
                return False
    for a in members:
        for b in members:
            if algebra.meet(sort, a, b) not in members:
                return False
    for a in range(size):
        for b in range(size):
            if algebra.join(sort, a, b) in members and a not in members and b not in members:
                return False
    return True


def prime_filters(lattice: SortLattice) -> list[PrimeFilter]:
    """All prime filters: exactly the up-sets of join-irreducibles.  Each
    output is re-verified by the direct primality predicate."""
    if lattice._prime_filters is None:
        out = []
        for j in lattice.join_irreducibles:
            pf = PrimeFilter(lattice.sort, j, lattice.up_set(j))
            if not is_prime_filter(lattice.algebra, lattice.sort, pf.members):
                raise AssertionError(
                    f"up-set of join-irreducible {j} fails the direct primality test"
                )
            out.append(pf)
        lattice._prime_filters = out
    return list(lattice._prime_filters)


def prime_filter_from_members(algebra: FiniteAlgebra, sort: int, members,
                              verify: bool = True) -> PrimeFilter:
    members = frozenset(members)
    if not members:
        raise PreconditionError(f"empty member set is not a filter on sort {sort}")
    gen = None
    for a in sorted(members):
        gen = a if gen is None else algebra.meet(sort, gen, a)
    if gen not in members:
        raise PreconditionError(f"member set of sort {sort} is not meet-closed")
    if verify and not is_prime_filter(algebra, sort, members):
        raise PreconditionError(f"member set of sort {sort} is not a prime filter")
    return PrimeFilter(sort, gen, members)


def extend_to_prime(lattice: SortLattice, filt: PrincipalFilter,
                    ideal: PrincipalIdeal) -> PrimeFilter:
    """A prime filter containing the filter and missing the ideal: the up-set
    of the least join-irreducible below gen(filter) but not below gen(ideal).
    Requires gen(filter) not below gen(ideal)."""
    if filt.sort != lattice.sort or ideal.sort != lattice.sort:
        raise PreconditionError("filter/ideal sort does not match the lattice")
    if lattice.leq(filt.generator, ideal.generator):
        raise PreconditionError(
            f"filter generator {filt.generator} lies below ideal generator "
            f"{ideal.generator}; no separating prime filter exists"
        )
    for j in lattice.join_irreducibles:
        if lattice.leq(j, filt.generator) and not lattice.leq(j, ideal.generator):
            return PrimeFilter(lattice.sort, j, lattice.up_set(j))
    raise AssertionError("distributive lattice without a separating join-irreducible")


def complement_max(algebra: FiniteAlgebra, pf: PrimeFilter) -> int:
    """Largest non-member: the complement of a prime filter is a principal
    ideal, generated by the join of all non-members."""
    out = algebra.zero(pf.sort)
    for a in algebra.elements(pf.sort):
        if a not in pf.members:
            out = algebra.join(pf.sort, out, a)
    if out in pf.members:
        raise AssertionError("complement of a prime filter must be join-closed")
    return out


def sum_filters(filters: Sequence[PrimeFilter], algebra: FiniteAlgebra,
                verify: bool = True) -> PrimeFilter:
    """One master prime filter G on the sum sort, encoding the given family
    blockwise: c_i(r) in G iff r in F^i for the partitioning cylindrifications
    c_i.  Fails with an axiom-(0) obstruction when the blockwise filter/ideal
    pair is not disjoint."""
    ks = [f.sort for f in filters]
    n = sum(ks)
    alg = ensure_sort(algebra, n)
    blocks = partitioning(*ks)
    gen_f = alg.one(n)
    gen_i = alg.zero(n)
    maxes = []
    for pf, c in zip(filters, blocks):
        gen_f = alg.meet(n, gen_f, alg.subst(c, pf.generator))
        m = complement_max(alg, pf)
        maxes.append(m)
        gen_i = alg.join(n, gen_i, alg.subst(c, m))
    if alg.leq(n, gen_f, gen_i):
        raise ObstructionError(
            "axiom (0) obstruction: the blockwise filter meets the blockwise ideal",
            axiom_id=0,
            shape=ks,
            r_elems=[f.generator for f in filters],
            s_elems=maxes,
        )
    lattice = sort_lattice(alg, n)
    master = extend_to_prime(lattice, PrincipalFilter(n, gen_f), PrincipalIdeal(n, gen_i))
    if verify:
        for pf, c in zip(filters, blocks):
            for r in alg.elements(pf.sort):
                if (alg.subst(c, r) in master.members) != (r in pf.members):
                    raise AssertionError(
                        f"master filter postcondition fails at block sort {pf.sort}, element {r}"
                    )
    return master


def project_filter(algebra: FiniteAlgebra, filt: PrimeFilter, r: int,
                   verify: bool = True) -> PrimeFilter:
    """A prime filter G one sort up with r in G whose pullback along the
    associated cylindrification is the given filter.  Requires exists(r) in
    the filter."""
    n = filt.sort
    alg = ensure_sort(algebra, n + 1)
    if alg.exists(n, r) not in filt.members:
        raise PreconditionError(
            f"projection of element {r} does not belong to the sort-{n} filter"
        )
    c = assoc_cylindrification(n)
    gen_f = alg.meet(n + 1, r, alg.subst(c, filt.generator))
    gen_i = alg.subst(c, complement_max(alg, filt))
    if alg.leq(n + 1, gen_f, gen_i):
        raise ObstructionError(
            "projection obstruction: the filter/ideal pair for the lifted "
            "filter is not disjoint (the projection laws fail in this algebra)",
            axiom_id=9,
            shape=[n],
            r_elems=[filt.generator, r],
            s_elems=[gen_i],
        )
    lattice = sort_lattice(alg, n + 1)
    lifted = extend_to_prime(lattice, PrincipalFilter(n + 1, gen_f), PrincipalIdeal(n + 1, gen_i))
    if verify:
        if r not in lifted.members:
            raise AssertionError("lifted filter lost its defining element")
        for u in alg.elements(n):
            if (alg.subst(c, u) in lifted.members) != (u in filt.members):
                raise AssertionError(f"pullback of the lifted filter differs at element {u}")
    return lifted


def pullback_filter(algebra: FiniteAlgebra, above: PrimeFilter,
                    verify: bool = True) -> PrimeFilter:
    """The inverse image along the associated cylindrification; always a prime
    filter one sort down."""
    if above.sort < 1:
        raise PreconditionError("cannot pull a sort-0 filter back")
    n = above.sort - 1
    c = assoc_cylindrification(n)
    members = frozenset(
        u for u in algebra.elements(n) if algebra.subst(c, u) in above.members
    )
    return prime_filter_from_members(algebra, n, members, verify=verify)


def witness_filter(algebra: FiniteAlgebra, base: PrimeFilter,
                   pairs: Sequence[tuple[PrimeFilter, Substitution]],
                   verify: bool = True) -> PrimeFilter:
    """A prime filter H on sort m+n packing the base type (sort m) together
    with n witness requests.  Each pair (G_i, alpha_i) asks for a fresh last
    coordinate realizing G_i over the subtuple selected by alpha_i; the
    hypothesis is that G_i pulls back to the image filter of the base along
    alpha_i.

    H satisfies: (I) beta_0(r) in H iff r in base, and (II) r in G_i implies
    beta_i(r) in H, where beta_0 embeds sort m and beta_i appends witness i to
    the alpha_i-subtuple.
    """
    m = base.sort
    n_w = len(pairs)
    alg = ensure_sort(algebra, m + n_w)
    betas = []
    for i, (g, alpha) in enumerate(pairs, start=1):
        if alpha.cod != m:
            raise PreconditionError(f"witness request {i}: substitution lands in sort "
                                    f"{alpha.cod}, base filter lives on sort {m}")
        if g.sort != alpha.dom + 1:
            raise PreconditionError(f"witness request {i}: filter sort {g.sort} does not "
                                    f"extend the selected subtuple of length {alpha.dom}")
        image = frozenset(
            r for r in alg.elements(alpha.dom) if alg.subst(alpha, r) in base.members
        )
        pulled = pullback_filter(alg, g, verify=False)
        if pulled.members != image:
            raise PreconditionError(
                f"witness request {i}: the requested filter does not pull back to "
                f"the type of the selected subtuple"
            )
        betas.append(Substitution(alpha.dom + 1, m + n_w, alpha.map + (m + i,)))
    beta0 = Substitution(m, m + n_w, tuple(range(1, m + 1)))
    gen_f = alg.subst(beta0, base.generator)
    for (g, _), beta in zip(pairs, betas):
        gen_f = alg.meet(m + n_w, gen_f, alg.subst(beta, g.generator))
    gen_i = alg.subst(beta0, complement_max(alg, base))
    if alg.leq(m + n_w, gen_f, gen_i):
        raise ObstructionError(
            "witness obstruction: the packed filter meets the packed ideal "
            "(the projection laws fail in this algebra)",
            axiom_id=10,
            shape=[m] + [g.sort for g, _ in pairs],
            r_elems=[base.generator] + [g.generator for g, _ in pairs],
            s_elems=[gen_i],
        )
    lattice = sort_lattice(alg, m + n_w)
    packed = extend_to_prime(lattice, PrincipalFilter(m + n_w, gen_f),
                             PrincipalIdeal(m + n_w, gen_i))
    if verify:
        for r in alg.elements(m):
            if (alg.subst(beta0, r) in packed.members) != (r in base.members):
                raise AssertionError(f"packed filter condition (I) fails at element {r}")
        for (g, _), beta in zip(pairs, betas):
            for r in g.members:
                if alg.subst(beta, r) not in packed.members:
                    raise AssertionError(f"packed filter condition (II) fails at element {r}")
    return packed
