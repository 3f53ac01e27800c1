"""From prime filters to concrete models of relations.

A prime filter F on sort n induces a map into the relations over an n-point
universe: the tuple picked out by an index map alpha belongs to the image of r
exactly when alpha(r) lands in F.  With equality constants present, positions
are first merged along the diagonal memberships of F.  This map is a morphism
for the substitution/lattice (and negation) symbols and at least almost
morphic for projection.

Embeddings are built by separating every pair of distinct elements with one
prime filter each, packing the chosen family into a single master filter on
the sum sort, and reading the induced model off.  For fragments with
projection the result may only be an almost morphism; bounded witness
saturation then adds stage models until projection becomes exact or the
round budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

from .algebras import (
    FiniteAlgebra,
    MorphismReport,
    concrete,
    ensure_sort,
    is_injective,
    verify_morphism,
)
from .errors import IllDefinedMapError, PreconditionError
from .filters import (
    PrimeFilter,
    prime_filter_from_members,
    prime_filters,
    pullback_filter,
    sort_lattice,
    sum_filters,
    witness_filter,
)
from .relations import Relation, Substitution, Universe, all_substitutions


@dataclass
class FilterModel:
    """The model read off a prime filter: a universe of size = number of
    merged filter positions, the per-sort interpretation map, and its
    verification report."""

    algebra: FiniteAlgebra
    filter: PrimeFilter
    universe: Universe
    class_of: tuple[int, ...]  # 0-based: position i+1 of the filter sort -> universe element
    reps: tuple[int, ...]  # universe element -> least 1-based position representing it
    phi: dict[int, list[Relation]]
    verification: MorphismReport | None = None

    @property
    def bound(self) -> int:
        return max(self.phi)

    def fmap(self) -> dict[int, list[int]]:
        return {n: [rel.bits for rel in rels] for n, rels in self.phi.items()}

    def type_of(self, tup: tuple[int, ...]) -> PrimeFilter:
        """The prime filter of everything holding of the given universe tuple."""
        gamma = Substitution(len(tup), self.filter.sort, tuple(self.reps[q] for q in tup))
        members = frozenset(
            r for r in self.algebra.elements(len(tup))
            if self.algebra.subst(gamma, r) in self.filter.members
        )
        return prime_filter_from_members(self.algebra, len(tup), members, verify=False)

    def holds(self, sort: int, r: int, tup: tuple[int, ...]) -> bool:
        gamma = Substitution(sort, self.filter.sort, tuple(self.reps[q] for q in tup))
        return self.algebra.subst(gamma, r) in self.filter.members


@dataclass
class WitnessModel(FilterModel):
    stage: int = 0
    obligations: list = field(default_factory=list)


def filter_to_morphism(algebra: FiniteAlgebra, filt: PrimeFilter,
                       verify: bool = True, up_to: int | None = None) -> FilterModel:
    """Build the model induced by a prime filter, for all sorts up to the
    bound.  With equality, positions i and j merge exactly when the diagonal
    constant (i,j) belongs to the filter; well-definedness of the merged map
    is checked and an ambiguity is reported with the witnessing pair."""
    n = filt.sort
    frag = algebra.fragment
    if frag.equality:
        class_of = _merge_positions(algebra, filt)
    else:
        class_of = tuple(range(n))
    w = max(class_of, default=-1) + 1
    reps = []
    for q in range(w):
        reps.append(class_of.index(q) + 1)
    reps = tuple(reps)
    universe = Universe(w)
    bound = algebra.max_sort if up_to is None else min(up_to, algebra.max_sort)

    if frag.equality and verify:
        _check_well_defined(algebra, filt, class_of, bound)

    phi: dict[int, list[Relation]] = {}
    for k in range(bound + 1):
        rels = []
        tuples = list(iproduct(range(w), repeat=k))
        gammas = [Substitution(k, n, tuple(reps[q] for q in tup)) for tup in tuples]
        for r in algebra.elements(k):
            bits = 0
            for t, gamma in enumerate(gammas):
                if algebra.subst(gamma, r) in filt.members:
                    bits |= 1 << t
            rels.append(Relation(universe, k, bits))
        phi[k] = rels

    model = FilterModel(algebra, filt, universe, class_of, reps, phi)
    if verify:
        model.verification = recheck_model(model)
        if not model.verification.ok:
            raise AssertionError(
                "filter-induced map failed verification: " + "; ".join(model.verification.violations)
            )
    return model


def _merge_positions(algebra: FiniteAlgebra, filt: PrimeFilter) -> tuple[int, ...]:
    n = filt.sort
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if algebra.delta(n, i + 1, j + 1) in filt.members:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(n)})
    rank = {root: q for q, root in enumerate(roots)}
    return tuple(rank[find(i)] for i in range(n))


def _check_well_defined(algebra: FiniteAlgebra, filt: PrimeFilter,
                        class_of: tuple[int, ...], bound: int) -> None:
    n = filt.sort
    for k in range(bound + 1):
        by_pattern: dict[tuple[int, ...], tuple[Substitution, list[bool]]] = {}
        for alpha in all_substitutions(k, n):
            pattern = tuple(class_of[i - 1] for i in alpha.map)
            memberships = [algebra.subst(alpha, r) in filt.members for r in algebra.elements(k)]
            seen = by_pattern.get(pattern)
            if seen is None:
                by_pattern[pattern] = (alpha, memberships)
            elif seen[1] != memberships:
                raise IllDefinedMapError(
                    f"merged positions make the sort-{k} map ambiguous",
                    alpha=seen[0], beta=alpha,
                )


def recheck_model(model: FilterModel, mode: str | None = None) -> MorphismReport:
    """Verify the model's map against a concrete target.  Default mode:
    full morphism when projection is absent from the fragment, almost
    morphism (containment for projection) when it is present."""
    frag = model.algebra.fragment
    if mode is None:
        mode = "almost" if frag.exists else "full"
    target = concrete(model.universe, frag, model.bound)
    return verify_morphism(model.fmap(), model.algebra, target, mode=mode,
                           max_sort=model.bound)


# ---------------------------------------------------------------------------
# Separation and master-filter embeddings


def separate(algebra: FiniteAlgebra, sort: int, r: int, s: int,
             verify: bool = True) -> FilterModel:
    """A model distinguishing two distinct same-sort elements, built from the
    least join-irreducible lying below exactly one of them."""
    if r == s:
        raise PreconditionError("cannot separate an element from itself")
    pf = separating_filter(algebra, sort, r, s)
    model = filter_to_morphism(algebra, pf, verify=verify)
    if model.phi[sort][r] == model.phi[sort][s]:
        raise AssertionError("separating filter did not separate")
    return model


def separating_filter(algebra: FiniteAlgebra, sort: int, r: int, s: int) -> PrimeFilter:
    lattice = sort_lattice(algebra, sort)
    for j in lattice.join_irreducibles:
        if lattice.leq(j, r) != lattice.leq(j, s):
            return PrimeFilter(sort, j, lattice.up_set(j))
    raise PreconditionError(f"sort-{sort} elements {r} and {s} are not distinct")


def separating_family(algebra: FiniteAlgebra, scope: int) -> list[PrimeFilter]:
    """One prime filter per unordered pair of distinct elements in sorts up to
    the scope (least canonical choice), duplicates dropped."""
    family: list[PrimeFilter] = []
    seen: set[tuple[int, int]] = set()
    for k in range(scope + 1):
        size = algebra.sort_size(k)
        if size <= 1:
            continue
        for a in algebra.elements(k):
            for b in range(a + 1, size):
                pf = separating_filter(algebra, k, a, b)
                if (k, pf.generator) not in seen:
                    seen.add((k, pf.generator))
                    family.append(pf)
    return family


def master_filter_model(algebra: FiniteAlgebra, scope: int,
                        verify: bool = True) -> tuple[FilterModel, list[PrimeFilter]]:
    """Pack one separating filter per pair into a master filter and read off
    the induced model; it distinguishes all elements in sorts up to the scope.
    For fragments with projection this is the one-to-one almost morphism that
    saturation starts from."""
    if scope > algebra.max_sort:
        raise PreconditionError(f"scope {scope} exceeds sort bound {algebra.max_sort}")
    family = separating_family(algebra, scope)
    master_sort = sum(pf.sort for pf in family)
    ext = ensure_sort(algebra, master_sort)
    master = sum_filters(family, ext, verify=verify)
    model = filter_to_morphism(ext, master, verify=verify, up_to=algebra.max_sort)
    return model, family


@dataclass
class EmbeddingCertificate:
    status: str  # "full" or "almost"
    fragment: str
    scope: int
    target_size: int
    phi: dict[int, list[Relation]]
    injective: bool
    rounds_used: int
    transcript: list[str]
    obligations: list[str] = field(default_factory=list)
    verification: MorphismReport | None = None


def embed(algebra: FiniteAlgebra, scope: int, rounds: int = 5,
          verify: bool = True) -> EmbeddingCertificate:
    """Constructive embedding into a concrete algebra of relations, verified.

    Without projection in the fragment the master-filter model is already a
    morphism and the certificate is immediate.  With projection, the master
    model starts a witness saturation run with the given round budget.
    Raises ObstructionError (axiom 0) when the master filter cannot exist and
    InsufficientSortsError when the needed sorts cannot be materialized.
    """
    model, family = master_filter_model(algebra, scope, verify=verify)
    transcript = [
        f"separating family: {len(family)} prime filter(s) on sorts "
        f"{[pf.sort for pf in family]}",
        f"master filter on sort {sum(pf.sort for pf in family)}, "
        f"generator {model.filter.generator}",
    ]
    if algebra.fragment.exists:
        cert = saturate(algebra, model, rounds, verify=verify)
        cert.transcript = transcript + cert.transcript
        cert.scope = scope
        return cert
    report = model.verification if model.verification is not None else recheck_model(model)
    injective = is_injective(model.fmap(), range(scope + 1))
    transcript.append(f"morphic conditions checked: {report.checks}, violations: {len(report.violations)}")
    transcript.append(f"injective on sorts 0..{scope}: {injective}")
    status = "full" if report.ok and injective else "almost"
    return EmbeddingCertificate(
        status=status,
        fragment=str(algebra.fragment),
        scope=scope,
        target_size=model.universe.size,
        phi=model.phi,
        injective=injective,
        rounds_used=0,
        transcript=transcript,
        verification=report,
    )


# ---------------------------------------------------------------------------
# Witness saturation


def find_obligations(model: FilterModel, bound: int) -> list[tuple[tuple[int, ...], PrimeFilter]]:
    """Unmet witness requests: tuples whose type extends to a prime filter one
    sort up that no element of the model weakly realizes."""
    alg = model.algebra
    w = model.universe.size
    out = []
    for length in range(bound):
        target = length + 1
        lattice = sort_lattice(alg, target)
        candidates = []
        for g in prime_filters(lattice):
            candidates.append((g, pullback_filter(alg, g, verify=False).members))
        for tup in iproduct(range(w), repeat=length):
            p = model.type_of(tup)
            for g, pulled in candidates:
                if pulled != p.members:
                    continue
                if not any(
                    all(model.holds(target, r, tup + (b,)) for r in g.members)
                    for b in range(w)
                ):
                    out.append((tup, g))
    return out


def witness_stage(model: FilterModel, obligations, bound: int,
                  verify: bool = True) -> WitnessModel:
    """One saturation round: pack the whole current universe and every
    obligation into a single filter on sort (universe + batch), and read off
    the next stage model.  The previous universe embeds via the packed
    positions; its literal diagram is preserved and checked."""
    w = model.universe.size
    alg = ensure_sort(model.algebra, w + len(obligations))
    full = tuple(range(w))
    base = model.type_of(full)
    pairs = []
    for tup, g in obligations:
        alpha = Substitution(len(tup), w, tuple(q + 1 for q in tup))
        pairs.append((g, alpha))
    packed = witness_filter(alg, base, pairs, verify=verify)
    stage = filter_to_morphism(alg, packed, verify=verify, up_to=bound)
    new = WitnessModel(
        algebra=stage.algebra, filter=stage.filter, universe=stage.universe,
        class_of=stage.class_of, reps=stage.reps, phi=stage.phi,
        verification=stage.verification,
        stage=(model.stage + 1 if isinstance(model, WitnessModel) else 1),
        obligations=list(obligations),
    )
    embed_old = [new.class_of[q] for q in range(w)]
    if len(set(embed_old)) != w:
        raise AssertionError("stage construction merged previously distinct elements")
    if verify:
        for k in range(bound + 1):
            for r in model.algebra.elements(k):
                old_rel = model.phi[k][r]
                new_rel = new.phi[k][r]
                for tup in iproduct(range(w), repeat=k):
                    mapped = tuple(embed_old[q] for q in tup)
                    if old_rel.contains(tup) != new_rel.contains(mapped):
                        raise AssertionError(
                            f"stage construction changed the diagram at sort {k}, "
                            f"element {r}, tuple {tup}"
                        )
    return new


def saturate(algebra: FiniteAlgebra, start: FilterModel, rounds: int,
             verify: bool = True) -> EmbeddingCertificate:
    """Run witness rounds until projection is exact or the budget is spent.
    Status "full" certificates are complete verified morphisms; "almost"
    status lists the outstanding obligations honestly.  The final map never
    identifies more than the starting map did (checked)."""
    bound = algebra.max_sort
    model = start
    transcript = []
    built = 0
    while True:
        obligations = find_obligations(model, bound)
        transcript.append(f"round {built}: {len(obligations)} outstanding witness request(s)")
        if not obligations:
            status = "full"
            break
        if built >= rounds:
            status = "almost"
            break
        model = witness_stage(model, obligations, bound, verify=verify)
        built += 1
        transcript.append(f"round {built}: universe grew to {model.universe.size}")

    pending = [
        f"tuple {tup}: filter on sort {g.sort} generated by {g.generator}"
        for tup, g in obligations
    ]
    report = None
    if status == "full":
        report = recheck_model(model, mode="full")
        transcript.append(
            f"exact morphism check: {report.checks} checks, {len(report.violations)} violation(s)"
        )
        if verify and not report.ok:
            raise AssertionError("saturated model failed the exact morphism check")
    for n in range(bound + 1):
        start_f = start.fmap()[n]
        final_f = model.fmap()[n]
        for a in range(len(final_f)):
            for b in range(a + 1, len(final_f)):
                if final_f[a] == final_f[b] and start_f[a] != start_f[b]:
                    raise AssertionError(
                        f"saturation identified sort-{n} elements {a},{b} that the "
                        f"starting map distinguished"
                    )
    injective = is_injective(model.fmap(), range(bound + 1))
    transcript.append(f"injective on sorts 0..{bound}: {injective}")
    return EmbeddingCertificate(
        status=status,
        fragment=str(algebra.fragment),
        scope=bound,
        target_size=model.universe.size,
        phi=model.phi,
        injective=injective,
        rounds_used=built,
        transcript=transcript,
        obligations=pending,
        verification=report,
    )
