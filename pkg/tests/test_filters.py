from random import Random

import pytest

from relalg import (
    ObstructionError,
    PreconditionError,
    PrincipalFilter,
    PrincipalIdeal,
    Relation,
    Substitution,
    TableAlgebra,
    Universe,
    concrete,
    extend_to_prime,
    gallery_diamond,
    generated_subalgebra,
    is_prime_filter,
    join_irreducibles,
    prime_filters,
    project_filter,
    pullback_filter,
    sort_lattice,
    sum_filters,
    witness_filter,
)
from relalg.filters import NotALatticeError, SortLattice, complement_max
from relalg.fragments import PE, PQF


W2 = Universe(2)


def bits(size, arity, tuples):
    return Relation.from_tuples(Universe(size), arity, tuples).bits


def chain_algebra(length):
    """A single-sort table algebra whose sort 0 is a chain 0 < 1 < ... < length-1."""
    size = length
    meet = [[min(a, b) for b in range(size)] for a in range(size)]
    join = [[max(a, b) for b in range(size)] for a in range(size)]
    ident = Substitution(0, 0, ())
    return TableAlgebra(PQF, 0, [size], [meet], [join], [0], [size - 1], {ident: list(range(size))})


def all_prime_subsets(algebra, sort):
    """Oracle: every subset of the sort passing the direct primality predicate."""
    size = algebra.sort_size(sort)
    assert size <= 16
    found = set()
    for mask in range(1, 1 << size):
        members = frozenset(a for a in range(size) if mask >> a & 1)
        if is_prime_filter(algebra, sort, members):
            found.add(members)
    return found


def test_join_irreducibles_boolean_sort1():
    alg = concrete(W2, PQF, 2)
    lat = sort_lattice(alg, 1)
    assert set(join_irreducibles(lat)) == {bits(2, 1, [(0,)]), bits(2, 1, [(1,)])}


def test_join_irreducibles_chain():
    alg = chain_algebra(3)
    lat = sort_lattice(alg, 0)
    assert join_irreducibles(lat) == [1, 2]


def test_join_irreducibles_diamond():
    alg, _ = gallery_diamond()
    lat = sort_lattice(alg, 1)
    assert join_irreducibles(lat) == [1, 2]


def test_prime_filters_boolean_sort2_are_atoms():
    alg = concrete(W2, PQF, 2)
    lat = sort_lattice(alg, 2)
    pfs = prime_filters(lat)
    assert sorted(pf.generator for pf in pfs) == [1, 2, 4, 8]
    assert all_prime_subsets(alg, 2) == {pf.members for pf in pfs}


def test_prime_filters_two_element_sort():
    alg = concrete(Universe(1), PQF, 1)
    pfs = prime_filters(sort_lattice(alg, 1))
    assert len(pfs) == 1
    assert pfs[0].members == frozenset({1})


def test_prime_filters_diamond():
    alg, _ = gallery_diamond()
    pfs = prime_filters(sort_lattice(alg, 1))
    assert [pf.generator for pf in pfs] == [1, 2]
    assert all_prime_subsets(alg, 1) == {pf.members for pf in pfs}


def test_prime_filters_match_subset_oracle_small_concretes():
    for size in (0, 1, 2):
        alg = concrete(Universe(size), PQF, 2)
        for sort in range(3):
            lat = sort_lattice(alg, sort)
            assert all_prime_subsets(alg, sort) == {pf.members for pf in prime_filters(lat)}


def test_extend_to_prime_least_tie_break():
    alg = concrete(W2, PQF, 1)
    lat = sort_lattice(alg, 1)
    pf = extend_to_prime(lat, PrincipalFilter(1, alg.one(1)), PrincipalIdeal(1, alg.zero(1)))
    assert pf.generator == bits(2, 1, [(0,)])  # least join-irreducible in canonical order


def test_extend_to_prime_diamond():
    alg, _ = gallery_diamond()
    lat = sort_lattice(alg, 1)
    a, b = 1, 2
    pf = extend_to_prime(lat, PrincipalFilter(1, a), PrincipalIdeal(1, b))
    assert pf.generator == a
    assert b not in pf.members


def test_extend_to_prime_contains_filter_misses_ideal():
    alg = concrete(W2, PQF, 2)
    lat = sort_lattice(alg, 2)
    rng = Random(55)
    for _ in range(100):
        f = rng.randrange(1, 16)
        i = rng.randrange(16)
        if alg.leq(2, f, i):
            continue
        pf = extend_to_prime(lat, PrincipalFilter(2, f), PrincipalIdeal(2, i))
        assert all(x in pf.members for x in lat.up_set(f))
        assert all(not alg.leq(2, x, i) for x in pf.members)


def test_extend_to_prime_rejects_overlap():
    alg = concrete(W2, PQF, 1)
    lat = sort_lattice(alg, 1)
    with pytest.raises(PreconditionError):
        extend_to_prime(lat, PrincipalFilter(1, alg.zero(1)), PrincipalIdeal(1, alg.one(1)))


def test_complement_max_is_largest_nonmember():
    alg = concrete(W2, PQF, 1)
    for pf in prime_filters(sort_lattice(alg, 1)):
        m = complement_max(alg, pf)
        assert m not in pf.members
        for x in alg.elements(1):
            if x not in pf.members:
                assert alg.leq(1, x, m)


def _sort1_filter(alg, singleton_bits):
    return next(pf for pf in prime_filters(sort_lattice(alg, 1)) if pf.generator == singleton_bits)


def test_sum_filters_worked_example():
    alg = concrete(W2, PQF, 2)
    f1 = _sort1_filter(alg, bits(2, 1, [(0,)]))
    f2 = _sort1_filter(alg, bits(2, 1, [(1,)]))
    master = sum_filters([f1, f2], alg)
    assert master.generator == bits(2, 2, [(0, 1)])
    # brute force: it is the unique sort-2 prime filter with the blockwise property
    from relalg.relations import partitioning

    c1, c2 = partitioning(1, 1)
    good = []
    for pf in prime_filters(sort_lattice(alg, 2)):
        if all((alg.subst(c1, r) in pf.members) == (r in f1.members) for r in alg.elements(1)) and all(
            (alg.subst(c2, r) in pf.members) == (r in f2.members) for r in alg.elements(1)
        ):
            good.append(pf)
    assert good == [master]


def test_sum_filters_single_block_is_identity():
    alg = concrete(W2, PQF, 2)
    f1 = _sort1_filter(alg, bits(2, 1, [(0,)]))
    assert sum_filters([f1], alg) == f1


def test_sum_filters_diamond_obstruction():
    alg, _ = gallery_diamond()
    pfs = prime_filters(sort_lattice(alg, 1))
    with pytest.raises(ObstructionError) as exc:
        sum_filters(pfs, alg)
    assert exc.value.axiom_id == 0
    assert exc.value.shape == (1, 1)


def test_sum_filters_postcondition_sweep():
    alg = concrete(W2, PQF, 3)
    lat1 = prime_filters(sort_lattice(alg, 1))
    lat2 = prime_filters(sort_lattice(alg, 2))
    for fam in [(a, b) for a in lat1 for b in lat1] + [(a, b) for a in lat1 for b in lat2]:
        sum_filters(list(fam), alg)  # construction-time verification is on


def test_project_filter_worked_example():
    alg = concrete(W2, PE, 2)
    f = _sort1_filter(alg, bits(2, 1, [(0,)]))
    r = bits(2, 2, [(0, 1)])
    g = project_filter(alg, f, r)
    assert g.generator == r
    assert r in g.members


def test_project_filter_cylinder_of_min():
    alg = concrete(W2, PE, 2)
    f = _sort1_filter(alg, bits(2, 1, [(0,)]))
    from relalg.relations import assoc_cylindrification

    r = alg.subst(assoc_cylindrification(1), f.generator)
    g = project_filter(alg, f, r)
    assert r in g.members


def test_project_filter_precondition():
    alg = concrete(W2, PE, 2)
    f = _sort1_filter(alg, bits(2, 1, [(0,)]))
    r = bits(2, 2, [(1, 0)])  # exists(r) = {1}, not in f
    with pytest.raises(PreconditionError):
        project_filter(alg, f, r)


def test_pullback_filter_example():
    alg = concrete(W2, PE, 2)
    g = next(pf for pf in prime_filters(sort_lattice(alg, 2)) if pf.generator == bits(2, 2, [(0, 1)]))
    f = pullback_filter(alg, g)
    assert f.members == frozenset({bits(2, 1, [(0,)]), alg.one(1)})


def test_pullback_of_two_element_sort():
    alg = concrete(Universe(1), PE, 2)
    g = prime_filters(sort_lattice(alg, 2))[0]
    f = pullback_filter(alg, g)
    assert f.members == frozenset({1})


def test_pullback_recovers_last_block_of_sum():
    alg = concrete(W2, PQF, 2)
    # pulling the master back along the last unary block's cylindrification
    f1 = _sort1_filter(alg, bits(2, 1, [(0,)]))
    f2 = _sort1_filter(alg, bits(2, 1, [(1,)]))
    master = sum_filters([f1, f2], alg)
    # blockwise: c2 = last coordinate; pullback along c: 1 -> 2 with c(i)=i is
    # the FIRST block here, so check both directions explicitly
    from relalg.relations import partitioning

    c1, c2 = partitioning(1, 1)
    back1 = frozenset(r for r in alg.elements(1) if alg.subst(c1, r) in master.members)
    back2 = frozenset(r for r in alg.elements(1) if alg.subst(c2, r) in master.members)
    assert back1 == f1.members
    assert back2 == f2.members


def test_witness_filter_no_pairs_is_base():
    alg = concrete(W2, PE, 2)
    f = _sort1_filter(alg, bits(2, 1, [(0,)]))
    h = witness_filter(alg, f, [])
    assert h == f


def test_witness_filter_worked_example():
    alg = concrete(W2, PE, 2)
    p = _sort1_filter(alg, bits(2, 1, [(0,)]))
    g = next(pf for pf in prime_filters(sort_lattice(alg, 2)) if pf.generator == bits(2, 2, [(0, 1)]))
    h = witness_filter(alg, p, [(g, Substitution.identity(1))])
    assert h.sort == 2
    # brute force: enumerate all sort-2 prime filters satisfying (I) and (II)
    beta0 = Substitution(1, 2, (1,))
    beta1 = Substitution(2, 2, (1, 2))
    candidates = []
    for pf in prime_filters(sort_lattice(alg, 2)):
        cond1 = all((alg.subst(beta0, r) in pf.members) == (r in p.members) for r in alg.elements(1))
        cond2 = all(alg.subst(beta1, r) in pf.members for r in g.members)
        if cond1 and cond2:
            candidates.append(pf)
    assert h in candidates
    assert h.generator == bits(2, 2, [(0, 1)])


def test_witness_filter_inconsistent_pair_rejected():
    alg = concrete(W2, PE, 2)
    p = _sort1_filter(alg, bits(2, 1, [(0,)]))
    bad = next(pf for pf in prime_filters(sort_lattice(alg, 2)) if pf.generator == bits(2, 2, [(1, 0)]))
    with pytest.raises(PreconditionError):
        witness_filter(alg, p, [(bad, Substitution.identity(1))])


def test_non_distributive_lattice_rejected():
    # M3: three incomparable atoms below a shared top; a valid lattice, but
    # join of two atoms covers the third, so it is not distributive
    size = 5  # 0=bottom, 1,2,3=atoms, 4=top

    def mt(x, y):
        if x == y:
            return x
        if x == 0 or y == 0:
            return 0
        if x == 4:
            return y
        if y == 4:
            return x
        return 0

    def jn(x, y):
        if x == y:
            return x
        if x == 4 or y == 4:
            return 4
        if x == 0:
            return y
        if y == 0:
            return x
        return 4

    meet = [[mt(a, b) for b in range(size)] for a in range(size)]
    join = [[jn(a, b) for b in range(size)] for a in range(size)]
    ident = Substitution(0, 0, ())
    alg = TableAlgebra(PQF, 0, [size], [meet], [join], [0], [4], {ident: list(range(size))})
    with pytest.raises(NotALatticeError) as exc:
        SortLattice(alg, 0)
    assert "distributive" in str(exc.value)


def test_non_lattice_rejected():
    import json

    base = chain_algebra(3)
    data = json.loads(base.to_json())
    data["sorts"][0]["meet"][0][2] = 1  # corrupt: meet(0, 2) = 1
    broken = TableAlgebra.from_json(json.dumps(data))
    with pytest.raises(NotALatticeError):
        SortLattice(broken, 0)


def test_generated_subalgebra_duality_sample():
    rng = Random(77)
    for trial in range(6):
        size = rng.choice((1, 2))
        parent = concrete(Universe(size), PQF, 2)
        gens = [(rng.choice((1, 2)), 0) for _ in range(2)]
        gens = [(s, rng.randrange(parent.sort_size(s))) for s, _ in gens]
        alg = generated_subalgebra(parent, gens)
        for sort in range(3):
            if alg.sort_size(sort) > 16:
                continue
            lat = sort_lattice(alg, sort)
            assert all_prime_subsets(alg, sort) == {pf.members for pf in prime_filters(lat)}
