import pytest
from hypothesis import given, settings, strategies as st
from sympy.combinatorics import Permutation, PermutationGroup

from derivator.complexes import homology, is_quasi_iso
from derivator.errors import NotAGroup, NotNormal, WindowExceeded
from derivator.exactalg import ModulePresentation, parse_ring
from derivator.groupcoh import (
    FiniteGroup, GroupHom, Representation, SMALL_GROUPS, coinduction, coinvariants, cohomology_table,
    compare_routes, cyclic_group, find_subgroup, group_cohomology, group_homology, homology_table,
    induction, invariants, lhs_E2, lhs_report, named_group, parse_module, shapiro_check,
    small_groups, bar_resolution,
)
from derivator.resolve import derived_lan

Z, F2, F3 = parse_ring("Z"), parse_ring("F2"), parse_ring("F3")


def describe(mods):
    return [m.describe() for m in mods]


def sign(G, ring):
    # S3: odd permutations act by -1
    chi = {g: (-1 if G.element_order(g) == 2 else 1) for g in G.elements}
    return Representation.character(G, ring, chi)


def as_permutation_group(G):
    """Cayley embedding, used to ask sympy for the abelianization."""
    perms = [Permutation([G.index[G.m(g, h)] for h in G.elements]) for g in G.elements]
    return PermutationGroup(perms)


def p_rank(M, p, free_counts=True):
    tors, free = M.invariants()
    return sum(1 for t in tors if t % p == 0) + (free if free_counts else 0)


def test_small_group_catalogue():
    gs = small_groups()
    assert len(gs) == 14
    assert len({G.signature for G in gs}) == 14
    assert [G.order for G in gs] == [1, 2, 3, 4, 4, 5, 6, 6, 7, 8, 8, 8, 8, 8]


def test_invalid_table_is_rejected():
    mul = {(a, b): (a * b) % 4 for a in range(4) for b in range(4)}
    with pytest.raises(NotAGroup):
        FiniteGroup(range(4), mul)
    with pytest.raises(NotAGroup):
        named_group("A5")


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_cyclic_cohomology(n):
    assert describe(cohomology_table(cyclic_group(n), ModulePresentation.free(Z, 1), 4)) == \
        ["Z", "0", f"Z/{n}", "0", f"Z/{n}"]


def test_s3_integral_values():
    G = named_group("S3")
    triv = ModulePresentation.free(Z, 1)
    assert describe(cohomology_table(G, triv, 4)) == ["Z", "0", "Z/2", "0", "Z/6"]
    assert describe(homology_table(G, triv, 3)) == ["Z", "Z/2", "0", "Z/6"]


def test_quaternion_and_klein_values():
    triv = ModulePresentation.free(Z, 1)
    assert describe(cohomology_table(named_group("Q8"), triv, 3)) == ["Z", "0", "Z/2 + Z/2", "0"]
    assert describe(homology_table(named_group("C2xC2"), triv, 3)) == \
        ["Z", "Z/2 + Z/2", "Z/2", "Z/2 + Z/2 + Z/2"]


@pytest.mark.parametrize("name", SMALL_GROUPS)
def test_first_homology_is_abelianization(name):
    G = named_group(name)
    H1 = group_homology(G, ModulePresentation.free(Z, 1), 1)
    expect = [int(t) for t in as_permutation_group(G).abelian_invariants()]
    assert H1.is_isomorphic(ModulePresentation.from_invariants(Z, expect, 0))
    # and H^2(G, Z) is its dual
    assert group_cohomology(G, ModulePresentation.free(Z, 1), 2).is_isomorphic(H1)


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["C2", "C3", "C4", "C2xC2", "C6", "S3"]), st.sampled_from([2, 3]))
def test_universal_coefficients(name, p):
    G = named_group(name)
    Hz = homology_table(G, ModulePresentation.free(Z, 1), 3)
    Hp = cohomology_table(G, ModulePresentation.free(parse_ring(f"F{p}"), 1), 3)
    for n in range(4):
        expect = p_rank(Hz[n], p) + (p_rank(Hz[n - 1], p, free_counts=False) if n else 0)
        assert Hp[n].ngens == expect


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([(2, 3), (4, 5), (2, 5), (3, 7), (6, 7)]), st.integers(min_value=0, max_value=5))
def test_characters_of_coprime_order(np_, k):
    n, p = np_
    ring = parse_ring(f"F{p}")
    # a primitive n-th root of unity in F_p, raised to the k
    zeta = next(z for z in range(2, p) if pow(z, n, p) == 1 and all(pow(z, d, p) != 1 for d in range(1, n)))
    G = cyclic_group(n)
    w = pow(zeta, k, p)
    chi = {g: pow(w, g, p) for g in G.elements}
    dims = [m.ngens for m in cohomology_table(G, Representation.character(G, ring, chi), 3)]
    assert dims == ([1, 0, 0, 0] if w == 1 else [0, 0, 0, 0])


def test_invariants_and_coinvariants():
    G = named_group("S3")
    s = sign(G, Z)
    assert invariants(s).describe() == "0"
    assert coinvariants(s).describe() == "Z/2"
    reg = Representation.regular(G, Z)
    assert invariants(reg).describe() == "Z"
    assert coinvariants(reg).describe() == "Z"


def test_parse_module():
    assert parse_module("Z/4 + Z^2", Z).describe() == "Z/4 + Z^2"
    assert parse_module("F3", F3).ngens == 1


def test_routes_agree_small():
    for name in ("C2", "C3", "S3"):
        assert compare_routes(named_group(name), ModulePresentation.free(Z, 1), 3)["agree"]
    assert compare_routes(named_group("S3"), sign(named_group("S3"), Z), 3)["agree"]


def test_resolution_route_window():
    G = cyclic_group(2)
    with pytest.raises(WindowExceeded):
        group_cohomology(G, ModulePresentation.free(Z, 1), 4, method="resolution", length=3)


def test_bar_resolution_is_a_resolution():
    res = bar_resolution(cyclic_group(3), 4, Z)
    assert res.certified_window == (-3, 0)
    assert res.ranks()[:4] == [1, 2, 4, 8]
    assert is_quasi_iso(res.comparison.at("*"), res.certified_window)


def test_derived_pushforward_to_quotient_is_subgroup_homology():
    # L(p)_! M at the point of B(G/H) computes H_*(H, M)
    G = named_group("C2xC2")
    H = find_subgroup(G, "C2", normal=True)
    Q, proj, _ = G.quotient(H)
    p = GroupHom(G, Q, proj)
    M = Representation.trivial(G, ModulePresentation.free(Z, 1))
    L = derived_lan(p.B(), M.to_diagram(), 4)
    C = L.at("*")
    lo, hi = L.certified_window
    for q in range(0, -lo + 1):
        assert homology(C, -q).is_isomorphic(group_homology(H, M.restrict(H), q))


def test_quotient_by_non_normal_subgroup():
    G = named_group("S3")
    H = find_subgroup(G, "C2")
    with pytest.raises(NotNormal):
        G.quotient(H)
    with pytest.raises(NotAGroup):
        find_subgroup(G, "C2", normal=True)


def test_induction_and_coinduction_ranks():
    G = named_group("S3")
    H = find_subgroup(G, "C2")
    inc = GroupHom.inclusion(H, G)
    M = Representation.trivial(H, ModulePresentation.free(Z, 2))
    ind, coind = induction(inc, M), coinduction(inc, M)
    assert ind.rank == coind.rank == 6
    ind.validate()
    coind.validate()
    # finite index: both are the permutation module on G/H, so invariants agree
    assert invariants(ind).is_isomorphic(invariants(coind))
    assert invariants(ind).describe() == "Z^2"


@pytest.mark.parametrize("sub,grp,ring", [("C2", "C4", "F2"), ("C2", "S3", "F2"), ("C3", "S3", "F3"),
                                          ("C2", "S3", "Z")])
def test_shapiro(sub, grp, ring):
    G = named_group(grp)
    H = find_subgroup(G, sub)
    M = Representation.trivial(H, ModulePresentation.free(parse_ring(ring), 1))
    assert shapiro_check(H, G, M, 3)["passed"]


def test_lhs_klein_over_f2_degenerates():
    G = named_group("C2xC2")
    H = find_subgroup(G, "C2", normal=True)
    M = Representation.trivial(G, ModulePresentation.free(F2, 1))
    r = lhs_report(G, H, M, pmax=4)
    assert r["E2_matches_direct"]
    assert all(v == "F2" for v in r["E2"].values())
    assert r["degenerates_at_E2"]
    assert all(r["checks"].values())
    # H^n((C2)^2, F2) has dimension n + 1
    assert [d["tot"] for d in r["diagonals"]] == ["F2", "F2^2", "F2^3", "F2^4"][:len(r["diagonals"])]


def test_lhs_cyclic_four_has_d2():
    G = cyclic_group(4)
    H = find_subgroup(G, "C2")
    M = Representation.trivial(G, ModulePresentation.free(F2, 1))
    r = lhs_report(G, H, M, pmax=4)
    assert r["E2_matches_direct"]
    assert {"r": 2, "source": [0, 1], "target": [2, 0]} in r["nonzero_differentials"]
    assert all(d["agree"] and d["E_inf_total"] == 1 for d in r["diagonals"])


def test_lhs_e2_over_z():
    G = named_group("S3")
    H = find_subgroup(G, "C3", normal=True)
    E2 = lhs_E2(G, H, Representation.trivial(G, ModulePresentation.free(Z, 1)), 2)
    assert E2[(0, 0)].describe() == "Z"
    assert E2[(2, 0)].describe() == "Z/2"
    # H^2(C3, Z) = Z/3 with the generator inverted by the C2 action, so no invariants
    assert E2[(0, 2)].describe() == "0"
