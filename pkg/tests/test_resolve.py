import random

import pytest
from hypothesis import given, settings, strategies as st

from derivator.complexes import ChainMap, Complex, cone, direct_sum, homology, is_quasi_iso
from derivator.diagrams import DiagramComplex, colim
from derivator.errors import NotHomotopyCommutative
from derivator.exactalg import ExactMatrix, ModulePresentation, matrix, parse_ring
from derivator.randomgen import random_chain_map, random_complex, random_poset_diagram
from derivator.resolve import (
    beck_chevalley_check, derivator_cone, derived_lan, hocolim, holim, holim_via_hom,
    is_cartesian, is_cocartesian, projective_resolution, rectify_square, upper_corner_inclusion,
)
from derivator.smallcat import BG, builtin
from derivator.suites import random_htpy_square

Z, F2, F3 = parse_ring("Z"), parse_ring("F2"), parse_ring("F3")
seeds = st.integers(min_value=0, max_value=10**6)


def bc(n):
    return BG(list(range(n)), {(a, b): (a + b) % n for a in range(n) for b in range(n)})


def trivial(shape, ring):
    return DiagramComplex.constant(shape, Complex.free(ring, {0: 1}))


def sign_rep(ring):
    B = bc(2)
    return DiagramComplex.from_modules(B, ring, {"*": ModulePresentation.free(ring, 1)},
                                       {1: matrix(ring, [[-1]])})


def describe(C, n):
    return homology(C, n).describe()


def test_resolution_of_constant_over_bc2():
    res = projective_resolution(trivial(bc(2), Z), 5)
    assert res.certified_window == (-4, 0)
    assert is_quasi_iso(res.comparison.at("*"), res.certified_window)
    # the periodic resolution has one free generator per degree
    assert res.ranks()[:5] == [1, 1, 1, 1, 1]


def test_hocolim_of_trivial_c2_is_group_homology():
    H = hocolim(trivial(bc(2), Z), 5)
    lo, hi = H.certified_window
    assert (lo, hi) == (-4, 0)
    assert [describe(H, -k) for k in range(5)] == ["Z", "Z/2", "0", "Z/2", "0"]


def test_hocolim_of_sign_c2():
    H = hocolim(sign_rep(Z), 5)
    assert [describe(H, -k) for k in range(5)] == ["Z/2", "0", "Z/2", "0", "Z/2"]


def test_holim_of_trivial_c2_is_group_cohomology():
    H = holim_via_hom(trivial(bc(2), Z), 5)
    assert H.certified_window == (0, 4)
    assert [describe(H, k) for k in range(5)] == ["Z", "0", "Z/2", "0", "Z/2"]
    # over F2 every degree is one-dimensional
    H = holim(trivial(bc(2), F2), 5)
    lo, hi = H.certified_window
    assert lo <= 0 and hi >= 4
    assert [homology(H, k).ngens for k in range(5)] == [1] * 5


def test_holim_of_trivial_c3_over_f2_is_concentrated():
    H = holim(trivial(bc(3), F2), 4)
    assert [homology(H, k).ngens for k in range(4)] == [1, 0, 0, 0]


def test_hocolim_over_poset_with_terminal_object_is_value_there():
    # the square has a terminal object, so hocolim is evaluation at 11
    rng = random.Random(11)
    sq = builtin("square")
    D = derived_lan(upper_corner_inclusion(), random_poset_diagram(rng, builtin("upper_corner"), Z), 4)
    D = DiagramComplex(sq, Z, D.values, D.maps)
    H = hocolim(D, 4)
    for n in range(H.certified_window[0], H.certified_window[1] + 1):
        assert homology(H, n).is_isomorphic(homology(D.at("11"), n))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_beck_chevalley_corner(seed):
    u = upper_corner_inclusion()
    F = random_poset_diagram(random.Random(seed), u.source, F3)
    for j in u.target.objects:
        assert beck_chevalley_check(u, j, F, 3, dual_too=True)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_hocolim_of_span_is_homotopy_pushout(seed):
    rng = random.Random(seed)
    D = random_poset_diagram(rng, builtin("upper_corner"), Z)
    H = hocolim(D, 4)
    # independent route: pushout of the span after replacing one leg by its cylinder
    # agrees with the cone of (f, -g): F00 -> F10 + F01
    F00, F10, F01 = D.at("00"), D.at("10"), D.at("01")
    f, g = D.along("00<=10"), D.along("00<=01")
    T = direct_sum(F10, F01)
    lo, hi = min(F00.lo, T.lo), max(F00.hi, T.hi)
    comps = {n: ExactMatrix.vstack(Z, [f.at(n), -g.at(n)], ncols=F00.ngens(n)) for n in range(lo, hi + 1)}
    C, _, _ = cone(ChainMap(F00, T, comps))
    for n in range(H.certified_window[0], H.certified_window[1] + 1):
        assert homology(H, n).is_isomorphic(homology(C, n))


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_derivator_cone_matches_mapping_cone(seed):
    rng = random.Random(seed)
    F = random_complex(rng, Z, -1, 1, 2)
    G = random_complex(rng, Z, -1, 1, 2)
    phi = random_chain_map(rng, F, G)
    D = derivator_cone(phi, 4)
    C, _, _ = cone(phi)
    for n in range(max(D.certified_window[0], -1), D.certified_window[1] + 1):
        assert homology(D, n).is_isomorphic(homology(C, n))


def test_constant_square_is_bicartesian():
    S = trivial(builtin("square"), Z)
    assert is_cocartesian(S)
    assert is_cartesian(S)


def test_square_with_single_corner_is_not_cocartesian():
    sq = builtin("square")
    mods = {o: ModulePresentation.free(Z, 1 if o == "00" else 0) for o in sq.objects}
    zero = {m: ExactMatrix(Z, mods[sq.tgt(m)].ngens, mods[sq.src(m)].ngens)
            for m in sq.non_identity_morphisms()}
    S = DiagramComplex.from_modules(sq, Z, mods, zero)
    assert not is_cocartesian(S)
    assert not is_cartesian(S)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_rectification(seed):
    g1, g2, s, phi, phip = random_htpy_square(random.Random(seed), Z)
    R = rectify_square(g1, g2, s, phi, phip)
    assert all(R.checks().values())
    assert is_quasi_iso(R.beta)
    # alpha: G -> Cyl is a quasi-isomorphism and the new square commutes on the nose
    assert is_quasi_iso(R.alpha)
    for n in range(phi.source.lo, phi.source.hi + 1):
        lhs = R.gamma2_tilde.at(n) @ R.iota.at(n)
        rhs = phip.at(n) @ g1.at(n)
        assert (lhs - rhs).is_zero()


def test_rectify_rejects_non_commuting_square():
    seed = 0
    while True:
        g1, g2, s, phi, phip = random_htpy_square(random.Random(seed), Z)
        if any(not v.is_zero() for v in s.values()):
            break
        seed += 1
    bad = {n: v.scale(3) for n, v in s.items()}
    with pytest.raises(NotHomotopyCommutative):
        rectify_square(g1, g2, bad, phi, phip)


def test_colim_of_constant_bc2_is_coinvariants():
    C, _ = colim(sign_rep(Z))
    assert describe(C, 0) == "Z/2"
