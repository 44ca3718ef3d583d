import random

from hypothesis import given, settings, strategies as st

from derivator.complexes import (
    ChainMap, Complex, cone, cylinder, dual, hom_complex, homology, is_acyclic, is_quasi_iso,
    shift, tensor,
)
from derivator.exactalg import ModulePresentation, matrix, parse_ring
from derivator.randomgen import random_chain_map, random_complex

F3 = parse_ring("F3")
Z = parse_ring("Z")

seeds = st.integers(min_value=0, max_value=10**6)


def dims(C, lo, hi):
    return {n: homology(C, n).ngens for n in range(lo, hi + 1)}


def euler(C):
    return sum((-1) ** n * C.ngens(n) for n in range(C.lo, C.hi + 1))


def two_z():
    # Z --2--> Z in degrees -1, 0
    return Complex.free(Z, {-1: 1, 0: 1}, {-1: matrix(Z, [[2]])})


def test_two_z_homology():
    C = two_z()
    assert homology(C, 0).describe() == "Z/2"
    assert homology(C, -1).is_zero()


def test_tensor_over_z_picks_up_tor():
    # Künneth: H^0 = Z/2 (x) Z/2, H^-1 = Tor(Z/2, Z/2)
    T = tensor(two_z(), two_z())
    assert homology(T, 0).describe() == "Z/2"
    assert homology(T, -1).describe() == "Z/2"
    assert homology(T, -2).is_zero()


def test_hom_over_z_picks_up_ext():
    # Hom(Z/2 resolved, Z) has H^1 = Ext^1(Z/2, Z) = Z/2 and no H^0
    H = hom_complex(two_z(), Complex.free(Z, {0: 1}))
    assert homology(H, 0).is_zero()
    assert homology(H, 1).describe() == "Z/2"


def test_dual_of_two_z():
    D = dual(two_z())
    assert homology(D, 1).describe() == "Z/2"


@settings(max_examples=25, deadline=None)
@given(seeds, st.integers(min_value=-2, max_value=2))
def test_shift_moves_homology(seed, k):
    C = random_complex(random.Random(seed), Z, -1, 2)
    S = shift(C, k)
    for n in range(C.lo, C.hi + 1):
        assert homology(S, n - k).is_isomorphic(homology(C, n))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_kunneth_over_field(seed):
    rng = random.Random(seed)
    K = random_complex(rng, F3, -1, 1)
    L = random_complex(rng, F3, -1, 1)
    T = tensor(K, L)
    hk, hl = dims(K, -1, 1), dims(L, -1, 1)
    for n in range(-2, 3):
        expect = sum(hk[p] * hl.get(n - p, 0) for p in hk)
        assert homology(T, n).ngens == expect


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_hom_dimensions_over_field(seed):
    rng = random.Random(seed)
    K = random_complex(rng, F3, -1, 1)
    M = random_complex(rng, F3, -1, 1)
    H = hom_complex(K, M)
    hk, hm = dims(K, -1, 1), dims(M, -1, 1)
    for n in range(-2, 3):
        expect = sum(hk[p] * hm.get(p + n, 0) for p in hk)
        assert homology(H, n).ngens == expect


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_cone_euler_characteristic(seed):
    rng = random.Random(seed)
    F = random_complex(rng, Z, -1, 1)
    G = random_complex(rng, Z, -1, 1)
    C, incl, proj = cone(random_chain_map(rng, F, G))
    C.validate()
    incl.validate()
    proj.validate()
    assert euler(C) == euler(G) - euler(F)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_cone_acyclic_iff_quasi_iso(seed):
    rng = random.Random(seed)
    F = random_complex(rng, F3, -1, 1, max_rank=2)
    G = random_complex(rng, F3, -1, 1, max_rank=2)
    phi = random_chain_map(rng, F, G)
    C, _, _ = cone(phi)
    assert is_acyclic(C, (-3, 2)) == is_quasi_iso(phi, (-2, 2))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_cone_of_identity_is_acyclic(seed):
    F = random_complex(random.Random(seed), Z, -1, 2)
    C, _, _ = cone(ChainMap.identity(F))
    assert is_acyclic(C)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_cylinder_structure(seed):
    rng = random.Random(seed)
    F = random_complex(rng, Z, -1, 1)
    G = random_complex(rng, Z, -1, 1)
    phi = random_chain_map(rng, F, G)
    Cyl, iota, alpha, beta, t, h = cylinder(phi)
    Cyl.validate()
    assert t.residual_is_zero_exact()
    assert h.residual_is_zero_exact()
    assert iota.then(beta).equals(phi)
    assert alpha.then(beta).equals(ChainMap.identity(G))
    assert is_quasi_iso(beta)


def test_non_free_concentrated_complex():
    M = ModulePresentation.from_invariants(Z, [4], 1)
    C = Complex.concentrated(M, 2)
    assert homology(C, 2).describe() == "Z/4 + Z"


def test_tensor_of_coprime_cones_is_acyclic():
    three = Complex.free(Z, {-1: 1, 0: 1}, {-1: matrix(Z, [[3]])})
    assert is_acyclic(tensor(two_z(), three))
