import random

from hypothesis import given, settings, strategies as st

from derivator.complexes import ChainMap, homology, is_quasi_iso
from derivator.diagrams import (
    DiagramComplex, DiagramMap, colim, dia, dia_inverse, lan, lim, ran, representable, restrict,
    restrict_map, unit_counit,
)
from derivator.exactalg import ModulePresentation, matrix, parse_ring
from derivator.randomgen import random_poset_diagram
from derivator.smallcat import CatFunctor, builtin, terminal_functor

Z = parse_ring("Z")
seeds = st.integers(min_value=0, max_value=10**6)


def span(a, b):
    """Z <-a- Z -b-> Z over the upper corner."""
    shape = builtin("upper_corner")
    mods = {o: ModulePresentation.free(Z, 1) for o in shape.objects}
    return DiagramComplex.from_modules(shape, Z, mods, {"00<=10": matrix(Z, [[a]]),
                                                        "00<=01": matrix(Z, [[b]])})


def cospan(a, b):
    shape = builtin("lower_corner")
    mods = {o: ModulePresentation.free(Z, 1) for o in shape.objects}
    return DiagramComplex.from_modules(shape, Z, mods, {"10<=11": matrix(Z, [[a]]),
                                                        "01<=11": matrix(Z, [[b]])})


def test_pushout_values():
    C, legs = colim(span(2, 2))
    assert homology(C, 0).describe() == "Z/2 + Z"
    C, _ = colim(span(2, 3))
    assert homology(C, 0).describe() == "Z"


def test_pullback_values():
    # {(x, y): 2x = 3y} is free of rank one
    L, _ = lim(cospan(2, 3))
    assert homology(L, 0).describe() == "Z"
    L, _ = lim(cospan(0, 0))
    assert homology(L, 0).describe() == "Z^2"


def test_colimit_over_arrow_is_target():
    shape = builtin("two")
    mods = {"0": ModulePresentation.free(Z, 2), "1": ModulePresentation.from_invariants(Z, [3], 0)}
    D = DiagramComplex.from_modules(shape, Z, mods, {"0<=1": matrix(Z, [[1, 2]])})
    C, _ = colim(D)
    assert homology(C, 0).describe() == "Z/3"
    L, _ = lim(D)
    assert homology(L, 0).describe() == "Z^2"


def test_representable_values():
    P = representable(builtin("square"), Z, "00")
    assert [P.at(o).ngens(0) for o in ("00", "10", "01", "11")] == [1, 1, 1, 1]
    P = representable(builtin("square"), Z, "10")
    assert [P.at(o).ngens(0) for o in ("00", "10", "01", "11")] == [0, 1, 0, 1]


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_lan_to_point_is_colimit(seed):
    shape = builtin("upper_corner")
    D = random_poset_diagram(random.Random(seed), shape, Z)
    C, _ = colim(D)
    L = lan(terminal_functor(shape), D).at("*")
    R = ran(terminal_functor(shape), D).at("*")
    M, _ = lim(D)
    for n in range(-1, 2):
        assert homology(L, n).is_isomorphic(homology(C, n))
        assert homology(R, n).is_isomorphic(homology(M, n))


def _corner_inclusion():
    sq, up = builtin("square"), builtin("upper_corner")
    return CatFunctor(up, sq, {o: o for o in up.objects}, {m: m for m in up.morphisms})


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_lan_along_fully_faithful_restricts_back(seed):
    u = _corner_inclusion()
    D = random_poset_diagram(random.Random(seed), u.source, Z)
    ad = unit_counit(u)
    eta = ad.eta_lower(D)
    eta.validate()
    for o in u.source.objects:
        assert is_quasi_iso(eta.at(o))


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_triangle_identities(seed):
    u = _corner_inclusion()
    rng = random.Random(seed)
    G = random_poset_diagram(rng, builtin("upper_corner"), Z)
    G = lan(u, G)  # any diagram on the square
    ad = unit_counit(u)
    UG = restrict(u, G)
    # u^* eps . eta u^* = id
    eta = ad.eta_lower(UG)
    eps = ad.eps_lower(G)
    composite = eta.then(restrict_map(u, eps, source=eta.target))
    for o in u.source.objects:
        assert composite.at(o).equals(ChainMap.identity(UG.at(o)))
    # eps u^* . u^* eta = id for the right adjoint
    eta_u = ad.eta_upper(G)
    eps_u = ad.eps_upper(UG)
    composite = restrict_map(u, eta_u, target=eps_u.source).then(eps_u)
    for o in u.source.objects:
        assert composite.at(o).equals(ChainMap.identity(UG.at(o)))


def test_dia_round_trip():
    rng = random.Random(3)
    J = builtin("two")
    src = random_poset_diagram(rng, J, Z)
    phi = DiagramMap(src, src, {j: ChainMap.identity(src.at(j)) for j in J.objects})
    F = dia_inverse(phi, J)
    F.validate()
    back = dia(F, J)
    for j in J.objects:
        assert back.at(j).equals(phi.at(j))
