import pytest

from derivator.errors import NotACategory, NotAFunctor, NotAGroup, UnknownObject
from derivator.smallcat import (
    BG, CatFunctor, FinCat, builtin, check_group_table, coslice, discrete, group_functor, poset,
    product, slice, terminal_functor,
)


def c_n(n):
    return list(range(n)), {(a, b): (a + b) % n for a in range(n) for b in range(n)}


def test_square_poset_counts():
    sq = builtin("square")
    assert len(sq.objects) == 4
    # 4 identities, 4 edges and the diagonal 00<=11
    assert len(sq.morphisms) == 9
    assert sq.compose("10<=11", "00<=10") == "00<=11"
    assert sq.compose("01<=11", "00<=01") == "00<=11"


def test_poset_rejects_cycles():
    with pytest.raises(NotACategory):
        poset(["a", "b"], [("a", "b"), ("b", "a")])


def test_group_table_validation():
    els, mul = c_n(3)
    ident, inv = check_group_table(els, mul)
    assert ident == 0 and inv[1] == 2
    bad = dict(mul)
    bad[(1, 1)] = 1
    with pytest.raises(NotAGroup):
        check_group_table(els, bad)


def test_bg_composition_is_multiplication():
    els, mul = c_n(4)
    B = BG(els, mul)
    assert B.objects == ("*",)
    assert B.compose(3, 2) == 1
    assert B.identity("*") == 0


def test_opposite_reverses_arrows():
    two = builtin("two")
    op = two.opposite()
    assert op.src("0<=1") == "1" and op.tgt("0<=1") == "0"


def test_slice_of_terminal_functor_is_the_category():
    sq = builtin("square")
    c = terminal_functor(sq)
    cat, proj = slice(c, "*")
    assert len(cat.objects) == 4
    assert len(cat.morphisms) == len(sq.morphisms)


def test_slices_of_corner_inclusion():
    sq = builtin("square")
    up = builtin("upper_corner")
    u = CatFunctor(up, sq, {o: o for o in up.objects}, {m: m for m in up.morphisms})
    cat, _ = slice(u, "11")
    # every object of the corner maps uniquely to 11
    assert sorted(o[0] for o in cat.objects) == ["00", "01", "10"]
    cat, _ = slice(u, "10")
    assert sorted(o[0] for o in cat.objects) == ["00", "10"]
    cat, _ = coslice(u, "10")
    assert [o[0] for o in cat.objects] == ["10"]


def test_slice_of_group_inclusion_enumerates_cosets():
    # B(C2 in C4) -> BC4: the slice over * has one object per element of C4
    els4, mul4 = c_n(4)
    sub = [0, 2]
    u = group_functor(sub, {(a, b): (a + b) % 4 for a in sub for b in sub}, els4, mul4,
                      {0: 0, 2: 2})
    cat, _ = slice(u, "*")
    assert len(cat.objects) == 4
    # isomorphism classes in the slice are the two cosets
    comps = set()
    for o in cat.objects:
        comps.add(frozenset(cat.tgt(m) for m in cat.hom_from(o)))
    assert len(comps) == 2


def test_functor_validation():
    two = builtin("two")
    e = builtin("e")
    with pytest.raises((NotAFunctor, UnknownObject, KeyError)):
        CatFunctor(two, e, {"0": "*", "1": "*"}, {"0<=0": "id"})


def test_product_and_discrete():
    P = product(builtin("two"), builtin("two"))
    assert len(P.objects) == 4 and len(P.morphisms) == 9
    D = discrete(["a", "b"])
    assert all(D.is_identity(m) for m in D.morphisms)


def test_json_round_trip():
    sq = builtin("square")
    back = FinCat.from_json(sq.to_json())
    assert back.objects == sq.objects
    assert back.compose("10<=11", "00<=10") == "00<=11"
