"""Finite categories stored by explicit composition tables.

Object and morphism labels are arbitrary hashable values (strings for the
builtins, tuples for slices and products).  Composition is written
``compose(g, f) = g o f`` and is only defined when ``tgt(f) == src(g)``.
"""
from __future__ import annotations

import itertools

from .errors import NotACategory, NotAFunctor, NotAGroup, UnknownObject


class FinCat:
    """A finite category; validated on construction unless ``check=False``."""

    def __init__(self, objects, morphisms, composition, identities, name=None, check=True):
        self.objects = tuple(objects)
        self.name = name
        self._src = {}
        self._tgt = {}
        for label, s, t in morphisms:
            if label in self._src:
                raise NotACategory(f"duplicate morphism label {label!r}")
            self._src[label] = s
            self._tgt[label] = t
        self.morphisms = tuple(m for m, _, _ in morphisms)
        self._comp = dict(composition)
        self._id = dict(identities)
        self._obj_index = {o: k for k, o in enumerate(self.objects)}
        self._hom = {}
        for m in self.morphisms:
            self._hom.setdefault((self._src[m], self._tgt[m]), []).append(m)
        if check:
            self.validate()

    # basic access -----------------------------------------------------------

    def src(self, m):
        return self._src[m]

    def tgt(self, m):
        return self._tgt[m]

    def identity(self, obj):
        try:
            return self._id[obj]
        except KeyError:
            raise UnknownObject(f"{obj!r} is not an object") from None

    def hom(self, a, b):
        return self._hom.get((a, b), [])

    def compose(self, g, f):
        """g o f."""
        try:
            return self._comp[(g, f)]
        except KeyError:
            raise NotACategory(f"{g!r} o {f!r} is not defined") from None

    def index(self, obj):
        try:
            return self._obj_index[obj]
        except KeyError:
            raise UnknownObject(f"{obj!r} is not an object") from None

    def has_object(self, obj):
        return obj in self._obj_index

    def is_identity(self, m):
        return self._id.get(self._src[m]) == m

    def non_identity_morphisms(self):
        return [m for m in self.morphisms if not self.is_identity(m)]

    def __len__(self):
        return len(self.objects)

    def __repr__(self):
        name = self.name or "FinCat"
        return f"<{name}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"

    # validation ---------------------------------------------------------------

    def validate(self):
        objs = set(self.objects)
        if len(objs) != len(self.objects):
            raise NotACategory("duplicate objects")
        for m in self.morphisms:
            if self._src[m] not in objs or self._tgt[m] not in objs:
                raise NotACategory(f"morphism {m!r} has an unknown endpoint")
        for o in self.objects:
            i = self._id.get(o)
            if i is None or self._src.get(i) != o or self._tgt.get(i) != o:
                raise NotACategory(f"missing identity for {o!r}")
        for f in self.morphisms:
            s, t = self._src[f], self._tgt[f]
            if self._comp.get((f, self._id[s])) != f or self._comp.get((self._id[t], f)) != f:
                raise NotACategory(f"identity laws fail for {f!r}")
            for g in self.morphisms:
                if self._src[g] != t:
                    continue
                gf = self._comp.get((g, f))
                if gf is None:
                    raise NotACategory(f"{g!r} o {f!r} missing")
                if self._src.get(gf) != s or self._tgt.get(gf) != self._tgt[g]:
                    raise NotACategory(f"{g!r} o {f!r} has wrong endpoints")
        for f in self.morphisms:
            for g in self.hom_from(self._tgt[f]):
                gf = self._comp[(g, f)]
                for h in self.hom_from(self._tgt[g]):
                    if self._comp[(h, gf)] != self._comp[(self._comp[(h, g)], f)]:
                        raise NotACategory(f"associativity fails at {h!r}, {g!r}, {f!r}")
        return True

    def hom_from(self, a):
        if not hasattr(self, "_from"):
            self._from = {}
            for m in self.morphisms:
                self._from.setdefault(self._src[m], []).append(m)
        return self._from.get(a, [])

    def hom_to(self, b):
        if not hasattr(self, "_to"):
            self._to = {}
            for m in self.morphisms:
                self._to.setdefault(self._tgt[m], []).append(m)
        return self._to.get(b, [])

    # constructions ------------------------------------------------------------

    def opposite(self):
        mors = [(m, self._tgt[m], self._src[m]) for m in self.morphisms]
        comp = {(f, g): h for (g, f), h in self._comp.items()}
        return FinCat(self.objects, mors, comp, self._id,
                      name=f"{self.name or 'I'}^op", check=False)

    def to_json(self):
        return {
            "objects": [str(o) for o in self.objects],
            "morphisms": [[str(m), str(self._src[m]), str(self._tgt[m])] for m in self.morphisms],
            "composition": [[str(g), str(f), str(h)] for (g, f), h in sorted(
                self._comp.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))],
            "identities": {str(o): str(self._id[o]) for o in self.objects},
        }

    @classmethod
    def from_json(cls, data):
        return cls(data["objects"], [tuple(m) for m in data["morphisms"]],
                   {(g, f): h for g, f, h in data["composition"]}, data["identities"])


class CatFunctor:
    """A functor given by its object and morphism maps (validated)."""

    def __init__(self, source: FinCat, target: FinCat, object_map, morphism_map, name=None, check=True):
        self.source = source
        self.target = target
        self.object_map = dict(object_map)
        self.morphism_map = dict(morphism_map)
        self.name = name
        if check:
            self.validate()

    def __call__(self, x):
        if x in self.object_map:
            return self.object_map[x]
        return self.morphism_map[x]

    def obj(self, o):
        return self.object_map[o]

    def mor(self, m):
        return self.morphism_map[m]

    def validate(self):
        S, T = self.source, self.target
        for o in S.objects:
            if o not in self.object_map or not T.has_object(self.object_map[o]):
                raise NotAFunctor(f"object {o!r} not mapped into the target")
            if self.morphism_map.get(S.identity(o)) != T.identity(self.object_map[o]):
                raise NotAFunctor(f"identity of {o!r} not preserved")
        for m in S.morphisms:
            fm = self.morphism_map.get(m)
            if fm is None or fm not in T._src:
                raise NotAFunctor(f"morphism {m!r} not mapped")
            if T.src(fm) != self.object_map[S.src(m)] or T.tgt(fm) != self.object_map[S.tgt(m)]:
                raise NotAFunctor(f"endpoints of {m!r} not preserved")
        for (g, f), h in S._comp.items():
            if T.compose(self.morphism_map[g], self.morphism_map[f]) != self.morphism_map[h]:
                raise NotAFunctor(f"composition {g!r} o {f!r} not preserved")
        return True

    def then(self, other: "CatFunctor") -> "CatFunctor":
        """other o self."""
        if other.source is not self.target and other.source.objects != self.target.objects:
            raise NotAFunctor("functors are not composable")
        return CatFunctor(self.source, other.target,
                          {o: other.obj(v) for o, v in self.object_map.items()},
                          {m: other.mor(v) for m, v in self.morphism_map.items()}, check=False)

    def opposite(self):
        return CatFunctor(self.source.opposite(), self.target.opposite(),
                          self.object_map, self.morphism_map, check=False)

    def __repr__(self):
        return f"<functor {self.name or ''}: {self.source!r} -> {self.target!r}>"


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------


def slice(u: CatFunctor, j):
    """The slice ``I/j``: objects (i, a: u(i) -> j), plus the projection to I."""
    I, J = u.source, u.target
    if not J.has_object(j):
        raise UnknownObject(f"{j!r} is not an object of the target")
    objects = [(i, a) for i in I.objects for a in J.hom(u.obj(i), j)]
    mors, ids, pmap = [], {}, {}
    by_src = {}
    for (i, a) in objects:
        for m in I.hom_from(i):
            um = u.mor(m)
            i2 = I.tgt(m)
            for a2 in J.hom(u.obj(i2), j):
                if J.compose(a2, um) == a:
                    label = (m, a, a2)
                    mors.append((label, (i, a), (i2, a2)))
                    pmap[label] = m
                    by_src.setdefault((i, a), []).append(label)
        ids[(i, a)] = (I.identity(i), a, a)
    comp = {}
    for f, s, t in mors:
        for g in by_src.get(t, ()):
            comp[(g, f)] = (I.compose(g[0], f[0]), f[1], g[2])
    cat = FinCat(objects, mors, comp, ids, name=f"{I.name or 'I'}/{j}", check=False)
    proj = CatFunctor(cat, I, {o: o[0] for o in objects}, pmap, name="pi", check=False)
    return cat, proj


def coslice(u: CatFunctor, j):
    """The coslice ``j\\I``: objects (i, a: j -> u(i)), plus the projection to I."""
    I, J = u.source, u.target
    if not J.has_object(j):
        raise UnknownObject(f"{j!r} is not an object of the target")
    objects = [(i, a) for i in I.objects for a in J.hom(j, u.obj(i))]
    mors, ids, pmap = [], {}, {}
    by_src = {}
    for (i, a) in objects:
        for m in I.hom_from(i):
            i2 = I.tgt(m)
            a2 = J.compose(u.mor(m), a)
            label = (m, a, a2)
            mors.append((label, (i, a), (i2, a2)))
            pmap[label] = m
            by_src.setdefault((i, a), []).append(label)
        ids[(i, a)] = (I.identity(i), a, a)
    comp = {}
    for f, s, t in mors:
        for g in by_src.get(t, ()):
            comp[(g, f)] = (I.compose(g[0], f[0]), f[1], g[2])
    cat = FinCat(objects, mors, comp, ids, name=f"{j}\\{I.name or 'I'}", check=False)
    proj = CatFunctor(cat, I, {o: o[0] for o in objects}, pmap, name="varpi", check=False)
    return cat, proj


def slice_map(u: CatFunctor, beta):
    """Object map of the functor I/j -> I/j' induced by beta: j -> j'."""
    J = u.target
    return lambda obj: (obj[0], J.compose(beta, obj[1]))


def coslice_map(u: CatFunctor, beta):
    """Object map of j'\\I -> j\\I induced by beta: j -> j'."""
    J = u.target
    return lambda obj: (obj[0], J.compose(obj[1], beta))


def discrete_fiber(u: CatFunctor, i):
    """Discrete category on the objects of the source sent to ``i``, with its inclusion."""
    objs = [o for o in u.source.objects if u.obj(o) == i]
    cat = discrete(objs)
    incl = CatFunctor(cat, u.source, {o: o for o in objs},
                      {cat.identity(o): u.source.identity(o) for o in objs}, check=False)
    return cat, incl


# ---------------------------------------------------------------------------
# builtin categories and functors
# ---------------------------------------------------------------------------


def discrete(objects, name=None):
    objects = list(objects)
    return FinCat(objects, [(("id", o), o, o) for o in objects],
                  {(("id", o), ("id", o)): ("id", o) for o in objects},
                  {o: ("id", o) for o in objects}, name=name or "discrete")


def poset(elements, relations, name=None):
    """Category of a finite poset; ``relations`` are pairs (a, b) meaning a <= b.

    Morphisms are labelled ``"a<=b"``; the reflexive-transitive closure is taken.
    """
    elements = list(elements)
    le = {(a, a) for a in elements} | {tuple(r) for r in relations}
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in itertools.product(list(le), list(le)):
            if b == c and (a, d) not in le:
                le.add((a, d))
                changed = True
    for a, b in le:
        if a != b and (b, a) in le:
            raise NotACategory(f"relation is not antisymmetric at {a!r}, {b!r}")
    label = lambda a, b: f"{a}<={b}"  # noqa: E731
    order = {e: k for k, e in enumerate(elements)}
    pairs = sorted(le, key=lambda p: (order[p[0]], order[p[1]]))
    mors = [(label(a, b), a, b) for a, b in pairs]
    comp = {}
    for a, b in pairs:
        for c, d in pairs:
            if b == c:
                comp[(label(c, d), label(a, b))] = label(a, d)
    return FinCat(elements, mors, comp, {a: label(a, a) for a in elements}, name=name)


def check_group_table(elements, mul):
    """Validate a multiplication table; return (identity, inverse dict)."""
    elements = list(elements)
    es = set(elements)
    for a in elements:
        for b in elements:
            if mul.get((a, b)) not in es:
                raise NotAGroup(f"product {a!r}*{b!r} missing or outside the set")
    ident = None
    for e in elements:
        if all(mul[(e, a)] == a and mul[(a, e)] == a for a in elements):
            ident = e
            break
    if ident is None:
        raise NotAGroup("no identity element")
    inv = {}
    for a in elements:
        for b in elements:
            if mul[(a, b)] == ident and mul[(b, a)] == ident:
                inv[a] = b
                break
        else:
            raise NotAGroup(f"{a!r} has no inverse")
    for a, b, c in itertools.product(elements, repeat=3):
        if mul[(mul[(a, b)], c)] != mul[(a, mul[(b, c)])]:
            raise NotAGroup(f"associativity fails at {a!r}, {b!r}, {c!r}")
    return ident, inv


def BG(elements, mul, name=None, check=True):
    """One-object category of a group; composition g o f = g * f."""
    elements = list(elements)
    if check:
        ident, _ = check_group_table(elements, mul)
    else:
        ident = next(e for e in elements if all(mul[(e, a)] == a for a in elements))
    mors = [(g, "*", "*") for g in elements]
    comp = {(g, f): mul[(g, f)] for g in elements for f in elements}
    return FinCat(["*"], mors, comp, {"*": ident}, name=name or "BG", check=False)


SQUARE_OBJECTS = ("00", "10", "01", "11")


def builtin(name, *args):
    """Named categories: e, two, square, upper_corner, lower_corner, BG, poset, discrete."""
    if name == "e":
        return FinCat(["*"], [("id", "*", "*")], {("id", "id"): "id"}, {"*": "id"}, name="e")
    if name == "two":
        return poset(["0", "1"], [("0", "1")], name="two")
    if name == "square":
        return poset(list(SQUARE_OBJECTS), [("00", "10"), ("00", "01"), ("10", "11"), ("01", "11")],
                     name="square")
    if name == "upper_corner":
        return poset(["00", "10", "01"], [("00", "10"), ("00", "01")], name="upper_corner")
    if name == "lower_corner":
        return poset(["10", "01", "11"], [("10", "11"), ("01", "11")], name="lower_corner")
    if name == "BG":
        return BG(*args)
    if name == "poset":
        return poset(*args)
    if name == "discrete":
        return discrete(*args)
    raise UnknownObject(f"unknown builtin category {name!r}")


def identity_functor(C: FinCat) -> CatFunctor:
    return CatFunctor(C, C, {o: o for o in C.objects}, {m: m for m in C.morphisms},
                      name="id", check=False)


def terminal_functor(C: FinCat, e: FinCat = None) -> CatFunctor:
    """The functor c: C -> e."""
    e = e or builtin("e")
    star = e.objects[0]
    return CatFunctor(C, e, {o: star for o in C.objects},
                      {m: e.identity(star) for m in C.morphisms}, name="c")


def object_functor(C: FinCat, obj, e: FinCat = None) -> CatFunctor:
    """The functor e -> C picking ``obj``."""
    e = e or builtin("e")
    star = e.objects[0]
    return CatFunctor(e, C, {star: obj}, {e.identity(star): C.identity(obj)}, name=f"at {obj}")


def inclusion(sub: FinCat, C: FinCat) -> CatFunctor:
    """Inclusion of a full subcategory whose labels agree with those of C."""
    return CatFunctor(sub, C, {o: o for o in sub.objects}, {m: m for m in sub.morphisms},
                      name="incl")


def product(C: FinCat, D: FinCat, name=None) -> FinCat:
    objects = [(c, d) for c in C.objects for d in D.objects]
    mors = [((f, g), (C.src(f), D.src(g)), (C.tgt(f), D.tgt(g)))
            for f in C.morphisms for g in D.morphisms]
    comp = {}
    for (f2, f1) in C._comp:
        for (g2, g1) in D._comp:
            comp[((f2, g2), (f1, g1))] = (C.compose(f2, f1), D.compose(g2, g1))
    ids = {(c, d): (C.identity(c), D.identity(d)) for c, d in objects}
    return FinCat(objects, mors, comp, ids, name=name or f"{C.name}x{D.name}", check=False)


def group_functor(G_elements, G_mul, H_elements, H_mul, phi, check=True) -> CatFunctor:
    """B(phi): BG -> BH for a homomorphism given as a dict."""
    BGc = BG(G_elements, G_mul, check=check)
    BHc = BG(H_elements, H_mul, check=check)
    return CatFunctor(BGc, BHc, {"*": "*"}, dict(phi), name="Bphi", check=check)


__all__ = [
    "FinCat", "CatFunctor", "slice", "coslice", "slice_map", "coslice_map", "discrete_fiber",
    "discrete", "poset", "check_group_table", "BG", "builtin", "identity_functor",
    "terminal_functor", "object_functor", "inclusion", "product", "group_functor",
    "SQUARE_OBJECTS",
]
