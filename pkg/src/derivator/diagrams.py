"""Diagrams of complexes over finite categories and underived Kan extensions.

A :class:`DiagramComplex` assigns a complex to every object and a chain map
to every morphism.  Colimits are cokernels of the difference map, written
down directly as presentations and then reduced; limits are kernels.  Kan
extensions are computed pointwise over slices (left) and coslices (right).
"""
from __future__ import annotations

from .complexes import ChainMap, Complex
from .errors import NotAFunctor, ShapeMismatch
from .exactalg import ExactMatrix, ModulePresentation, Subquotient, map_is_zero
from .smallcat import CatFunctor, FinCat, coslice, product, slice as slice_cat, builtin


class DiagramComplex:
    """A functor from a finite category to complexes over ``ring``."""

    def __init__(self, shape: FinCat, ring, values, maps=None, check=True, free_generators=None):
        self.shape = shape
        self.ring = ring
        self.values = dict(values)
        for o in shape.objects:
            if o not in self.values:
                raise ShapeMismatch(f"no complex at object {o!r}")
        self.maps = {}
        for m, f in (maps or {}).items():
            if shape.is_identity(m):
                continue
            self.maps[m] = f
        # optional description as a sum of representables: {degree: [object, ...]}
        self.free_generators = free_generators
        if check:
            self.validate()

    @classmethod
    def from_modules(cls, shape, ring, modules, matrices, check=True):
        """Diagram concentrated in degree 0 from presentations and matrices."""
        vals = {o: Complex.concentrated(M, 0) for o, M in modules.items()}
        maps = {}
        for m in shape.morphisms:
            if shape.is_identity(m):
                continue
            s, t = shape.src(m), shape.tgt(m)
            maps[m] = ChainMap(vals[s], vals[t], {0: matrices[m]}, check=check)
        return cls(shape, ring, vals, maps, check=check)

    @classmethod
    def constant(cls, shape, C: Complex):
        vals = {o: C for o in shape.objects}
        idm = ChainMap.identity(C)
        return cls(shape, C.ring, vals, {m: idm for m in shape.morphisms if not shape.is_identity(m)},
                   check=False)

    def at(self, i) -> Complex:
        return self.values[i]

    def along(self, m) -> ChainMap:
        f = self.maps.get(m)
        if f is not None:
            return f
        if self.shape.is_identity(m):
            return ChainMap.identity(self.values[self.shape.src(m)])
        raise KeyError(m)

    def window(self):
        los = [C.lo for C in self.values.values() if C.lo <= C.hi]
        his = [C.hi for C in self.values.values() if C.lo <= C.hi]
        if not los:
            return (0, -1)
        return (min(los), max(his))

    def validate(self):
        I = self.shape
        for m, f in self.maps.items():
            if f.source is not self.values[I.src(m)] and f.source.window != self.values[I.src(m)].window:
                raise NotAFunctor(f"map along {m!r} has the wrong source")
        for f in I.morphisms:
            if I.is_identity(f):
                continue
            for g in I.hom_from(I.tgt(f)):
                if I.is_identity(g):
                    continue
                gf = I.compose(g, f)
                lhs = self.along(f).then(self.along(g))
                rhs = self.along(gf)
                if not lhs.equals(rhs):
                    raise NotAFunctor(f"functoriality fails at {g!r} o {f!r}")
        return True

    def __repr__(self):
        return f"DiagramComplex(shape={self.shape!r})"


class DiagramMap:
    """Natural transformation given by one chain map per object."""

    def __init__(self, source: DiagramComplex, target: DiagramComplex, comps, check=True):
        if source.shape.objects != target.shape.objects:
            raise ShapeMismatch("diagrams live on different shapes")
        self.source = source
        self.target = target
        self.comps = dict(comps)
        if check:
            self.validate()

    def at(self, i) -> ChainMap:
        return self.comps[i]

    def validate(self):
        I = self.source.shape
        for m in I.morphisms:
            if I.is_identity(m):
                continue
            s, t = I.src(m), I.tgt(m)
            lhs = self.source.along(m).then(self.comps[t])
            rhs = self.comps[s].then(self.target.along(m))
            if not lhs.equals(rhs):
                raise NotAFunctor(f"naturality fails along {m!r}")
        return True

    def then(self, other: "DiagramMap") -> "DiagramMap":
        return DiagramMap(self.source, other.target,
                          {i: self.comps[i].then(other.comps[i]) for i in self.comps}, check=False)

    @classmethod
    def identity(cls, D: DiagramComplex):
        return cls(D, D, {i: ChainMap.identity(D.at(i)) for i in D.shape.objects}, check=False)


def restrict(u: CatFunctor, F: DiagramComplex) -> DiagramComplex:
    """u^* F = F o u."""
    if F.shape.objects != u.target.objects:
        raise ShapeMismatch("diagram shape differs from the functor's target")
    I = u.source
    vals = {i: F.at(u.obj(i)) for i in I.objects}
    maps = {m: F.along(u.mor(m)) for m in I.morphisms if not I.is_identity(m)}
    fg = None
    return DiagramComplex(I, F.ring, vals, maps, check=False, free_generators=fg)


def restrict_map(u: CatFunctor, phi: DiagramMap, source=None, target=None) -> DiagramMap:
    S = source or restrict(u, phi.source)
    T = target or restrict(u, phi.target)
    return DiagramMap(S, T, {i: phi.at(u.obj(i)) for i in u.source.objects}, check=False)


# ---------------------------------------------------------------------------
# colimits and limits of diagrams indexed by explicit object/morphism lists
# ---------------------------------------------------------------------------


class ColimData:
    """Colimit of complexes ``values[k]`` glued along ``arrows`` (k, k2, chain map).

    ``offsets[n][k]`` locates summand k in the big sum; ``q[n]``/``s[n]`` pass
    between big-sum coordinates and the reduced presentation.
    """

    def __init__(self, ring, keys, values, arrows, lo, hi):
        self.ring = ring
        self.keys = list(keys)
        self.lo, self.hi = lo, hi
        self.offsets, self.q, self.s, self.big = {}, {}, {}, {}
        mods = {}
        for n in range(lo, hi + 1):
            off, tot = {}, 0
            for k in self.keys:
                off[k] = tot
                tot += values[k].ngens(n)
            self.offsets[n] = off
            self.big[n] = tot
            rel_rows = []
            for k in self.keys:
                R = values[k].module_at(n).relations
                for row in R.rows:
                    rel_rows.append({off[k] + j: v for j, v in row.items()})
            for k, k2, f in arrows:
                M = f.at(n)
                cols = M.columns()
                for x in range(values[k].ngens(n)):
                    row = {off[k2] + t: v for t, v in cols[x].items()}
                    key = off[k] + x
                    row[key] = row.get(key, 0) - 1
                    if self.ring.modulus:
                        row = {a: b % self.ring.modulus for a, b in row.items() if b % self.ring.modulus}
                    else:
                        row = {a: b for a, b in row.items() if b != 0}
                    if row:
                        rel_rows.append(row)
            pres = ModulePresentation(ring, tot, ExactMatrix(ring, len(rel_rows), tot, rel_rows))
            N, q, s = pres.reduce()
            mods[n] = N
            self.q[n], self.s[n] = q, s
        diffs = {}
        for n in range(lo, hi):
            D = ExactMatrix.block_diag(ring, [values[k].d(n) for k in self.keys])
            diffs[n] = self.q[n + 1] @ D @ self.s[n]
        self.complex = Complex(ring, mods, diffs, check=False)
        self.values = values

    def injection(self, k, n) -> ExactMatrix:
        """Matrix of the cocone component at key k in degree n."""
        off = self.offsets[n][k]
        size = self.values[k].ngens(n)
        cols = self.q[n].submatrix(None, range(off, off + size))
        return cols

    def cocone(self, k) -> ChainMap:
        C = self.values[k]
        return ChainMap(C, self.complex, {n: self.injection(k, n) for n in range(self.lo, self.hi + 1)
                                          if C.ngens(n)}, check=False)

    def induced(self, big_maps: dict, target: "ColimData") -> ChainMap:
        """Map between colimits from matrices on the big sums (``big_maps[n]``)."""
        comps = {}
        for n in range(max(self.lo, target.lo), min(self.hi, target.hi) + 1):
            comps[n] = target.q[n] @ big_maps[n] @ self.s[n]
        return ChainMap(self.complex, target.complex, comps, check=False)

    def out_map(self, legs: dict, target: Complex) -> ChainMap:
        """Map colim -> target from compatible legs ``legs[k]: values[k] -> target``."""
        comps = {}
        for n in range(self.lo, self.hi + 1):
            blocks = [legs[k].at(n) for k in self.keys]
            B = ExactMatrix.hstack(self.ring, blocks, nrows=target.ngens(n)) if blocks else \
                ExactMatrix(self.ring, target.ngens(n), 0)
            comps[n] = B @ self.s[n]
        return ChainMap(self.complex, target, comps, check=False)


class LimData:
    """Limit of complexes ``values[k]`` along ``arrows`` (k, k2, chain map)."""

    def __init__(self, ring, keys, values, arrows, lo, hi):
        self.ring = ring
        self.keys = list(keys)
        self.lo, self.hi = lo, hi
        self.offsets, self.sub, self.big = {}, {}, {}
        self.values = values
        mods = {}
        for n in range(lo, hi + 1):
            off, tot = {}, 0
            for k in self.keys:
                off[k] = tot
                tot += values[k].ngens(n)
            self.offsets[n] = off
            self.big[n] = tot
            # difference map into the product over arrows
            rows, trel_cols, toff = [], [], 0
            for k, k2, f in arrows:
                M = f.at(n)
                size = values[k2].ngens(n)
                for t in range(size):
                    row = {off[k] + x: v for x, v in M.rows[t].items()}
                    key = off[k2] + t
                    row[key] = row.get(key, 0) - 1
                    if ring.modulus:
                        row = {a: b % ring.modulus for a, b in row.items() if b % ring.modulus}
                    else:
                        row = {a: b for a, b in row.items() if b != 0}
                    rows.append(row)
                R = values[k2].module_at(n).relations
                for rr in R.rows:
                    trel_cols.append({toff + j: v for j, v in rr.items()})
                toff += size
            Delta = ExactMatrix(ring, toff, tot, rows)
            srel = []
            for k in self.keys:
                R = values[k].module_at(n).relations
                for rr in R.rows:
                    srel.append({off[k] + j: v for j, v in rr.items()})
            Srel = ExactMatrix(ring, len(srel), tot, srel).T
            Trel = ExactMatrix(ring, len(trel_cols), toff, trel_cols).T if trel_cols else None
            from .exactalg import cycles_subquotient
            sq = cycles_subquotient(Delta, ExactMatrix(ring, tot, 0),
                                    src_rel=Srel if Srel.ncols else None, tgt_rel=Trel)
            self.sub[n] = sq
            mods[n] = sq.reduced()
        diffs = {}
        for n in range(lo, hi):
            D = ExactMatrix.block_diag(ring, [values[k].d(n) for k in self.keys])
            diffs[n] = self.sub[n + 1].coords(D @ self.sub[n].lift())
        self.complex = Complex(ring, mods, diffs, check=False)

    def projection(self, k, n) -> ExactMatrix:
        off = self.offsets[n][k]
        size = self.values[k].ngens(n)
        return self.sub[n].lift().submatrix(range(off, off + size))

    def cone_leg(self, k) -> ChainMap:
        C = self.values[k]
        return ChainMap(self.complex, C, {n: self.projection(k, n) for n in range(self.lo, self.hi + 1)
                                          if C.ngens(n)}, check=False)

    def induced(self, big_maps: dict, source: "LimData") -> ChainMap:
        """Map source-limit -> this limit from big-sum matrices (target big x source big)."""
        comps = {}
        for n in range(max(self.lo, source.lo), min(self.hi, source.hi) + 1):
            comps[n] = self.sub[n].coords(big_maps[n] @ source.sub[n].lift())
        return ChainMap(source.complex, self.complex, comps, check=False)

    def in_map(self, legs: dict, source: Complex) -> ChainMap:
        """Map source -> lim from compatible legs ``legs[k]: source -> values[k]``."""
        comps = {}
        for n in range(self.lo, self.hi + 1):
            blocks = [legs[k].at(n) for k in self.keys]
            B = ExactMatrix.vstack(self.ring, blocks, ncols=source.ngens(n))
            comps[n] = self.sub[n].coords(B)
        return ChainMap(source, self.complex, comps, check=False)


def _window_of(values):
    los = [C.lo for C in values if C.lo <= C.hi]
    his = [C.hi for C in values if C.lo <= C.hi]
    if not los:
        return 0, -1
    return min(los), max(his)


def colim_data(D: DiagramComplex) -> ColimData:
    I = D.shape
    arrows = [(I.src(m), I.tgt(m), D.along(m)) for m in I.morphisms if not I.is_identity(m)]
    lo, hi = _window_of(D.values.values())
    return ColimData(D.ring, I.objects, D.values, arrows, lo, hi)


def lim_data(D: DiagramComplex) -> LimData:
    I = D.shape
    arrows = [(I.src(m), I.tgt(m), D.along(m)) for m in I.morphisms if not I.is_identity(m)]
    lo, hi = _window_of(D.values.values())
    return LimData(D.ring, I.objects, D.values, arrows, lo, hi)


def colim(D: DiagramComplex):
    """Colimit complex with its cocone ``{object: chain map}``."""
    data = colim_data(D)
    return data.complex, {k: data.cocone(k) for k in data.keys}


def lim(D: DiagramComplex):
    """Limit complex with its cone ``{object: chain map}``."""
    data = lim_data(D)
    return data.complex, {k: data.cone_leg(k) for k in data.keys}


# ---------------------------------------------------------------------------
# Kan extensions
# ---------------------------------------------------------------------------


class LanData:
    """Pointwise left Kan extension u_! F with the per-object colimit data."""

    def __init__(self, u: CatFunctor, F: DiagramComplex):
        if F.shape.objects != u.source.objects:
            raise ShapeMismatch("diagram shape differs from the functor's source")
        I, J = u.source, u.target
        self.u, self.F = u, F
        self.slices = {}
        self.data = {}
        lo, hi = F.window()
        for j in J.objects:
            cat, proj = slice_cat(u, j)
            self.slices[j] = (cat, proj)
            vals = {o: F.at(o[0]) for o in cat.objects}
            arrows = [(cat.src(m), cat.tgt(m), F.along(m[0]))
                      for m in cat.morphisms if not cat.is_identity(m)]
            self.data[j] = ColimData(F.ring, cat.objects, vals, arrows, lo, hi)
        maps = {}
        for b in J.morphisms:
            if J.is_identity(b):
                continue
            j, j2 = J.src(b), J.tgt(b)
            maps[b] = self.data[j].induced(self._transport(b, lo, hi), self.data[j2])
        self.result = DiagramComplex(J, F.ring, {j: self.data[j].complex for j in J.objects}, maps,
                                     check=False)

    def _transport(self, b, lo, hi):
        J = self.u.target
        j, j2 = J.src(b), J.tgt(b)
        d1, d2 = self.data[j], self.data[j2]
        out = {}
        for n in range(lo, hi + 1):
            rows = [{} for _ in range(d2.big[n])]
            one = self.F.ring.one()
            for (i, a) in d1.keys:
                size = self.F.at(i).ngens(n)
                o1 = d1.offsets[n][(i, a)]
                o2 = d2.offsets[n][(i, J.compose(b, a))]
                for x in range(size):
                    rows[o2 + x][o1 + x] = one
            out[n] = ExactMatrix(self.F.ring, d2.big[n], d1.big[n], rows)
        return out

    def map(self, phi: DiagramMap, target: "LanData") -> DiagramMap:
        """u_!(phi) for phi: F -> F2, given the Kan data of F2."""
        J = self.u.target
        comps = {}
        for j in J.objects:
            d1, d2 = self.data[j], target.data[j]
            big = {}
            for n in range(max(d1.lo, d2.lo), min(d1.hi, d2.hi) + 1):
                big[n] = ExactMatrix.block_diag(self.F.ring, [phi.at(i).at(n) for (i, a) in d1.keys])
            comps[j] = d1.induced(big, d2)
        return DiagramMap(self.result, target.result, comps, check=False)


class RanData:
    """Pointwise right Kan extension u_* F."""

    def __init__(self, u: CatFunctor, F: DiagramComplex):
        if F.shape.objects != u.source.objects:
            raise ShapeMismatch("diagram shape differs from the functor's source")
        I, J = u.source, u.target
        self.u, self.F = u, F
        self.coslices = {}
        self.data = {}
        lo, hi = F.window()
        for j in J.objects:
            cat, proj = coslice(u, j)
            self.coslices[j] = (cat, proj)
            vals = {o: F.at(o[0]) for o in cat.objects}
            arrows = [(cat.src(m), cat.tgt(m), F.along(m[0]))
                      for m in cat.morphisms if not cat.is_identity(m)]
            self.data[j] = LimData(F.ring, cat.objects, vals, arrows, lo, hi)
        maps = {}
        for b in J.morphisms:
            if J.is_identity(b):
                continue
            j, j2 = J.src(b), J.tgt(b)
            maps[b] = self.data[j2].induced(self._transport(b, lo, hi), self.data[j])
        self.result = DiagramComplex(J, F.ring, {j: self.data[j].complex for j in J.objects}, maps,
                                     check=False)

    def _transport(self, b, lo, hi):
        # (y)_{(i, a')} = x_{(i, a' o b)} for a' : j2 -> u(i)
        J = self.u.target
        j, j2 = J.src(b), J.tgt(b)
        d1, d2 = self.data[j], self.data[j2]
        out = {}
        one = self.F.ring.one()
        for n in range(lo, hi + 1):
            rows = [{} for _ in range(d2.big[n])]
            for (i, a2) in d2.keys:
                size = self.F.at(i).ngens(n)
                o2 = d2.offsets[n][(i, a2)]
                o1 = d1.offsets[n][(i, J.compose(a2, b))]
                for x in range(size):
                    rows[o2 + x][o1 + x] = one
            out[n] = ExactMatrix(self.F.ring, d2.big[n], d1.big[n], rows)
        return out

    def map(self, phi: DiagramMap, target: "RanData") -> DiagramMap:
        J = self.u.target
        comps = {}
        for j in J.objects:
            d1, d2 = self.data[j], target.data[j]
            big = {}
            for n in range(max(d1.lo, d2.lo), min(d1.hi, d2.hi) + 1):
                big[n] = ExactMatrix.block_diag(self.F.ring, [phi.at(i).at(n) for (i, a) in d1.keys])
            comps[j] = d2.induced(big, d1)
        return DiagramMap(self.result, target.result, comps, check=False)


def lan(u: CatFunctor, F: DiagramComplex) -> DiagramComplex:
    """Pointwise left Kan extension u_! F."""
    return LanData(u, F).result


def ran(u: CatFunctor, F: DiagramComplex) -> DiagramComplex:
    """Pointwise right Kan extension u_* F."""
    return RanData(u, F).result


# ---------------------------------------------------------------------------
# units and counits
# ---------------------------------------------------------------------------


class Adjunctions:
    """Units and counits of u_! -| u^* -| u_* realized as diagram maps."""

    def __init__(self, u: CatFunctor):
        self.u = u

    def eta_lower(self, F: DiagramComplex, data: LanData = None) -> DiagramMap:
        """F -> u^* u_! F (inclusion of the summand (i, id))."""
        u = self.u
        data = data or LanData(u, F)
        target = restrict(u, data.result)
        comps = {}
        for i in u.source.objects:
            j = u.obj(i)
            cd = data.data[j]
            key = (i, u.target.identity(j))
            comps[i] = ChainMap(F.at(i), cd.complex,
                                {n: cd.injection(key, n) for n in range(cd.lo, cd.hi + 1)
                                 if F.at(i).ngens(n)}, check=False)
        return DiagramMap(F, target, comps, check=False)

    def eps_lower(self, G: DiagramComplex, data: LanData = None) -> DiagramMap:
        """u_! u^* G -> G, summand (i, a) mapped by G(a)."""
        u = self.u
        UG = restrict(u, G)
        data = data or LanData(u, UG)
        comps = {}
        for j in u.target.objects:
            cd = data.data[j]
            legs = {(i, a): G.along(a) for (i, a) in cd.keys}
            comps[j] = cd.out_map(legs, G.at(j))
        return DiagramMap(data.result, G, comps, check=False)

    def eta_upper(self, G: DiagramComplex, data: RanData = None) -> DiagramMap:
        """G -> u_* u^* G, x mapped to (G(a) x)."""
        u = self.u
        UG = restrict(u, G)
        data = data or RanData(u, UG)
        comps = {}
        for j in u.target.objects:
            ld = data.data[j]
            legs = {(i, a): G.along(a) for (i, a) in ld.keys}
            comps[j] = ld.in_map(legs, G.at(j))
        return DiagramMap(G, data.result, comps, check=False)

    def eps_upper(self, F: DiagramComplex, data: RanData = None) -> DiagramMap:
        """u^* u_* F -> F, projection on the summand (i, id)."""
        u = self.u
        data = data or RanData(u, F)
        source = restrict(u, data.result)
        comps = {}
        for i in u.source.objects:
            j = u.obj(i)
            ld = data.data[j]
            key = (i, u.target.identity(j))
            comps[i] = ChainMap(ld.complex, F.at(i),
                                {n: ld.projection(key, n) for n in range(ld.lo, ld.hi + 1)
                                 if F.at(i).ngens(n)}, check=False)
        return DiagramMap(source, F, comps, check=False)


def unit_counit(u: CatFunctor) -> Adjunctions:
    return Adjunctions(u)


# ---------------------------------------------------------------------------
# diagrams over 2 x J
# ---------------------------------------------------------------------------


def dia(F: DiagramComplex, J: FinCat) -> DiagramMap:
    """Turn a diagram over ``two x J`` into an arrow of diagrams over J."""
    two = builtin("two")
    if set(F.shape.objects) != {(a, j) for a in two.objects for j in J.objects}:
        raise ShapeMismatch("shape is not two x J")
    S = F.shape
    parts = []
    for a in two.objects:
        ida = two.identity(a)
        vals = {j: F.at((a, j)) for j in J.objects}
        maps = {g: F.along((ida, g)) for g in J.morphisms if not J.is_identity(g)}
        parts.append(DiagramComplex(J, F.ring, vals, maps, check=False))
    arrow = two.hom("0", "1")[0]
    comps = {j: F.along((arrow, J.identity(j))) for j in J.objects}
    del S
    return DiagramMap(parts[0], parts[1], comps, check=False)


def dia_inverse(phi: DiagramMap, J: FinCat) -> DiagramComplex:
    two = builtin("two")
    shape = product(two, J)
    vals = {}
    src = {"0": phi.source, "1": phi.target}
    for a in two.objects:
        for j in J.objects:
            vals[(a, j)] = src[a].at(j)
    maps = {}
    for (f, g) in shape.morphisms:
        if shape.is_identity((f, g)):
            continue
        a, b = two.src(f), two.tgt(f)
        j, j2 = J.src(g), J.tgt(g)
        if a == b:
            maps[(f, g)] = src[a].along(g)
        else:
            maps[(f, g)] = phi.at(j).then(phi.target.along(g))
    return DiagramComplex(shape, phi.source.ring, vals, maps, check=False)


def representable(shape: FinCat, ring, i, degree=0) -> DiagramComplex:
    """P_i: j -> A^{Hom(i, j)} placed in one degree."""
    return free_diagram(shape, ring, {degree: [i]}, {})


def free_diagram(shape: FinCat, ring, gens: dict, dvals: dict) -> DiagramComplex:
    """Sum of representables with generator objects ``gens[n]`` and differentials.

    ``dvals[n][g]`` is the image of generator g (degree n) as a column vector of
    the degree-(n+1) value at its object.
    """
    layout = free_layout(shape, gens)
    vals = {}
    for j in shape.objects:
        ranks = {n: layout[n][j][1] for n in layout}
        diffs = {}
        for n in layout:
            if n + 1 in layout:
                diffs[n] = free_differential(shape, ring, layout, gens, dvals, n, j)
        vals[j] = Complex.free(ring, ranks, diffs, check=False)
    maps = {}
    for m in shape.morphisms:
        if shape.is_identity(m):
            continue
        s, t = shape.src(m), shape.tgt(m)
        comps = {n: free_transport(shape, ring, layout, gens, n, m) for n in layout}
        maps[m] = ChainMap(vals[s], vals[t], comps, check=False)
    return DiagramComplex(shape, ring, vals, maps, check=False,
                          free_generators={n: list(g) for n, g in gens.items()})


def free_layout(shape, gens):
    """layout[n][j] = (list of (gen index, morphism, offset), total rank)."""
    layout = {}
    for n, glist in gens.items():
        per = {}
        for j in shape.objects:
            entries, off = [], 0
            for g, i in enumerate(glist):
                for a in shape.hom(i, j):
                    entries.append((g, a, off))
                    off += 1
            per[j] = (entries, off)
        layout[n] = per
    return layout


def _basis_index(layout, n, j):
    return {(g, a): off for g, a, off in layout[n][j][0]}


def free_transport(shape, ring, layout, gens, n, m) -> ExactMatrix:
    s, t = shape.src(m), shape.tgt(m)
    idx_t = _basis_index(layout, n, t)
    one = ring.one()
    entries, rows_n = layout[n][s]
    rows = [{} for _ in range(layout[n][t][1])]
    for g, a, off in entries:
        rows[idx_t[(g, shape.compose(m, a))]][off] = one
    return ExactMatrix(ring, layout[n][t][1], rows_n, rows)


def apply_free(shape, ring, layout, n, j, vec: dict, i, a) -> dict:
    """Push an element ``vec`` of the degree-n value at i along a: i -> j."""
    idx_j = _basis_index(layout, n, j)
    out = {}
    entries = layout[n][i][0]
    for g, b, off in entries:
        v = vec.get(off)
        if v:
            key = idx_j[(g, shape.compose(a, b))]
            out[key] = out.get(key, 0) + v
    mod = ring.modulus
    return {k: (v % mod if mod else v) for k, v in out.items() if (v % mod if mod else v) != 0}


def free_differential(shape, ring, layout, gens, dvals, n, j) -> ExactMatrix:
    entries, ncols = layout[n][j]
    nrows = layout[n + 1][j][1]
    rows = [{} for _ in range(nrows)]
    glist = gens[n]
    for g, a, off in entries:
        vec = dvals.get(n, {}).get(g)
        if not vec:
            continue
        pushed = apply_free(shape, ring, layout, n + 1, j, vec, glist[g], a)
        for r, v in pushed.items():
            rows[r][off] = v
    return ExactMatrix(ring, nrows, ncols, rows)


__all__ = [
    "DiagramComplex", "DiagramMap", "restrict", "restrict_map", "ColimData", "LimData",
    "colim_data", "lim_data", "colim", "lim", "LanData", "RanData", "lan", "ran",
    "Adjunctions", "unit_counit", "dia", "dia_inverse", "representable", "free_diagram",
    "free_layout", "free_transport", "apply_free", "free_differential",
]
