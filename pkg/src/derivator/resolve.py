"""Resolutions of diagram complexes and the derived constructions built on them.

Projective resolutions are truncated: ``projective_resolution(F, N)`` builds
levels ``P^{hi} .. P^{hi-N}`` out of representable diagrams by killing the
homology of ``cone(P -> F)`` one generator at a time (greedy, in object
order).  The comparison is then a quasi-isomorphism in the certified window
``[hi - N + 1, hi]``.

Injective coresolutions are only available over fields, where they are
obtained from projective resolutions by vector-space duality over ``I^op``.
Homotopy limits over Z go through ``Hom(P, F)`` with P a projective
resolution of the constant diagram instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import ChainMap, Complex, Homotopy, cone, cylinder, dual, hom_map_contra, homology, \
    is_quasi_iso, lift_through, shift
from .diagrams import (
    ColimData, DiagramComplex, DiagramMap, LanData, colim_data, free_diagram, free_layout, lan,
    ran, restrict,
)
from .errors import NotHomotopyCommutative, ShapeMismatch, UnsupportedRing, WindowExceeded
from .exactalg import ExactMatrix, ModulePresentation, cycles_subquotient
from .smallcat import CatFunctor, FinCat, builtin, inclusion, slice as slice_cat, terminal_functor


@dataclass
class Resolution:
    target: DiagramComplex
    resolvent: DiagramComplex
    comparison: DiagramMap
    flavor: str
    length: int
    certified_window: tuple
    gens: dict = field(default_factory=dict)
    dvals: dict = field(default_factory=dict)
    fvals: dict = field(default_factory=dict)

    def ranks(self):
        """Number of representable generators per degree (top degree first)."""
        return [len(self.gens[n]) for n in sorted(self.gens, reverse=True)]


def _vec_to_col(ring, vec: dict, size: int) -> ExactMatrix:
    return ExactMatrix(ring, size, 1, [({0: vec[i]} if i in vec else {}) for i in range(size)])


def _col_to_vec(M: ExactMatrix, c: int = 0) -> dict:
    return {i: row[c] for i, row in enumerate(M.rows) if c in row}


class _FreeBuilder:
    """Incrementally built sum of representables with a map to F."""

    def __init__(self, F: DiagramComplex):
        self.F = F
        self.shape = F.shape
        self.ring = F.ring
        self.gens, self.dvals, self.fvals = {}, {}, {}
        self._layout = None

    def layout(self):
        if self._layout is None:
            self._layout = free_layout(self.shape, self.gens)
        return self._layout

    def rank(self, n, j):
        lay = self.layout()
        return lay[n][j][1] if n in lay else 0

    def add(self, n, obj, dval, fval):
        self.gens.setdefault(n, []).append(obj)
        self.dvals.setdefault(n, []).append(dval)
        self.fvals.setdefault(n, []).append(fval)
        self._layout = None

    def dmat(self, n, j) -> ExactMatrix:
        """P^n(j) -> P^{n+1}(j)."""
        lay = self.layout()
        rows_n = self.rank(n + 1, j)
        cols_n = self.rank(n, j)
        rows = [{} for _ in range(rows_n)]
        if n in lay and n + 1 in lay:
            entries = lay[n][j][0]
            idx1 = {(g, a): off for g, a, off in lay[n + 1][j][0]}
            for g, a, off in entries:
                vec = self.dvals[n][g]
                i = self.gens[n][g]
                for g2, b, off2 in lay[n + 1][i][0]:
                    v = vec.get(off2)
                    if v:
                        key = idx1[(g2, self.shape.compose(a, b))]
                        rows[key][off] = rows[key].get(off, 0) + v
        mod = self.ring.modulus
        rows = [{k: (v % mod if mod else v) for k, v in r.items() if (v % mod if mod else v) != 0}
                for r in rows]
        return ExactMatrix(self.ring, rows_n, cols_n, rows)

    def fmat(self, n, j) -> ExactMatrix:
        """P^n(j) -> F^n(j)."""
        lay = self.layout()
        Fj = self.F.at(j)
        size = Fj.ngens(n)
        if n not in lay:
            return ExactMatrix(self.ring, size, 0)
        cols = []
        for g, a, off in lay[n][j][0]:
            i = self.gens[n][g]
            x = _vec_to_col(self.ring, self.fvals[n][g], self.F.at(i).ngens(n))
            cols.append(self.F.along(a).at(n) @ x)
        if not cols:
            return ExactMatrix(self.ring, size, 0)
        return ExactMatrix.hstack(self.ring, cols)

    def cone_homology(self, n, i):
        """H^n of cone(P -> F) at object i, as a subquotient of P^{n+1}(i) + F^n(i)."""
        ring = self.ring
        Fi = self.F.at(i)
        p2, p1, p0 = self.rank(n + 2, i), self.rank(n + 1, i), self.rank(n, i)
        f1, f0, fm = Fi.ngens(n + 1), Fi.ngens(n), Fi.ngens(n - 1)
        d_out = ExactMatrix.block(ring, {(0, 0): -self.dmat(n + 1, i), (1, 0): self.fmat(n + 1, i),
                                         (1, 1): Fi.d(n)}, [p2, f1], [p1, f0])
        d_in = ExactMatrix.block(ring, {(0, 0): -self.dmat(n, i), (1, 0): self.fmat(n, i),
                                        (1, 1): Fi.d(n - 1)}, [p1, f0], [p0, fm])
        src_rel = tgt_rel = None
        R0 = Fi.rel(n)
        if R0.ncols:
            src_rel = ExactMatrix.block(ring, {(1, 0): R0}, [p1, f0], [R0.ncols])
        R1 = Fi.rel(n + 1)
        if R1.ncols:
            tgt_rel = ExactMatrix.block(ring, {(1, 0): R1}, [p2, f1], [R1.ncols])
        return cycles_subquotient(d_out, d_in, src_rel, tgt_rel), p1

    def diagram(self):
        return free_diagram(self.shape, self.ring, self.gens,
                            {n: dict(enumerate(v)) for n, v in self.dvals.items()})

    def comparison(self, P: DiagramComplex) -> DiagramMap:
        comps = {}
        for j in self.shape.objects:
            comps[j] = ChainMap(P.at(j), self.F.at(j),
                                {n: self.fmat(n, j) for n in self.gens}, check=False)
        return DiagramMap(P, self.F, comps, check=False)


def projective_resolution(F: DiagramComplex, length: int) -> Resolution:
    """Truncated resolution by sums of representables, certified in [hi-N+1, hi]."""
    if F.ring.kind == "POLY":
        raise UnsupportedRing("diagram resolutions are implemented over Z and fields")
    lo, hi = F.window()
    if F.free_generators is not None:
        return Resolution(F, F, DiagramMap.identity(F), "projective", 0, (lo, hi),
                          dict(F.free_generators))
    if lo > hi:
        return Resolution(F, F, DiagramMap.identity(F), "projective", 0, (0, -1))
    B = _FreeBuilder(F)
    for n in range(hi, hi - length - 1, -1):
        B.gens.setdefault(n, [])
        B.dvals.setdefault(n, [])
        B.fvals.setdefault(n, [])
        B._layout = None
        for i in F.shape.objects:
            while True:
                H, p1 = B.cone_homology(n, i)
                if H.is_zero():
                    break
                col = H.lift().submatrix(None, [0])
                vec = _col_to_vec(col)
                p = {k: -v for k, v in vec.items() if k < p1}
                if B.ring.modulus:
                    p = {k: v % B.ring.modulus for k, v in p.items()}
                x = {k - p1: v for k, v in vec.items() if k >= p1}
                B.add(n, i, p, x)
    P = B.diagram()
    comp = B.comparison(P)
    return Resolution(F, P, comp, "projective", length, (hi - length + 1, hi),
                      B.gens, B.dvals, B.fvals)


# ---------------------------------------------------------------------------
# lifting along quasi-isomorphisms
# ---------------------------------------------------------------------------


def lift_resolution(Q: Resolution, P: DiagramComplex, pi: DiagramMap):
    """Lift ``Q.comparison`` through ``pi: P -> F`` (cone(pi) acyclic where needed).

    Returns ``(g, h)`` with g: Q -> P a diagram map and ``h[o][n]``:
    Q^n(o) -> F^{n-1}(o) such that ``pi g - eps = d h + h d``.
    """
    shape = Q.resolvent.shape
    ring = Q.resolvent.ring
    F = Q.target
    R = Q.resolvent
    lay = free_layout(shape, Q.gens)
    cones = {o: cone(pi.at(o))[0] for o in shape.objects}
    gmat = {o: {} for o in shape.objects}
    hmat = {o: {} for o in shape.objects}
    for n in sorted(Q.gens, reverse=True):
        gval, hval = [], []
        for c, o in enumerate(Q.gens[n]):
            Co = cones[o]
            qc = _vec_to_col(ring, Q.dvals[n][c], R.at(o).ngens(n + 1))
            xc = _vec_to_col(ring, Q.fvals[n][c], F.at(o).ngens(n))
            g1 = gmat[o].get(n + 1)
            h1 = hmat[o].get(n + 1)
            gq = g1 @ qc if g1 is not None else ExactMatrix(ring, P.at(o).ngens(n + 1), 1)
            hq = h1 @ qc if h1 is not None else ExactMatrix(ring, F.at(o).ngens(n), 1)
            t = ExactMatrix.vstack(ring, [-gq, xc + hq])
            sol = lift_through(Co.rel(n), Co.d(n - 1), t)
            if sol is None:
                raise WindowExceeded(f"cannot lift generator in degree {n}: cone not acyclic there")
            a = sol.submatrix(range(P.at(o).ngens(n)))
            b = sol.submatrix(range(P.at(o).ngens(n), sol.nrows))
            gval.append(a)
            hval.append(-b)
        for o2 in shape.objects:
            gcols, hcols = [], []
            for c, al, off in lay[n][o2][0]:
                src = Q.gens[n][c]
                gcols.append(P.along(al).at(n) @ gval[c])
                hcols.append(F.along(al).at(n - 1) @ hval[c])
            rows_g, rows_h = P.at(o2).ngens(n), F.at(o2).ngens(n - 1)
            gmat[o2][n] = ExactMatrix.hstack(ring, gcols) if gcols else ExactMatrix(ring, rows_g, 0)
            hmat[o2][n] = ExactMatrix.hstack(ring, hcols) if hcols else ExactMatrix(ring, rows_h, 0)
    g = DiagramMap(R, P, {o: ChainMap(R.at(o), P.at(o), gmat[o], check=False) for o in shape.objects},
                   check=False)
    return g, hmat


# ---------------------------------------------------------------------------
# duality over fields
# ---------------------------------------------------------------------------


def _free_complex(C: Complex) -> tuple:
    """Replace a complex over a field by a free one; returns (C', to, from)."""
    if C.is_free():
        I = ChainMap.identity(C)
        return C, I, I
    ring = C.ring
    data = {n: C.module_at(n).reduce() for n in range(C.lo, C.hi + 1)}
    mods = {n: N for n, (N, q, s) in data.items()}
    diffs = {n: data[n + 1][1] @ C.d(n) @ data[n][2] for n in range(C.lo, C.hi)}
    C2 = Complex(ring, mods, diffs, check=False)
    to = ChainMap(C, C2, {n: data[n][1] for n in data}, check=False)
    back = ChainMap(C2, C, {n: data[n][2] for n in data}, check=False)
    return C2, to, back


def free_values(F: DiagramComplex) -> DiagramComplex:
    """Same diagram with levelwise free values (fields only)."""
    if all(F.at(o).is_free() for o in F.shape.objects):
        return F
    data = {o: _free_complex(F.at(o)) for o in F.shape.objects}
    vals = {o: data[o][0] for o in F.shape.objects}
    maps = {}
    for m, f in F.maps.items():
        s, t = F.shape.src(m), F.shape.tgt(m)
        maps[m] = data[s][2].then(f).then(data[t][1])
    return DiagramComplex(F.shape, F.ring, vals, maps, check=False)


def dual_diagram(F: DiagramComplex) -> DiagramComplex:
    """D(F) = Hom_k(F, k) as a diagram over I^op (fields only)."""
    if not F.ring.is_field:
        raise UnsupportedRing("vector-space duality needs a field")
    F = free_values(F)
    op = F.shape.opposite()
    vals = {o: dual(F.at(o)) for o in op.objects}
    unit = Complex.free(F.ring, {0: 1})
    maps = {}
    for m, f in F.maps.items():
        h = hom_map_contra(f, unit)
        maps[m] = ChainMap(vals[op.src(m)], vals[op.tgt(m)], h.comps, check=False)
    return DiagramComplex(op, F.ring, vals, maps, check=False)


def dual_map(phi: DiagramMap, source_dual: DiagramComplex, target_dual: DiagramComplex) -> DiagramMap:
    """D(phi): D(target) -> D(source) (values assumed free)."""
    unit = Complex.free(phi.source.ring, {0: 1})
    comps = {}
    for o in phi.source.shape.objects:
        h = hom_map_contra(phi.at(o), unit)
        comps[o] = ChainMap(target_dual.at(o), source_dual.at(o), h.comps, check=False)
    return DiagramMap(target_dual, source_dual, comps, check=False)


def injective_coresolution(F: DiagramComplex, length: int) -> Resolution:
    """Coresolution by cofree diagrams, certified in [lo, lo+N-1] (fields only)."""
    if not F.ring.is_field:
        raise UnsupportedRing("injective coresolutions are implemented over fields only "
                              "(divisible Z-modules are not finitely presented)")
    Ff = free_values(F)
    DF = dual_diagram(Ff)
    res = projective_resolution(DF, length)
    I = dual_diagram(res.resolvent)
    op_shape = Ff.shape
    I = DiagramComplex(op_shape, F.ring, I.values, I.maps, check=False)
    DDF = dual_diagram(DF)
    # D(comparison): DDF -> D(P); DDF equals Ff with negated differential,
    # and (-1)^n on degree n identifies the two.
    dcomp = dual_map(res.comparison, dual_diagram(res.resolvent), DDF)
    comps = {}
    for o in op_shape.objects:
        C = Ff.at(o)
        sign = ChainMap(C, DDF.at(o), {n: ExactMatrix.scalar(F.ring, C.ngens(n), (-1) ** (n % 2))
                                       for n in range(C.lo, C.hi + 1)}, check=False)
        comps[o] = ChainMap(C, I.at(o), sign.then(dcomp.at(o)).comps, check=False)
    lo, hi = F.window()
    return Resolution(Ff, I, DiagramMap(Ff, I, comps, check=False), "injective", length,
                      (lo, lo + length - 1), res.gens, res.dvals, res.fvals)


# ---------------------------------------------------------------------------
# derived Kan extensions, homotopy (co)limits
# ---------------------------------------------------------------------------


def derived_lan(u: CatFunctor, F: DiagramComplex, length: int) -> DiagramComplex:
    """L u_! F = u_!(P_F); the result carries ``certified_window``."""
    if F.shape.objects != u.source.objects:
        raise ShapeMismatch("diagram shape differs from the functor's source")
    res = projective_resolution(F, length)
    out = LanData(u, res.resolvent).result
    out.certified_window = res.certified_window
    out.resolution = res
    return out


def derived_ran(u: CatFunctor, F: DiagramComplex, length: int) -> DiagramComplex:
    """R u_* F, by duality from L (u^op)_! over fields; over Z only along c: I -> e."""
    if F.shape.objects != u.source.objects:
        raise ShapeMismatch("diagram shape differs from the functor's source")
    if not F.ring.is_field:
        if len(u.target.objects) == 1 and len(u.target.morphisms) == 1:
            H = holim_via_hom(F, length)
            out = DiagramComplex(u.target, F.ring, {u.target.objects[0]: H}, {}, check=False)
            out.certified_window = H.certified_window
            return out
        raise UnsupportedRing("derived right Kan extensions over Z are only implemented into e")
    DF = dual_diagram(F)
    L = derived_lan(u.opposite(), DF, length)
    out = dual_diagram(L)
    out = DiagramComplex(u.target, F.ring, out.values, out.maps, check=False)
    lo, hi = L.certified_window
    out.certified_window = (-hi, -lo)
    return out


def hocolim(D: DiagramComplex, length: int) -> Complex:
    c = terminal_functor(D.shape)
    L = derived_lan(c, D, length)
    C = L.at(c.target.objects[0])
    C.certified_window = L.certified_window
    return C


def holim(D: DiagramComplex, length: int) -> Complex:
    c = terminal_functor(D.shape)
    R = derived_ran(c, D, length)
    C = R.at(c.target.objects[0])
    C.certified_window = R.certified_window
    return C


def constant_resolution(shape: FinCat, ring, length: int) -> Resolution:
    A = Complex.free(ring, {0: 1})
    return projective_resolution(DiagramComplex.constant(shape, A), length)


def hom_from_free(res: Resolution, F: DiagramComplex) -> Complex:
    """Hom(P, F) for a free diagram P given by generators; degree n collects
    F^{p+n}(i_g) over generators g of degree p."""
    ring = F.ring
    shape = F.shape
    gens, dvals = res.gens, res.dvals
    lay = free_layout(shape, gens)
    flo, fhi = F.window()
    plo, phi_ = min(gens), max(gens)
    lo, hi = flo - phi_, fhi - plo

    def blocks(n):
        out, off = [], 0
        for p in sorted(gens):
            for g, i in enumerate(gens[p]):
                size = F.at(i).ngens(p + n)
                out.append((p, g, i, off, size))
                off += size
        return out, off

    layouts = {n: blocks(n) for n in range(lo, hi + 2)}
    mods = {}
    for n in range(lo, hi + 1):
        bl, tot = layouts[n]
        rel_rows = []
        for p, g, i, off, size in bl:
            for row in F.at(i).module_at(p + n).relations.rows:
                rel_rows.append({off + j: v for j, v in row.items()})
        mods[n] = ModulePresentation(ring, tot, ExactMatrix(ring, len(rel_rows), tot, rel_rows)
                                     if rel_rows else None)
    diffs = {}
    for n in range(lo, hi):
        sb, scols = layouts[n]
        tb, trows = layouts[n + 1]
        toff = {(p, g): (off, size) for p, g, i, off, size in tb}
        soff = {(p, g): (off, size) for p, g, i, off, size in sb}
        rows = [{} for _ in range(trows)]

        def put(r0, c0, M):
            for r, row in enumerate(M.rows):
                tgt = rows[r0 + r]
                for c, v in row.items():
                    w = tgt.get(c0 + c, 0) + v
                    if ring.modulus:
                        w %= ring.modulus
                    if w != 0:
                        tgt[c0 + c] = w
                    else:
                        tgt.pop(c0 + c, None)

        # (d phi)(g) = d_F phi(g) - (-1)^n phi(d_P g)
        for p, g, i, off, size in sb:
            put(toff[(p, g)][0], off, F.at(i).d(p + n))
        sgn = -1 if n % 2 == 0 else 1
        for p, g, i, off, size in tb:
            # d_P g lies in P^{p+1}(i); phi(a_* g') = F(a) phi(g')
            vec = dvals[p][g] if p in dvals and g < len(dvals[p]) else {}
            if not vec or (p + 1) not in gens:
                continue
            for g2, a, off2 in lay[p + 1][i][0]:
                v = vec.get(off2)
                if v:
                    put(off, soff[(p + 1, g2)][0], F.along(a).at(p + 1 + n).scale(sgn * v))
        diffs[n] = ExactMatrix(ring, trows, scols, rows)
    C = Complex(ring, mods, diffs, check=False)
    return C


def holim_via_hom(F: DiagramComplex, length: int) -> Complex:
    """R lim F = Hom(P, F) with P a resolution of the constant diagram A."""
    res = constant_resolution(F.shape, F.ring, length)
    C = hom_from_free(res, F)
    lo, hi = F.window()
    C.certified_window = (lo, lo + length - 1)
    return C


# ---------------------------------------------------------------------------
# Beck-Chevalley
# ---------------------------------------------------------------------------


def beck_chevalley_map(u: CatFunctor, j, F: DiagramComplex, length: int):
    """The comparison L p_! pi_j^* F -> j^* L u_! F as a chain map, plus its window.

    The target is u_!(P_F) evaluated at j, which is the colimit over I/j of
    pi_j^* P_F on the nose.  The source uses an independent resolution Q of
    pi_j^* F over I/j; the map is p_! of a lift Q -> pi_j^* P_F.
    """
    P = projective_resolution(F, length)
    cat, proj = slice_cat(u, j)
    piF = restrict(proj, F)
    piP = restrict(proj, P.resolvent)
    pi_cmp = DiagramMap(piP, piF, {o: P.comparison.at(o[0]) for o in cat.objects}, check=False)
    Q = projective_resolution(piF, length)
    g, _ = lift_resolution(Q, piP, pi_cmp)
    src = colim_data(Q.resolvent)
    tgt = colim_data(piP)
    big = {}
    for n in range(max(src.lo, tgt.lo), min(src.hi, tgt.hi) + 1):
        big[n] = ExactMatrix.block_diag(F.ring, [g.at(o).at(n) for o in src.keys])
    bc = src.induced(big, tgt)
    lo = max(P.certified_window[0], Q.certified_window[0])
    hi = min(P.certified_window[1], Q.certified_window[1])
    return bc, (lo, hi)


def beck_chevalley_check(u: CatFunctor, j, F: DiagramComplex, length: int, dual_too=False) -> bool:
    """Is the Beck-Chevalley comparison a quasi-isomorphism in the certified window?

    With ``dual_too`` (fields only) the comparison for right Kan extensions is
    checked as well, through duality over the opposite categories.
    """
    bc, window = beck_chevalley_map(u, j, F, length)
    ok = is_quasi_iso(bc, window)
    if dual_too:
        if not F.ring.is_field:
            raise UnsupportedRing("the right-adjoint comparison needs injectives (fields only)")
        bc2, window2 = beck_chevalley_map(u.opposite(), j, dual_diagram(F), length)
        ok = ok and is_quasi_iso(bc2, window2)
    return ok


# ---------------------------------------------------------------------------
# rectification of homotopy commutative squares
# ---------------------------------------------------------------------------


@dataclass
class Rectification:
    cylinder: Complex
    iota: ChainMap
    alpha: ChainMap
    beta: ChainMap
    t: Homotopy
    h: Homotopy
    gamma2_tilde: ChainMap
    gamma1: ChainMap
    phi_prime: ChainMap
    s: Homotopy

    def checks(self) -> dict:
        """Exact matrix identities promised by the construction."""
        Cyl = self.cylinder
        g2 = self.gamma2_tilde
        Gp = g2.target
        lo, hi = Cyl.lo - 1, Cyl.hi + 1
        chain = all((Gp.d(n) @ g2.at(n) - g2.at(n + 1) @ Cyl.d(n)).is_zero() for n in range(lo, hi))
        strict = all((g2.at(n) @ self.iota.at(n) - self.phi_prime.at(n) @ self.gamma1.at(n)).is_zero()
                     for n in range(lo, hi + 1))
        ba = self.alpha.then(self.beta)
        G = self.alpha.source
        beta_alpha = all((ba.at(n) - ExactMatrix.identity(G.ring, G.ngens(n))).is_zero()
                         for n in range(G.lo - 1, G.hi + 2))
        homotopy = self.h.residual_is_zero_exact()
        same_s = True
        F = self._phi.source
        # gamma2~ alpha phi - phi' gamma1 = d s + s d with the given s
        ga = self.alpha.then(g2)
        for n in range(F.lo - 1, F.hi + 2):
            lhs_n = ga.at(n) @ self._phi.at(n) - self.phi_prime.at(n) @ self.gamma1.at(n)
            rhs_n = Gp.d(n - 1) @ self.s.at(n) + self.s.at(n + 1) @ F.d(n)
            if not (lhs_n - rhs_n).is_zero():
                same_s = False
        return {"chain_map": chain, "strict_square": strict, "beta_alpha_id": beta_alpha,
                "alpha_beta_homotopy": homotopy, "same_homotopy": same_s}


def rectify_square(gamma1: ChainMap, gamma2: ChainMap, s_comps: dict, phi: ChainMap,
                   phi_prime: ChainMap) -> Rectification:
    """Replace a square commuting up to ``s`` (gamma2 phi - phi' gamma1 = ds + sd) by a strict one.

    ``s_comps[n]: F^n -> G'^{n-1}``.  The new square is F -> Cyl(phi) -> G' with
    ``gamma2~ = (-s, gamma2 phi - d s - s d, gamma2)``.
    """
    F, G = phi.source, phi.target
    Gp = gamma2.target
    ring = F.ring
    if isinstance(s_comps, Homotopy):
        s_comps = s_comps.comps
    top = phi.then(gamma2)
    bottom = gamma1.then(phi_prime)
    try:
        s = Homotopy(top, bottom, s_comps, check=True)
    except Exception as exc:  # noqa: BLE001
        raise NotHomotopyCommutative(str(exc)) from exc
    Cyl, iota, alpha, beta, t, h = cylinder(phi)
    lo, hi = Cyl.lo, Cyl.hi
    comps = {}
    for n in range(lo, hi + 1):
        A = -s.at(n + 1)
        B = top.at(n) - Gp.d(n - 1) @ s.at(n) - s.at(n + 1) @ F.d(n)
        C = gamma2.at(n)
        comps[n] = ExactMatrix.hstack(ring, [A, B, C], nrows=Gp.ngens(n))
    g2 = ChainMap(Cyl, Gp, comps, check=False)
    r = Rectification(Cyl, iota, alpha, beta, t, h, g2, gamma1, phi_prime, s)
    r._phi = phi
    return r


# ---------------------------------------------------------------------------
# bicartesian squares
# ---------------------------------------------------------------------------


SQUARE = None


def square_shape() -> FinCat:
    global SQUARE
    if SQUARE is None:
        SQUARE = builtin("square")
    return SQUARE


def square_edges(S: DiagramComplex):
    sh = S.shape
    e = lambda a, b: S.along(sh.hom(a, b)[0])  # noqa: E731
    return e("00", "10"), e("00", "01"), e("10", "11"), e("01", "11")


def _alpha_map(S: DiagramComplex):
    from .complexes import direct_sum
    f0010, f0001, f1011, f0111 = square_edges(S)
    F00, F10, F01, F11 = (S.at(o) for o in ("00", "10", "01", "11"))
    mid = direct_sum(F10, F01)
    ring = S.ring
    lo = min(F00.lo, mid.lo)
    hi = max(F00.hi, mid.hi)
    alpha = ChainMap(F00, mid, {n: ExactMatrix.vstack(ring, [f0010.at(n), -f0001.at(n)],
                                                      ncols=F00.ngens(n))
                                for n in range(lo, hi + 1)}, check=False)
    beta = ChainMap(mid, F11, {n: ExactMatrix.hstack(ring, [f1011.at(n), f0111.at(n)],
                                                     nrows=F11.ngens(n))
                               for n in range(min(mid.lo, F11.lo), max(mid.hi, F11.hi) + 1)},
                    check=False)
    return alpha, beta


def cocartesian_comparison(S: DiagramComplex) -> ChainMap:
    """The canonical map cone(alpha) -> F_11 given by (0, beta)."""
    alpha, beta = _alpha_map(S)
    C, incl, proj = cone(alpha)
    F11 = S.at("11")
    ring = S.ring
    comps = {}
    for n in range(C.lo, C.hi + 1):
        comps[n] = ExactMatrix.hstack(ring, [ExactMatrix(ring, F11.ngens(n), S.at("00").ngens(n + 1)),
                                             beta.at(n)], nrows=F11.ngens(n))
    return ChainMap(C, F11, comps, check=False)


def cartesian_comparison(S: DiagramComplex) -> ChainMap:
    """The canonical map F_00 -> cone(beta)[-1] given by (alpha, 0)."""
    alpha, beta = _alpha_map(S)
    C, incl, proj = cone(beta)
    Cm = shift(C, -1)
    F00 = S.at("00")
    ring = S.ring
    comps = {}
    for n in range(min(F00.lo, Cm.lo), max(F00.hi, Cm.hi) + 1):
        comps[n] = ExactMatrix.vstack(ring, [alpha.at(n),
                                             ExactMatrix(ring, S.at("11").ngens(n - 1), F00.ngens(n))],
                                      ncols=F00.ngens(n))
    return ChainMap(F00, Cm, comps, check=False)


def is_cocartesian(S: DiagramComplex, window=None) -> bool:
    return is_quasi_iso(cocartesian_comparison(S), window)


def is_cartesian(S: DiagramComplex, window=None) -> bool:
    return is_quasi_iso(cartesian_comparison(S), window)


def upper_corner_inclusion() -> CatFunctor:
    return inclusion(builtin("upper_corner"), square_shape())


def lower_corner_inclusion() -> CatFunctor:
    return inclusion(builtin("lower_corner"), square_shape())


def derivator_cone(phi: ChainMap, length: int) -> Complex:
    """(L i_! [phi extended by zero to the upper corner])_{11}."""
    two = builtin("two")
    ring = phi.ring
    arrow = two.hom("0", "1")[0]
    D = DiagramComplex(two, ring, {"0": phi.source, "1": phi.target}, {arrow: phi}, check=False)
    corner = builtin("upper_corner")
    j = CatFunctor(two, corner, {"0": "00", "1": "10"}, {two.identity("0"): "00<=00",
                                                        two.identity("1"): "10<=10",
                                                        arrow: "00<=10"})
    span = ran(j, D)
    L = derived_lan(inclusion(corner, square_shape()), span, length)
    C = L.at("11")
    C.certified_window = L.certified_window
    return C


__all__ = [
    "Resolution", "projective_resolution", "lift_resolution", "free_values", "dual_diagram",
    "dual_map", "injective_coresolution", "derived_lan", "derived_ran", "hocolim", "holim",
    "constant_resolution", "hom_from_free", "holim_via_hom", "beck_chevalley_map",
    "beck_chevalley_check", "Rectification", "rectify_square", "square_shape", "square_edges",
    "cocartesian_comparison", "cartesian_comparison", "is_cocartesian", "is_cartesian",
    "upper_corner_inclusion", "lower_corner_inclusion", "derivator_cone", "ColimData", "homology",
]
