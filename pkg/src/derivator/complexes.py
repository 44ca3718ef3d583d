"""Bounded cochain complexes of finitely presented modules.

Grading is cohomological: ``d(n): C^n -> C^{n+1}`` is a matrix of shape
``ngens(n+1) x ngens(n)`` acting on generator coordinates.  Modules may carry
relations (over Z and fields); differentials and chain maps are then only
required to be well defined modulo those relations.

Sign conventions, fixed once for the whole package:

* shift ``C[k]^n = C^{n+k}`` with differential ``(-1)^k d``;
* ``cone(f)^n = F^{n+1} + G^n`` with ``d = [[-d_F, 0], [f, d_G]]``;
* ``Hom^n(K, M) = prod_p Hom(K^p, M^{p+n})`` with
  ``(d f) = d_M o f - (-1)^n f o d_K``, so ``Hom(A[0], M) = M`` on the nose;
* ``d(x (x) y) = dx (x) y + (-1)^p x (x) dy`` for x of degree p;
* a homotopy ``s`` between f and g satisfies ``f - g = d s + s d``.
"""
from __future__ import annotations

from .errors import NotAChainMap, NotAComplex, NotAHomotopy, NotFree, ShapeMismatch, UnsupportedRing
from .exactalg import (
    ExactMatrix, ModulePresentation, Subquotient, cycles_subquotient, graded_slice,
    homology_at, map_is_zero, slice_dimension, sub_map_is_iso, sub_map_matrix,
)


def _zero_mat(ring, r, c):
    return ExactMatrix(ring, r, c)


class Complex:
    """Bounded complex; modules outside ``[lo, hi]`` are zero."""

    def __init__(self, ring, modules, diffs=None, check=True):
        self.ring = ring
        mods = {n: M for n, M in modules.items()}
        if mods:
            self.lo = min(mods)
            self.hi = max(mods)
        else:
            self.lo, self.hi = 0, -1
        for n in range(self.lo, self.hi + 1):
            mods.setdefault(n, ModulePresentation.free(ring, 0))
        self.modules = mods
        self.diffs = {}
        for n, D in (diffs or {}).items():
            if D.shape != (self.ngens(n + 1), self.ngens(n)):
                raise ShapeMismatch(f"d({n}) has shape {D.shape}, expected "
                                    f"{(self.ngens(n + 1), self.ngens(n))}")
            if not D.is_zero():
                self.diffs[n] = D
        if check:
            self.validate()

    # construction ---------------------------------------------------------------

    @classmethod
    def free(cls, ring, ranks: dict, diffs=None, degrees=None, check=True):
        mods = {n: ModulePresentation.free(ring, r, None if degrees is None else degrees[n])
                for n, r in ranks.items()}
        return cls(ring, mods, diffs, check=check)

    @classmethod
    def concentrated(cls, M: ModulePresentation, n: int = 0):
        return cls(M.ring, {n: M}, {})

    @classmethod
    def zero(cls, ring):
        return cls(ring, {}, {})

    # access ---------------------------------------------------------------------

    @property
    def window(self):
        return (self.lo, self.hi)

    def module_at(self, n) -> ModulePresentation:
        M = self.modules.get(n)
        return M if M is not None else ModulePresentation.free(self.ring, 0)

    def ngens(self, n) -> int:
        M = self.modules.get(n)
        return M.ngens if M is not None else 0

    def rel(self, n) -> ExactMatrix:
        """Relation lattice of C^n as columns."""
        M = self.modules.get(n)
        if M is None:
            return _zero_mat(self.ring, 0, 0)
        return M.relation_lattice

    def degrees(self, n):
        M = self.modules.get(n)
        if M is None:
            return ()
        if M.degrees is None:
            return (0,) * M.ngens
        return M.degrees

    def d(self, n) -> ExactMatrix:
        D = self.diffs.get(n)
        if D is None:
            return _zero_mat(self.ring, self.ngens(n + 1), self.ngens(n))
        return D

    def is_free(self):
        return all(M.is_free for M in self.modules.values())

    def is_graded(self):
        return self.ring.kind == "POLY"

    def validate(self):
        for n in range(self.lo, self.hi + 1):
            D = self.d(n)
            if not D.is_zero():
                R = self.rel(n)
                if R.ncols and not map_is_zero(D @ R, self.module_at(n + 1)):
                    raise NotAComplex(f"d({n}) does not respect relations")
            D2 = self.d(n + 1) @ D
            if not map_is_zero(D2, self.module_at(n + 2)):
                raise NotAComplex(f"d({n + 1}) o d({n}) != 0")
        if self.is_graded():
            for n, D in self.diffs.items():
                G = D.with_degrees(self.degrees(n + 1), self.degrees(n))
                for i, row in enumerate(G.rows):
                    for j, p in row.items():
                        if not p.is_homogeneous() or p.degree() != G.col_degrees[j] - G.row_degrees[i]:
                            raise NotAComplex(f"d({n}) is not graded of degree 0")
        return True

    def __repr__(self):
        parts = [f"{n}:{self.module_at(n).ngens}" for n in range(self.lo, self.hi + 1)]
        return f"Complex({self.ring}, [{', '.join(parts)}])"

    def to_json(self):
        return {
            "ring": self.ring.to_json(),
            "window": [self.lo, self.hi],
            "modules": {str(n): {"ngens": self.ngens(n),
                                 "relations": self.module_at(n).relations.to_json()}
                        for n in range(self.lo, self.hi + 1)},
            "differentials": {str(n): D.to_json() for n, D in sorted(self.diffs.items())},
        }

    @classmethod
    def from_json(cls, ring, data):
        from .exactalg import ExactMatrix as EM
        mods = {}
        for n, m in data["modules"].items():
            rel = m.get("relations")
            R = None
            if rel:
                R = EM.from_entries(ring, rel["rows"], rel["cols"],
                                    {(i, j): v for i, j, v in rel["entries"]})
            mods[int(n)] = ModulePresentation(ring, m["ngens"], R)
        diffs = {}
        for n, D in data.get("differentials", {}).items():
            diffs[int(n)] = EM.from_entries(ring, D["rows"], D["cols"],
                                            {(i, j): v for i, j, v in D["entries"]})
        return cls(ring, mods, diffs)


# ---------------------------------------------------------------------------
# chain maps and homotopies
# ---------------------------------------------------------------------------


class ChainMap:
    """Degree-zero map of complexes; ``comps[n]`` has shape ngens_G(n) x ngens_F(n)."""

    def __init__(self, source: Complex, target: Complex, comps=None, check=True):
        self.source = source
        self.target = target
        self.comps = {}
        for n, M in (comps or {}).items():
            if M.shape != (target.ngens(n), source.ngens(n)):
                raise ShapeMismatch(f"component {n} has shape {M.shape}, expected "
                                    f"{(target.ngens(n), source.ngens(n))}")
            if not M.is_zero():
                self.comps[n] = M
        if check:
            self.validate()

    @property
    def ring(self):
        return self.source.ring

    def at(self, n) -> ExactMatrix:
        M = self.comps.get(n)
        if M is None:
            return _zero_mat(self.ring, self.target.ngens(n), self.source.ngens(n))
        return M

    def window(self):
        return (min(self.source.lo, self.target.lo), max(self.source.hi, self.target.hi))

    def validate(self):
        F, G = self.source, self.target
        lo, hi = self.window()
        for n in range(lo - 1, hi + 1):
            f = self.at(n)
            R = F.rel(n)
            if R.ncols and not f.is_zero() and not map_is_zero(f @ R, G.module_at(n)):
                raise NotAChainMap(f"component {n} does not respect relations")
            diff = G.d(n) @ f - self.at(n + 1) @ F.d(n)
            if not map_is_zero(diff, G.module_at(n + 1)):
                raise NotAChainMap(f"square at degree {n} does not commute")
        return True

    @classmethod
    def identity(cls, C: Complex):
        return cls(C, C, {n: ExactMatrix.identity(C.ring, C.ngens(n)) for n in range(C.lo, C.hi + 1)},
                   check=False)

    @classmethod
    def zero(cls, F: Complex, G: Complex):
        return cls(F, G, {}, check=False)

    def then(self, other: "ChainMap") -> "ChainMap":
        """other o self."""
        lo, hi = self.window()
        return ChainMap(self.source, other.target,
                        {n: other.at(n) @ self.at(n) for n in range(lo, hi + 1)}, check=False)

    def __add__(self, other):
        lo, hi = self.window()
        return ChainMap(self.source, self.target,
                        {n: self.at(n) + other.at(n) for n in range(lo, hi + 1)}, check=False)

    def __sub__(self, other):
        lo, hi = self.window()
        return ChainMap(self.source, self.target,
                        {n: self.at(n) - other.at(n) for n in range(lo, hi + 1)}, check=False)

    def scale(self, c):
        return ChainMap(self.source, self.target, {n: M.scale(c) for n, M in self.comps.items()},
                        check=False)

    def equals(self, other: "ChainMap") -> bool:
        """Equality modulo the target relations."""
        lo, hi = self.window()
        return all(map_is_zero(self.at(n) - other.at(n), self.target.module_at(n))
                   for n in range(lo, hi + 1))

    def __repr__(self):
        return f"ChainMap({self.source!r} -> {self.target!r})"


class Homotopy:
    """``s_n: F^n -> G^{n-1}`` with ``phi - psi = d s + s d``."""

    def __init__(self, phi: ChainMap, psi: ChainMap, comps=None, check=True):
        self.phi = phi
        self.psi = psi
        F, G = phi.source, phi.target
        self.comps = {}
        for n, M in (comps or {}).items():
            if M.shape != (G.ngens(n - 1), F.ngens(n)):
                raise ShapeMismatch(f"homotopy component {n} has shape {M.shape}")
            if not M.is_zero():
                self.comps[n] = M
        if check:
            self.validate()

    def at(self, n):
        M = self.comps.get(n)
        if M is None:
            F, G = self.phi.source, self.phi.target
            return _zero_mat(F.ring, G.ngens(n - 1), F.ngens(n))
        return M

    def validate(self):
        F, G = self.phi.source, self.phi.target
        lo, hi = self.phi.window()
        for n in range(lo, hi + 1):
            lhs = self.phi.at(n) - self.psi.at(n)
            rhs = G.d(n - 1) @ self.at(n) + self.at(n + 1) @ F.d(n)
            if not map_is_zero(lhs - rhs, G.module_at(n)):
                raise NotAHomotopy(f"homotopy identity fails in degree {n}")
        return True

    def residual_is_zero_exact(self) -> bool:
        """The homotopy identity as an exact matrix equation (no relations)."""
        F, G = self.phi.source, self.phi.target
        lo, hi = self.phi.window()
        for n in range(lo, hi + 1):
            lhs = self.phi.at(n) - self.psi.at(n)
            rhs = G.d(n - 1) @ self.at(n) + self.at(n + 1) @ F.d(n)
            if not (lhs - rhs).is_zero():
                return False
        return True


# ---------------------------------------------------------------------------
# classical constructions
# ---------------------------------------------------------------------------


def _sum_module(ring, mods):
    """Direct sum of presentations (generators concatenated)."""
    n = sum(M.ngens for M in mods)
    rels = [M.relations for M in mods]
    if all(R.nrows == 0 for R in rels):
        degs = None
        if ring.kind == "POLY":
            degs = tuple(d for M in mods for d in (M.degrees or (0,) * M.ngens))
        return ModulePresentation(ring, n, None, degs)
    R = ExactMatrix.block_diag(ring, rels)
    return ModulePresentation(ring, n, R)


def direct_sum(*complexes) -> Complex:
    ring = complexes[0].ring
    lo = min(C.lo for C in complexes)
    hi = max(C.hi for C in complexes)
    mods = {n: _sum_module(ring, [C.module_at(n) for C in complexes]) for n in range(lo, hi + 1)}
    diffs = {n: ExactMatrix.block_diag(ring, [C.d(n) for C in complexes]) for n in range(lo, hi)}
    return Complex(ring, mods, diffs, check=False)


def shift(C: Complex, k: int) -> Complex:
    mods = {n - k: M for n, M in C.modules.items()}
    sign = -1 if k % 2 else 1
    diffs = {n - k: (D if sign > 0 else -D) for n, D in C.diffs.items()}
    return Complex(C.ring, mods, diffs, check=False)


def shift_map(f: ChainMap, k: int) -> ChainMap:
    return ChainMap(shift(f.source, k), shift(f.target, k),
                    {n - k: M for n, M in f.comps.items()}, check=False)


def cone(phi: ChainMap):
    """Mapping cone with its inclusion G -> cone and projection cone -> F[1]."""
    F, G = phi.source, phi.target
    ring = F.ring
    lo = min(F.lo - 1, G.lo)
    hi = max(F.hi - 1, G.hi)
    mods, diffs = {}, {}
    for n in range(lo, hi + 1):
        mods[n] = _sum_module(ring, [F.module_at(n + 1), G.module_at(n)])
    for n in range(lo, hi):
        a1, b1 = F.ngens(n + 1), G.ngens(n)
        a2, b2 = F.ngens(n + 2), G.ngens(n + 1)
        diffs[n] = ExactMatrix.block(ring, {(0, 0): -F.d(n + 1), (1, 0): phi.at(n + 1), (1, 1): G.d(n)},
                                     [a2, b2], [a1, b1])
    C = Complex(ring, mods, diffs, check=False)
    incl = ChainMap(G, C, {n: ExactMatrix.block(ring, {(1, 0): ExactMatrix.identity(ring, G.ngens(n))},
                                                [F.ngens(n + 1), G.ngens(n)], [G.ngens(n)])
                           for n in range(G.lo, G.hi + 1)}, check=False)
    F1 = shift(F, 1)
    proj = ChainMap(C, F1, {n: ExactMatrix.block(ring, {(0, 0): ExactMatrix.identity(ring, F.ngens(n + 1))},
                                                 [F.ngens(n + 1)], [F.ngens(n + 1), G.ngens(n)])
                            for n in range(lo, hi + 1)}, check=False)
    return C, incl, proj


class Cylinder:
    """Mapping cylinder of ``phi: F -> G`` with its structure maps and homotopies.

    ``Cyl^n = F^{n+1} + F^n + G^n`` with differential
    ``[[-d, 0, 0], [id, d, 0], [-phi, 0, d]]``; ``iota`` includes F in the middle,
    ``alpha`` includes G last, ``beta = (0, phi, id)``.  ``t`` is a homotopy
    between ``iota`` and ``alpha phi``; ``h`` is a homotopy between
    ``alpha beta`` and the identity.
    """

    def __init__(self, phi: ChainMap):
        F, G = phi.source, phi.target
        ring = F.ring
        self.phi = phi
        lo = min(F.lo - 1, G.lo)
        hi = max(F.hi, G.hi)
        self.lo, self.hi = lo, hi
        sizes = {n: [F.ngens(n + 1), F.ngens(n), G.ngens(n)] for n in range(lo - 1, hi + 2)}
        self.sizes = sizes
        I = lambda k: ExactMatrix.identity(ring, k)  # noqa: E731
        mods = {n: _sum_module(ring, [F.module_at(n + 1), F.module_at(n), G.module_at(n)])
                for n in range(lo, hi + 1)}
        diffs = {}
        for n in range(lo, hi):
            diffs[n] = ExactMatrix.block(ring, {
                (0, 0): -F.d(n + 1),
                (1, 0): I(F.ngens(n + 1)), (1, 1): F.d(n),
                (2, 0): -phi.at(n + 1), (2, 2): G.d(n),
            }, sizes[n + 1], sizes[n])
        self.complex = Cyl = Complex(ring, mods, diffs, check=False)
        self.iota = ChainMap(F, Cyl, {n: ExactMatrix.block(ring, {(1, 0): I(F.ngens(n))}, sizes[n],
                                                           [F.ngens(n)])
                                      for n in range(F.lo, F.hi + 1)}, check=False)
        self.alpha = ChainMap(G, Cyl, {n: ExactMatrix.block(ring, {(2, 0): I(G.ngens(n))}, sizes[n],
                                                            [G.ngens(n)])
                                       for n in range(G.lo, G.hi + 1)}, check=False)
        self.beta = ChainMap(Cyl, G, {n: ExactMatrix.block(ring, {(0, 1): phi.at(n), (0, 2): I(G.ngens(n))},
                                                           [G.ngens(n)], sizes[n])
                                      for n in range(lo, hi + 1)}, check=False)
        alpha_phi = phi.then(self.alpha)
        self.t = Homotopy(self.iota, alpha_phi,
                          {n: ExactMatrix.block(ring, {(0, 0): I(F.ngens(n))}, sizes[n - 1], [F.ngens(n)])
                           for n in range(F.lo, F.hi + 1)}, check=False)
        ab = self.beta.then(self.alpha)
        # the map (a, b, c) -> (b, 0, 0) satisfies dh + hd = id - alpha beta
        self.h_matrix = {n: ExactMatrix.block(ring, {(0, 1): I(F.ngens(n))}, sizes[n - 1], sizes[n])
                         for n in range(lo, hi + 1)}
        self.h = Homotopy(ab, ChainMap.identity(Cyl),
                          {n: M.scale(-1) for n, M in self.h_matrix.items()}, check=False)


def cylinder(phi: ChainMap):
    """Return (Cyl, iota, alpha, beta, t, h) for ``phi``."""
    c = Cylinder(phi)
    return c.complex, c.iota, c.alpha, c.beta, c.t, c.h


def _hom_index(K: Complex, M: Complex, n: int):
    """Block layout of Hom^n(K, M): list of (p, offset, a_p, g_{p+n})."""
    blocks, off = [], 0
    for p in range(K.lo, K.hi + 1):
        a, g = K.ngens(p), M.ngens(p + n)
        if a and g:
            blocks.append((p, off, a, g))
            off += a * g
    return blocks, off


def hom_complex(K: Complex, M: Complex) -> Complex:
    """Total Hom complex; K must be levelwise free."""
    if not K.is_free():
        raise NotFree("hom_complex needs a levelwise free source")
    ring = K.ring
    lo = M.lo - K.hi
    hi = M.hi - K.lo
    layouts = {n: _hom_index(K, M, n) for n in range(lo - 1, hi + 2)}
    mods = {}
    graded = ring.kind == "POLY"
    for n in range(lo, hi + 1):
        blocks, total = layouts[n]
        rel_rows = []
        degs = []
        for p, off, a, g in blocks:
            R = M.module_at(p + n).relations
            for k in range(a):
                for row in R.rows:
                    rel_rows.append({off + k * g + j: v for j, v in row.items()})
            if graded:
                kd, md = K.degrees(p), M.degrees(p + n)
                degs.extend(md[t] - kd[k] for k in range(a) for t in range(g))
        R = ExactMatrix(ring, len(rel_rows), total, rel_rows) if rel_rows else None
        mods[n] = ModulePresentation(ring, total, R, tuple(degs) if graded else None)
    diffs = {}
    for n in range(lo, hi):
        sblocks, scols = layouts[n]
        tblocks, trows = layouts[n + 1]
        toff = {p: (off, a, g) for p, off, a, g in tblocks}
        rows = [{} for _ in range(trows)]
        sgn = -1 if n % 2 == 0 else 1  # -(-1)^n
        for p, off, a, g in sblocks:
            dM = M.d(p + n)
            if p in toff:
                o2, a2, g2 = toff[p]
                cols = dM.columns()
                for k in range(a):
                    for t in range(g):
                        for t2, v in cols[t].items():
                            rows[o2 + k * g2 + t2][off + k * g + t] = v
            if (p - 1) in toff:
                o2, a2, g2 = toff[p - 1]
                dK = K.d(p - 1)  # K^{p-1} -> K^p, rows k in K^p
                for k in range(a):
                    for k2, v in dK.rows[k].items():
                        for t in range(g):
                            key = o2 + k2 * g2 + t
                            c = off + k * g + t
                            w = rows[key].get(c, 0) + sgn * v
                            if w != 0:
                                rows[key][c] = w
                            else:
                                rows[key].pop(c, None)
        mod = ring.modulus
        if mod:
            rows = [{j: v % mod for j, v in r.items() if v % mod} for r in rows]
        diffs[n] = ExactMatrix(ring, trows, scols, rows)
    return Complex(ring, mods, diffs, check=False)


def hom_map_contra(phi: ChainMap, M: Complex) -> ChainMap:
    """Hom(phi, M): Hom(K', M) -> Hom(K, M) for phi: K -> K'."""
    K, K2 = phi.source, phi.target
    HK2 = hom_complex(K2, M)
    HK = hom_complex(K, M)
    ring = K.ring
    comps = {}
    for n in range(min(HK.lo, HK2.lo), max(HK.hi, HK2.hi) + 1):
        sblocks, scols = _hom_index(K2, M, n)
        tblocks, trows = _hom_index(K, M, n)
        toff = {p: (off, a, g) for p, off, a, g in tblocks}
        rows = [{} for _ in range(trows)]
        for p, off, a, g in sblocks:
            if p not in toff:
                continue
            o2, a2, g2 = toff[p]
            P = phi.at(p)  # rows k' in K'^p, cols k in K^p
            for k2 in range(a):
                for k, v in P.rows[k2].items():
                    for t in range(g):
                        rows[o2 + k * g2 + t][off + k2 * g + t] = v
        comps[n] = ExactMatrix(ring, trows, scols, rows)
    return ChainMap(HK2, HK, comps, check=False)


def hom_map_co(K: Complex, psi: ChainMap) -> ChainMap:
    """Hom(K, psi): Hom(K, M) -> Hom(K, N) for psi: M -> N."""
    M, N = psi.source, psi.target
    HM, HN = hom_complex(K, M), hom_complex(K, N)
    ring = K.ring
    comps = {}
    for n in range(min(HM.lo, HN.lo), max(HM.hi, HN.hi) + 1):
        sblocks, scols = _hom_index(K, M, n)
        tblocks, trows = _hom_index(K, N, n)
        toff = {p: (off, a, g) for p, off, a, g in tblocks}
        rows = [{} for _ in range(trows)]
        for p, off, a, g in sblocks:
            if p not in toff:
                continue
            o2, a2, g2 = toff[p]
            cols = psi.at(p + n).columns()
            for k in range(a):
                for t in range(g):
                    for t2, v in cols[t].items():
                        rows[o2 + k * g2 + t2][off + k * g + t] = v
        comps[n] = ExactMatrix(ring, trows, scols, rows)
    return ChainMap(HM, HN, comps, check=False)


def _tensor_index(K: Complex, L: Complex, n: int):
    blocks, off = [], 0
    for p in range(K.lo, K.hi + 1):
        a, b = K.ngens(p), L.ngens(n - p)
        if a and b:
            blocks.append((p, off, a, b))
            off += a * b
    return blocks, off


def tensor(K: Complex, L: Complex) -> Complex:
    """Total tensor product of levelwise free complexes (Koszul signs)."""
    if not (K.is_free() and L.is_free()):
        raise NotFree("tensor needs levelwise free complexes")
    ring = K.ring
    lo, hi = K.lo + L.lo, K.hi + L.hi
    layouts = {n: _tensor_index(K, L, n) for n in range(lo, hi + 2)}
    graded = ring.kind == "POLY"
    mods = {}
    for n in range(lo, hi + 1):
        blocks, total = layouts[n]
        degs = None
        if graded:
            degs = tuple(K.degrees(p)[k] + L.degrees(n - p)[l]
                         for p, off, a, b in blocks for k in range(a) for l in range(b))
        mods[n] = ModulePresentation(ring, total, None, degs)
    diffs = {}
    for n in range(lo, hi):
        sblocks, scols = layouts[n]
        tblocks, trows = layouts[n + 1]
        toff = {p: (off, a, b) for p, off, a, b in tblocks}
        rows = [{} for _ in range(trows)]
        for p, off, a, b in sblocks:
            q = n - p
            if (p + 1) in toff:
                o2, a2, b2 = toff[p + 1]
                dK = K.d(p).columns()
                for k in range(a):
                    for k2, v in dK[k].items():
                        for l in range(b):
                            rows[o2 + k2 * b2 + l][off + k * b + l] = v
            if p in toff:
                o2, a2, b2 = toff[p]
                dL = L.d(q).columns()
                sgn = -1 if p % 2 else 1
                for k in range(a):
                    for l in range(b):
                        for l2, v in dL[l].items():
                            key = o2 + k * b2 + l2
                            w = rows[key].get(off + k * b + l, 0) + sgn * v
                            rows[key][off + k * b + l] = w
        mod = ring.modulus
        rows = [{j: (v % mod if mod else v) for j, v in r.items() if (v % mod if mod else v) != 0}
                for r in rows]
        diffs[n] = ExactMatrix(ring, trows, scols, rows)
    return Complex(ring, mods, diffs, check=False)


def tensor_map(f: ChainMap, g: ChainMap) -> ChainMap:
    """f (x) g for degree-zero chain maps."""
    K, L = f.source, g.source
    K2, L2 = f.target, g.target
    S, T = tensor(K, L), tensor(K2, L2)
    ring = K.ring
    comps = {}
    for n in range(S.lo, S.hi + 1):
        sblocks, scols = _tensor_index(K, L, n)
        tblocks, trows = _tensor_index(K2, L2, n)
        toff = {p: (off, a, b) for p, off, a, b in tblocks}
        rows = [{} for _ in range(trows)]
        for p, off, a, b in sblocks:
            if p not in toff:
                continue
            o2, a2, b2 = toff[p]
            F = f.at(p).columns()
            G = g.at(n - p).columns()
            for k in range(a):
                for l in range(b):
                    for k2, v in F[k].items():
                        for l2, w in G[l].items():
                            key = o2 + k2 * b2 + l2
                            rows[key][off + k * b + l] = rows[key].get(off + k * b + l, 0) + v * w
        mod = ring.modulus
        rows = [{j: (v % mod if mod else v) for j, v in r.items() if (v % mod if mod else v) != 0}
                for r in rows]
        comps[n] = ExactMatrix(ring, trows, scols, rows)
    return ChainMap(S, T, comps, check=False)


def truncate_brutal_le(C: Complex, k: int) -> Complex:
    """sigma^{<=k} C: keep degrees <= k."""
    mods = {n: M for n, M in C.modules.items() if n <= k}
    diffs = {n: D for n, D in C.diffs.items() if n + 1 <= k}
    return Complex(C.ring, mods, diffs, check=False)


def dual(C: Complex) -> Complex:
    """Hom(C, A[0]) for a free complex."""
    return hom_complex(C, Complex.free(C.ring, {0: 1}))


# ---------------------------------------------------------------------------
# homology
# ---------------------------------------------------------------------------


def homology_subquotient(C: Complex, n: int) -> Subquotient:
    if C.ring.kind == "POLY":
        raise UnsupportedRing("use graded_homology over GradedPoly")
    tgt = C.module_at(n + 1)
    src = C.module_at(n)
    return cycles_subquotient(C.d(n), C.d(n - 1),
                              src_rel=None if src.is_free else src.relation_lattice,
                              tgt_rel=None if tgt.is_free else tgt.relation_lattice)


def homology(C: Complex, n: int, slices=None):
    """Normalized presentation of H^n(C); over GradedPoly a dict slice -> dimension."""
    if C.ring.kind == "POLY":
        if slices is None:
            raise UnsupportedRing("graded homology needs a slice window")
        return graded_homology(C, n, slices)
    if n < C.lo or n > C.hi:
        return ModulePresentation.free(C.ring, 0)
    if C.module_at(n).is_free and C.module_at(n + 1).is_free:
        return homology_at(C.d(n), C.d(n - 1))
    return homology_subquotient(C, n).presentation()


def slice_complex(C: Complex, s: int) -> Complex:
    """Degree-s slice of a graded free complex, as a complex over the base field."""
    ring = C.ring
    base = ring.base
    nv = ring.nvars
    mods = {n: ModulePresentation.free(base, slice_dimension(C.degrees(n), nv, s))
            for n in range(C.lo, C.hi + 1)}
    diffs = {}
    for n, D in C.diffs.items():
        diffs[n] = graded_slice(D.with_degrees(C.degrees(n + 1), C.degrees(n)), s)
    return Complex(base, mods, diffs, check=False)


def slice_map(f: ChainMap, s: int) -> ChainMap:
    F, G = f.source, f.target
    lo, hi = f.window()
    comps = {n: graded_slice(f.at(n).with_degrees(G.degrees(n), F.degrees(n)), s)
             for n in range(lo, hi + 1) if F.ngens(n) and G.ngens(n)}
    return ChainMap(slice_complex(F, s), slice_complex(G, s), comps, check=False)


def graded_homology(C: Complex, n: int, slices) -> dict:
    out = {}
    for s in slices:
        S = slice_complex(C, s)
        out[s] = homology(S, n).ngens
    return out


def induced_map(f: ChainMap, n: int):
    """(H^n(F), H^n(G), matrix on reduced generators)."""
    HF = homology_subquotient(f.source, n)
    HG = homology_subquotient(f.target, n)
    return HF, HG, sub_map_matrix(HF, HG, f.at(n))


def is_quasi_iso(f: ChainMap, window=None) -> bool:
    """Are all induced maps H^n(F) -> H^n(G) isomorphisms (n in window)?"""
    if f.ring.kind == "POLY":
        raise UnsupportedRing("quasi-isomorphism over GradedPoly is checked slice-wise")
    lo, hi = f.window() if window is None else window
    for n in range(lo, hi + 1):
        HF = homology_subquotient(f.source, n)
        HG = homology_subquotient(f.target, n)
        if not sub_map_is_iso(HF, HG, f.at(n)):
            return False
    return True


def is_acyclic(C: Complex, window=None) -> bool:
    lo, hi = C.window if window is None else window
    return all(homology(C, n).is_zero() for n in range(lo, hi + 1))


def homology_table(C: Complex, window=None):
    lo, hi = C.window if window is None else window
    return {n: homology(C, n) for n in range(lo, hi + 1)}


def base_change_complex(C: Complex, ring) -> Complex:
    """Tensor a complex over Z with Q or F_p."""
    from .exactalg import base_change
    mods = {}
    for n, M in C.modules.items():
        R = base_change(M.relations, ring) if M.relations.nrows else None
        mods[n] = ModulePresentation(ring, M.ngens, R)
    diffs = {n: base_change(D, ring) for n, D in C.diffs.items()}
    return Complex(ring, mods, diffs, check=False)


def base_change_map(f: ChainMap, ring, source=None, target=None) -> ChainMap:
    from .exactalg import base_change
    S = source or base_change_complex(f.source, ring)
    T = target or base_change_complex(f.target, ring)
    return ChainMap(S, T, {n: base_change(M, ring) for n, M in f.comps.items()}, check=False)


def lift_through(target_rel: ExactMatrix, D: ExactMatrix, t: ExactMatrix):
    """Solve ``D x = t`` modulo the columns of ``target_rel``; None if impossible."""
    from .exactalg import solve
    ring = D.ring
    if target_rel is not None and target_rel.ncols:
        G = ExactMatrix.hstack(ring, [D, target_rel])
        X = solve(G, t)
        return None if X is None else X.submatrix(range(D.ncols))
    return solve(D, t)


__all__ = [
    "Complex", "ChainMap", "Homotopy", "Cylinder", "direct_sum", "shift", "shift_map", "cone",
    "cylinder", "hom_complex", "hom_map_contra", "hom_map_co", "tensor", "tensor_map",
    "truncate_brutal_le", "dual", "homology", "homology_subquotient", "graded_homology",
    "slice_complex", "slice_map", "induced_map", "is_quasi_iso", "is_acyclic", "homology_table",
    "base_change_complex", "base_change_map", "lift_through",
]
