"""Exact linear algebra over Z, Q, F_p and graded polynomial rings.

Matrices are stored sparsely as one ``{column: value}`` dict per row and act
on column vectors.  Over fields the hot paths (rank, kernel, solve) run a
sparse reduced row echelon form; over Z everything goes through a dense
Smith normal form with tracked transforms, arbitrary precision throughout.

Modules are finitely presented: ``A^ngens / rowspace(relations)``.  A
:class:`Subquotient` is a lattice ``L`` modulo a sublattice ``S`` inside some
ambient free module; homology groups, images and kernels of induced maps are
all subquotients so that maps between them stay concrete matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import NotAComplex, UnsupportedRing

# ---------------------------------------------------------------------------
# coefficient rings
# ---------------------------------------------------------------------------


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class CoeffRing:
    kind: str  # "ZZ", "QQ", "GF", "POLY"
    p: int = 0
    base: "CoeffRing | None" = None
    nvars: int = 0

    def __post_init__(self):
        if self.kind == "GF" and not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.kind == "POLY":
            if self.nvars < 1:
                raise ValueError("GradedPoly needs at least one variable")
            if self.base is None or not self.base.is_field:
                raise ValueError("GradedPoly base must be Q or F_p")

    @property
    def is_field(self) -> bool:
        return self.kind in ("QQ", "GF")

    @property
    def modulus(self) -> int:
        return self.p if self.kind == "GF" else 0

    def __call__(self, x):
        """Coerce ``x`` into the ring."""
        k = self.kind
        if k == "ZZ":
            if isinstance(x, Fraction):
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return x.numerator
            return int(x)
        if k == "QQ":
            return Fraction(x)
        if k == "GF":
            if isinstance(x, Fraction):
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        if isinstance(x, Poly):
            return x
        return Poly.constant(self, x)

    def zero(self):
        return Poly.zero(self) if self.kind == "POLY" else self(0)

    def one(self):
        return self(1)

    def inv(self, a):
        if self.kind == "QQ":
            return 1 / Fraction(a)
        if self.kind == "GF":
            return pow(a, -1, self.p)
        if self.kind == "ZZ" and a in (1, -1):
            return a
        raise UnsupportedRing(f"{a} is not invertible in {self}")

    def is_unit(self, a) -> bool:
        if self.kind == "ZZ":
            return a in (1, -1)
        if self.kind == "POLY":
            return a.is_constant() and not a.is_zero()
        return a != 0

    def var(self, i: int) -> "Poly":
        if self.kind != "POLY":
            raise UnsupportedRing("variables exist only in GradedPoly")
        e = [0] * self.nvars
        e[i] = 1
        return Poly(self, {tuple(e): self.base.one()})

    def __str__(self):
        if self.kind == "ZZ":
            return "Z"
        if self.kind == "QQ":
            return "Q"
        if self.kind == "GF":
            return f"F{self.p}"
        return f"{self.base}[x0..x{self.nvars - 1}]"

    def to_json(self):
        if self.kind == "POLY":
            return {"kind": "GradedPoly", "base": self.base.to_json(), "nvars": self.nvars}
        return {"kind": str(self)}


ZZ = CoeffRing("ZZ")
QQ = CoeffRing("QQ")


def GF(p: int) -> CoeffRing:
    return CoeffRing("GF", p)


def GradedPoly(base: CoeffRing, nvars: int) -> CoeffRing:
    return CoeffRing("POLY", base=base, nvars=nvars)


def parse_ring(text: str) -> CoeffRing:
    """Parse ``Z``, ``Q``, ``F5``/``GF5`` or ``F2[2]`` (graded polynomials in 2 vars)."""
    t = text.strip()
    if "[" in t:
        head, rest = t.split("[", 1)
        return GradedPoly(parse_ring(head), int(rest.rstrip("]")))
    if t in ("Z", "ZZ"):
        return ZZ
    if t in ("Q", "QQ"):
        return QQ
    for prefix in ("GF", "F"):
        if t.startswith(prefix) and t[len(prefix):].isdigit():
            return GF(int(t[len(prefix):]))
    raise ValueError(f"unknown ring {text!r}")


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Polynomial over Q or F_p stored as ``{exponent tuple: coefficient}``."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: CoeffRing, terms: dict):
        self.ring = ring
        b = ring.base
        clean = {}
        for e, c in terms.items():
            c = b(c)
            if c != 0:
                clean[tuple(e)] = c
        self.terms = clean

    @classmethod
    def zero(cls, ring):
        return cls(ring, {})

    @classmethod
    def constant(cls, ring, c):
        return cls(ring, {(0,) * ring.nvars: c})

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(sum(e) == 0 for e in self.terms)

    def degree(self):
        """Total degree of a homogeneous polynomial (None for zero)."""
        degs = {sum(e) for e in self.terms}
        if not degs:
            return None
        if len(degs) > 1:
            raise ValueError("polynomial is not homogeneous")
        return degs.pop()

    def is_homogeneous(self):
        return len({sum(e) for e in self.terms}) <= 1

    def _coerce(self, other):
        return other if isinstance(other, Poly) else Poly.constant(self.ring, other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return Poly(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        t = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return Poly(self.ring, t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.constant(self.ring, 1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.terms == other.terms
        return self.terms == self._coerce(other).terms

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple:
    """Exponent vectors of total ``degree`` in lexicographic order (x0 first)."""
    if degree < 0:
        return ()
    out = []

    def rec(prefix, left, k):
        if k == nvars - 1:
            out.append(tuple(prefix + [left]))
            return
        for a in range(left, -1, -1):
            rec(prefix + [a], left - a, k + 1)

    rec([], degree, 0)
    return tuple(out)


# ---------------------------------------------------------------------------
# sparse matrices
# ---------------------------------------------------------------------------


class ExactMatrix:
    """Immutable sparse matrix; ``rows[i]`` maps column index to nonzero entry.

    Graded matrices over GradedPoly carry ``row_degrees`` / ``col_degrees``,
    the degrees of target / source generators; entry (i, j) is homogeneous of
    degree ``col_degrees[j] - row_degrees[i]``.
    """

    __slots__ = ("ring", "nrows", "ncols", "rows", "row_degrees", "col_degrees")

    def __init__(self, ring, nrows, ncols, rows=None, row_degrees=None, col_degrees=None):
        self.ring = ring
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            rows = tuple({} for _ in range(nrows))
        self.rows = tuple(rows)
        self.row_degrees = tuple(row_degrees) if row_degrees is not None else None
        self.col_degrees = tuple(col_degrees) if col_degrees is not None else None

    # construction -------------------------------------------------------

    @classmethod
    def from_dense(cls, ring, data, nrows=None, ncols=None, **kw):
        data = [list(r) for r in data]
        if nrows is None:
            nrows = len(data)
        if ncols is None:
            ncols = len(data[0]) if data else 0
        rows = []
        for r in data:
            if len(r) != ncols:
                raise ValueError("ragged matrix")
            d = {}
            for j, v in enumerate(r):
                v = ring(v)
                if v != 0:
                    d[j] = v
            rows.append(d)
        return cls(ring, nrows, ncols, rows, **kw)

    @classmethod
    def from_entries(cls, ring, nrows, ncols, entries, **kw):
        rows = [{} for _ in range(nrows)]
        mod = ring.modulus
        for (i, j), v in entries.items():
            v = ring(v)
            if mod:
                v %= mod
            if v != 0:
                rows[i][j] = v
        return cls(ring, nrows, ncols, rows, **kw)

    @classmethod
    def zero(cls, ring, nrows, ncols):
        return cls(ring, nrows, ncols)

    @classmethod
    def identity(cls, ring, n):
        one = ring.one()
        return cls(ring, n, n, [{i: one} for i in range(n)])

    @classmethod
    def diagonal(cls, ring, values, nrows=None, ncols=None):
        values = [ring(v) for v in values]
        nrows = len(values) if nrows is None else nrows
        ncols = len(values) if ncols is None else ncols
        return cls(ring, nrows, ncols, [({i: values[i]} if i < len(values) and values[i] != 0 else {})
                                       for i in range(nrows)])

    @classmethod
    def scalar(cls, ring, n, c):
        c = ring(c)
        if c == 0:
            return cls(ring, n, n)
        return cls(ring, n, n, [{i: c} for i in range(n)])

    @classmethod
    def block(cls, ring, blocks, row_sizes, col_sizes):
        """Assemble from ``blocks[(bi, bj)]`` (missing blocks are zero)."""
        roff = [0]
        for s in row_sizes:
            roff.append(roff[-1] + s)
        coff = [0]
        for s in col_sizes:
            coff.append(coff[-1] + s)
        rows = [{} for _ in range(roff[-1])]
        for (bi, bj), M in blocks.items():
            if M is None:
                continue
            if (M.nrows, M.ncols) != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block {(bi, bj)} has shape {M.shape}, expected "
                                 f"{(row_sizes[bi], col_sizes[bj])}")
            r0, c0 = roff[bi], coff[bj]
            for i, row in enumerate(M.rows):
                if row:
                    tgt = rows[r0 + i]
                    for j, v in row.items():
                        tgt[c0 + j] = v
        return cls(ring, roff[-1], coff[-1], rows)

    @classmethod
    def block_diag(cls, ring, mats):
        return cls.block(ring, {(i, i): M for i, M in enumerate(mats)},
                         [M.nrows for M in mats], [M.ncols for M in mats])

    @classmethod
    def hstack(cls, ring, mats, nrows=None):
        if not mats:
            return cls(ring, nrows or 0, 0)
        return cls.block(ring, {(0, i): M for i, M in enumerate(mats)},
                         [mats[0].nrows], [M.ncols for M in mats])

    @classmethod
    def vstack(cls, ring, mats, ncols=None):
        if not mats:
            return cls(ring, 0, ncols or 0)
        return cls.block(ring, {(i, 0): M for i, M in enumerate(mats)},
                         [M.nrows for M in mats], [mats[0].ncols])

    # access ---------------------------------------------------------------

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def is_graded(self):
        return self.row_degrees is not None

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i].get(j, self.ring.zero())

    def to_dense(self):
        z = self.ring.zero()
        return [[row.get(j, z) for j in range(self.ncols)] for row in self.rows]

    def nnz(self):
        return sum(len(r) for r in self.rows)

    def is_zero(self):
        return not any(self.rows)

    def columns(self):
        """List of sparse column dicts."""
        cols = [{} for _ in range(self.ncols)]
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                cols[j][i] = v
        return cols

    def with_degrees(self, row_degrees, col_degrees):
        return ExactMatrix(self.ring, self.nrows, self.ncols, self.rows, row_degrees, col_degrees)

    # arithmetic -------------------------------------------------------------

    def _check_ring(self, other):
        if self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_ring(other)
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        mod = self.ring.modulus
        orows = other.rows
        out = []
        for row in self.rows:
            acc = {}
            for k, a in row.items():
                for j, b in orows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            if mod:
                acc = {j: v % mod for j, v in acc.items() if v % mod}
            else:
                acc = {j: v for j, v in acc.items() if v != 0}
            out.append(acc)
        rd = self.row_degrees if self.is_graded and other.is_graded else None
        cd = other.col_degrees if rd is not None else None
        return ExactMatrix(self.ring, self.nrows, other.ncols, out, rd, cd)

    def _combine(self, other, sign):
        self._check_ring(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        mod = self.ring.modulus
        out = []
        for r1, r2 in zip(self.rows, other.rows):
            acc = dict(r1)
            for j, v in r2.items():
                acc[j] = acc.get(j, 0) + (v if sign > 0 else -v)
            if mod:
                acc = {j: v % mod for j, v in acc.items() if v % mod}
            else:
                acc = {j: v for j, v in acc.items() if v != 0}
            out.append(acc)
        return ExactMatrix(self.ring, self.nrows, self.ncols, out, self.row_degrees, self.col_degrees)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = self.ring(c)
        mod = self.ring.modulus
        out = []
        for row in self.rows:
            if mod:
                out.append({j: v * c % mod for j, v in row.items() if v * c % mod})
            else:
                out.append({j: v * c for j, v in row.items() if v * c != 0})
        return ExactMatrix(self.ring, self.nrows, self.ncols, out, self.row_degrees, self.col_degrees)

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix(self.ring, self.ncols, self.nrows, self.columns(),
                           self.col_degrees, self.row_degrees)

    def submatrix(self, row_idx=None, col_idx=None):
        if row_idx is None:
            row_idx = range(self.nrows)
        row_idx = list(row_idx)
        if col_idx is None:
            rows = [dict(self.rows[i]) for i in row_idx]
            return ExactMatrix(self.ring, len(row_idx), self.ncols, rows)
        col_idx = list(col_idx)
        pos = {}
        for new, old in enumerate(col_idx):
            pos.setdefault(old, []).append(new)
        rows = []
        for i in row_idx:
            d = {}
            for j, v in self.rows[i].items():
                for new in pos.get(j, ()):
                    d[new] = v
            rows.append(d)
        return ExactMatrix(self.ring, len(row_idx), len(col_idx), rows)

    def map_entries(self, ring, f):
        """Apply ``f`` entrywise (used for base change)."""
        mod = ring.modulus
        out = []
        for row in self.rows:
            d = {}
            for j, v in row.items():
                w = ring(f(v))
                if mod:
                    w %= mod
                if w != 0:
                    d[j] = w
            out.append(d)
        return ExactMatrix(ring, self.nrows, self.ncols, out)

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.shape == other.shape and self.ring == other.ring and self.rows == other.rows

    def __hash__(self):
        return hash((self.shape, tuple(frozenset(r.items()) for r in self.rows)))

    def __repr__(self):
        if self.nrows * self.ncols <= 64:
            return f"ExactMatrix({self.ring}, {self.to_dense()})"
        return f"ExactMatrix({self.ring}, {self.nrows}x{self.ncols}, nnz={self.nnz()})"

    def to_json(self):
        return {"rows": self.nrows, "cols": self.ncols,
                "entries": [[i, j, _elt_json(v)] for i, row in enumerate(self.rows)
                            for j, v in sorted(row.items())]}


def _elt_json(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, Poly):
        return repr(v)
    return v


def matrix(ring, data, **kw) -> ExactMatrix:
    return ExactMatrix.from_dense(ring, data, **kw)


def identity(ring, n):
    return ExactMatrix.identity(ring, n)


def zeros(ring, nrows, ncols):
    return ExactMatrix.zero(ring, nrows, ncols)


# ---------------------------------------------------------------------------
# Smith normal form (dense, Euclidean rings and fields)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SnfResult:
    U: ExactMatrix
    D: ExactMatrix
    V: ExactMatrix
    invariant_factors: tuple
    Uinv: ExactMatrix = None
    Vinv: ExactMatrix = None

    @property
    def rank(self):
        return len(self.invariant_factors)


def _snf_dense(ring, A, m, n, want_inverses=True):
    """Return (D, U, Uinv, V, Vinv, r) with U A V = D as dense lists."""
    mod = ring.modulus
    field = ring.is_field
    D = [row[:] for row in A]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Ui = [r[:] for r in U] if want_inverses else None
    Vi = [r[:] for r in V] if want_inverses else None
    if ring.kind == "QQ":
        D = [[Fraction(x) for x in row] for row in D]

    def norm(x):
        return x % mod if mod else x

    def swap_rows(i, j):
        if i == j:
            return
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        if Ui is not None:
            for row in Ui:
                row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        if i == j:
            return
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        if Vi is not None:
            Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        if q == 0:
            return
        Dd, Ds = D[dst], D[src]
        for k in range(n):
            if Ds[k]:
                Dd[k] = norm(Dd[k] + q * Ds[k])
        Ud, Us = U[dst], U[src]
        for k in range(m):
            if Us[k]:
                Ud[k] = norm(Ud[k] + q * Us[k])
        if Ui is not None:
            # inverse: col_src -= q * col_dst
            for row in Ui:
                if row[dst]:
                    row[src] = norm(row[src] - q * row[dst])

    def add_col(dst, src, q):
        # col_dst += q * col_src
        if q == 0:
            return
        for row in D:
            if row[src]:
                row[dst] = norm(row[dst] + q * row[src])
        for row in V:
            if row[src]:
                row[dst] = norm(row[dst] + q * row[src])
        if Vi is not None:
            Vd, Vs = Vi[dst], Vi[src]
            for k in range(n):
                if Vd[k]:
                    Vs[k] = norm(Vs[k] - q * Vd[k])

    def scale_row(i, c, cinv):
        D[i] = [norm(x * c) for x in D[i]]
        U[i] = [norm(x * c) for x in U[i]]
        if Ui is not None:
            for row in Ui:
                row[i] = norm(row[i] * cinv)

    t = 0
    while t < min(m, n):
        # pivot search
        best = None
        if field:
            rc = [sum(1 for x in D[i][t:] if x) for i in range(m)]
            cc = [sum(1 for i in range(t, m) if D[i][j]) for j in range(n)]
            for i in range(t, m):
                Di = D[i]
                for j in range(t, n):
                    if Di[j]:
                        key = rc[i] + cc[j]
                        if best is None or key < best[0]:
                            best = (key, i, j)
        else:
            for i in range(t, m):
                Di = D[i]
                for j in range(t, n):
                    if Di[j]:
                        key = abs(Di[j])
                        if best is None or key < best[0]:
                            best = (key, i, j)
                            if key == 1:
                                break
                if best is not None and best[0] == 1:
                    break
        if best is None:
            break
        _, pi, pj = best
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            clean = True
            for i in range(t + 1, m):
                a = D[i][t]
                if a:
                    piv = D[t][t]
                    q = (a * ring.inv(piv)) if field else a // piv
                    add_row(i, t, norm(-q))
                    if D[i][t]:
                        swap_rows(i, t)
                        clean = False
            for j in range(t + 1, n):
                a = D[t][j]
                if a:
                    piv = D[t][t]
                    q = (a * ring.inv(piv)) if field else a // piv
                    add_col(j, t, norm(-q))
                    if D[t][j]:
                        swap_cols(j, t)
                        clean = False
            if not clean:
                continue
            if not field:
                piv = D[t][t]
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if D[i][j] % piv:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is not None:
                    add_row(t, bad, 1)
                    continue
            break
        piv = D[t][t]
        if field:
            if piv != 1:
                c = ring.inv(piv)
                scale_row(t, c, piv)
        elif piv < 0:
            scale_row(t, -1, -1)
        t += 1
    return D, U, Ui, V, Vi, t


def _dense(ring, A: ExactMatrix):
    z = 0 if ring.kind != "QQ" else Fraction(0)
    return [[row.get(j, z) for j in range(A.ncols)] for row in A.rows]


def snf(A: ExactMatrix) -> SnfResult:
    """Smith normal form ``U A V = D`` over Z or a field."""
    ring = A.ring
    if ring.kind == "POLY":
        raise UnsupportedRing("Smith normal form is not available over GradedPoly")
    D, U, Ui, V, Vi, r = _snf_dense(ring, _dense(ring, A), A.nrows, A.ncols)
    inv = tuple(D[i][i] for i in range(r))
    mk = lambda M, a, b: ExactMatrix.from_dense(ring, M, a, b)  # noqa: E731
    return SnfResult(mk(U, A.nrows, A.nrows), mk(D, A.nrows, A.ncols), mk(V, A.ncols, A.ncols),
                     inv, mk(Ui, A.nrows, A.nrows), mk(Vi, A.ncols, A.ncols))


# ---------------------------------------------------------------------------
# sparse elimination over fields
# ---------------------------------------------------------------------------


def _rref(ring, rows, limit=None):
    """Fully reduced row echelon form of sparse rows.

    Returns ``{pivot_col: row}`` with row[pivot_col] == 1.  Only columns
    ``< limit`` may serve as pivots (``None``: all).  Rows that reduce to
    something supported only on columns ``>= limit`` are returned in the
    second list.
    """
    mod = ring.modulus
    one = ring.one()
    piv = {}
    leftovers = []
    for src in rows:
        if not src:
            continue
        row = dict(src)
        for c in [c for c in row if c in piv]:
            v = row.get(c)
            if not v:
                continue
            for j, w in piv[c].items():
                x = row.get(j, 0) - v * w
                if mod:
                    x %= mod
                if x:
                    row[j] = x
                else:
                    row.pop(j, None)
        cands = [c for c in row if limit is None or c < limit]
        if not cands:
            if row:
                leftovers.append(row)
            continue
        pc = min(cands)
        inv = ring.inv(row[pc])
        if inv != one:
            row = {j: (x * inv % mod if mod else x * inv) for j, x in row.items()}
        for c, prow in piv.items():
            v = prow.get(pc)
            if v:
                for j, w in row.items():
                    x = prow.get(j, 0) - v * w
                    if mod:
                        x %= mod
                    if x:
                        prow[j] = x
                    else:
                        prow.pop(j, None)
        piv[pc] = row
    return piv, leftovers


def _echelon_rank(ring, rows) -> int:
    """Rank by forward elimination only (no back substitution)."""
    mod = ring.modulus
    if mod == 2:
        piv = {}
        for row in rows:
            x = 0
            for j in row:
                x |= 1 << j
            while x:
                lead = x.bit_length() - 1
                p = piv.get(lead)
                if p is None:
                    piv[lead] = x
                    break
                x ^= p
        return len(piv)
    piv = {}
    for src in rows:
        row = dict(src)
        while row:
            lead = min(row)
            p = piv.get(lead)
            if p is None:
                inv = ring.inv(row[lead])
                piv[lead] = {j: (v * inv % mod if mod else v * inv) for j, v in row.items()}
                break
            c = row[lead]
            for j, w in p.items():
                x = row.get(j, 0) - c * w
                if mod:
                    x %= mod
                if x:
                    row[j] = x
                else:
                    row.pop(j, None)
    return len(piv)


def _unit_pivot_reduce(rows, ncols):
    """Eliminate +-1 pivots of an integer matrix.

    Returns ``(k, rest)``: k unit pivots were removed and ``rest`` (dict rows)
    has the remaining invariant factors, so SNF(A) = 1^k + SNF(rest).
    """
    rows = [dict(r) for r in rows if r]
    cols = {}
    for i, r in enumerate(rows):
        for j in r:
            cols.setdefault(j, set()).add(i)
    alive = set(range(len(rows)))
    k = 0
    while True:
        best = None
        for i in alive:
            r = rows[i]
            for j, v in r.items():
                if v == 1 or v == -1:
                    cost = (len(r) - 1) * (len(cols[j]) - 1)
                    if best is None or cost < best[0]:
                        best = (cost, i, j)
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, pi, pj = best
        prow = rows[pi]
        pv = prow[pj]
        for i in list(cols[pj]):
            if i == pi:
                continue
            r = rows[i]
            c = r[pj] * pv  # pv = +-1 so c = r[pj] / pv
            for j, w in prow.items():
                x = r.get(j, 0) - c * w
                if x:
                    if j not in r:
                        cols.setdefault(j, set()).add(i)
                    r[j] = x
                else:
                    if j in r:
                        del r[j]
                        cols[j].discard(i)
        for j in prow:
            cols[j].discard(pi)
        alive.discard(pi)
        k += 1
    rest = [rows[i] for i in sorted(alive) if rows[i]]
    return k, rest


def integer_invariants(A: ExactMatrix) -> tuple:
    """Invariant factors of an integer matrix (sparse unit pivots, then dense SNF)."""
    k, rest = _unit_pivot_reduce(A.rows, A.ncols)
    if not rest:
        return (1,) * k
    used = sorted({j for r in rest for j in r})
    pos = {j: t for t, j in enumerate(used)}
    dense = [[0] * len(used) for _ in rest]
    for i, r in enumerate(rest):
        for j, v in r.items():
            dense[i][pos[j]] = v
    D, _, _, _, _, r = _snf_dense(ZZ, dense, len(rest), len(used), want_inverses=False)
    return (1,) * k + tuple(D[i][i] for i in range(r))


def rank(A: ExactMatrix) -> int:
    if A.ring.is_field:
        rows = A.rows if A.nrows <= A.ncols else A.columns()
        return _echelon_rank(A.ring, rows)
    if A.ring.kind == "POLY":
        raise UnsupportedRing("rank over GradedPoly is computed slice-wise")
    return len(integer_invariants(A))


def kernel(A: ExactMatrix) -> ExactMatrix:
    """Basis of the kernel as columns (a saturated lattice basis over Z)."""
    ring = A.ring
    n = A.ncols
    if ring.is_field:
        piv, _ = _rref(ring, A.rows)
        free = [j for j in range(n) if j not in piv]
        fidx = {f: k for k, f in enumerate(free)}
        rows = [{} for _ in range(n)]
        one = ring.one()
        mod = ring.modulus
        for f, k in fidx.items():
            rows[f][k] = one
        for pc, prow in piv.items():
            for j, v in prow.items():
                if j in fidx:
                    x = -v % mod if mod else -v
                    if x:
                        rows[pc][fidx[j]] = x
        return ExactMatrix(ring, n, len(free), rows)
    if ring.kind == "POLY":
        raise UnsupportedRing("kernels over GradedPoly are computed slice-wise")
    if A.nrows == 0:
        return ExactMatrix.identity(ring, n)
    D, U, Ui, V, Vi, r = _snf_dense(ring, _dense(ring, A), A.nrows, n, want_inverses=False)
    cols = list(range(r, n))
    return ExactMatrix.from_dense(ring, [[V[i][j] for j in cols] for i in range(n)], n, len(cols))


def solve(A: ExactMatrix, B: ExactMatrix):
    """Some X with ``A X = B`` exactly, or None."""
    ring = A.ring
    if A.nrows != B.nrows:
        raise ValueError("row mismatch in solve")
    m, n, k = A.nrows, A.ncols, B.ncols
    if k == 0:
        return ExactMatrix(ring, n, 0)
    if ring.is_field:
        rows = []
        for i in range(m):
            d = dict(A.rows[i])
            for j, v in B.rows[i].items():
                d[n + j] = v
            rows.append(d)
        piv, left = _rref(ring, rows, limit=n)
        if left:
            return None
        out = [{} for _ in range(n)]
        for pc, prow in piv.items():
            for j, v in prow.items():
                if j >= n:
                    out[pc][j - n] = v
        return ExactMatrix(ring, n, k, out)
    if ring.kind == "POLY":
        raise UnsupportedRing("solve over GradedPoly is done slice-wise")
    if B.is_zero():
        return ExactMatrix(ring, n, k)
    D, U, Ui, V, Vi, r = _snf_dense(ring, _dense(ring, A), m, n, want_inverses=False)
    UB = (ExactMatrix.from_dense(ring, U, m, m) @ B).to_dense()
    Y = [[0] * k for _ in range(n)]
    for i in range(m):
        for j in range(k):
            v = UB[i][j]
            if i < r:
                q, rem = divmod(v, D[i][i])
                if rem:
                    return None
                Y[i][j] = q
            elif v:
                return None
    return ExactMatrix.from_dense(ring, V, n, n) @ ExactMatrix.from_dense(ring, Y, n, k)


def image_basis(A: ExactMatrix) -> ExactMatrix:
    """Columns forming a basis of the column span / column lattice of A."""
    ring = A.ring
    if ring.is_field:
        piv, _ = _rref(ring, A.columns())
        # pivots of the transposed echelon form are independent rows of A^T
        cols = sorted(piv)
        rows = [{} for _ in range(A.nrows)]
        for k, c in enumerate(cols):
            for i, v in piv[c].items():
                rows[i][k] = v
        return ExactMatrix(ring, A.nrows, len(cols), rows)
    if A.ncols == 0 or A.is_zero():
        return ExactMatrix(ring, A.nrows, 0)
    D, U, Ui, V, Vi, r = _snf_dense(ring, _dense(ring, A), A.nrows, A.ncols)
    return ExactMatrix.from_dense(ring, [[Ui[i][j] * D[j][j] for j in range(r)]
                                         for i in range(A.nrows)], A.nrows, r)


def contains(L: ExactMatrix, X: ExactMatrix) -> bool:
    """True iff every column of X lies in the column span/lattice of L."""
    if X.ncols == 0 or X.is_zero():
        return True
    return solve(L, X) is not None


def same_span(A: ExactMatrix, B: ExactMatrix) -> bool:
    return contains(A, B) and contains(B, A)


def inverse(A: ExactMatrix) -> ExactMatrix:
    if A.nrows != A.ncols:
        raise ValueError("inverse of a non-square matrix")
    X = solve(A, ExactMatrix.identity(A.ring, A.nrows))
    if X is None or not (X @ A == ExactMatrix.identity(A.ring, A.nrows)):
        raise ValueError("matrix is not invertible over its ring")
    return X


def determinant(A: ExactMatrix):
    """Determinant by Laplace expansion (small matrices, any commutative ring)."""
    n = A.nrows
    ring = A.ring
    if n != A.ncols:
        raise ValueError("determinant of a non-square matrix")
    dense = A.to_dense()

    def det(rows, cols):
        if not rows:
            return ring.one()
        r0 = rows[0]
        total = ring.zero()
        for k, c in enumerate(cols):
            v = dense[r0][c]
            if v == 0:
                continue
            sub = det(rows[1:], cols[:k] + cols[k + 1:])
            term = v * sub
            total = total + term if k % 2 == 0 else total - term
        if ring.modulus:
            total %= ring.modulus
        return total

    return det(list(range(n)), list(range(n)))


# ---------------------------------------------------------------------------
# finitely presented modules
# ---------------------------------------------------------------------------


class ModulePresentation:
    """``ring^ngens / rowspace(relations)``; over GradedPoly, free with degrees."""

    __slots__ = ("ring", "ngens", "relations", "degrees")

    def __init__(self, ring, ngens, relations=None, degrees=None):
        self.ring = ring
        self.ngens = ngens
        if relations is None:
            relations = ExactMatrix(ring, 0, ngens)
        if relations.ncols != ngens:
            raise ValueError("relations.cols must equal ngens")
        self.relations = relations
        if degrees is not None:
            degrees = tuple(degrees)
            if len(degrees) != ngens:
                raise ValueError("one degree per generator")
        self.degrees = degrees

    @classmethod
    def free(cls, ring, n, degrees=None):
        if ring.kind == "POLY" and degrees is None:
            degrees = (0,) * n
        return cls(ring, n, None, degrees)

    @classmethod
    def cyclic(cls, ring, order):
        """``ring / (order)``; order 0 is the free module of rank one."""
        order = ring(order)
        if order == 0:
            return cls.free(ring, 1)
        return cls(ring, 1, ExactMatrix.from_dense(ring, [[order]]))

    @classmethod
    def from_invariants(cls, ring, torsion, free_rank):
        n = len(torsion) + free_rank
        rel = ExactMatrix(ring, len(torsion), n, [{i: ring(t)} for i, t in enumerate(torsion)])
        return cls(ring, n, rel)

    @property
    def is_free(self):
        return self.relations.is_zero()

    @property
    def relation_lattice(self) -> ExactMatrix:
        """Relations as columns of an ``ngens x r`` matrix."""
        return self.relations.T

    def invariants(self):
        """(torsion invariant factors > 1, free rank); over fields torsion is empty."""
        if self.ring.kind == "POLY":
            raise UnsupportedRing("invariants over GradedPoly are computed slice-wise")
        R = self.relations
        if self.ring.is_field:
            return ((), self.ngens - rank(R))
        if R.nrows == 0 or R.is_zero():
            return ((), self.ngens)
        inv = integer_invariants(R)
        return tuple(d for d in inv if d != 1), self.ngens - len(inv)

    def normalize(self) -> "ModulePresentation":
        tors, free = self.invariants()
        return ModulePresentation.from_invariants(self.ring, tors, free)

    def is_zero(self):
        tors, free = self.invariants()
        return not tors and free == 0

    def order(self):
        """Cardinality over Z (None if infinite); dimension over a field."""
        tors, free = self.invariants()
        if self.ring.is_field:
            return free
        if free:
            return None
        out = 1
        for t in tors:
            out *= t
        return out

    def is_isomorphic(self, other) -> bool:
        return self.ring == other.ring and self.invariants() == other.invariants()

    def __eq__(self, other):
        if not isinstance(other, ModulePresentation):
            return NotImplemented
        return (self.ring == other.ring and self.ngens == other.ngens
                and self.relations == other.relations and self.degrees == other.degrees)

    def __hash__(self):
        return hash((self.ring, self.ngens, self.relations))

    def reduce(self):
        """Minimal presentation with projection/section matrices.

        Returns ``(N, q, s)`` with q: old gens -> new gens and s the other way;
        q s = id and s q = id modulo the old relations.
        """
        ring = self.ring
        n = self.ngens
        R = self.relations
        if R.nrows == 0 or R.is_zero():
            I = ExactMatrix.identity(ring, n)
            return ModulePresentation(ring, n, None, self.degrees), I, I
        if ring.is_field:
            piv, _ = _rref(ring, R.rows)
            keep = [j for j in range(n) if j not in piv]
            kidx = {j: k for k, j in enumerate(keep)}
            mod = ring.modulus
            qrows = [{} for _ in keep]
            for j, k in kidx.items():
                qrows[k][j] = ring.one()
            for pc, prow in piv.items():
                for j, v in prow.items():
                    if j in kidx:
                        x = -v % mod if mod else -v
                        if x:
                            qrows[kidx[j]][pc] = x
            q = ExactMatrix(ring, len(keep), n, qrows)
            s = ExactMatrix(ring, n, len(keep), [({kidx[i]: ring.one()} if i in kidx else {})
                                                  for i in range(n)])
            return ModulePresentation.free(ring, len(keep)), q, s
        if ring.kind == "POLY":
            raise UnsupportedRing("GradedPoly modules are kept free")
        RT = R.T
        D, U, Ui, V, Vi, r = _snf_dense(ring, _dense(ring, RT), n, RT.ncols)
        keep = [i for i in range(n) if i >= r or D[i][i] != 1]
        tors = [D[i][i] for i in keep if i < r]
        q = ExactMatrix.from_dense(ring, [U[i] for i in keep], len(keep), n)
        s = ExactMatrix.from_dense(ring, [[Ui[a][i] for i in keep] for a in range(n)], n, len(keep))
        N = ModulePresentation(ring, len(keep),
                               ExactMatrix(ring, len(tors), len(keep),
                                           [{k: t} for k, t in enumerate(tors)]))
        return N, q, s

    def describe(self) -> str:
        tors, free = self.invariants()
        return describe_invariants(self.ring, tors, free)

    def to_json(self):
        tors, free = self.invariants()
        return {"ring": str(self.ring), "torsion": list(tors), "free_rank": free,
                "text": describe_invariants(self.ring, tors, free)}

    def __repr__(self):
        return f"ModulePresentation({self.describe()})"


def describe_invariants(ring, tors, free) -> str:
    base = str(ring)
    parts = [f"{base}/{t}" for t in tors]
    if free == 1:
        parts.append(base)
    elif free > 1:
        parts.append(f"{base}^{free}")
    return " + ".join(parts) if parts else "0"


def map_is_zero(M: ExactMatrix, target: ModulePresentation) -> bool:
    """Does the generator-level matrix M vanish modulo the target relations?"""
    if M.is_zero():
        return True
    if target.is_free:
        return False
    return contains(target.relation_lattice, M)


# ---------------------------------------------------------------------------
# subquotients and maps between them
# ---------------------------------------------------------------------------


class Subquotient:
    """``L / S`` inside ``ring^ambient``; L given by a basis, S by generators in L."""

    __slots__ = ("ring", "ambient", "L", "S", "_pres")

    def __init__(self, ring, ambient, L, S):
        self.ring = ring
        self.ambient = ambient
        self.L = L
        self.S = S if S is not None else ExactMatrix(ring, ambient, 0)
        self._pres = None

    def _reduction(self):
        if self._pres is None:
            R = solve(self.L, self.S)
            if R is None:
                raise ValueError("S is not contained in L")
            pres = ModulePresentation(self.ring, self.L.ncols, R.T)
            self._pres = (pres,) + pres.reduce()
        return self._pres

    def presentation(self) -> ModulePresentation:
        """Canonical (normalized) presentation."""
        return self._reduction()[1].normalize()

    def reduced(self) -> ModulePresentation:
        """Minimal presentation whose generators are given by :meth:`lift`."""
        return self._reduction()[1]

    def coords(self, X: ExactMatrix) -> ExactMatrix:
        """Coordinates of ambient vectors (columns of X, lying in L) on the reduced generators."""
        C = solve(self.L, X)
        if C is None:
            raise ValueError("vectors do not lie in L")
        return self._reduction()[2] @ C

    def lift(self) -> ExactMatrix:
        """Ambient representatives of the reduced generators."""
        return self.L @ self._reduction()[3]

    def invariants(self):
        return self.reduced().invariants()

    def is_zero(self):
        return self.reduced().is_zero()

    def size(self):
        """Dimension over fields, order over Z (None if infinite)."""
        return self.reduced().order()

    def describe(self):
        return self.reduced().describe()

    def __repr__(self):
        return f"Subquotient({self.describe()})"


def sub_map_matrix(A: Subquotient, B: Subquotient, T: ExactMatrix) -> ExactMatrix:
    """Matrix of the map induced by ambient T on reduced generators of A, B."""
    return B.coords(T @ A.lift())


def sub_map_is_iso(A: Subquotient, B: Subquotient, T: ExactMatrix) -> bool:
    M = sub_map_matrix(A, B, T)
    RA = A.reduced()
    RB = B.reduced()
    return _pres_map_is_iso(RA, RB, M)


def _pres_map_is_iso(RA, RB, M) -> bool:
    ring = RA.ring
    if RA.ring.is_field:
        return M.nrows == M.ncols and rank(M) == M.nrows
    G = ExactMatrix.hstack(ring, [M, RB.relation_lattice])
    # surjective: G spans everything
    if not contains(G, ExactMatrix.identity(ring, RB.ngens)):
        return False
    K = kernel(G)
    Kproj = K.submatrix(range(RA.ngens))
    return contains(RA.relation_lattice, Kproj) if RA.ngens else True


def sub_image(A: Subquotient, B: Subquotient, T: ExactMatrix) -> Subquotient:
    """Image of A under T, as a subquotient of B's ambient with B's S."""
    G = ExactMatrix.hstack(B.ring, [T @ A.L, B.S])
    return Subquotient(B.ring, B.ambient, image_basis(G), B.S)


def sub_kernel(A: Subquotient, B: Subquotient, T: ExactMatrix) -> Subquotient:
    """Kernel of the induced map A -> B, as a subquotient of A's ambient."""
    ring = A.ring
    Y = solve(B.L, T @ A.L)
    if Y is None:
        raise ValueError("T does not map L_A into L_B")
    RB = solve(B.L, B.S)
    G = ExactMatrix.hstack(ring, [Y, RB])
    K = kernel(G).submatrix(range(A.L.ncols))
    Lk = image_basis(ExactMatrix.hstack(ring, [A.L @ K, A.S]))
    return Subquotient(ring, A.ambient, Lk, A.S)


def same_subquotient(X: Subquotient, Y: Subquotient) -> bool:
    return same_span(X.L, Y.L) and same_span(X.S, Y.S)


# ---------------------------------------------------------------------------
# homology of composable matrices
# ---------------------------------------------------------------------------


def cycles_subquotient(d_out: ExactMatrix, d_in: ExactMatrix, src_rel=None, tgt_rel=None) -> Subquotient:
    """ker(d_out)/im(d_in) at generator level with optional relation lattices.

    ``src_rel``: relations of the middle module (columns); ``tgt_rel``:
    relations of the module d_out maps into.
    """
    ring = d_out.ring
    n = d_out.ncols
    if tgt_rel is not None and tgt_rel.ncols:
        G = ExactMatrix.hstack(ring, [d_out, tgt_rel])
        Z = image_basis(kernel(G).submatrix(range(n)))
    else:
        Z = kernel(d_out)
    parts = [d_in]
    if src_rel is not None and src_rel.ncols:
        parts.append(src_rel)
    B = ExactMatrix.hstack(ring, parts, nrows=n)
    if src_rel is not None and src_rel.ncols:
        Z = image_basis(ExactMatrix.hstack(ring, [Z, src_rel]))
    return Subquotient(ring, n, Z, B)


def homology_at(d_out: ExactMatrix, d_in: ExactMatrix) -> ModulePresentation:
    """Normalized presentation of ker(d_out)/im(d_in) for free modules."""
    if d_out.ncols != d_in.nrows:
        raise ValueError("incompatible shapes")
    prod = d_out @ d_in
    if not prod.is_zero():
        raise NotAComplex("d_out . d_in != 0")
    ring = d_out.ring
    n = d_out.ncols
    if ring.is_field:
        return ModulePresentation.free(ring, n - rank(d_out) - rank(d_in))
    if ring.kind == "POLY":
        raise UnsupportedRing("homology over GradedPoly is computed slice-wise")
    # ker(d_out) is saturated, so the torsion of H is the torsion of coker(d_in)
    inv = integer_invariants(d_in)
    tors = tuple(d for d in inv if d != 1)
    return ModulePresentation.from_invariants(ring, tors, n - rank(d_out) - len(inv))


# ---------------------------------------------------------------------------
# graded slices
# ---------------------------------------------------------------------------


def graded_slice(A: ExactMatrix, degree: int) -> ExactMatrix:
    """Degree-``degree`` component of a graded map of free modules, over the base field.

    Source basis: for each source generator j (in order) the monomials of
    degree ``degree - col_degrees[j]`` in lex order; target likewise.
    """
    ring = A.ring
    if ring.kind != "POLY" or not A.is_graded:
        raise UnsupportedRing("graded_slice needs a graded matrix over GradedPoly")
    nv = ring.nvars
    base = ring.base

    def basis(degs):
        offs, idx, tot = [], [], 0
        for g in degs:
            mons = monomials(nv, degree - g)
            offs.append(tot)
            idx.append({m: k for k, m in enumerate(mons)})
            tot += len(mons)
        return offs, idx, tot

    soff, sidx, sdim = basis(A.col_degrees)
    toff, tidx, tdim = basis(A.row_degrees)
    entries = {}
    mod = base.modulus
    for i, row in enumerate(A.rows):
        for j, poly in row.items():
            for m, c0 in sidx[j].items():
                col = soff[j] + c0
                for e, c in poly.terms.items():
                    tm = tuple(a + b for a, b in zip(e, m))
                    r = tidx[i].get(tm)
                    if r is None:
                        raise ValueError("matrix entry is not homogeneous of the right degree")
                    key = (toff[i] + r, col)
                    v = entries.get(key, 0) + c
                    entries[key] = v % mod if mod else v
    return ExactMatrix.from_entries(base, tdim, sdim, {k: v for k, v in entries.items() if v})


def slice_dimension(degrees, nvars, degree) -> int:
    return sum(len(monomials(nvars, degree - g)) for g in degrees)


def is_graded_consistent(A: ExactMatrix) -> bool:
    if not A.is_graded:
        return False
    for i, row in enumerate(A.rows):
        for j, p in row.items():
            if not p.is_homogeneous():
                return False
            if p.degree() != A.col_degrees[j] - A.row_degrees[i]:
                return False
    return True


def base_change(A: ExactMatrix, ring: CoeffRing) -> ExactMatrix:
    """Image of an integer matrix in Q or F_p (or the identity)."""
    if A.ring == ring:
        return A
    if A.ring != ZZ:
        raise UnsupportedRing(f"no base change {A.ring} -> {ring}")
    return A.map_entries(ring, lambda v: v)


__all__ = [
    "CoeffRing", "ZZ", "QQ", "GF", "GradedPoly", "parse_ring", "Poly", "monomials",
    "ExactMatrix", "matrix", "identity", "zeros", "SnfResult", "snf", "rank", "kernel",
    "solve", "image_basis", "contains", "same_span", "inverse", "determinant",
    "ModulePresentation", "describe_invariants", "map_is_zero", "Subquotient",
    "sub_map_matrix", "sub_map_is_iso", "sub_image", "sub_kernel", "same_subquotient",
    "cycles_subquotient", "homology_at", "graded_slice", "slice_dimension",
    "is_graded_consistent", "base_change", "integer_invariants",
]
