"""Seeded random complexes, chain maps and diagrams for the randomized suites.

All generators take a ``random.Random`` instance so that a (seed, trial) pair
replays the same input.
"""
from __future__ import annotations

import random

from .complexes import ChainMap, Complex
from .diagrams import DiagramComplex
from .exactalg import ExactMatrix, kernel
from .smallcat import FinCat


def _entry(rng: random.Random, ring, spread=2):
    if ring.modulus:
        return rng.randrange(ring.modulus)
    return rng.randint(-spread, spread)


def random_matrix(rng, ring, nrows, ncols, density=0.6, spread=2) -> ExactMatrix:
    rows = []
    for _ in range(nrows):
        row = {}
        for c in range(ncols):
            if rng.random() < density:
                v = ring(_entry(rng, ring, spread))
                if v != 0:
                    row[c] = v
        rows.append(row)
    return ExactMatrix(ring, nrows, ncols, rows)


def random_complex(rng, ring, lo=-1, hi=1, max_rank=3) -> Complex:
    """Free complex with d_n built from the left kernel of d_{n-1}, so d^2 = 0."""
    ranks = {n: rng.randint(0, max_rank) for n in range(lo, hi + 1)}
    diffs = {}
    prev = None
    for n in range(lo, hi):
        a, b = ranks[n], ranks[n + 1]
        if prev is None:
            N = ExactMatrix.identity(ring, a)
        else:
            N = kernel(prev.T).T
        if N.nrows == 0 or b == 0:
            D = ExactMatrix(ring, b, a)
        else:
            keep = [r for r in range(N.nrows) if rng.random() < 0.8]
            if not keep:
                D = ExactMatrix(ring, b, a)
            else:
                D = random_matrix(rng, ring, b, len(keep)) @ N.submatrix(keep)
        diffs[n] = D
        prev = D
    return Complex.free(ring, ranks, diffs)


def chain_map_basis(F: Complex, G: Complex):
    """Basis of all chain maps F -> G (as lists of component dicts)."""
    ring = F.ring
    lo, hi = min(F.lo, G.lo), max(F.hi, G.hi)
    # unknowns: entries of f_n for each n, row-major
    offs, tot = {}, 0
    for n in range(lo, hi + 1):
        offs[n] = tot
        tot += G.ngens(n) * F.ngens(n)
    eqs = []
    for n in range(lo - 1, hi + 1):
        # d_G f_n - f_{n+1} d_F = 0 as a (G^{n+1} x F^n) system
        dG, dF = G.d(n), F.d(n)
        for r in range(G.ngens(n + 1)):
            for c in range(F.ngens(n)):
                row = {}
                for k, v in dG.rows[r].items():  # (dG)_{r,k} f_n[k, c]
                    key = offs[n] + k * F.ngens(n) + c
                    row[key] = row.get(key, 0) + v
                for k in range(F.ngens(n + 1)):  # f_{n+1}[r, k] (dF)_{k, c}
                    v = dF.rows[k].get(c)
                    if v:
                        key = offs[n + 1] + r * F.ngens(n + 1) + k
                        row[key] = row.get(key, 0) - v
                row = {k: ring(v) for k, v in row.items() if ring(v) != 0}
                if row:
                    eqs.append(row)
    K = kernel(ExactMatrix(ring, len(eqs), tot, eqs))
    out = []
    for col in range(K.ncols):
        comps = {}
        for n in range(lo, hi + 1):
            g, f = G.ngens(n), F.ngens(n)
            rows = [{} for _ in range(g)]
            for r in range(g):
                for c in range(f):
                    v = K.rows[offs[n] + r * f + c].get(col)
                    if v:
                        rows[r][c] = v
            comps[n] = ExactMatrix(ring, g, f, rows)
        out.append(comps)
    return out


def random_chain_map(rng, F: Complex, G: Complex, spread=2) -> ChainMap:
    ring = F.ring
    basis = chain_map_basis(F, G)
    lo, hi = min(F.lo, G.lo), max(F.hi, G.hi)
    comps = {n: ExactMatrix(ring, G.ngens(n), F.ngens(n)) for n in range(lo, hi + 1)}
    for b in basis:
        c = ring(_entry(rng, ring, spread))
        if c == 0:
            continue
        for n in comps:
            comps[n] = comps[n] + b[n].scale(c)
    return ChainMap(F, G, comps)


def random_homotopy(rng, F: Complex, G: Complex) -> dict:
    ring = F.ring
    return {n: random_matrix(rng, ring, G.ngens(n - 1), F.ngens(n))
            for n in range(F.lo, F.hi + 1) if G.ngens(n - 1) and F.ngens(n)}


def random_poset_diagram(rng, shape: FinCat, ring, lo=-1, hi=1, max_rank=2) -> DiagramComplex:
    """Random diagram over a span/cospan-like poset with no nontrivial composites."""
    vals = {o: random_complex(rng, ring, lo, hi, max_rank) for o in shape.objects}
    maps = {}
    for m in shape.non_identity_morphisms():
        s, t = shape.src(m), shape.tgt(m)
        maps[m] = random_chain_map(rng, vals[s], vals[t])
    return DiagramComplex(shape, ring, vals, maps)


def random_involution(rng, ring, n) -> ExactMatrix:
    """A random matrix T with T^2 = 1."""
    from .exactalg import inverse
    while True:
        P = random_matrix(rng, ring, n, n, density=0.8)
        try:
            Pinv = inverse(P)
        except Exception:  # noqa: BLE001
            continue
        break
    i = 0
    diag = [{} for _ in range(n)]
    while i < n:
        if ring.modulus == 2 and i + 1 < n and rng.random() < 0.5:
            diag[i][i] = ring(1)
            diag[i][i + 1] = ring(1)
            diag[i + 1][i + 1] = ring(1)
            i += 2
            continue
        diag[i][i] = ring(rng.choice([1, -1]))
        i += 1
    J = ExactMatrix(ring, n, n, diag)
    return P @ J @ Pinv


def random_c2_representation(rng, shape: FinCat, ring, max_rank=3) -> DiagramComplex:
    """Random complex of C_2-representations in degrees -1, 0 over ``shape`` = BC_2."""
    gen = [m for m in shape.morphisms if not shape.is_identity(m)][0]
    r0, r1 = rng.randint(1, max_rank), rng.randint(0, max_rank)
    T0 = random_involution(rng, ring, r0)
    T1 = random_involution(rng, ring, r1) if r1 else ExactMatrix(ring, 0, 0)
    X = random_matrix(rng, ring, r0, r1)
    D = X + T0 @ X @ T1  # equivariant since T1 is its own inverse
    C = Complex.free(ring, {-1: r1, 0: r0}, {-1: D})
    act = ChainMap(C, C, {-1: T1, 0: T0})
    return DiagramComplex(shape, ring, {shape.objects[0]: C}, {gen: act})


__all__ = [
    "random_matrix", "random_complex", "chain_map_basis", "random_chain_map", "random_homotopy",
    "random_poset_diagram", "random_involution", "random_c2_representation",
]
