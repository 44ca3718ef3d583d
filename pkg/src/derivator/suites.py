"""Randomized verification suites: Beck-Chevalley, rectification, bicartesian squares, cones.

Every suite is driven by one ``random.Random(seed)``; each trial records the
seed and trial index so that a failing case can be replayed, and reports are
plain JSON-serializable dicts.
"""
from __future__ import annotations

import random

from .complexes import ChainMap, Complex, cone, direct_sum, homology, is_quasi_iso
from .diagrams import DiagramComplex
from .exactalg import GF, ZZ, ExactMatrix, ModulePresentation, image_basis, kernel, solve
from .randomgen import (
    random_c2_representation, random_chain_map, random_complex, random_homotopy,
    random_poset_diagram,
)
from .resolve import (
    beck_chevalley_check, derivator_cone, derived_lan, derived_ran, is_cartesian, is_cocartesian,
    lower_corner_inclusion, rectify_square, square_shape, upper_corner_inclusion,
)
from .smallcat import BG, CatFunctor, builtin, inclusion, terminal_functor


def _report(name, seed, results, extra=None):
    failed = [r for r in results if not r["pass"]]
    out = {
        "suite": name,
        "seed": seed,
        "trials": len(results),
        "passed": len(results) - len(failed),
        "failed": len(failed),
        "results": results,
        "counterexamples": [{"seed": seed, "trial": r["trial"], "case": r.get("case")} for r in failed],
    }
    if extra:
        out.update(extra)
    return out


def _cyclic(n, subset=None):
    els = list(range(n)) if subset is None else list(subset)
    return BG(els, {(a, b): (a + b) % n for a in els for b in els})


def der4_functors():
    """The fixed functor suite: (name, functor, source shape kind, objects j to test)."""
    square = square_shape()
    upper = upper_corner_inclusion()
    lower = lower_corner_inclusion()
    e, two = builtin("e"), builtin("two")
    e_to_two = CatFunctor(e, two, {"*": "0"}, {"id": two.identity("0")}, name="e->2")
    c2 = _cyclic(2)
    c2_in_c4 = _cyclic(4, [0, 2])
    c4 = _cyclic(4)
    bi = CatFunctor(c2_in_c4, c4, {"*": "*"}, {g: g for g in c2_in_c4.morphisms}, name="Bi")
    return [
        ("upper_corner->square", upper, "poset", list(square.objects)),
        ("lower_corner->square", lower, "poset", list(square.objects)),
        ("e->2", e_to_two, "single", list(two.objects)),
        ("BC2->e", terminal_functor(c2), "c2", ["*"]),
        ("BC2->BC4", bi, "c2", ["*"]),
    ]


def der4_suite(seed=0, trials=25, length=4):
    """Beck-Chevalley on the fixed functor suite with random F_2/F_3 diagrams."""
    rng = random.Random(seed)
    funcs = der4_functors()
    results = []
    for t in range(trials):
        name, u, kind, objs = funcs[t % len(funcs)]
        ring = GF(rng.choice([2, 3]))
        if kind == "poset":
            F = random_poset_diagram(rng, u.source, ring)
        elif kind == "single":
            C = random_complex(rng, ring, -1, 1, 2)
            F = DiagramComplex(u.source, ring, {u.source.objects[0]: C}, {})
        else:
            F = random_c2_representation(rng, u.source, ring)
        verdicts = {}
        for j in objs:
            verdicts[str(j)] = bool(beck_chevalley_check(u, j, F, length, dual_too=True))
        results.append({"trial": t, "functor": name, "ring": str(ring), "checks": verdicts,
                        "pass": all(verdicts.values()), "case": {"functor": name, "ring": str(ring)}})
    return _report("der4", seed, results, {"length": length})


def random_htpy_square(rng, ring):
    """A square F -> G, F' -> G' commuting up to a random homotopy s.

    F' = F + E with gamma1 the inclusion and phi' = (gamma2 phi - ds - sd, psi).
    """
    F = random_complex(rng, ring, -1, 1, 2)
    G = random_complex(rng, ring, -1, 1, 2)
    Gp = random_complex(rng, ring, -1, 1, 2)
    E = random_complex(rng, ring, -1, 1, 2)
    phi = random_chain_map(rng, F, G)
    gamma2 = random_chain_map(rng, G, Gp)
    s = random_homotopy(rng, F, Gp)
    psi = random_chain_map(rng, E, Gp)
    Fp = direct_sum(F, E)
    lo, hi = min(F.lo, E.lo, Gp.lo) - 1, max(F.hi, E.hi, Gp.hi) + 1
    zero = lambda r, c: ExactMatrix(ring, r, c)  # noqa: E731
    g1 = ChainMap(F, Fp, {n: ExactMatrix.vstack(ring, [ExactMatrix.identity(ring, F.ngens(n)),
                                                       zero(E.ngens(n), F.ngens(n))], ncols=F.ngens(n))
                          for n in range(lo, hi + 1)})
    top = phi.then(gamma2)
    comps = {}
    for n in range(lo, hi + 1):
        sn = s.get(n, zero(Gp.ngens(n - 1), F.ngens(n)))
        sn1 = s.get(n + 1, zero(Gp.ngens(n), F.ngens(n + 1)))
        first = top.at(n) - Gp.d(n - 1) @ sn - sn1 @ F.d(n)
        comps[n] = ExactMatrix.hstack(ring, [first, psi.at(n)], nrows=Gp.ngens(n))
    phip = ChainMap(Fp, Gp, comps)
    return g1, gamma2, s, phi, phip


def der5_suite(seed=0, trials=25, p=5):
    rng = random.Random(seed)
    ring = GF(p)
    results = []
    for t in range(trials):
        g1, g2, s, phi, phip = random_htpy_square(rng, ring)
        r = rectify_square(g1, g2, s, phi, phip)
        checks = r.checks()
        results.append({"trial": t, "checks": checks, "pass": all(checks.values()),
                        "case": {"ring": str(ring)}})
    return _report("der5", seed, results)


# ---------------------------------------------------------------------------
# bicartesian squares
# ---------------------------------------------------------------------------


def _upper_span(rng, ring):
    return random_poset_diagram(rng, builtin("upper_corner"), ring, -1, 1, 2)


def _lower_cospan(rng, ring):
    return random_poset_diagram(rng, builtin("lower_corner"), ring, -1, 1, 2)


def pullback_square(cospan: DiagramComplex) -> DiagramComplex:
    """Homotopy pullback of F_10 -> F_11 <- F_01 by a path-object replacement.

    F_10 is enlarged by the acyclic complex cone(id_{F_11})[-1], which makes
    F_10 + F_01 -> F_11 surjective; the ordinary pullback is then a kernel.
    """
    ring = cospan.ring
    sh = cospan.shape
    F10, F01, F11 = cospan.at("10"), cospan.at("01"), cospan.at("11")
    b10 = cospan.along(sh.hom("10", "11")[0])
    b01 = cospan.along(sh.hom("01", "11")[0])
    lo = min(F10.lo, F01.lo, F11.lo) - 1
    hi = max(F10.hi, F01.hi, F11.hi) + 1
    # path object: P^n = F10^n + F11^n + F11^{n-1}, d = [[d,0,0],[0,d,0],[0,-1,-d]]
    sizes = {n: [F10.ngens(n), F11.ngens(n), F11.ngens(n - 1)] for n in range(lo - 1, hi + 2)}
    Pmods = {n: ModulePresentation.free(ring, sum(sizes[n])) for n in range(lo, hi + 1)}
    Pd = {}
    for n in range(lo, hi):
        Pd[n] = ExactMatrix.block(ring, {(0, 0): F10.d(n), (1, 1): F11.d(n),
                                         (2, 1): -ExactMatrix.identity(ring, F11.ngens(n)),
                                         (2, 2): -F11.d(n - 1)}, sizes[n + 1], sizes[n])
    P = Complex(ring, Pmods, Pd)
    bP = ChainMap(P, F11, {n: ExactMatrix.block(ring, {(0, 0): b10.at(n),
                                                      (0, 1): ExactMatrix.identity(ring, F11.ngens(n))},
                                                [F11.ngens(n)], sizes[n]) for n in range(lo, hi + 1)})
    incl = ChainMap(F10, P, {n: ExactMatrix.block(ring, {(0, 0): ExactMatrix.identity(ring, F10.ngens(n))},
                                                  sizes[n], [F10.ngens(n)]) for n in range(lo, hi + 1)})
    S = direct_sum(P, F01)
    diff = {n: ExactMatrix.hstack(ring, [bP.at(n), -b01.at(n)], nrows=F11.ngens(n))
            for n in range(lo, hi + 1)}
    K = {n: kernel(diff[n]) for n in range(lo, hi + 1)}
    mods = {n: ModulePresentation.free(ring, K[n].ncols) for n in range(lo, hi + 1)}
    ds = {}
    for n in range(lo, hi):
        X = solve(K[n + 1], S.d(n) @ K[n])
        ds[n] = X
    F00 = Complex(ring, mods, ds)
    pP = {n: K[n].submatrix(range(P.ngens(n))) for n in range(lo, hi + 1)}
    p01 = {n: K[n].submatrix(range(P.ngens(n), S.ngens(n))) for n in range(lo, hi + 1)}
    to_P = ChainMap(F00, P, pP)
    to01 = ChainMap(F00, F01, p01)
    square = square_shape()
    vals = {"00": F00, "10": P, "01": F01, "11": F11}
    m = lambda a, b: square.hom(a, b)[0]  # noqa: E731
    maps = {m("00", "10"): to_P, m("00", "01"): to01, m("10", "11"): bP, m("01", "11"): b01,
            m("00", "11"): to01.then(b01)}
    del incl
    return DiagramComplex(square, ring, vals, maps)


def perturb_square(S: DiagramComplex) -> DiagramComplex:
    """Replace F_11 by F_11 + A/2 (or + k for a field) in degree 0, maps into it zero."""
    ring = S.ring
    extra = ModulePresentation.free(ring, 1) if ring.is_field else ModulePresentation.cyclic(ring, 2)
    E = Complex(ring, {0: extra}, {})
    F11 = S.at("11")
    new = direct_sum(F11, E)
    lo, hi = min(F11.lo, 0), max(F11.hi, 0)
    inc = ChainMap(F11, new, {n: ExactMatrix.vstack(ring, [ExactMatrix.identity(ring, F11.ngens(n)),
                                                          ExactMatrix(ring, E.ngens(n), F11.ngens(n))],
                                                   ncols=F11.ngens(n)) for n in range(lo, hi + 1)},
                   check=False)
    vals = dict(S.values)
    vals["11"] = new
    sh = S.shape
    maps = {}
    for mm, f in S.maps.items():
        maps[mm] = f.then(inc) if sh.tgt(mm) == "11" else f
    return DiagramComplex(sh, ring, vals, maps)


def stability_suite(seed=0, trials=20, length=4, rings=("F2", "Z"), controls=3):
    """Cocartesian and cartesian verdicts agree on constructed squares."""
    rng = random.Random(seed)
    results = []
    flagged = []
    t = 0
    for rname in rings:
        ring = GF(2) if rname == "F2" else ZZ
        for k in range(trials):
            span = _upper_span(rng, ring)
            S = derived_lan(upper_corner_inclusion(), span, length)
            cc, ca = is_cocartesian(S), is_cartesian(S)
            results.append({"trial": t, "ring": rname, "construction": "pushout", "cocartesian": cc,
                            "cartesian": ca, "pass": cc and ca, "case": {"ring": rname, "index": k}})
            t += 1
            if k < controls:
                B = perturb_square(S)
                bc, ba = is_cocartesian(B), is_cartesian(B)
                flagged.append({"ring": rname, "construction": "pushout", "cocartesian": bc,
                                "cartesian": ba, "flagged": (not bc) and (not ba)})
        for k in range(trials):
            cospan = _lower_cospan(rng, ring)
            if ring.is_field:
                S = derived_ran(lower_corner_inclusion(), cospan, length)
                how = "derived_ran"
            else:
                S = pullback_square(cospan)
                how = "path_object"
            cc, ca = is_cocartesian(S), is_cartesian(S)
            results.append({"trial": t, "ring": rname, "construction": how, "cocartesian": cc,
                            "cartesian": ca, "pass": cc and ca, "case": {"ring": rname, "index": k}})
            t += 1
            if k < controls:
                B = perturb_square(S)
                bc, ba = is_cocartesian(B), is_cartesian(B)
                flagged.append({"ring": rname, "construction": how, "cocartesian": bc,
                                "cartesian": ba, "flagged": (not bc) and (not ba)})
    mismatches = sum(1 for r in results if r["cocartesian"] != r["cartesian"])
    return _report("stability", seed, results,
                   {"length": length, "mismatches": mismatches, "negative_controls": flagged,
                    "all_controls_flagged": all(c["flagged"] for c in flagged)})


def cone_suite(seed=0, trials=20):
    """derivator_cone(phi) and cone(phi) have the same homology in the certified window."""
    rng = random.Random(seed)
    results = []
    for t in range(trials):
        X = random_complex(rng, ZZ, -1, 1, 2)
        Y = random_complex(rng, ZZ, -1, 1, 2)
        phi = random_chain_map(rng, X, Y)
        lo, hi = min(X.lo, Y.lo), max(X.hi, Y.hi)
        length = hi - lo + 3
        D = derivator_cone(phi, length)
        C = cone(phi)[0]
        wlo, whi = D.certified_window
        degrees = {}
        ok = True
        for n in range(max(wlo, lo - 1), whi + 1):
            a, b = homology(D, n), homology(C, n)
            same = a == b
            ok = ok and same
            degrees[str(n)] = {"derivator": a.describe(), "classical": b.describe(), "equal": same}
        results.append({"trial": t, "window": [wlo, whi], "degrees": degrees, "pass": ok,
                        "case": {"ring": "Z"}})
    return _report("cone", seed, results)


__all__ = [
    "der4_functors", "der4_suite", "random_htpy_square", "der5_suite", "pullback_square",
    "perturb_square", "stability_suite", "cone_suite",
]
