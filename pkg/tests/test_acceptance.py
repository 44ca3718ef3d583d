"""Acceptance checks, one test per criterion.

Each criterion is a function returning ``(ok, detail)``.  The test prints a
single PASS/FAIL line for it and then asserts.  Running this file as a script
prints all eleven lines without pytest.
"""
import io

import pytest

from derivator import cli, suites
from derivator.complexes import Complex
from derivator.exactalg import ModulePresentation, parse_ring
from derivator.groupcoh import (
    Representation, cohomology_table, compare_routes, find_subgroup, group_homology, lhs_report,
    named_group, shapiro_check, small_groups,
)
from derivator.koszul import (
    Covector, SpecClosedSpec, cech_top_dimension, check_characterization, check_idempotence,
    local_cohomology,
)

Z, Q = parse_ring("Z"), parse_ring("Q")
SEED = 0


def V(*gens):
    return SpecClosedSpec([Covector(Z, tuple(Z(e) for e in g)) for g in gens])


def module(invariants, free=0):
    return Complex.concentrated(ModulePresentation.from_invariants(Z, list(invariants), free), 0)


def residue_fields():
    Y = V((2,), (3,))
    seen = {}
    ok = True
    for p in (2, 3, 5, 7, 0):
        r = check_characterization(Y, p, stages=5, max_stage=3)
        want_in = p in (2, 3)
        ok = ok and r["pass"] and r["in_Y"] == want_in
        seen[p] = r["result"]
    return ok, "Gamma(kappa(p)): " + ", ".join(f"({p})->{v}" for p, v in seen.items())


def idempotence():
    cases = [(V((2,), (3,)), module([4]), "Z/4"),
             (V((2,), (3,)), module([6]), "Z/6"),
             (V((2,), (3,)), module([2], 1), "Z+Z/2"),
             (V((3,)), module([9]), "Z/9")]
    ok = True
    parts = []
    for Y, M, name in cases:
        r = check_idempotence(Y, M, stages=5)
        compared = [d for d, v in r["degrees"].items() if v["compared"]]
        ok = ok and r["pass"] and "0" in compared
        parts.append(f"{name} (degrees {','.join(compared)})")
    return ok, "GammaGamma = Gamma for " + "; ".join(parts)


def local_cohomology_growth():
    out = local_cohomology(V((2,)), Complex.free(Z, {0: 1}), 1, 6)
    stages = [m.describe() for m in out["stages"]]
    ok = stages == [f"Z/{2 ** n}" for n in range(1, 7)]
    ok = ok and all(out["injective"]) and out["verdict"].kind == "growing"
    R = parse_ring("Q[2]")
    Y = SpecClosedSpec([Covector(R, (R.var(0), R.var(1)))])
    g = local_cohomology(Y, Complex.free(R, {0: 1}, degrees={0: [0]}), 2, 5, slices=(-2, -3, -4))
    dims = {}
    for s, info in g["slices"].items():
        v = info["verdict"]
        dims[s] = v.value.ngens if v.kind == "stabilized" else None
    cech = {s: cech_top_dimension(s, Q) for s in (-2, -3, -4)}
    ok = ok and dims == cech == {-2: 1, -3: 2, -4: 3}
    return ok, f"H1 stages {stages}; H2 slices {dims}, Cech {cech}"


def der4():
    rep = suites.der4_suite(SEED, 25, length=4)
    return rep["failed"] == 0 and rep["trials"] == 25, f"{rep['passed']}/{rep['trials']} Beck-Chevalley"


def der5():
    rep = suites.der5_suite(SEED, 25, p=5)
    return rep["failed"] == 0 and rep["trials"] == 25, f"{rep['passed']}/{rep['trials']} rectified squares"


def stability():
    rep = suites.stability_suite(SEED, 20)
    ok = rep["failed"] == 0 and rep["mismatches"] == 0 and rep["all_controls_flagged"]
    n = len(rep["negative_controls"])
    return ok, (f"{rep['passed']}/{rep['trials']} squares bicartesian, {rep['mismatches']} mismatches, "
                f"{sum(c['flagged'] for c in rep['negative_controls'])}/{n} controls flagged")


def cone_agreement():
    rep = suites.cone_suite(SEED, 20)
    return rep["failed"] == 0 and rep["trials"] == 20, f"{rep['passed']}/{rep['trials']} cones agree"


def group_cohomology_routes():
    triv = ModulePresentation.free(Z, 1)
    c2 = [m.describe() for m in cohomology_table(named_group("C2"), triv, 4)]
    h1 = group_homology(named_group("S3"), triv, 1).describe()
    ok = c2 == ["Z", "0", "Z/2", "0", "Z/2"] and h1 == "Z/2"
    agree = []
    for G in small_groups(8):
        deg = 4 if G.order <= 6 else 3
        r = compare_routes(G, triv, deg)
        ok = ok and r["agree"]
        agree.append(G.name if r["agree"] else f"{G.name}!")
    return ok, f"H^*(C2) = {c2}, H_1(S3) = {h1}; routes agree for {len(agree)} groups"


def shapiro():
    cases = [("C2", "C4", "F2"), ("C2", "S3", "F2"), ("C3", "S3", "F3")]
    ok = True
    for sub, grp, ring in cases:
        G = named_group(grp)
        H = find_subgroup(G, sub)
        M = Representation.trivial(H, ModulePresentation.free(parse_ring(ring), 1))
        ok = ok and shapiro_check(H, G, M, 4)["passed"]
    return ok, "C2<=C4, C2<=S3 over F2 and C3<=S3 over F3 in degrees <= 4"


def lhs():
    F2 = parse_ring("F2")
    G = named_group("C2xC2")
    H = find_subgroup(G, "C2", normal=True)
    r = lhs_report(G, H, Representation.trivial(G, ModulePresentation.free(F2, 1)), pmax=5)
    e2_ones = all(r["E2"][f"{p},{q}"] == "F2" for p in range(4) for q in range(4))
    diag = [(d["n"], d["E_inf_total"], d["tot"]) for d in r["diagonals"]]
    ok = (r["E2_matches_direct"] and e2_ones and r["degenerates_at_E2"] and all(r["checks"].values())
          and all(d["agree"] and d["E_inf_total"] == d["n"] + 1 for d in r["diagonals"])
          and len(r["diagonals"]) == 5)
    G = named_group("C4")
    H = find_subgroup(G, "C2")
    r2 = lhs_report(G, H, Representation.trivial(G, ModulePresentation.free(F2, 1)), pmax=5)
    d2 = [d for d in r2["nonzero_differentials"] if d["r"] == 2]
    ok = (ok and r2["E2_matches_direct"] and bool(d2) and all(r2["checks"].values())
          and all(d["agree"] and d["E_inf_total"] == 1 for d in r2["diagonals"])
          and [d["n"] for d in r2["diagonals"]] == [0, 1, 2, 3, 4])
    return ok, f"Klein diagonals {diag}; C4 has {len(d2)} nonzero d2, first {d2[0]['source']}->{d2[0]['target']}"


DETERMINISM_RUNS = [
    ["check-derivator", "--suite", "der4", "--seed", "3"],
    ["check-derivator", "--suite", "der5", "--seed", "3"],
    ["check-derivator", "--suite", "stability", "--seed", "3"],
    ["check-derivator", "--suite", "cone", "--seed", "3"],
    ["rectify", "--seed", "3", "--trials", "5"],
    ["kan", "--functor", "BC2->BC4", "--seed", "3"],
    ["group-cohomology", "--group", "S3", "--method", "both", "--max-degree", "3"],
    ["lhs", "--group", "C4", "--subgroup", "C2", "--pmax", "4"],
    ["local-cohomology", "--Y", "2;3", "--module", "Z/6", "--stages", "4"],
]


def _cli_bytes(argv):
    out = io.StringIO()
    code = cli.run(argv, out, io.StringIO())
    return code, out.getvalue().encode()


def determinism():
    ok = True
    for argv in DETERMINISM_RUNS:
        a, b = _cli_bytes(argv), _cli_bytes(argv)
        ok = ok and a == b and a[0] == 0
    return ok, f"{len(DETERMINISM_RUNS)} commands byte-identical on rerun"


CRITERIA = [
    (1, "residue fields", residue_fields),
    (2, "idempotence", idempotence),
    (3, "local cohomology growth", local_cohomology_growth),
    (4, "Beck-Chevalley suite", der4),
    (5, "rectification", der5),
    (6, "stability", stability),
    (7, "cone agreement", cone_agreement),
    (8, "group cohomology routes", group_cohomology_routes),
    (9, "Shapiro", shapiro),
    (10, "LHS spectral sequence", lhs),
    (11, "determinism", determinism),
]


def _line(num, name, ok, detail):
    return f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}"


@pytest.mark.parametrize("num,name,check", CRITERIA, ids=[c[1].replace(" ", "_") for c in CRITERIA])
def test_criterion(num, name, check, capsys):
    ok, detail = check()
    with capsys.disabled():
        print("\n" + _line(num, name, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for num, name, check in CRITERIA:
        print(_line(num, name, *check()), flush=True)
