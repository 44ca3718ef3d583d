"""Command line front end.

Every subcommand prints one JSON document (sorted keys) or a plain table.
Exit codes: 0 success, 2 a mathematical check failed, 1 bad input.
Default budgets come from DERIVATOR_LENGTH (resolution length) and
DERIVATOR_STAGES (number of Koszul stages).
"""
from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys

from . import groupcoh as gc
from . import koszul as kz
from . import suites
from .complexes import Complex, homology
from .errors import DerivatorError
from .exactalg import ExactMatrix, ModulePresentation, parse_ring


class InputError(Exception):
    pass


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}") from None


def default_length():
    return _env_int("DERIVATOR_LENGTH", 4)


def default_stages():
    return _env_int("DERIVATOR_STAGES", 5)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _ring(text):
    try:
        return parse_ring(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load_json(text):
    """A JSON document given inline or as a path to a file."""
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"not JSON and not a file: {exc}") from None


def parse_complex(doc, ring) -> Complex:
    """{"ranks": {"n": r}, "diffs": {"n": [[...]]}} with d(n): C^n -> C^{n+1} as a matrix."""
    try:
        ranks = {int(k): int(v) for k, v in doc["ranks"].items()}
        diffs = {}
        for k, rows in doc.get("diffs", {}).items():
            n = int(k)
            diffs[n] = ExactMatrix.from_dense(ring, [[ring(x) for x in r] for r in rows],
                                              ranks.get(n + 1, 0), ranks.get(n, 0))
        return Complex.free(ring, ranks, diffs)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad complex description: {exc}") from None


_TERM = re.compile(r"^([+-]?\d+)?\*?((?:[a-z]\d*(?:\^\d+)?\*?)*)$")


def parse_poly(text, ring):
    """Polynomials like ``x``, ``x^2*y``, ``3*x*y`` over a graded ring (vars x, y, z, w or x0, x1...)."""
    names = "xyzw"
    total = ring(0)
    for term in text.replace(" ", "").replace("-", "+-").split("+"):
        if not term:
            continue
        m = _TERM.match(term)
        if not m:
            raise InputError(f"cannot parse polynomial term {term!r}")
        coeff = int(m.group(1)) if m.group(1) not in (None, "+", "-") else (-1 if term.startswith("-") else 1)
        val = ring(coeff)
        for var, idx, exp in re.findall(r"([a-z])(\d*)(?:\^(\d+))?", m.group(2)):
            i = int(idx) if idx else names.index(var) if var in names else None
            if i is None or i >= ring.nvars:
                raise InputError(f"unknown variable {var}{idx}")
            val = val * ring.var(i) ** int(exp or 1)
        total = total + val
    return total


def parse_Y(text, ring) -> kz.SpecClosedSpec:
    """``2`` is V(2); ``2,3`` is V(2, 3); ``2;3`` is V(2) union V(3)."""
    gens = []
    for part in text.split(";"):
        entries = [e.strip() for e in part.split(",") if e.strip()]
        if not entries:
            raise InputError(f"empty generator in {text!r}")
        if ring.kind == "POLY":
            vals = tuple(parse_poly(e, ring) for e in entries)
        else:
            try:
                vals = tuple(ring(int(e)) for e in entries)
            except ValueError:
                raise InputError(f"bad integer in {part!r}") from None
        gens.append(kz.Covector(ring, vals))
    try:
        return kz.SpecClosedSpec(gens)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def parse_module_arg(text, ring) -> ModulePresentation:
    if ring.kind == "POLY":
        m = re.fullmatch(r"R(?:\^(\d+))?", text.strip())
        if not m:
            raise InputError("over a polynomial ring the module must be R or R^k")
        return ModulePresentation.free(ring, int(m.group(1) or 1))
    try:
        M = gc.parse_module(text, None)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if M.ring != ring:
        raise InputError(f"module {text!r} is over {M.ring}, not {ring}")
    return M


def parse_representation(G, text, ring):
    t = text.strip()
    if t == "trivial":
        return gc.Representation.trivial(G, ModulePresentation.free(ring, 1))
    if t == "regular":
        return gc.Representation.regular(G, ring)
    if t == "sign":
        if G.order % 2:
            raise InputError("the sign module needs a group of even order with an index-2 subgroup")
        half = [H for H in G.subgroups() if 2 * H.order == G.order]
        if not half:
            raise InputError(f"{G.name} has no subgroup of index 2")
        inside = set(half[0].elements)
        return gc.Representation.character(G, ring, {g: 1 if g in inside else -1 for g in G.elements})
    return gc.Representation.trivial(G, parse_module_arg(t, ring))


def _group(text):
    try:
        return gc.named_group(text)
    except DerivatorError as exc:
        raise InputError(str(exc)) from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_homology(args):
    ring = _ring(args.ring)
    C = parse_complex(_load_json(args.complex), ring)
    table = {str(n): homology(C, n).to_json() for n in range(C.lo, C.hi + 1)}
    return {"command": "homology", "ring": str(ring), "homology": table}, True


def _functor(name):
    for fname, u, kind, objs in suites.der4_functors():
        if fname == name:
            return u, kind
    names = [f[0] for f in suites.der4_functors()]
    raise InputError(f"unknown functor {name!r}; choose from {names}")


def cmd_kan(args):
    from .diagrams import DiagramComplex
    from .randomgen import random_c2_representation, random_complex, random_poset_diagram
    from .resolve import derived_lan, derived_ran
    u, kind = _functor(args.functor)
    ring = _ring(args.ring)
    rng = random.Random(args.seed)
    if kind == "poset":
        F = random_poset_diagram(rng, u.source, ring)
    elif kind == "single":
        F = DiagramComplex(u.source, ring, {u.source.objects[0]: random_complex(rng, ring, -1, 1, 2)}, {})
    else:
        F = random_c2_representation(rng, u.source, ring)
    length = args.length if args.length is not None else default_length()
    K = derived_lan(u, F, length) if args.kind == "lan" else derived_ran(u, F, length)
    lo, hi = K.certified_window
    values = {}
    for j in u.target.objects:
        values[str(j)] = {str(n): homology(K.at(j), n).to_json() for n in range(lo, hi + 1)}
    return {"command": "kan", "kind": args.kind, "functor": args.functor, "ring": str(ring),
            "seed": args.seed, "length": length, "certified_window": [lo, hi], "values": values}, True


SUITES = {
    "der4": lambda seed, trials: suites.der4_suite(seed, trials or 25),
    "der5": lambda seed, trials: suites.der5_suite(seed, trials or 25),
    "stability": lambda seed, trials: suites.stability_suite(seed, trials or 20),
    "cone": lambda seed, trials: suites.cone_suite(seed, trials or 20),
}


def _suite_ok(rep):
    ok = rep["failed"] == 0
    if "all_controls_flagged" in rep:
        ok = ok and rep["all_controls_flagged"]
    return ok


def cmd_check_derivator(args):
    rep = SUITES[args.suite](args.seed, args.trials)
    return rep, _suite_ok(rep)


def cmd_suite(args):
    names = list(SUITES) if args.only is None else [s.strip() for s in args.only.split(",")]
    for n in names:
        if n not in SUITES:
            raise InputError(f"unknown suite {n!r}")
    reports = {n: SUITES[n](args.seed, args.trials) for n in names}
    ok = all(_suite_ok(r) for r in reports.values())
    summary = {n: {"passed": r["passed"], "failed": r["failed"]} for n, r in reports.items()}
    return {"command": "suite", "seed": args.seed, "summary": summary, "reports": reports,
            "all_passed": ok}, ok


def _slices(text):
    m = re.fullmatch(r"(-?\d+):(-?\d+)", text.strip())
    if not m:
        raise InputError("slices must look like LO:HI")
    a, b = int(m.group(1)), int(m.group(2))
    return list(range(min(a, b), max(a, b) + 1))


def cmd_local_cohomology(args):
    ring = _ring(args.ring)
    Y = parse_Y(args.Y, ring)
    M = Complex.concentrated(parse_module_arg(args.module, ring), 0)
    stages = args.stages if args.stages is not None else default_stages()
    slices = _slices(args.slices) if args.slices else None
    if ring.kind == "POLY" and slices is None:
        raise InputError("graded rings need --slices LO:HI")
    S = kz.gamma(Y, M, stages, slices=slices)
    degrees = None if args.degree is None else (args.degree, args.degree)
    return {"command": "local-cohomology", "ring": str(ring), "Y": args.Y, "module": args.module,
            "stages": stages, "local_cohomology": S.to_json(degrees)}, True


def cmd_group_cohomology(args):
    G = _group(args.group)
    ring = _ring(args.ring)
    M = parse_representation(G, args.module, ring)
    table = gc.homology_table if args.homology else gc.cohomology_table
    methods = ["bar", "resolution"] if args.method == "both" else [args.method]
    out = {"command": "group-cohomology", "group": G.name, "order": G.order, "ring": str(ring),
           "module": args.module, "kind": "homology" if args.homology else "cohomology"}
    results = {m: table(G, M, args.max_degree, m) for m in methods}
    out["table"] = {m: [P.describe() for P in res] for m, res in results.items()}
    ok = True
    if len(methods) == 2:
        ok = all(a.is_isomorphic(b) for a, b in zip(results["bar"], results["resolution"]))
        out["routes_agree"] = ok
    return out, ok


def cmd_lhs(args):
    G = _group(args.group)
    ring = _ring(args.ring)
    try:
        H = gc.find_subgroup(G, args.subgroup, normal=True)
    except DerivatorError as exc:
        raise InputError(str(exc)) from None
    M = parse_representation(G, args.module, ring)
    rep = gc.lhs_report(G, H, M, args.pmax, args.pages)
    ok = all(rep["checks"].values()) and rep["E2_matches_direct"] and \
        all(d["agree"] for d in rep["diagonals"])
    rep["command"] = "lhs"
    return rep, ok


def cmd_rectify(args):
    rep = suites.der5_suite(args.seed, args.trials, p=args.p)
    rep["command"] = "rectify"
    return rep, _suite_ok(rep)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def render_table(doc, indent=0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(doc, dict):
        for k in sorted(doc, key=str):
            v = doc[k]
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.append(render_table(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}- [{i}]")
                lines.append(render_table(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(doc))
    return "\n".join(lines)


def _flat_list(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v):
    if isinstance(v, list):
        return ", ".join(_scalar(x) for x in v)
    if isinstance(v, dict):
        return "{}"
    return str(v)


def dump(doc, fmt="json") -> str:
    if fmt == "table":
        return render_table(doc)
    return json.dumps(doc, sort_keys=True, indent=2, default=str)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "table"], default="json")
    p = argparse.ArgumentParser(prog="derivator", description="Exact homological algebra over small categories.")
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)
    sub.add_parser = add_parser

    s = sub.add_parser("homology", help="homology of a free complex given as JSON")
    s.add_argument("--ring", default="Z")
    s.add_argument("--complex", required=True, help="inline JSON or a path")
    s.set_defaults(func=cmd_homology)

    s = sub.add_parser("kan", help="derived Kan extension of a seeded random diagram")
    s.add_argument("--functor", required=True)
    s.add_argument("--kind", choices=["lan", "ran"], default="lan")
    s.add_argument("--ring", default="F2")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--length", type=int)
    s.set_defaults(func=cmd_kan)

    s = sub.add_parser("check-derivator", help="run one randomized axiom suite")
    s.add_argument("--suite", choices=sorted(SUITES), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int)
    s.set_defaults(func=cmd_check_derivator)

    s = sub.add_parser("local-cohomology", help="Gamma_Y of a module as a directed system")
    s.add_argument("--ring", default="Z")
    s.add_argument("--Y", required=True, help="'2' is V(2), '2,3' is V(2,3), '2;3' is V(2) u V(3)")
    s.add_argument("--module", required=True)
    s.add_argument("--stages", type=int)
    s.add_argument("--degree", type=int)
    s.add_argument("--slices", help="graded slices LO:HI (polynomial rings)")
    s.set_defaults(func=cmd_local_cohomology)

    s = sub.add_parser("group-cohomology", help="group cohomology or homology tables")
    s.add_argument("--group", required=True)
    s.add_argument("--ring", default="Z")
    s.add_argument("--module", default="trivial")
    s.add_argument("--max-degree", type=int, default=4)
    s.add_argument("--method", choices=["bar", "resolution", "both"], default="bar")
    s.add_argument("--homology", action="store_true")
    s.set_defaults(func=cmd_group_cohomology)

    s = sub.add_parser("lhs", help="Lyndon-Hochschild-Serre spectral sequence")
    s.add_argument("--group", required=True)
    s.add_argument("--subgroup", required=True, help="a group name or comma separated elements")
    s.add_argument("--ring", default="F2")
    s.add_argument("--module", default="trivial")
    s.add_argument("--pmax", type=int, default=5)
    s.add_argument("--pages", type=int, default=3)
    s.set_defaults(func=cmd_lhs)

    s = sub.add_parser("rectify", help="rectify seeded homotopy-commutative squares")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=1)
    s.add_argument("--p", type=int, default=5)
    s.set_defaults(func=cmd_rectify)

    s = sub.add_parser("suite", help="run all randomized suites")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int)
    s.add_argument("--only", help="comma separated subset of " + ",".join(SUITES))
    s.set_defaults(func=cmd_suite)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        doc, ok = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=err)
        return 1
    except DerivatorError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=err)
        return 1
    print(dump(doc, args.format), file=out)
    return 0 if ok else 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
