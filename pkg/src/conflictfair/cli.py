"""``conflictfair`` command line.

Exit codes: 0 success, 1 IO or usage error, 2 no applicable solver or a
negative verdict (known non-existence, failed property, certified-none),
3 inconclusive oracle run.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import checkers, hardness, instances, oracle
from .core import (
    AdditiveValuation,
    Allocation,
    ConflictGraph,
    Instance,
    Monotonicity,
    UniformValuation,
)
from .errors import (
    BudgetExhausted,
    CatalogError,
    ConflictFairError,
    InfeasibleAllocation,
    MalformedAllocation,
    ParseError,
    PreconditionError,
    UnsupportedValuation,
    ValidationError,
    WrongSolver,
)
from .interval import solve_interval
from .path_ef11 import solve_path_ef11
from .tree_equitable import solve_tree_uniform
from .two_agents import solve_additive, solve_bipartite, solve_two_agents

EXIT_OK, EXIT_USAGE, EXIT_NEGATIVE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

ALGORITHMS = ("auto", "two-agent", "bipartite", "interval", "additive", "path-ef11", "tree-uniform")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; usage errors here are exit 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Known non-existence results
# ---------------------------------------------------------------------------

# nonmono_path2 equals prop3_clique(2); it is listed first so the
# non-monotone explanation wins
_COUNTEREXAMPLES = (
    ("nonmono_path2", None,
     "a good worth +1 and a chore worth -1 joined by a conflict edge: no maximal EF1 allocation exists"),
    ("thm6_k33", None,
     "three agents with monotone valuations on K3,3 plus a pendant item: "
     "no maximal EF1 allocation exists"),
    ("thm7_k3n", range(4, 10),
     "n >= 4 agents with additive valuations on K3,n-1: no maximal EF1 allocation exists"),
    ("prop3_clique", range(2, 10),
     "mixed goods and chores on a clique: no maximal EF1 allocation exists"),
)


def known_nonexistence(instance: Instance) -> str | None:
    """Citation for a catalogued counterexample equal to ``instance``, if any."""
    for name, params, text in _COUNTEREXAMPLES:
        for p in params or (None,):
            ref = instances.builtin(name, p)
            if (ref.num_agents == instance.num_agents and ref.graph == instance.graph
                    and ref.valuations == instance.valuations):
                return f"{name if p is None else f'{name}({p})'}: {text}"
    return None


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

MAXIMAL_EF1 = ("ef1", "maximal")


def _identical_additive(instance: Instance) -> bool:
    v = instance.valuations
    return isinstance(v, UniformValuation) or (isinstance(v, AdditiveValuation) and v.identical)


def _one_signed(instance: Instance) -> bool:
    return instance.valuations.monotone is not Monotonicity.NONE


def _single_agent(instance, spec):
    return Allocation([instance.graph.greedy_extend(())])


def _path_properties(instance):
    return ("ef11", "complete") + (("ef1",) if _one_signed(instance) else ())


SOLVERS = {
    "two-agent": (lambda inst, spec: solve_two_agents(inst), lambda inst: MAXIMAL_EF1),
    "bipartite": (lambda inst, spec: solve_bipartite(inst), lambda inst: MAXIMAL_EF1),
    "interval": (solve_interval, lambda inst: MAXIMAL_EF1),
    "additive": (lambda inst, spec: solve_additive(inst), lambda inst: MAXIMAL_EF1),
    "path-ef11": (lambda inst, spec: solve_path_ef11(inst), _path_properties),
    "tree-uniform": (lambda inst, spec: solve_tree_uniform(inst), lambda inst: MAXIMAL_EF1),
    "single-agent": (_single_agent, lambda inst: MAXIMAL_EF1),
}


def choose_algorithm(instance: Instance, spec) -> str:
    """Most specific applicable solver, or raise :class:`WrongSolver` explaining why none applies."""
    n = instance.num_agents
    g = instance.graph
    cite = known_nonexistence(instance)
    if cite:
        raise WrongSolver(f"known non-existence, {cite}")
    if n == 1:
        return "single-agent"
    if n == 2:
        if instance.valuations.monotone is Monotonicity.NONE:
            raise UnsupportedValuation(
                "two agents with non-monotone valuations: a maximal EF1 allocation need not exist "
                "(a good worth +1 and a chore worth -1 on a 2-path has none)")
        if spec is not None:
            return "interval"
        if g.two_coloring() is not None:
            return "bipartite"
        if instance.valuations.is_additive():
            return "additive"
        return "two-agent"
    if g.path_order() is not None and _identical_additive(instance):
        return "path-ef11"
    if isinstance(instance.valuations, UniformValuation) and g.is_tree():
        return "tree-uniform"
    raise WrongSolver(
        f"no solver covers {n} agents with this graph and valuation; known results: two agents "
        "(monotone), identical additive paths, uniform trees. Try `enumerate` on small instances")


def _gate(instance: Instance, alloc: Allocation, props) -> dict:
    res = checkers.check_properties(instance, alloc, props)
    bad = [p for p, r in res.items() if not r]
    if bad:
        raise AssertionError(f"solver output fails {bad}; refusing to emit it")
    return {p: True for p in res}


def cmd_solve(args) -> int:
    inst = instances.load_instance(args.instance)
    spec = instances.read_intervals(args.intervals, perturb=args.perturb) if args.intervals else None
    algo = args.algorithm
    if algo == "auto":
        algo = choose_algorithm(inst, spec)
    else:
        cite = known_nonexistence(inst)
        if cite:
            raise WrongSolver(f"known non-existence, {cite}")
    fn, props = SOLVERS[algo]
    alloc = fn(inst, spec)
    verified = _gate(inst, alloc, props(inst))
    report = {"instance": args.instance, "algorithm": algo,
              "allocation": instances.allocation_to_json(alloc),
              "pretty": alloc.pretty(inst), "properties": verified}
    if args.out:
        instances.write_allocation(alloc, args.out)
    if args.quiet:
        print(json.dumps(report))
    else:
        print(f"{algo}: {alloc.pretty(inst)}")
        print("verified: " + ", ".join(verified))
    return EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

_BUNDLE_RE = re.compile(r"\{([^{}]*)\}")


def parse_allocation_text(text: str, instance: Instance) -> Allocation:
    """Parse ``({o2,o4},{o1,o3})`` using the instance's item labels."""
    index = {lab: i for i, lab in enumerate(instance.item_labels())}
    bundles = []
    for body in _BUNDLE_RE.findall(text):
        items = []
        for tok in filter(None, (t.strip() for t in body.split(","))):
            if tok not in index:
                raise ValidationError(f"unknown item label {tok!r}")
            items.append(index[tok])
        bundles.append(items)
    if not bundles:
        raise ValidationError(f"cannot parse allocation {text!r}; expected e.g. ({{o1,o3}},{{o2}})")
    return Allocation(bundles)


def load_allocation(ref: str, instance: Instance) -> Allocation:
    if Path(ref).exists():
        return instances.read_allocation(ref)
    if ref.endswith(".json"):
        raise ValidationError(f"allocation file {ref} not found")
    return parse_allocation_text(ref, instance)


def _witness_json(w, instance):
    if isinstance(w, Allocation):
        return w.pretty(instance)
    if isinstance(w, tuple):
        return list(w)
    return w


def cmd_check(args) -> int:
    inst = instances.load_instance(args.instance)
    alloc = load_allocation(args.allocation, inst)
    props = [p for p in args.properties.split(",") if p.strip()]
    if not props:
        raise ValidationError("no properties requested")
    res = checkers.check_properties(inst, alloc, props, max_nodes=args.budget)
    report = {p: {"holds": r.holds, "witness": _witness_json(r.witness, inst)} for p, r in res.items()}
    if args.quiet:
        print(json.dumps(report))
    else:
        for p, r in report.items():
            line = f"{p}: {'yes' if r['holds'] else 'no'}"
            if not r["holds"]:
                line += f" (witness {r['witness']})"
            print(line)
    return EXIT_OK if all(r.holds for r in res.values()) else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# enumerate
# ---------------------------------------------------------------------------


def cmd_enumerate(args) -> int:
    inst = instances.load_instance(args.instance)
    req = [r for r in args.require.split(",") if r.strip()]
    budget = oracle.EnumerationBudget(args.budget)
    sym = args.symmetric and inst.valuations.identical
    if args.count:
        total = oracle.count_allocations(inst, req, budget)
        report = {"requirements": req, "count": total}
        print(json.dumps(report) if args.quiet else f"{total} allocations satisfy {','.join(req)}")
        return EXIT_OK
    res = oracle.exists_allocation(inst, req, budget, symmetric=sym)
    report = {"requirements": list(res.requirements), "nodes": res.nodes, "examined": res.examined,
              "verdict": "certified-none" if res.certified_none else "witness",
              "witness": None if res.certified_none else instances.allocation_to_json(res.witness)}
    if args.quiet:
        print(json.dumps(report))
    elif res.certified_none:
        print(f"certified-none: no allocation is {','.join(res.requirements)} "
              f"({res.examined} candidates, {res.nodes} search nodes)")
    else:
        print(f"witness: {res.witness.pretty(inst)}")
    return EXIT_NEGATIVE if res.certified_none else EXIT_OK


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------

_SHORT = {"prop3": "prop3_clique", "thm6": "thm6_k33", "thm7": "thm7_k3n"}


def _counterexample(ref: str) -> Instance:
    name, n = instances.parse_catalog_name(ref)
    return instances.builtin(_SHORT.get(name, name), n)


def parse_is_graph(ref: str) -> ConflictGraph:
    """A JSON file ``{"num_vertices": k, "edges": [[u, w], ...]}`` or inline ``k:u-w,u-w``."""
    p = Path(ref)
    if p.exists():
        doc = json.loads(p.read_text(encoding="utf-8"))
        if not isinstance(doc, dict) or "num_vertices" not in doc:
            raise ParseError("IS graph needs num_vertices and edges", str(p))
        return ConflictGraph(int(doc["num_vertices"]), doc.get("edges", []))
    m = re.fullmatch(r"\s*(\d+)\s*(?::\s*(.*))?", ref)
    if not m:
        raise ValidationError(f"cannot read IS graph {ref!r}")
    edges = []
    for tok in filter(None, (t.strip() for t in (m.group(2) or "").split(","))):
        u, _, w = tok.partition("-")
        if not (u.strip().isdigit() and w.strip().isdigit()):
            raise ValidationError(f"bad edge {tok!r}; use u-w")
        edges.append((int(u), int(w)))
    return ConflictGraph(int(m.group(1)), edges)


def cmd_reduce(args) -> int:
    base = _counterexample(args.counterexample)
    h = parse_is_graph(args.is_graph)
    budget = oracle.EnumerationBudget(args.budget)
    inst, art = hardness.build_reduction(base, h, args.t, budget)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instances.write_instance(inst, out / "instance.json")
    (out / "artifacts.json").write_text(art.dumps() + "\n", encoding="utf-8")
    report = {"items": inst.num_items, "gamma": str(art.gamma), "lambda": str(art.lam),
              "edge_counts": {k: len(v) for k, v in art.edges.items()}, "out": str(out)}
    code = EXIT_OK
    if args.verify:
        expected = hardness.has_independent_set(h, args.t)
        agree = hardness.verify_reduction(inst, expected, budget)
        report.update({"independent_set": expected, "agrees": agree})
        code = EXIT_OK if agree else EXIT_NEGATIVE
    if args.quiet:
        print(json.dumps(report))
    else:
        print(f"wrote {out / 'instance.json'} ({inst.num_items} items, lambda={art.lam})")
        if args.verify:
            print(f"IS of size {args.t}: {'yes' if report['independent_set'] else 'no'}; "
                  f"oracle {'agrees' if report['agrees'] else 'DISAGREES'}")
    return code


# ---------------------------------------------------------------------------
# examples / gen
# ---------------------------------------------------------------------------


def cmd_examples(args) -> int:
    if args.action == "list":
        for name in instances.CATALOG:
            lo = instances.PARAMETRIC.get(name)
            print(f"{name}(n>={lo})" if lo else name)
        return EXIT_OK
    if not args.name:
        raise UsageError("examples emit needs a catalog name")
    doc = instances.instance_to_json(instances.builtin(args.name))
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {k: getattr(args, k) for k in ("m", "s", "t", "p") if getattr(args, k) is not None}
    vparams = {}
    if args.lo is not None:
        vparams["lo"] = args.lo
    if args.hi is not None:
        vparams["hi"] = args.hi
    if args.non_identical:
        vparams["identical"] = False
    if args.knee is not None:
        vparams["knee"] = args.knee
    inst, spec = instances.generate_with_spec(args.family, params, args.seed, args.valuation,
                                              vparams, args.agents)
    instances.write_instance(inst, args.out)
    written = [args.out]
    if spec is not None:
        ipath = args.intervals_out or str(Path(args.out).with_suffix("")) + ".intervals.json"
        instances.write_intervals(spec, ipath)
        written.append(ipath)
    if not args.quiet:
        print("wrote " + ", ".join(written))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="conflictfair", description="Fair allocation under conflict constraints.")
    p.add_argument("--quiet", action="store_true", help="print machine-readable JSON only")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="compute a checker-verified allocation")
    s.add_argument("--instance", required=True, help="instance JSON or catalog name")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="auto")
    s.add_argument("--intervals", help="interval representation JSON")
    s.add_argument("--perturb", action="store_true", help="break endpoint ties by rank")
    s.add_argument("--out", help="write the allocation JSON here")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="evaluate fairness and efficiency properties")
    c.add_argument("--instance", required=True)
    c.add_argument("--allocation", required=True, help="allocation JSON or text like ({o1,o3},{o2})")
    c.add_argument("--properties", required=True, help="comma list of " + ",".join(checkers.PROPERTY_NAMES))
    c.add_argument("--budget", type=int, default=checkers.DEFAULT_PO_NODES, help="node cap for Pareto checks")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("enumerate", help="brute-force existence search")
    e.add_argument("--instance", required=True)
    e.add_argument("--require", required=True, help="comma list of " + ",".join(oracle.REQUIREMENTS))
    e.add_argument("--budget", type=int, default=10**8, help="search node cap")
    e.add_argument("--symmetric", action="store_true", help="skip agent permutations (identical valuations)")
    e.add_argument("--count", action="store_true", help="count satisfying allocations instead")
    e.set_defaults(func=cmd_enumerate)

    r = sub.add_parser("reduce", help="build the Independent Set reduction instance")
    r.add_argument("--counterexample", required=True, help="prop3:n, thm6 or thm7:n")
    r.add_argument("--is-graph", required=True, help="IS graph JSON or inline k:u-w,...")
    r.add_argument("--t", type=int, required=True)
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--verify", action="store_true")
    r.add_argument("--budget", type=int, default=10**8)
    r.set_defaults(func=cmd_reduce)

    x = sub.add_parser("examples", help="list or emit catalog instances")
    x.add_argument("action", choices=("list", "emit"))
    x.add_argument("name", nargs="?")
    x.add_argument("--out")
    x.set_defaults(func=cmd_examples)

    g = sub.add_parser("gen", help="generate a seeded random instance")
    g.add_argument("--family", required=True, choices=instances.GRAPH_FAMILIES)
    g.add_argument("--m", type=int)
    g.add_argument("--s", type=int)
    g.add_argument("--t", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--valuation", default="additive-integer", choices=instances.VALUATION_FAMILIES)
    g.add_argument("--lo", type=int)
    g.add_argument("--hi", type=int)
    g.add_argument("--knee", type=int)
    g.add_argument("--non-identical", action="store_true")
    g.add_argument("--agents", type=int, default=2)
    g.add_argument("--out", required=True)
    g.add_argument("--intervals-out")
    g.set_defaults(func=cmd_gen)
    return p


def _hoist_quiet(argv):
    # allow --quiet after the subcommand too
    argv = list(argv)
    if "--quiet" in argv[1:]:
        argv = ["--quiet"] + [a for a in argv if a != "--quiet"]
    return argv


def main(argv=None) -> int:
    argv = _hoist_quiet(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except BudgetExhausted as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (WrongSolver, UnsupportedValuation, PreconditionError) as exc:
        print(f"no solver: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (UsageError, ParseError, ValidationError, CatalogError, MalformedAllocation,
            InfeasibleAllocation, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConflictFairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
