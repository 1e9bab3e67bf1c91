"""Built-in instances, seeded random generators, interval specs and JSON IO."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .core import (
    AdditiveValuation,
    Allocation,
    ConflictGraph,
    Instance,
    Monotonicity,
    RuleValuation,
    TableValuation,
    UniformValuation,
    ValuationProfile,
    as_fraction,
)
from .errors import CatalogError, ParseError, ValidationError

# ---------------------------------------------------------------------------
# Seeded randomness
# ---------------------------------------------------------------------------


class SeededRng:
    """Stable pseudo-random stream for generated corpora.

    Everything is derived from ``random.Random.random()`` (Mersenne Twister
    seeded from a string), whose output is fixed across Python releases;
    the higher level helpers of :mod:`random` are avoided on purpose since
    their algorithms have changed between versions.
    """

    NAME = "mt19937-v1"

    def __init__(self, seed: int, stream: str = ""):
        import random

        self._r = random.Random(f"{self.NAME}:{stream}:{int(seed)}")

    def random(self) -> float:
        return self._r.random()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``lo..hi`` inclusive."""
        if hi < lo:
            raise ValidationError(f"empty range {lo}..{hi}")
        return lo + min(int(self._r.random() * (hi - lo + 1)), hi - lo)

    def bernoulli(self, p) -> bool:
        return self._r.random() < float(p)

    def shuffle(self, seq: list) -> list:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randint(0, i)
            seq[i], seq[j] = seq[j], seq[i]
        return seq

    def sample(self, population: Sequence, k: int) -> list:
        pool = list(population)
        self.shuffle(pool)
        return pool[:k]


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntervalSpec:
    """Half-open intervals ``(l, r]`` plus optional per-item values.

    Endpoints must be pairwise distinct.  With ``perturb=True`` ties are
    instead broken symbolically: all endpoints are replaced by their rank in
    the order (coordinate, right-before-left, item index), which keeps every
    intersection and every finish-time comparison of the original input.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...]
    values: tuple[Fraction, ...] | None = None

    def __init__(self, intervals, values=None, perturb: bool = False):
        ivs = []
        for k, (lo, hi) in enumerate(intervals):
            lo, hi = as_fraction(lo), as_fraction(hi)
            if not lo < hi:
                raise ValidationError(f"interval {k} has l >= r ({lo}, {hi}]")
            ivs.append((lo, hi))
        if values is not None:
            values = tuple(as_fraction(x) for x in values)
            if len(values) != len(ivs):
                raise ValidationError("one value per interval required")
        points = [p for iv in ivs for p in iv]
        if len(set(points)) != len(points):
            if not perturb:
                dup = sorted(p for p in set(points) if points.count(p) > 1)[0]
                raise ValidationError(f"duplicate interval endpoint {dup}")
            ivs = _rank_endpoints(ivs)
        object.__setattr__(self, "intervals", tuple(ivs))
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.intervals)

    def finish_order(self) -> list[int]:
        return sorted(range(len(self.intervals)), key=lambda i: self.intervals[i][1])

    def instance(self, num_agents: int = 2) -> Instance:
        """Identical additive instance over the interval graph."""
        if self.values is None:
            raise ValidationError("interval spec carries no values")
        return Instance(interval_to_graph(self),
                        AdditiveValuation.identical_values(self.values, num_agents))


def _rank_endpoints(ivs):
    keyed = []
    for k, (lo, hi) in enumerate(ivs):
        keyed.append((lo, 1, k, 0))
        keyed.append((hi, 0, k, 1))
    keyed.sort()
    out = [[None, None] for _ in ivs]
    for rank, (_, _, k, side) in enumerate(keyed):
        out[k][side] = Fraction(rank)
    return [tuple(x) for x in out]


def intervals_intersect(a, b) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def interval_to_graph(spec: IntervalSpec) -> ConflictGraph:
    ivs = spec.intervals
    edges = [(i, j) for i in range(len(ivs)) for j in range(i + 1, len(ivs))
             if intervals_intersect(ivs[i], ivs[j])]
    return ConflictGraph(len(ivs), edges)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

CATALOG = (
    "ex1_path4",
    "ex2_cycle6",
    "ex3_path5_chores",
    "ex4_path4",
    "rr8_path",
    "ec5_path",
    "thm6_k33",
    "thm7_k3n",
    "prop3_clique",
    "nonmono_path2",
)
PARAMETRIC = {"thm7_k3n": 4, "prop3_clique": 2}  # name -> minimum n

_PATH_VALUES = {
    "ex1_path4": (1, 1, 1, 4),
    "ex3_path5_chores": (-2, -10, -1, -10, -2),
    "ex4_path4": (1, 3, 1, 3),
    "rr8_path": (10, 3, 8, 9, 7, 2, 1, 0),
    "ec5_path": (4, 0, 2, 3, 2),
    "nonmono_path2": (1, -1),
}

_NAME_RE = re.compile(r"^\s*([a-z0-9_]+)\s*(?:[(:]\s*(-?\d+)\s*\)?)?\s*$")


def parse_catalog_name(spec: str) -> tuple[str, int | None]:
    """Split ``"thm7_k3n(5)"`` or ``"thm7_k3n:5"`` into name and parameter."""
    m = _NAME_RE.match(spec)
    if not m:
        raise CatalogError(f"cannot parse catalog name {spec!r}")
    return m.group(1), int(m.group(2)) if m.group(2) is not None else None


def builtin(name: str, n: int | None = None) -> Instance:
    """Exact instance from the catalog; parametric names take ``n``."""
    base, arg = parse_catalog_name(name)
    if arg is not None:
        if n is not None and n != arg:
            raise CatalogError(f"conflicting parameters {arg} and {n} for {base}")
        n = arg
    if base not in CATALOG:
        raise CatalogError(f"unknown instance {base!r}; known: {', '.join(CATALOG)}")
    if base in PARAMETRIC:
        lo = PARAMETRIC[base]
        if n is None:
            raise CatalogError(f"{base} needs a parameter n >= {lo}, e.g. {base}({lo})")
        if n < lo:
            raise CatalogError(f"{base} needs n >= {lo}, got {n}")
    elif n is not None:
        raise CatalogError(f"{base} takes no parameter")

    if base in _PATH_VALUES:
        vals = _PATH_VALUES[base]
        return Instance(ConflictGraph.path(len(vals)), AdditiveValuation.identical_values(vals, 2))
    if base == "ex2_cycle6":
        return Instance(ConflictGraph.cycle(6), AdditiveValuation.identical_values((1, 2, 1, 2, 1, 2), 2))
    if base == "thm6_k33":
        edges = [(u, w) for u in range(3) for w in range(3, 6)] + [(0, 6), (3, 6)]
        val = RuleValuation("thm6", 3, 7, monotone=Monotonicity.NONDECREASING)
        return Instance(ConflictGraph(7, edges), val)
    if base == "thm7_k3n":
        m = n + 2
        g = ConflictGraph.complete_bipartite(range(3), range(3, m), m)
        return Instance(g, AdditiveValuation.identical_values([2] * 3 + [3] * (n - 1), n))
    # prop3_clique
    return Instance(ConflictGraph.complete(n), AdditiveValuation.identical_values([1] * (n - 1) + [-1], n))


# ---------------------------------------------------------------------------
# Random generators
# ---------------------------------------------------------------------------

GRAPH_FAMILIES = ("path", "cycle", "tree", "bipartite", "gnp", "interval")
VALUATION_FAMILIES = ("additive-integer", "uniform", "monotone-concave")


def _need(params: dict, key: str, family: str):
    if key not in params:
        raise ValidationError(f"family {family!r} needs parameter {key!r}")
    return params[key]


def _random_graph(family: str, params: dict, rng: SeededRng) -> tuple[ConflictGraph, IntervalSpec | None]:
    if family == "path":
        return ConflictGraph.path(int(_need(params, "m", family))), None
    if family == "cycle":
        return ConflictGraph.cycle(int(_need(params, "m", family))), None
    if family == "tree":
        m = int(_need(params, "m", family))
        if m < 1:
            raise ValidationError("a tree needs at least one vertex")
        perm = rng.shuffle(list(range(m)))
        edges = [(perm[i], perm[rng.randint(0, i - 1)]) for i in range(1, m)]
        return ConflictGraph(m, edges), None
    if family == "bipartite":
        s, t = int(_need(params, "s", family)), int(_need(params, "t", family))
        p = params.get("p", 0.5)
        edges = [(u, s + w) for u in range(s) for w in range(t) if rng.bernoulli(p)]
        return ConflictGraph(s + t, edges), None
    if family == "gnp":
        m = int(_need(params, "m", family))
        p = params.get("p", 0.5)
        edges = [(u, w) for u in range(m) for w in range(u + 1, m) if rng.bernoulli(p)]
        return ConflictGraph(m, edges), None
    if family == "interval":
        spec = random_intervals(int(_need(params, "m", family)), rng)
        return interval_to_graph(spec), spec
    raise ValidationError(f"unknown graph family {family!r}; known: {', '.join(GRAPH_FAMILIES)}")


def random_intervals(m: int, rng: SeededRng, span: int | None = None) -> IntervalSpec:
    """``m`` intervals with distinct integer endpoints, items in finish order."""
    if m < 0:
        raise ValidationError("m must be non-negative")
    span = span or 4 * m + 2
    if span < 2 * m:
        raise ValidationError("span too small for distinct endpoints")
    pts = rng.sample(range(span), 2 * m)
    ivs = sorted(((min(a, b), max(a, b)) for a, b in zip(pts[::2], pts[1::2])), key=lambda iv: iv[1])
    return IntervalSpec(ivs)


def _random_valuation(kind: str, params: dict, m: int, n: int, rng: SeededRng) -> ValuationProfile:
    if kind == "uniform":
        return UniformValuation(n, m)
    if kind == "additive-integer":
        lo, hi = int(params.get("lo", 0)), int(params.get("hi", 9))
        if params.get("identical", True):
            return AdditiveValuation.identical_values([rng.randint(lo, hi) for _ in range(m)], n)
        return AdditiveValuation(tuple(tuple(rng.randint(lo, hi) for _ in range(m)) for _ in range(n)))
    if kind == "monotone-concave":
        w_hi = int(params.get("weight_hi", 5))
        weights = params.get("weights") or [rng.randint(0, w_hi) for _ in range(m)]
        if len(weights) != m or any(int(w) < 0 for w in weights):
            raise ValidationError("monotone-concave needs m non-negative integer weights")
        knee = int(params.get("knee", rng.randint(0, max(1, w_hi * m // 3))))
        return RuleValuation("concave", n, m, params=(knee, *map(int, weights)),
                             monotone=Monotonicity.NONDECREASING)
    raise ValidationError(f"unknown valuation family {kind!r}; known: {', '.join(VALUATION_FAMILIES)}")


def generate_with_spec(family: str, params: dict, seed: int, valuation: str = "additive-integer",
                       valuation_params: dict | None = None,
                       num_agents: int = 2) -> tuple[Instance, IntervalSpec | None]:
    """Like :func:`generate`, also returning the interval spec when there is one."""
    rng = SeededRng(seed, f"{family}/{valuation}")
    graph, spec = _random_graph(family, dict(params), rng)
    val = _random_valuation(valuation, dict(valuation_params or {}), graph.num_items, num_agents, rng)
    if spec is not None and val.is_additive() and val.identical:
        row = [val.value_mask(0, 1 << i) for i in range(graph.num_items)]
        spec = IntervalSpec(spec.intervals, row)
    return Instance(graph, val), spec


def generate(family: str, params: dict, seed: int, valuation: str = "additive-integer",
             valuation_params: dict | None = None, num_agents: int = 2) -> Instance:
    """Deterministic random instance.

    ``family`` picks the graph (``path``/``cycle``/``tree`` take ``m``;
    ``bipartite`` takes ``s``, ``t``, ``p``; ``gnp`` takes ``m``, ``p``;
    ``interval`` takes ``m``) and ``valuation`` the profile
    (``additive-integer`` with ``lo``, ``hi``, ``identical``; ``uniform``;
    ``monotone-concave`` with optional ``weights``, ``weight_hi``, ``knee``).
    """
    return generate_with_spec(family, params, seed, valuation, valuation_params, num_agents)[0]


# ---------------------------------------------------------------------------
# JSON IO
# ---------------------------------------------------------------------------


def _rat(x: Fraction) -> str:
    return str(x)


def _param_out(x):
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return _rat(Fraction(x))
    raise ValidationError(f"cannot serialise rule parameter {x!r}")


def _param_in(x, loc):
    try:
        f = as_fraction(x)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), loc) from None
    return int(f) if f.denominator == 1 else f


def valuation_to_json(prof: ValuationProfile) -> dict:
    if isinstance(prof, UniformValuation):
        return {"type": "uniform", "identical": True}
    if isinstance(prof, AdditiveValuation):
        ident = prof.identical
        rows = prof.values[:1] if ident else prof.values
        return {"type": "additive", "identical": ident, "values": [[_rat(x) for x in r] for r in rows]}
    if isinstance(prof, TableValuation):
        out = {"type": "table", "identical": True,
               "entries": [{"set": sorted(s), "value": _rat(v)}
                           for s, v in sorted(prof.entries.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))]}
        if prof.default is not None:
            out["default"] = prof.default if isinstance(prof.default, str) else _rat(prof.default)
        return out
    if isinstance(prof, RuleValuation):
        out = {"type": "rule", "identical": prof.identical, "rule": prof.name}
        if prof.params:
            out["params"] = [_param_out(p) for p in prof.params]
        if prof.base is not None:
            out["base"] = valuation_to_json(prof.base)
            out["base"]["monotone"] = prof.base.monotone.value
            out["base"]["agents"] = prof.base.num_agents
        return out
    raise ValidationError(f"cannot serialise valuation of kind {prof.kind!r}")


def instance_to_json(instance: Instance) -> dict:
    return {
        "agents": instance.num_agents,
        "items": list(instance.item_labels()),
        "edges": [list(e) for e in sorted(instance.graph.edges)],
        "valuations": valuation_to_json(instance.valuations),
        "monotone": instance.valuations.monotone.value,
    }


def _get(doc: dict, key: str, loc: str, kind=None, default=...):
    if not isinstance(doc, dict):
        raise ParseError("expected an object", loc)
    if key not in doc:
        if default is not ...:
            return default
        raise ParseError(f"missing key {key!r}", loc)
    val = doc[key]
    if kind is not None and (not isinstance(val, kind) or isinstance(val, bool) and kind is not bool):
        raise ParseError(f"expected {getattr(kind, '__name__', kind)}", f"{loc}/{key}")
    return val


def _rational(x, loc) -> Fraction:
    if isinstance(x, float):
        raise ParseError("floats are not accepted; write rationals as \"p/q\" strings", loc)
    try:
        return as_fraction(x)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), loc) from None


def _monotone(doc, loc) -> Monotonicity:
    raw = _get(doc, "monotone", loc, str, "none")
    try:
        return Monotonicity(raw)
    except ValueError:
        raise ParseError(f"unknown monotonicity {raw!r}", f"{loc}/monotone") from None


def valuation_from_json(doc: dict, n: int, m: int, monotone: Monotonicity, loc: str = "/valuations") -> ValuationProfile:
    kind = _get(doc, "type", loc, str)
    identical = _get(doc, "identical", loc, bool, True)
    try:
        if kind == "uniform":
            return UniformValuation(n, m)
        if kind == "additive":
            rows = _get(doc, "values", loc, list)
            parsed = []
            for a, row in enumerate(rows):
                if not isinstance(row, list):
                    raise ParseError("expected a list", f"{loc}/values/{a}")
                if len(row) != m:
                    raise ParseError(f"expected {m} values, got {len(row)}", f"{loc}/values/{a}")
                parsed.append([_rational(x, f"{loc}/values/{a}/{k}") for k, x in enumerate(row)])
            if identical and len(parsed) == 1:
                return AdditiveValuation.identical_values(parsed[0], n)
            if len(parsed) != n:
                raise ParseError(f"expected {n} value rows, got {len(parsed)}", f"{loc}/values")
            return AdditiveValuation(tuple(tuple(r) for r in parsed))
        if kind == "table":
            if not identical:
                raise ParseError("table valuations must be identical", f"{loc}/identical")
            entries = {}
            for k, ent in enumerate(_get(doc, "entries", loc, list)):
                eloc = f"{loc}/entries/{k}"
                items = _get(ent, "set", eloc, list)
                if any(not isinstance(i, int) or isinstance(i, bool) for i in items):
                    raise ParseError("set members must be item indices", f"{eloc}/set")
                entries[frozenset(items)] = _rational(_get(ent, "value", eloc), f"{eloc}/value")
            default = _get(doc, "default", loc, None, None)
            if default is not None and not (isinstance(default, str) and default in _rule_names()):
                default = _rational(default, f"{loc}/default")
            return TableValuation(n, m, entries, default, monotone)
        if kind == "rule":
            name = _get(doc, "rule", loc, str)
            params = tuple(_param_in(p, f"{loc}/params/{k}")
                           for k, p in enumerate(_get(doc, "params", loc, list, [])))
            base = None
            if "base" in doc:
                bdoc = doc["base"]
                bn = _get(bdoc, "agents", f"{loc}/base", int, n)
                base = valuation_from_json(bdoc, bn, m, _monotone(bdoc, f"{loc}/base"), f"{loc}/base")
            return RuleValuation(name, n, m, params, base, monotone)
    except ValidationError as exc:
        raise ParseError(str(exc), loc) from None
    raise ParseError(f"unknown valuation type {kind!r}", f"{loc}/type")


def _rule_names():
    from .core import RULES

    return RULES


def instance_from_json(doc: Any) -> Instance:
    n = _get(doc, "agents", "", int)
    if n < 1:
        raise ParseError("need at least one agent", "/agents")
    labels = _get(doc, "items", "", list)
    if any(not isinstance(s, str) for s in labels):
        raise ParseError("item labels must be strings", "/items")
    m = len(labels)
    edges = _get(doc, "edges", "", list)
    for k, e in enumerate(edges):
        if (not isinstance(e, list) or len(e) != 2
                or any(not isinstance(x, int) or isinstance(x, bool) for x in e)):
            raise ParseError("edge must be a pair of item indices", f"/edges/{k}")
    try:
        graph = ConflictGraph(m, edges)
    except ValidationError as exc:
        raise ParseError(str(exc), "/edges") from None
    val = valuation_from_json(_get(doc, "valuations", "", dict), n, m, _monotone(doc, ""))
    default_labels = [f"o{i + 1}" for i in range(m)]
    try:
        return Instance(graph, val, None if labels == default_labels else tuple(labels))
    except ValidationError as exc:
        raise ParseError(str(exc), "") from None


def allocation_to_json(allocation: Allocation) -> dict:
    return {"bundles": [sorted(b) for b in allocation.bundles]}


def allocation_from_json(doc: Any) -> Allocation:
    bundles = _get(doc, "bundles", "", list)
    out = []
    for a, b in enumerate(bundles):
        if not isinstance(b, list) or any(not isinstance(i, int) or isinstance(i, bool) for i in b):
            raise ParseError("bundle must be a list of item indices", f"/bundles/{a}")
        if len(set(b)) != len(b):
            raise ParseError("repeated item in bundle", f"/bundles/{a}")
        out.append(b)
    return Allocation(out)


def intervals_to_json(spec: IntervalSpec) -> dict:
    out = {"intervals": [[_rat(lo), _rat(hi)] for lo, hi in spec.intervals]}
    if spec.values is not None:
        out["values"] = [_rat(x) for x in spec.values]
    return out


def intervals_from_json(doc: Any, perturb: bool = False) -> IntervalSpec:
    raw = _get(doc, "intervals", "", list)
    ivs = []
    for k, iv in enumerate(raw):
        if not isinstance(iv, list) or len(iv) != 2:
            raise ParseError("interval must be a pair", f"/intervals/{k}")
        ivs.append((_rational(iv[0], f"/intervals/{k}/0"), _rational(iv[1], f"/intervals/{k}/1")))
    values = _get(doc, "values", "", list, None)
    if values is not None:
        values = [_rational(x, f"/values/{k}") for k, x in enumerate(values)]
    try:
        return IntervalSpec(ivs, values, perturb=perturb)
    except ValidationError as exc:
        raise ParseError(str(exc), "/intervals") from None


def _load(path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from None


def _dump(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def read_instance(path) -> Instance:
    return instance_from_json(_load(path))


def write_instance(instance: Instance, path) -> None:
    _dump(instance_to_json(instance), path)


def read_allocation(path) -> Allocation:
    return allocation_from_json(_load(path))


def write_allocation(allocation: Allocation, path) -> None:
    _dump(allocation_to_json(allocation), path)


def read_intervals(path, perturb: bool = False) -> IntervalSpec:
    return intervals_from_json(_load(path), perturb)


def write_intervals(spec: IntervalSpec, path) -> None:
    _dump(intervals_to_json(spec), path)


def load_instance(ref: str) -> Instance:
    """A catalog name such as ``thm7_k3n(4)`` or a path to Instance JSON."""
    p = Path(ref)
    if p.suffix == ".json" or p.exists():
        return read_instance(p)
    return builtin(ref)
