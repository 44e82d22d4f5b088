"""Built-in benchmark markets, seeded random families, and the file format.

Instance and outcome documents are UTF-8 JSON with a top-level
``"format": 1``.  Rationals serialize as "p/q" (or "p" for integers) and
round-trip exactly.  Random families draw from SplitMix64 (the well-known
64-bit mix by Steele, Lea and Flood) with plain modulo mapping, so streams
are reproducible from the seed alone, across platforms and implementations.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .bits import items_of, mask_of
from .errors import BadParams, ParseError
from .market import Allocation, Instance, Outcome
from .valuations import (
    Additive,
    BudgetAdditive,
    CappedCardinalityAdditive,
    SingleMinded,
    SuperadditiveExplicit,
)

_ZERO = Fraction(0)
FORMAT_VERSION = 1

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream; randint maps the raw draw by modulo."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.next_u64() % (hi - lo + 1)


# ---------------------------------------------------------------------------
# built-in instances


def fig1a(eps: Fraction = Fraction(1, 10)) -> Instance:
    """Four items, five uniform budget-additive bidders; bundling costs welfare."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise BadParams("eps must lie strictly between 0 and 1")
    shared = (Fraction(1), Fraction(4), Fraction(2), Fraction(2))

    def bidder(budget, interested):
        values = tuple(shared[j] if j in interested else _ZERO for j in range(4))
        return BudgetAdditive(Fraction(budget), values)

    agents = (
        bidder(3, {0, 1}),
        bidder(4, {1, 2, 3}),
        bidder(1 - eps, {2}),
        bidder(2, {2, 3}),
        bidder(1 - eps, {3}),
    )
    return Instance(
        4,
        agents,
        name="fig1a",
        uniform_item_values=shared,
        metadata={
            "items": ["a1", "a2", "a3", "a4"],
            "agents": ["c1", "c2", "c3", "c4", "c5"],
            "eps": str(eps),
        },
    )


def fig1b() -> Instance:
    """Seven items, four identical-budget bidders; no item-pricing equilibrium."""
    shared = tuple(Fraction(v) for v in (1, 1, 1, 1, 1, 1, 2))
    names = ["alpha1", "alpha2", "a1", "a2", "b1", "b2", "beta"]
    interest = {
        "c1": {0, 2, 4},
        "c2": {1, 3, 5},
        "d1": {2, 4, 6},
        "d2": {3, 5, 6},
    }
    agents = tuple(
        BudgetAdditive(
            Fraction(2),
            tuple(shared[j] if j in wants else _ZERO for j in range(7)),
        )
        for wants in interest.values()
    )
    return Instance(
        7,
        agents,
        name="fig1b",
        uniform_item_values=shared,
        metadata={"items": names, "agents": list(interest)},
    )


def revenue_example(big: Fraction = Fraction(100)) -> Instance:
    """A single-minded bidder against a capacity-two bidder; bundle prices
    extract linearly more revenue than any item-price equilibrium."""
    big = Fraction(big)
    if big < 2:
        raise BadParams("the large value must be at least 2")
    agents = (
        SingleMinded(1 << 0, Fraction(1)),
        CappedCardinalityAdditive((big - 1, big, big), 2),
    )
    return Instance(
        3,
        agents,
        name="revenue_example",
        metadata={"items": ["a1", "a2", "a3"], "agents": ["p1", "p2"], "R": str(big)},
    )


def bundling_necessity(m: int = 16) -> Instance:
    """t = sqrt(m) small bidders with pairwise once-overlapping t-sets, plus
    one bidder wanting everything; item prices cannot clear it well.

    Small set i holds the shared item o_{ij} for every j != i plus one
    private item; dummies pad the market to m items and are valued only
    through the big bidder'swhole-market set.
    """
    t = math.isqrt(m)
    if t * t != m or t < 2:
        raise BadParams("m must be a perfect square at least 4")
    pairs = [(i, j) for i in range(t) for j in range(i + 1, t)]
    shared_index = {pair: idx for idx, pair in enumerate(pairs)}
    private_base = len(pairs)
    names = [f"o{i}{j}" for i, j in pairs]
    names += [f"q{i}" for i in range(t)]
    names += [f"pad{i}" for i in range(m - private_base - t)]

    agents = []
    for i in range(t):
        items = [shared_index[(min(i, j), max(i, j))] for j in range(t) if j != i]
        items.append(private_base + i)
        agents.append(SingleMinded(mask_of(items), Fraction(1 + 2 * t)))
    agents.append(SingleMinded(mask_of(range(m)), Fraction(m)))
    return Instance(
        m,
        tuple(agents),
        name=f"bundling_necessity_{m}",
        metadata={"items": names, "agents": [f"s{i}" for i in range(t)] + ["big"]},
    )


def nonuniform_identical_budget(eps: Fraction = Fraction(1, 8)) -> Instance:
    """Identical budgets but non-uniform values; bundling loses welfare."""
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise BadParams("eps must lie strictly between 0 and 1")
    two = Fraction(2)
    agents = (
        BudgetAdditive(two, (Fraction(2), Fraction(1), Fraction(1))),
        BudgetAdditive(two, (_ZERO, Fraction(2), Fraction(2))),
        BudgetAdditive(two, (4 * eps, _ZERO, eps)),
    )
    return Instance(
        3,
        agents,
        name="nonuniform_identical_budget",
        metadata={"agents": ["c1", "c2", "c3"], "eps": str(eps)},
    )


def partition_reduction(weights) -> Instance:
    """Two equal-budget bidders over items weighted a_j with sum 2B; the
    optimum hits 2B exactly when the weights split evenly."""
    values = tuple(Fraction(a) for a in weights)
    if not values or any(a <= 0 for a in values):
        raise BadParams("weights must be positive")
    budget = sum(values, _ZERO) / 2
    agents = (BudgetAdditive(budget, values), BudgetAdditive(budget, values))
    return Instance(
        len(values),
        agents,
        name="partition_reduction",
        uniform_item_values=values,
        metadata={"B": str(budget)},
    )


_BUILTINS = {
    "fig1a": fig1a,
    "fig1b": fig1b,
    "revenue_example": revenue_example,
    "bundling_necessity": bundling_necessity,
    "nonuniform_identical_budget": nonuniform_identical_budget,
    "partition_reduction": partition_reduction,
}


def built_in(name: str, **params) -> Instance:
    if name not in _BUILTINS:
        raise BadParams(f"unknown built-in instance {name!r}")
    return _BUILTINS[name](**params)


# ---------------------------------------------------------------------------
# random families


def _random_superadditive(m: int, n: int, rng: SplitMix64) -> Instance:
    agents = []
    for _ in range(n):
        table = [Fraction(0)] * (1 << m)
        base = [rng.randint(0, 4) for _ in range(m)]
        for mask in range(1, 1 << m):
            low = mask & -mask
            table[mask] = table[mask ^ low] + base[low.bit_length() - 1]
        for _ in range(rng.randint(1, 2)):
            bump_set = rng.randint(1, (1 << m) - 1)
            bump = Fraction(rng.randint(1, 10))
            if table[bump_set] < bump:
                table[bump_set] = bump
        # close under super-additivity: by rising popcount, any split may lift
        order = sorted(range(1 << m), key=lambda s: s.bit_count())
        for mask in order:
            sub = (mask - 1) & mask
            while sub:
                other = mask ^ sub
                if sub < other:  # each split once
                    lifted = table[sub] + table[other]
                    if lifted > table[mask]:
                        table[mask] = lifted
                sub = (sub - 1) & mask
        agents.append(SuperadditiveExplicit(tuple(table)))
    return Instance(m, tuple(agents), name="random_superadditive")


def _random_single_minded(m: int, n: int, rng: SplitMix64) -> Instance:
    agents = tuple(
        SingleMinded(rng.randint(1, (1 << m) - 1), Fraction(rng.randint(1, 10)))
        for _ in range(n)
    )
    return Instance(m, agents, name="random_single_minded")


def _random_uniform_budget_additive(
    m: int, n: int, rng: SplitMix64, identical_budgets: bool
) -> Instance:
    # Budgets never fall below an agent's largest interesting item: single
    # items never overflow anyone, which is what the half-welfare guarantee
    # of the budget rebalance needs.
    shared = [Fraction(rng.randint(1, 8)) for _ in range(m)]
    common = max(shared) + rng.randint(0, 4)
    agents = []
    for _ in range(n):
        wants = rng.randint(1, (1 << m) - 1)
        if identical_budgets:
            budget = Fraction(common)
        else:
            floor = max(shared[j] for j in range(m) if wants >> j & 1)
            budget = floor + rng.randint(0, 8)
        values = tuple(shared[j] if wants >> j & 1 else _ZERO for j in range(m))
        agents.append(BudgetAdditive(budget, values))
    return Instance(
        m,
        tuple(agents),
        name="random_uniform_budget_additive",
        uniform_item_values=tuple(shared),
    )


FAMILIES = (
    "random_superadditive",
    "random_single_minded",
    "random_uniform_budget_additive",
)


def generate(
    family: str, m: int, n: int, seed: int, identical_budgets: bool = False
) -> Instance:
    """Seeded random instance; identical seeds give identical markets."""
    if m < 1 or n < 1:
        raise BadParams("need at least one item and one agent")
    rng = SplitMix64(seed)
    if family == "random_superadditive":
        if m > 10:
            raise BadParams("explicit random tables capped at 10 items")
        return _random_superadditive(m, n, rng)
    if family == "random_single_minded":
        return _random_single_minded(m, n, rng)
    if family == "random_uniform_budget_additive":
        return _random_uniform_budget_additive(m, n, rng, identical_budgets)
    raise BadParams(f"unknown random family {family!r}")


@dataclass(frozen=True)
class InstanceSpec:
    """A named family plus parameters; `build` materializes the market."""

    family: str
    params: dict = field(default_factory=dict)

    def build(self) -> Instance:
        if self.family in _BUILTINS:
            return built_in(self.family, **self.params)
        if self.family in FAMILIES:
            return generate(self.family, **self.params)
        raise BadParams(f"unknown family {self.family!r}")


# ---------------------------------------------------------------------------
# serialization

_RAT_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def parse_rational(text, where: str) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not (match := _RAT_RE.match(text)):
        raise ParseError(f"{where}: expected a rational like '3' or '3/4', got {text!r}")
    num, den = match.group(1), match.group(2)
    if den is not None and int(den) == 0:
        raise ParseError(f"{where}: zero denominator")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(value: Fraction) -> str:
    return str(value)


def _want(obj, key, kind, where):
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{where}: field {key!r} has the wrong type")
    return value


def _rat_list(values, where):
    if not isinstance(values, list):
        raise ParseError(f"{where}: expected a list")
    return tuple(parse_rational(v, f"{where}[{i}]") for i, v in enumerate(values))


def _agent_to_json(v) -> dict:
    if isinstance(v, Additive):
        return {"family": "additive", "item_values": [str(x) for x in v.item_values]}
    if isinstance(v, SingleMinded):
        return {
            "family": "single_minded",
            "desired": items_of(v.desired),
            "value": str(v.value_if_served),
        }
    if isinstance(v, SuperadditiveExplicit):
        return {"family": "superadditive_explicit", "table": [str(x) for x in v.table]}
    if isinstance(v, BudgetAdditive):
        return {
            "family": "budget_additive",
            "budget": str(v.budget),
            "item_values": [str(x) for x in v.item_values],
        }
    if isinstance(v, CappedCardinalityAdditive):
        return {
            "family": "capped_additive",
            "cap": v.cap,
            "item_values": [str(x) for x in v.item_values],
        }
    raise BadParams(f"unserializable valuation {type(v).__name__}")


def _agent_from_json(obj, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    family = _want(obj, "family", str, where)
    try:
        if family == "additive":
            return Additive(_rat_list(_want(obj, "item_values", list, where), where))
        if family == "single_minded":
            desired = _want(obj, "desired", list, where)
            if not all(isinstance(j, int) and j >= 0 for j in desired):
                raise ParseError(f"{where}: desired must list item indices")
            return SingleMinded(
                mask_of(desired), parse_rational(_want(obj, "value", None, where), where)
            )
        if family == "superadditive_explicit":
            return SuperadditiveExplicit(
                _rat_list(_want(obj, "table", list, where), where)
            )
        if family == "budget_additive":
            return BudgetAdditive(
                parse_rational(_want(obj, "budget", None, where), where),
                _rat_list(_want(obj, "item_values", list, where), where),
            )
        if family == "capped_additive":
            return CappedCardinalityAdditive(
                _rat_list(_want(obj, "item_values", list, where), where),
                _want(obj, "cap", int, where),
            )
    except BadParams as exc:
        raise ParseError(f"{where}: {exc}") from exc
    raise ParseError(f"{where}: unknown valuation family {family!r}")


def write_instance(instance: Instance) -> str:
    doc = {
        "format": FORMAT_VERSION,
        "name": instance.name,
        "m": instance.m,
        "agents": [_agent_to_json(v) for v in instance.agents],
    }
    if instance.uniform_item_values is not None:
        doc["uniform_item_values"] = [str(x) for x in instance.uniform_item_values]
    if instance.metadata is not None:
        doc["metadata"] = instance.metadata
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _load_json(text: str, what: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{what}: top level must be an object")
    if doc.get("format") != FORMAT_VERSION:
        raise ParseError(f"{what}: missing or unsupported format version")
    return doc


def parse_instance(text: str) -> Instance:
    doc = _load_json(text, "instance")
    m = _want(doc, "m", int, "instance")
    raw_agents = _want(doc, "agents", list, "instance")
    agents = tuple(
        _agent_from_json(a, f"agents[{i}]") for i, a in enumerate(raw_agents)
    )
    uniform = None
    if "uniform_item_values" in doc:
        uniform = _rat_list(doc["uniform_item_values"], "uniform_item_values")
    metadata = doc.get("metadata")
    if metadata is not None and not isinstance(metadata, dict):
        raise ParseError("instance: metadata must be an object")
    try:
        return Instance(
            m,
            agents,
            name=doc.get("name", ""),
            uniform_item_values=uniform,
            metadata=metadata,
        )
    except BadParams as exc:
        raise ParseError(f"instance: {exc}") from exc


def _items_field(values, where, m):
    if not isinstance(values, list) or not all(
        isinstance(j, int) and 0 <= j < m for j in values
    ):
        raise ParseError(f"{where}: expected a list of item indices below {m}")
    return mask_of(values)


def write_allocation(x: Allocation) -> dict:
    return {"x0": items_of(x.x0), "x": [items_of(b) for b in x.bundles]}


def parse_allocation(text_or_doc, m: int) -> Allocation:
    """Accepts an allocation document or a whole outcome document."""
    if isinstance(text_or_doc, str):
        doc = _load_json(text_or_doc, "allocation")
    else:
        doc = text_or_doc
    body = doc.get("allocation", doc)
    if not isinstance(body, dict):
        raise ParseError("allocation: expected an object")
    x0 = _items_field(_want(body, "x0", list, "allocation"), "allocation.x0", m)
    raw = _want(body, "x", list, "allocation")
    bundles = tuple(
        _items_field(b, f"allocation.x[{i}]", m) for i, b in enumerate(raw)
    )
    try:
        return Allocation(m, x0, bundles)
    except BadParams as exc:
        raise ParseError(f"allocation: {exc}") from exc


def write_outcome(outcome: Outcome) -> str:
    doc = {"format": FORMAT_VERSION, "allocation": write_allocation(outcome.allocation)}
    if outcome.prices is not None:
        prices = {"agents": [str(p) for p in outcome.prices]}
        if outcome.allocation.x0:
            prices["x0"] = str(outcome.x0_price)
        doc["prices"] = prices
    else:
        doc["prices"] = {"items": [str(p) for p in outcome.item_prices]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_outcome(text: str, m: int | None = None) -> Outcome:
    doc = _load_json(text, "outcome")
    if m is None:
        body = doc.get("allocation")
        if not isinstance(body, dict):
            raise ParseError("outcome: missing allocation")
        seen = list(body.get("x0", []))
        for bundle in body.get("x", []):
            seen.extend(bundle)
        m = len(seen)
    x = parse_allocation(doc, m)
    prices = _want(doc, "prices", dict, "outcome")
    try:
        if "items" in prices:
            return Outcome(x, item_prices=_rat_list(prices["items"], "prices.items"))
        agents = _rat_list(_want(prices, "agents", list, "prices"), "prices.agents")
        if len(agents) != x.n:
            raise ParseError(
                f"prices.agents lists {len(agents)} prices for {x.n} bundles"
            )
        x0_price = parse_rational(prices.get("x0", "0"), "prices.x0")
        return Outcome(x, prices=agents, x0_price=x0_price)
    except BadParams as exc:
        raise ParseError(f"outcome: {exc}") from exc
