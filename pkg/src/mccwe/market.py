"""Core market data model: instances, allocations, partitions, outcomes.

Items and agents are 0-indexed dense integers; item sets are int bitmasks.
An allocation always carries the unallocated pool x0 as a first-class set,
and the induced partition keeps x0 (when nonempty) as a single block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

from .bits import bits_of, full_mask, items_of
from .errors import BadParams, SizeLimit

if TYPE_CHECKING:  # pragma: no cover
    from .valuations import Valuation

UNALLOCATED = -1

_ZERO = Fraction(0)

ENUMERATION_ITEM_CAP = 24


@dataclass(frozen=True, eq=True)
class Instance:
    """A market: m items and one valuation per agent."""

    m: int
    agents: tuple
    name: str = ""
    uniform_item_values: tuple[Fraction, ...] | None = None
    metadata: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        from . import valuations as vals

        if self.m < 1:
            raise BadParams("need at least one item")
        if not self.agents:
            raise BadParams("need at least one agent")
        full = full_mask(self.m)
        for idx, v in enumerate(self.agents):
            if isinstance(v, vals.SingleMinded):
                if v.desired & ~full:
                    raise BadParams(f"agent {idx} desires items outside the market")
            elif isinstance(v, vals.SuperadditiveExplicit):
                if len(v.table) != 1 << self.m:
                    raise BadParams(f"agent {idx} table does not cover 2^{self.m} sets")
            elif len(v.item_values) != self.m:
                raise BadParams(f"agent {idx} has {len(v.item_values)} item values, expected {self.m}")
        if self.uniform_item_values is not None:
            if len(self.uniform_item_values) != self.m:
                raise BadParams("uniform_item_values must list one value per item")
            for idx, v in enumerate(self.agents):
                if not isinstance(v, vals.BudgetAdditive):
                    raise BadParams("uniform_item_values requires budget-additive agents")
                for j in range(self.m):
                    if v.item_values[j] not in (_ZERO, self.uniform_item_values[j]):
                        raise BadParams(
                            f"agent {idx} values item {j} at neither 0 nor the shared value"
                        )

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def all_items(self) -> int:
        return full_mask(self.m)


@dataclass(frozen=True)
class Allocation:
    """Disjoint item sets (x0, x_1, ..., x_n) covering all items."""

    m: int
    x0: int
    bundles: tuple[int, ...]

    def __post_init__(self):
        union = self.x0
        total = self.x0.bit_count()
        for b in self.bundles:
            union |= b
            total += b.bit_count()
        if union != full_mask(self.m) or total != self.m:
            raise BadParams("bundles must be pairwise disjoint and cover all items")

    @property
    def n(self) -> int:
        return len(self.bundles)


def allocation(m: int, bundles, x0: int | None = None) -> Allocation:
    bundles = tuple(bundles)
    if x0 is None:
        covered = 0
        for b in bundles:
            covered |= b
        x0 = full_mask(m) & ~covered
    return Allocation(m, x0, bundles)


@dataclass(frozen=True)
class Partition:
    """Nonempty disjoint blocks covering all items, ordered by lowest item."""

    m: int
    blocks: tuple[int, ...]

    def __post_init__(self):
        if any(b == 0 for b in self.blocks):
            raise BadParams("partition blocks must be nonempty")
        union = 0
        total = 0
        for b in self.blocks:
            union |= b
            total += b.bit_count()
        if union != full_mask(self.m) or total != self.m:
            raise BadParams("blocks must be pairwise disjoint and cover all items")
        ordered = tuple(sorted(self.blocks, key=lambda b: b & -b))
        if ordered != self.blocks:
            object.__setattr__(self, "blocks", ordered)


def singleton_partition(m: int) -> Partition:
    return Partition(m, tuple(1 << j for j in range(m)))


def induced_partition(x: Allocation) -> tuple[Partition, tuple[int, ...]]:
    """The partition an allocation induces, plus each block's owner.

    Owners align with the partition's canonical block order; the x0 block
    (present only when nonempty) is owned by UNALLOCATED.
    """
    pairs = [(b, i) for i, b in enumerate(x.bundles) if b]
    if x.x0:
        pairs.append((x.x0, UNALLOCATED))
    pairs.sort(key=lambda p: p[0] & -p[0])
    partition = Partition(x.m, tuple(b for b, _ in pairs))
    owners = tuple(owner for _, owner in pairs)
    return partition, owners


@dataclass(frozen=True)
class Outcome:
    """An allocation plus prices.

    Bundle-priced outcomes carry one price per agent bundle (zero for empty
    bundles) plus a price for the unallocated block.  Item-priced outcomes
    carry one price per item and are the shape the Walrasian verifier needs.
    Exactly one form is present.
    """

    allocation: Allocation
    prices: tuple[Fraction, ...] | None = None
    x0_price: Fraction = _ZERO
    item_prices: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if (self.prices is None) == (self.item_prices is None):
            raise BadParams("outcome needs exactly one of bundle or item prices")
        if self.prices is not None:
            if len(self.prices) != self.allocation.n:
                raise BadParams("one bundle price per agent required")
            if any(p < 0 for p in self.prices) or self.x0_price < 0:
                raise BadParams("prices must be nonnegative")
            for b, p in zip(self.allocation.bundles, self.prices):
                if b == 0 and p != 0:
                    raise BadParams("empty bundles cannot carry a price")
        else:
            if len(self.item_prices) != self.allocation.m:
                raise BadParams("one item price per item required")
            if any(p < 0 for p in self.item_prices):
                raise BadParams("prices must be nonnegative")


def value_query(v: Valuation, item_set: int) -> Fraction:
    """Exact value of an item set under the valuation's family rule."""
    return v.value(item_set)


def reduced_value_table(v: Valuation, partition: Partition) -> list[Fraction]:
    """Value of every block subset in the reduced market, indexed by mask."""
    k = len(partition.blocks)
    unions = [0] * (1 << k)
    for mask in range(1, 1 << k):
        low = mask & -mask
        unions[mask] = unions[mask ^ low] | partition.blocks[low.bit_length() - 1]
    return [v.value(u) for u in unions]


def reduced_value(v: Valuation, partition: Partition, bundle_set: int) -> Fraction:
    """Value of the union of the selected blocks."""
    union = 0
    for j in bits_of(bundle_set):
        union |= partition.blocks[j]
    return v.value(union)


def social_welfare(instance: Instance, x: Allocation) -> Fraction:
    total = _ZERO
    for v, bundle in zip(instance.agents, x.bundles):
        total += v.value(bundle)
    return total


def utility(v: Valuation, partition: Partition, bundle_set: int, prices) -> Fraction:
    """Quasilinear utility: reduced value minus the selected block prices."""
    total = reduced_value(v, partition, bundle_set)
    for j in bits_of(bundle_set):
        total -= prices[j]
    return total


def revenue(instance: Instance, outcome: Outcome) -> Fraction:
    """Sum of prices over bundles allocated to agents (x0 excluded)."""
    x = outcome.allocation
    total = _ZERO
    if outcome.prices is not None:
        for bundle, price in zip(x.bundles, outcome.prices):
            if bundle:
                total += price
    else:
        for bundle in x.bundles:
            for j in bits_of(bundle):
                total += outcome.item_prices[j]
    return total


def full_surplus_outcome(instance: Instance, x: Allocation) -> Outcome:
    """Price every bundle at its owner's value (and x0 at zero)."""
    prices = tuple(v.value(b) for v, b in zip(instance.agents, x.bundles))
    return Outcome(x, prices=prices)


def describe_items(instance: Instance, mask: int) -> str:
    """Render an item set with metadata names when available."""
    names = None
    if instance.metadata:
        names = instance.metadata.get("items")
    labels = [
        names[j] if names and j < len(names) else str(j) for j in items_of(mask)
    ]
    return "{" + ",".join(labels) + "}"


def check_enumeration_cap(m: int) -> None:
    if m > ENUMERATION_ITEM_CAP:
        raise SizeLimit(f"{m} items exceeds the 2^m enumeration cap")
