"""Valuation families and their query implementations.

Five concrete families cover the package: additive, single-minded, explicit
super-additive tables, budget-additive, and cardinality-capped additive.
All of them answer exact value queries on item-set bitmasks; demand and
relative-demand queries are answered by exhaustive enumeration, which is
exact at desk scale.

Tie-breaking is fully deterministic everywhere: maximum utility (or density),
then fewest elements, then numerically smallest bitmask.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from . import market
from .bits import bits_of
from .errors import BadParams, EmptyPool, SizeLimit

_ZERO = Fraction(0)


def _check_nonnegative(values):
    if any(v < 0 for v in values):
        raise BadParams("negative value in valuation data")


@dataclass(frozen=True)
class Additive:
    item_values: tuple[Fraction, ...]

    def __post_init__(self):
        _check_nonnegative(self.item_values)

    def value(self, mask: int) -> Fraction:
        total = _ZERO
        for j in bits_of(mask):
            total += self.item_values[j]
        return total


@dataclass(frozen=True)
class SingleMinded:
    """Worth `value` for any superset of `desired`, zero otherwise."""

    desired: int
    value_if_served: Fraction

    def __post_init__(self):
        if self.desired == 0:
            raise BadParams("single-minded desired set must be nonempty")
        if self.value_if_served < 0:
            raise BadParams("negative value in valuation data")

    def value(self, mask: int) -> Fraction:
        return self.value_if_served if mask & self.desired == self.desired else _ZERO


@dataclass(frozen=True)
class SuperadditiveExplicit:
    """Explicit 2^m table; the constructor proves it is a valid valuation.

    Rejects tables that are not normalized, not monotone, or not
    super-additive on some disjoint pair (so a submodular table fails).
    """

    table: tuple[Fraction, ...]

    def __post_init__(self):
        size = len(self.table)
        m = size.bit_length() - 1
        if size != 1 << m or size == 0:
            raise BadParams("table length must be a power of two")
        if m > 12:
            raise SizeLimit("explicit tables are validated only up to 12 items")
        if self.table[0] != 0:
            raise BadParams("table is not normalized: v(empty) != 0")
        _check_nonnegative(self.table)
        for mask in range(size):
            for j in range(m):
                if not mask >> j & 1 and self.table[mask] > self.table[mask | 1 << j]:
                    raise BadParams("table is not monotone")
        for union in range(size):
            sub = union
            while sub:
                if self.table[sub] + self.table[union ^ sub] > self.table[union]:
                    raise BadParams("table is not super-additive")
                sub = (sub - 1) & union

    def value(self, mask: int) -> Fraction:
        return self.table[mask]


@dataclass(frozen=True)
class BudgetAdditive:
    """min(budget, additive sum)."""

    budget: Fraction
    item_values: tuple[Fraction, ...]

    def __post_init__(self):
        if self.budget < 0:
            raise BadParams("negative budget")
        _check_nonnegative(self.item_values)

    def value(self, mask: int) -> Fraction:
        total = _ZERO
        for j in bits_of(mask):
            total += self.item_values[j]
            if total >= self.budget:
                return self.budget
        return total


@dataclass(frozen=True)
class CappedCardinalityAdditive:
    """Sum of the `cap` largest item values in the set."""

    item_values: tuple[Fraction, ...]
    cap: int

    def __post_init__(self):
        if self.cap < 0:
            raise BadParams("negative cardinality cap")
        _check_nonnegative(self.item_values)

    def value(self, mask: int) -> Fraction:
        picked = sorted((self.item_values[j] for j in bits_of(mask)), reverse=True)
        total = _ZERO
        for v in picked[: self.cap]:
            total += v
        return total


Valuation = Union[
    Additive, SingleMinded, SuperadditiveExplicit, BudgetAdditive, CappedCardinalityAdditive
]


def value_table(v: Valuation, m: int) -> list[Fraction]:
    """v(mask) for every mask over m items, as a lookup list."""
    size = 1 << m
    if isinstance(v, SuperadditiveExplicit):
        if len(v.table) != size:
            raise BadParams("table size does not match the item count")
        return list(v.table)
    if isinstance(v, (Additive, BudgetAdditive)):
        sums = [_ZERO] * size
        for mask in range(1, size):
            low = mask & -mask
            sums[mask] = sums[mask ^ low] + v.item_values[low.bit_length() - 1]
        if isinstance(v, Additive):
            return sums
        return [min(v.budget, s) for s in sums]
    if isinstance(v, SingleMinded):
        return [
            v.value_if_served if mask & v.desired == v.desired else _ZERO
            for mask in range(size)
        ]
    return [v.value(mask) for mask in range(size)]


def is_superadditive_family(v: Valuation) -> bool:
    """Structural super-additivity test; exact for every family here.

    Budget-additive data is super-additive only when the budget never binds
    on a split (at most one positively valued item, or the budget covers the
    whole additive mass); capped-additive only when the cap never binds.
    """
    if isinstance(v, (Additive, SingleMinded, SuperadditiveExplicit)):
        return True
    positives = [x for x in v.item_values if x > 0]
    if isinstance(v, BudgetAdditive):
        if v.budget == 0:
            return True
        return len(positives) <= 1 or sum(positives) <= v.budget
    return v.cap == 0 or len(positives) <= v.cap


def demand_query(v: Valuation, partition: market.Partition, prices) -> int:
    """Utility-maximizing bundle set at the given block prices.

    Ties break toward fewer blocks, then the numerically smallest mask.
    """
    k = len(partition.blocks)
    if k > 20:
        raise SizeLimit(f"{k} blocks exceeds the demand enumeration cap")
    values = market.reduced_value_table(v, partition)
    best_mask, best_util, best_count = 0, _ZERO, 0
    for mask in range(1, 1 << k):
        util = values[mask]
        for j in bits_of(mask):
            util -= prices[j]
        count = mask.bit_count()
        if util > best_util or (util == best_util and count < best_count):
            best_mask, best_util, best_count = mask, util, count
    return best_mask


def relative_demand_query(
    v: Valuation, pool: int, table: list[Fraction] | None = None
) -> tuple[int, Fraction]:
    """Nonempty S within `pool` maximizing v(S)/|S|, plus that density.

    Ties break toward smaller sets, then the numerically smallest mask; an
    all-zero valuation therefore yields the pool's first singleton.
    """
    if pool == 0:
        raise EmptyPool("relative-demand query over an empty pool")
    if pool.bit_length() > 24:
        raise SizeLimit("relative-demand enumeration capped at 24 items")
    best_mask = 0
    best_val = _ZERO
    best_size = 0
    sub = pool
    while sub:
        val = table[sub] if table is not None else v.value(sub)
        size = sub.bit_count()
        # density comparison by cross-multiplication: val/size vs best
        if best_mask == 0:
            better = True
        else:
            lhs, rhs = val * best_size, best_val * size
            better = lhs > rhs or (
                lhs == rhs and (size < best_size or (size == best_size and sub < best_mask))
            )
        if better:
            best_mask, best_val, best_size = sub, val, size
        sub = (sub - 1) & pool
    return best_mask, best_val / best_size


@dataclass(frozen=True)
class ClassifyReport:
    monotone: bool
    normalized: bool
    superadditive: bool
    subadditive: bool
    uniform_budget_additive: bool
    identical_budgets: bool


def classify(instance: market.Instance) -> ClassifyReport:
    """Structural flags for an instance, decided by exhaustive enumeration.

    The super/sub-additive checks walk all disjoint set pairs and need
    m <= 20; uniformity and budget equality are field inspections.
    """
    m = instance.m
    if m > 20:
        raise SizeLimit("classification enumerations capped at 20 items")
    size = 1 << m
    monotone = normalized = True
    superadditive = subadditive = True
    for v in instance.agents:
        table = value_table(v, m)
        if table[0] != 0:
            normalized = False
        for mask in range(size):
            for j in range(m):
                if not mask >> j & 1 and table[mask] > table[mask | 1 << j]:
                    monotone = False
        for union in range(size):
            sub = union
            while sub:
                split = table[sub] + table[union ^ sub]
                if split > table[union]:
                    superadditive = False
                if split < table[union]:
                    subadditive = False
                sub = (sub - 1) & union

    all_ba = all(isinstance(v, BudgetAdditive) for v in instance.agents)
    uniform = all_ba and _is_uniform(instance)
    identical = all_ba and len({v.budget for v in instance.agents}) <= 1
    return ClassifyReport(monotone, normalized, superadditive, subadditive, uniform, identical)


def _is_uniform(instance: market.Instance) -> bool:
    for j in range(instance.m):
        seen = {v.item_values[j] for v in instance.agents if v.item_values[j] > 0}
        if len(seen) > 1:
            return False
    return True


def is_uniform_budget_additive(instance: market.Instance) -> bool:
    """Field-inspection uniformity test (no enumeration)."""
    return all(isinstance(v, BudgetAdditive) for v in instance.agents) and _is_uniform(
        instance
    )


def shared_item_values(instance: market.Instance) -> list[Fraction]:
    """The per-item shared values of a uniform budget-additive instance.

    Items valued by nobody get 0.
    """
    values = []
    for j in range(instance.m):
        seen = {v.item_values[j] for v in instance.agents if v.item_values[j] > 0}
        if len(seen) > 1:
            raise BadParams("instance is not uniform budget-additive")
        values.append(seen.pop() if seen else _ZERO)
    return values
