"""Demand correspondences over reduced markets and the three verifiers.

Modes:

* ``we``    — item prices over the all-singletons partition; buyer stability
  for every agent's item bundle plus zero prices on unallocated items.
* ``cwe``   — bundle prices over the allocation's induced partition; buyer
  stability only.
* ``mccwe`` — cwe plus market clearance: the unallocated block, if any, is
  priced at zero.

An agent with an empty bundle is buyer-stable only when no bundle set has
positive utility (the empty set must itself be demanded).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .bits import bits_of
from .errors import BadParams, SizeLimit
from .market import (
    Instance,
    Outcome,
    Partition,
    UNALLOCATED,
    induced_partition,
    reduced_value_table,
    singleton_partition,
)
from .valuations import Valuation

WE = "we"
CWE = "cwe"
MCCWE = "mccwe"
MODES = (WE, CWE, MCCWE)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class Violation:
    kind: str  # "buyer" or "seller"
    agent: int | None = None
    better_bundle: int | None = None  # bundle-set mask the agent prefers
    gap: Fraction | None = None
    block: int | None = None  # offending unallocated block (item mask)
    price: Fraction | None = None


@dataclass(frozen=True)
class VerifyReport:
    mode: str
    ok: bool
    violations: tuple[Violation, ...]


def demand_correspondence(v: Valuation, partition: Partition, prices) -> frozenset[int]:
    """Every utility-maximizing bundle set (the full argmax, empty set included)."""
    k = len(partition.blocks)
    if k > 20:
        raise SizeLimit(f"{k} blocks exceeds the demand enumeration cap")
    table = reduced_value_table(v, partition)
    utils = []
    for mask in range(1 << k):
        util = table[mask]
        for j in bits_of(mask):
            util -= prices[j]
        utils.append(util)
    best = max(utils)
    return frozenset(mask for mask, u in enumerate(utils) if u == best)


def verify(instance: Instance, outcome: Outcome, mode: str) -> VerifyReport:
    """Check buyer stability (all modes) and market clearance (we/mccwe)."""
    if mode not in MODES:
        raise BadParams(f"unknown verification mode {mode!r}")
    x = outcome.allocation
    buyer_violations: list[Violation] = []
    seller_violations: list[Violation] = []

    if mode == WE:
        if outcome.item_prices is None:
            raise BadParams("walrasian verification needs item prices")
        if instance.m > 20:
            raise SizeLimit("walrasian verification capped at 20 items")
        partition = singleton_partition(instance.m)
        prices = list(outcome.item_prices)
        owned = list(x.bundles)  # singleton blocks align with items
        for j in bits_of(x.x0):
            if prices[j] != 0:
                seller_violations.append(
                    Violation("seller", block=1 << j, price=prices[j])
                )
    else:
        if outcome.prices is None:
            raise BadParams("bundle verification needs bundle prices")
        partition, owners = induced_partition(x)
        k = len(partition.blocks)
        if k > 20:
            raise SizeLimit(f"{k} blocks exceeds the demand enumeration cap")
        prices = [
            outcome.x0_price if o == UNALLOCATED else outcome.prices[o] for o in owners
        ]
        slot = {o: idx for idx, o in enumerate(owners)}
        owned = [1 << slot[i] if i in slot else 0 for i in range(instance.n)]
        if mode == MCCWE and x.x0 and outcome.x0_price != 0:
            seller_violations.append(
                Violation("seller", block=x.x0, price=outcome.x0_price)
            )

    k = len(partition.blocks)
    for i, v in enumerate(instance.agents):
        table = reduced_value_table(v, partition)
        best_mask, best_util = 0, _ZERO
        best_count = 0
        for mask in range(1, 1 << k):
            util = table[mask]
            for j in bits_of(mask):
                util -= prices[j]
            count = mask.bit_count()
            if util > best_util or (util == best_util and count < best_count):
                best_mask, best_util, best_count = mask, util, count
        own_util = table[owned[i]]
        for j in bits_of(owned[i]):
            own_util -= prices[j]
        if own_util < best_util:
            buyer_violations.append(
                Violation("buyer", agent=i, better_bundle=best_mask, gap=best_util - own_util)
            )

    buyer_violations.sort(key=lambda viol: (-viol.gap, viol.agent))
    seller_violations.sort(key=lambda viol: (-viol.price, viol.block))
    violations = tuple(buyer_violations + seller_violations)
    return VerifyReport(mode, not violations, violations)
