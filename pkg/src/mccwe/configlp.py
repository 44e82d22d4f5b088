"""Configuration LP over a partitioned market, and what it certifies.

For a partition into k blocks the LP has one variable y[i, S] per agent i
and nonempty block subset S, maximizing total reduced value subject to one
row per agent (at most one set) and one row per block (sold at most once).

An allocation is supportable as a market-clearing bundle equilibrium exactly
when this LP, built over the allocation's own induced partition, attains its
optimum at that allocation; supporting bundle prices then fall out of the
dual block variables by complementary slackness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import NotMCCWE, SizeLimit
from .lp import LE, MAX_VARIABLES, OPTIMAL, LinearProgram, solve_lp
from .market import (
    Allocation,
    Instance,
    Outcome,
    Partition,
    UNALLOCATED,
    induced_partition,
    reduced_value_table,
    singleton_partition,
    social_welfare,
)

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class ConfigLPSolution:
    value: Fraction
    y: dict  # (agent, bundle-set mask) -> Fraction, nonzero entries only
    dual_u: tuple[Fraction, ...]  # per agent
    dual_q: tuple[Fraction, ...]  # per block


def _check_size(n: int, k: int) -> None:
    if k > 16:
        raise SizeLimit(f"{k} blocks exceeds the configuration-LP cap")
    if n * (1 << k) > MAX_VARIABLES:
        raise SizeLimit("configuration LP would exceed the variable cap")


def build_config_lp(instance: Instance, partition: Partition) -> LinearProgram:
    """One variable per (agent, nonempty block subset); n + k rows."""
    n = instance.n
    k = len(partition.blocks)
    _check_size(n, k)
    sets_per_agent = (1 << k) - 1
    nvars = n * sets_per_agent

    objective = []
    for v in instance.agents:
        table = reduced_value_table(v, partition)
        objective.extend(table[1:])

    rows = []
    for i in range(n):
        coeffs = [_ZERO] * nvars
        base = i * sets_per_agent
        for s in range(sets_per_agent):
            coeffs[base + s] = _ONE
        rows.append((tuple(coeffs), LE, _ONE))
    for j in range(k):
        coeffs = [_ZERO] * nvars
        for i in range(n):
            base = i * sets_per_agent
            for mask in range(1, 1 << k):
                if mask >> j & 1:
                    coeffs[base + mask - 1] = _ONE
        rows.append((tuple(coeffs), LE, _ONE))
    return LinearProgram(tuple(objective), tuple(rows))


def fractional_opt(instance: Instance, partition: Partition) -> ConfigLPSolution:
    """Exact fractional optimum with its dual certificate."""
    lp = build_config_lp(instance, partition)
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL, "configuration LPs are feasible and bounded"
    n = instance.n
    k = len(partition.blocks)
    sets_per_agent = (1 << k) - 1
    y = {}
    for idx, val in enumerate(sol.primal):
        if val:
            agent, offset = divmod(idx, sets_per_agent)
            y[(agent, offset + 1)] = val
    dual_u = sol.dual[:n]
    dual_q = sol.dual[n:]
    assert sum(dual_u, _ZERO) + sum(dual_q, _ZERO) == sol.objective_value
    return ConfigLPSolution(sol.objective_value, y, dual_u, dual_q)


def is_mccwe_allocation(instance: Instance, x: Allocation) -> bool:
    """Does the LP over the allocation's own bundles peak at the allocation?"""
    partition, _owners = induced_partition(x)
    return fractional_opt(instance, partition).value == social_welfare(instance, x)


def is_walrasian_allocation(instance: Instance, x: Allocation) -> bool:
    """Item-pricing supportability: the singleton-partition LP peaks at x.

    A Walrasian equilibrium exists for the instance iff this holds at a
    welfare-optimal allocation.
    """
    value = fractional_opt(instance, singleton_partition(instance.m)).value
    return value == social_welfare(instance, x)


def supporting_prices(instance: Instance, x: Allocation) -> Outcome:
    """Bundle prices certifying the allocation, from the LP dual.

    Raises NotMCCWE (with the exact gap) when the fractional optimum
    strictly exceeds the allocation's welfare.
    """
    partition, owners = induced_partition(x)
    sol = fractional_opt(instance, partition)
    welfare = social_welfare(instance, x)
    if sol.value != welfare:
        raise NotMCCWE(sol.value - welfare)
    prices = [_ZERO] * instance.n
    for idx, owner in enumerate(owners):
        if owner == UNALLOCATED:
            # Complementary slackness: the unsold block's row is slack in the
            # integral optimum, so every optimal dual prices it at zero.
            assert sol.dual_q[idx] == 0, "unallocated block priced by the dual"
        else:
            prices[owner] = sol.dual_q[idx]
    return Outcome(x, prices=tuple(prices))


def integrality_gap(instance: Instance, partition: Partition) -> Fraction:
    """Fractional optimum over the best whole-block assignment."""
    from . import oracle

    frac = fractional_opt(instance, partition).value
    _assignment, integral = oracle.optimal_over_partition(instance, partition)
    if frac == integral:
        return _ONE
    return frac / integral
