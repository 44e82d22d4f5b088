"""Constructive mechanisms returning priced, market-clearing outcomes.

Each mechanism returns a bundle-priced Outcome whose prices are the owners'
values (full surplus), so revenue equals welfare wherever that postcondition
is part of the contract.  All argmax ties break deterministically: larger
value or gap first, then lower agent index, then the numerically smaller
item mask.

Traces: pass a MechanismTrace to record every allocation edit; replaying a
trace from the mechanism's starting allocation reproduces its output
exactly (see replay_trace).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import oracle as oracle_mod
from .bits import bits_of, full_mask
from .errors import (
    NotIdenticalBudgets,
    NotSingleMinded,
    NotSuperadditive,
    NotUniformBudgetAdditive,
    SizeLimit,
)
from .market import (
    Allocation,
    Instance,
    Outcome,
    Partition,
    UNALLOCATED,
    full_surplus_outcome,
    social_welfare,
)
from .valuations import (
    SingleMinded,
    is_superadditive_family,
    is_uniform_budget_additive,
    relative_demand_query,
    shared_item_values,
    value_table,
)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class TraceStep:
    phase: str
    agent: int | None  # None means the items return to the open pool
    items: int
    welfare_before: Fraction
    welfare_after: Fraction


@dataclass
class MechanismTrace:
    mechanism: str = ""
    steps: list[TraceStep] = field(default_factory=list)


class _State:
    """Mutable allocation under construction, with trace recording."""

    def __init__(self, instance, start: Allocation, trace):
        self.instance = instance
        self.bundles = list(start.bundles)
        self.x0 = start.x0
        self.trace = trace

    def welfare(self) -> Fraction:
        total = _ZERO
        for v, b in zip(self.instance.agents, self.bundles):
            total += v.value(b)
        return total

    def give(self, phase: str, agent: int | None, items: int) -> None:
        """Move `items` (from wherever they sit) to `agent`, or to the pool."""
        before = self.welfare() if self.trace is not None else None
        self.x0 &= ~items
        for j in range(len(self.bundles)):
            self.bundles[j] &= ~items
        if agent is None:
            self.x0 |= items
        else:
            self.bundles[agent] |= items
        if self.trace is not None:
            self.trace.steps.append(
                TraceStep(phase, agent, items, before, self.welfare())
            )

    def take_all(self, phase: str, agent: int) -> None:
        self.give(phase, agent, full_mask(self.instance.m))

    def allocation(self) -> Allocation:
        return Allocation(self.instance.m, self.x0, tuple(self.bundles))


def replay_trace(instance: Instance, start: Allocation, trace: MechanismTrace) -> Allocation:
    """Re-apply a trace's moves; the result equals the mechanism's output."""
    state = _State(instance, start, None)
    for step in trace.steps:
        state.give(step.phase, step.agent, step.items)
    return state.allocation()


def _empty_allocation(instance: Instance) -> Allocation:
    return Allocation(instance.m, full_mask(instance.m), (0,) * instance.n)


def _require_superadditive(instance: Instance) -> None:
    for i, v in enumerate(instance.agents):
        if not is_superadditive_family(v):
            raise NotSuperadditive(f"agent {i} is not super-additive")


def bundle_efficient_full_surplus(
    instance: Instance, partition: Partition, trace: MechanismTrace | None = None
) -> Outcome:
    """Optimal whole-block assignment priced at full surplus.

    With super-additive agents a bundle-efficient allocation supports its
    own full-surplus prices, so revenue equals welfare.
    """
    _require_superadditive(instance)
    if len(partition.blocks) > 12:
        raise SizeLimit("bundle-efficient search capped at 12 blocks")
    if trace is not None and not trace.mechanism:
        trace.mechanism = "fullsurplus"
    owners, _value = oracle_mod.optimal_over_partition(instance, partition)
    state = _State(instance, _empty_allocation(instance), trace)
    for block, owner in zip(partition.blocks, owners):
        if owner != UNALLOCATED:
            state.give("assign", owner, block)
    return full_surplus_outcome(instance, state.allocation())


def log_bundling_mechanism(
    instance: Instance, trace: MechanismTrace | None = None
) -> Outcome:
    """Group items into ceil(log2 m) near-equal contiguous blocks, then sell
    them bundle-efficiently at full surplus."""
    _require_superadditive(instance)
    m = instance.m
    k = max(1, (m - 1).bit_length())
    base, extra = divmod(m, k)
    blocks = []
    start = 0
    for idx in range(k):
        size = base + (1 if idx < extra else 0)
        blocks.append(((1 << size) - 1) << start)
        start += size
    if trace is not None:
        trace.mechanism = "logbundle"
    return bundle_efficient_full_surplus(instance, Partition(m, tuple(blocks)), trace)


def superadditive_mccwe(
    instance: Instance, trace: MechanismTrace | None = None
) -> Outcome:
    """Density-greedy bundling for super-additive agents.

    Phase 1 repeatedly hands the highest value-per-item set to its agent
    until no items remain, then a single winner takes everything if that
    beats the running welfare.  Phase 2 merges bundle groups toward the
    agent with the largest strict surplus over their current prices until
    no such surplus exists; that surplus check is also answered through a
    demand query on the bundled market and the two routes must agree.
    """
    _require_superadditive(instance)
    m, n = instance.m, instance.n
    if m > 24:
        raise SizeLimit("density phase capped at 24 items")
    if n > 16:
        raise SizeLimit("merge phase capped at 16 agents")
    if trace is not None:
        trace.mechanism = "superadditive"
    tables = (
        [value_table(v, m) for v in instance.agents] if m <= 16 else None
    )
    state = _State(instance, _empty_allocation(instance), trace)

    pool = full_mask(m)
    while pool:
        best = None
        for i, v in enumerate(instance.agents):
            found, density = relative_demand_query(
                v, pool, tables[i] if tables else None
            )
            if best is None or density > best[0]:
                best = (density, i, found)
        _density, agent, found = best
        state.give("density", agent, found)
        pool &= ~found

    welfare = state.welfare()
    top_agent, top_value = 0, instance.agents[0].value(full_mask(m))
    for i in range(1, n):
        value = instance.agents[i].value(full_mask(m))
        if value > top_value:
            top_agent, top_value = i, value
    if top_value > welfare:
        state.take_all("winner_take_all", top_agent)

    merges = 0
    while True:
        move = _best_merge(instance, state.bundles, tables)
        demand_gap = _best_merge_gap_by_demand(instance, state.bundles, tables)
        if move is None:
            assert demand_gap <= 0, "demand route found a merge enumeration missed"
            break
        assert move[0] == demand_gap, "merge-gap routes disagree"
        merges += 1
        assert merges <= n * n, "merge phase exceeded its halting bound"
        _gap, _size, agent, group_mask = move
        union = 0
        for j in bits_of(group_mask):
            union |= state.bundles[j]
        state.give("merge", agent, union)

    return full_surplus_outcome(instance, state.allocation())


def _value(instance, tables, agent, mask):
    return tables[agent][mask] if tables else instance.agents[agent].value(mask)


def _best_merge(instance, bundles, tables):
    """Max of v_i(union of group bundles) minus the group's bundle values.

    Ties: smaller group, then smaller (agent, group mask).  None when no
    group yields a strict surplus.
    """
    n = len(bundles)
    owner_values = [_value(instance, tables, j, bundles[j]) for j in range(n)]
    unions = [0] * (1 << n)
    totals = [_ZERO] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        j = low.bit_length() - 1
        unions[mask] = unions[mask ^ low] | bundles[j]
        totals[mask] = totals[mask ^ low] + owner_values[j]
    best = None
    for i in range(n):
        for mask in range(1, 1 << n):
            gap = _value(instance, tables, i, unions[mask]) - totals[mask]
            if gap <= 0:
                continue
            size = mask.bit_count()
            if (
                best is None
                or gap > best[0]
                or (gap == best[0] and (size, i, mask) < (best[1], best[2], best[3]))
            ):
                best = (gap, size, i, mask)
    return best


def _best_merge_gap_by_demand(instance, bundles, tables):
    """The same maximal surplus, via one demand query per agent on the
    bundled market at full-surplus prices."""
    blocks = [(j, bundles[j]) for j in range(len(bundles)) if bundles[j]]
    prices = [_value(instance, tables, j, b) for j, b in blocks]
    k = len(blocks)
    best = _ZERO
    for i in range(len(instance.agents)):
        for mask in range(1, 1 << k):
            union = 0
            cost = _ZERO
            for idx in bits_of(mask):
                union |= blocks[idx][1]
                cost += prices[idx]
            util = _value(instance, tables, i, union) - cost
            if util > best:
                best = util
    return best


def single_minded_mccwe(
    instance: Instance, trace: MechanismTrace | None = None
) -> Outcome:
    """Greedy small-set winners, then large bidders buy out whoever blocks
    them, all at full-surplus prices.

    Small means |desired|^2 <= m (exact integer arithmetic, no roots).
    Leftover items join the lowest-index nonempty bundle; when nobody has a
    small set, the highest-value bidder simply takes everything.
    """
    for i, v in enumerate(instance.agents):
        if not isinstance(v, SingleMinded):
            raise NotSingleMinded(f"agent {i} is not single-minded")
    m, n = instance.m, instance.n
    if trace is not None:
        trace.mechanism = "singleminded"
    desired = [v.desired for v in instance.agents]
    values = [v.value_if_served for v in instance.agents]
    state = _State(instance, _empty_allocation(instance), trace)

    small = [i for i in range(n) if desired[i].bit_count() ** 2 <= m]
    taken = 0
    for i in sorted(small, key=lambda i: (-values[i], i)):
        if desired[i] & taken == 0:
            state.give("greedy", i, desired[i])
            taken |= desired[i]

    if taken:
        leftovers = full_mask(m) & ~taken
        if leftovers:
            lowest = next(j for j in range(n) if state.bundles[j])
            state.give("leftover", lowest, leftovers)
    else:
        top = max(range(n), key=lambda i: (values[i], -i))
        state.take_all("winner_take_all", top)

    for i in sorted((i for i in range(n) if i not in small), key=lambda i: (-values[i], i)):
        blockers = [j for j in range(n) if state.bundles[j] & desired[i]]
        if blockers and values[i] > sum((values[j] for j in blockers), _ZERO):
            union = 0
            for j in blockers:
                union |= state.bundles[j]
            state.give("transfer", i, union)

    return full_surplus_outcome(instance, state.allocation())


def _require_uniform(instance: Instance) -> None:
    if not is_uniform_budget_additive(instance):
        raise NotUniformBudgetAdditive("agents must share per-item values")


def _interested_prepass(instance: Instance, state: _State, phase: str) -> None:
    """Put every item in the hands of someone who values it.

    Items held by a zero-value agent (or sitting unallocated while someone
    wants them) move to the lowest-index interested agent; items nobody
    values end up unallocated.  Welfare never decreases.
    """
    for j in range(instance.m):
        bit = 1 << j
        holder = None
        for i, b in enumerate(state.bundles):
            if b & bit:
                holder = i
                break
        if holder is not None and instance.agents[holder].item_values[j] > 0:
            continue
        wanted_by = next(
            (i for i, v in enumerate(instance.agents) if v.item_values[j] > 0), None
        )
        if wanted_by is not None:
            state.give(phase, wanted_by, bit)
        elif holder is not None:
            state.give(phase, None, bit)


def uniform_budget_additive_mccwe(
    instance: Instance, x: Allocation, trace: MechanismTrace | None = None
) -> Outcome:
    """Budget-ordered rebalance of a given allocation.

    Processing agents from the smallest budget up, while anyone values an
    agent's bundle strictly more than its owner does, the owner's cheapest
    item wanted by a strictly-larger budget moves to the largest-budget
    agent interested in it.  Afterwards every bundle is worth most to its
    owner, which makes full-surplus prices market-clearing, and the final
    welfare is at least half the input's.
    """
    _require_uniform(instance)
    if trace is not None:
        trace.mechanism = "uniform_budget_additive"
    n = instance.n
    shared = shared_item_values(instance)
    budgets = [v.budget for v in instance.agents]
    state = _State(instance, x, trace)
    _interested_prepass(instance, state, "reassign")

    moves = 0
    for i in sorted(range(n), key=lambda i: (budgets[i], i)):
        while True:
            bundle = state.bundles[i]
            own = instance.agents[i].value(bundle)
            if all(
                instance.agents[other].value(bundle) <= own
                for other in range(n)
                if other != i
            ):
                break
            movable = [
                j
                for j in bits_of(bundle)
                if any(
                    budgets[other] > budgets[i]
                    and instance.agents[other].item_values[j] > 0
                    for other in range(n)
                )
            ]
            assert movable, "an envied bundle always holds a movable item"
            j = min(movable, key=lambda j: (shared[j], j))
            recipient = None
            for other in range(n):
                if instance.agents[other].item_values[j] > 0 and (
                    recipient is None or budgets[other] > budgets[recipient]
                ):
                    recipient = other
            moves += 1
            assert moves <= n * instance.m, "rebalance exceeded its move bound"
            state.give("move", recipient, 1 << j)

    return full_surplus_outcome(instance, state.allocation())


def identical_budget_cleanup(
    instance: Instance, x: Allocation, trace: MechanismTrace | None = None
) -> Outcome:
    """Hand every item to someone who values it; with identical budgets the
    result supports full-surplus prices with no welfare loss."""
    _require_uniform(instance)
    if len({v.budget for v in instance.agents}) > 1:
        raise NotIdenticalBudgets("agents' budgets differ")
    if trace is not None:
        trace.mechanism = "identical_budget_cleanup"
    state = _State(instance, x, trace)
    _interested_prepass(instance, state, "cleanup")
    return full_surplus_outcome(instance, state.allocation())
