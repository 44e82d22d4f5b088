"""Market data model: allocations, partitions, accounting identities."""

from fractions import Fraction

import pytest

from mccwe import (
    Allocation,
    BadParams,
    BudgetAdditive,
    CappedCardinalityAdditive,
    Instance,
    Outcome,
    Partition,
    SingleMinded,
    UNALLOCATED,
    allocation,
    full_surplus_outcome,
    induced_partition,
    reduced_value,
    revenue,
    singleton_partition,
    social_welfare,
    utility,
    value_query,
)
from mccwe.bits import mask_of

F = Fraction


def _fig1a_c2():
    # budget 4, interested in a2,a3,a4 with shared values (1,4,2,2)
    return BudgetAdditive(F(4), (F(0), F(4), F(2), F(2)))


def test_value_query_single_minded():
    v = SingleMinded(mask_of([0, 1]), F(5))
    assert value_query(v, mask_of([0, 1, 2])) == 5
    assert value_query(v, mask_of([0])) == 0


def test_value_query_budget_additive_caps():
    assert value_query(_fig1a_c2(), mask_of([2, 3])) == 4  # min(4, 2+2)


def test_reduced_value_empty_and_singletons():
    v = _fig1a_c2()
    p = singleton_partition(4)
    assert reduced_value(v, p, 0) == 0
    for j in range(4):
        assert reduced_value(v, p, 1 << j) == value_query(v, 1 << j)


def test_reduced_value_on_merged_block():
    # budget 2, unit values on two items grouped into one block
    v = BudgetAdditive(F(2), (F(1), F(1), F(0)))
    p = Partition(3, (mask_of([0, 1]), mask_of([2])))
    assert reduced_value(v, p, 0b01) == 2


def test_reduced_value_identical_budget_market_pair_block():
    # d1 on the block {a1,b1} of the no-equilibrium market: min(2, 1+1)
    from mccwe.instances import built_in

    inst = built_in("fig1b")
    d1 = inst.agents[2]
    pair = mask_of([2, 4])  # items a1 and b1
    blocks = (pair,) + tuple(1 << j for j in range(7) if not pair >> j & 1)
    p = Partition(7, blocks)
    idx = p.blocks.index(pair)
    assert reduced_value(d1, p, 1 << idx) == 2


def test_induced_partition_all_unallocated():
    x = Allocation(3, mask_of([0, 1, 2]), (0, 0))
    part, owners = induced_partition(x)
    assert part.blocks == (mask_of([0, 1, 2]),)
    assert owners == (UNALLOCATED,)


def test_induced_partition_two_singletons():
    x = allocation(2, [1 << 0, 1 << 1])
    part, owners = induced_partition(x)
    assert part.blocks == (1 << 0, 1 << 1)
    assert owners == (0, 1)


def test_induced_partition_orders_by_lowest_item():
    x = allocation(4, [mask_of([2]), mask_of([0, 1]), 0, mask_of([3]), 0])
    part, owners = induced_partition(x)
    assert part.blocks == (mask_of([0, 1]), mask_of([2]), mask_of([3]))
    assert owners == (1, 0, 3)


def test_allocation_rejects_overlap_and_gaps():
    with pytest.raises(BadParams):
        Allocation(2, 0, (0b01, 0b01))
    with pytest.raises(BadParams):
        Allocation(2, 0, (0b01,))


def test_social_welfare_empty_and_fig1a_row():
    agents = (
        BudgetAdditive(F(3), (F(1), F(4), F(0), F(0))),
        BudgetAdditive(F(4), (F(0), F(4), F(2), F(2))),
        BudgetAdditive(F(9, 10), (F(0), F(0), F(2), F(0))),
        BudgetAdditive(F(2), (F(0), F(0), F(2), F(2))),
        BudgetAdditive(F(9, 10), (F(0), F(0), F(0), F(2))),
    )
    inst = Instance(4, agents)
    empty = Allocation(4, mask_of([0, 1, 2, 3]), (0,) * 5)
    assert social_welfare(inst, empty) == 0
    per_item = allocation(4, [1 << 0, 1 << 1, 1 << 2, 1 << 3, 0])
    assert social_welfare(inst, per_item) == F(8) - F(1, 10)


def test_utility_revenue_capacity_two_bidder():
    # single-minded on a1 at 1; capacity-2 additive with values (R-1, R, R)
    R = F(100)
    buyer2 = CappedCardinalityAdditive((R - 1, R, R), 2)
    p = Partition(3, (mask_of([0]), mask_of([1, 2])))
    prices = (F(1), R + 2)
    assert utility(buyer2, p, 0b10, prices) == 98
    assert utility(buyer2, p, 0b01, prices) == 98

    inst = Instance(3, (SingleMinded(1 << 0, F(1)), buyer2))
    x = allocation(3, [mask_of([0]), mask_of([1, 2])])
    bundled = Outcome(x, prices=(F(1), R + 2))
    assert revenue(inst, bundled) == 103
    item_priced = Outcome(x, item_prices=(F(1), F(2), F(2)))
    assert revenue(inst, item_priced) == 5

    zero = Outcome(x, prices=(F(0), F(0)))
    assert revenue(inst, zero) == 0


def test_full_surplus_revenue_equals_welfare():
    inst = Instance(
        3,
        (
            SingleMinded(mask_of([0, 1]), F(7)),
            BudgetAdditive(F(2), (F(1), F(1), F(1))),
        ),
    )
    x = allocation(3, [mask_of([0, 1]), mask_of([2])])
    out = full_surplus_outcome(inst, x)
    assert revenue(inst, out) == social_welfare(inst, x)


def test_welfare_invariant_under_item_listing_order():
    inst = Instance(3, (BudgetAdditive(F(5), (F(1), F(2), F(3))),))
    a = allocation(3, [mask_of([0, 2, 1])])
    b = allocation(3, [mask_of([1, 0, 2])])
    assert social_welfare(inst, a) == social_welfare(inst, b)


def test_outcome_validation():
    x = allocation(2, [0b01, 0b10])
    with pytest.raises(BadParams):
        Outcome(x)  # no prices at all
    with pytest.raises(BadParams):
        Outcome(x, prices=(F(1),))  # wrong arity
    with pytest.raises(BadParams):
        Outcome(x, prices=(F(-1), F(0)))
    with pytest.raises(BadParams):
        Outcome(x, prices=(F(1), F(1)), item_prices=(F(0), F(0)))
    empty_second = allocation(2, [0b11, 0])
    with pytest.raises(BadParams):
        Outcome(empty_second, prices=(F(1), F(1)))  # price on an empty bundle


def test_reduced_value_of_owned_block_reproduces_value_query():
    agents = (
        BudgetAdditive(F(3), (F(1), F(4), F(0), F(0))),
        BudgetAdditive(F(4), (F(0), F(4), F(2), F(2))),
    )
    inst = Instance(4, agents)
    x = allocation(4, [mask_of([0, 1]), mask_of([3])])
    part, owners = induced_partition(x)
    for idx, owner in enumerate(owners):
        if owner != UNALLOCATED:
            v = inst.agents[owner]
            assert reduced_value(v, part, 1 << idx) == value_query(v, x.bundles[owner])


def test_uniform_field_validation():
    agents = (BudgetAdditive(F(2), (F(1), F(0))), BudgetAdditive(F(3), (F(1), F(2))))
    Instance(2, agents, uniform_item_values=(F(1), F(2)))
    with pytest.raises(BadParams):
        Instance(2, agents, uniform_item_values=(F(1), F(3)))
