"""Built-in markets, random families, and serialization round-trips."""

from fractions import Fraction

import pytest

from mccwe import BadParams, Outcome, ParseError, allocation, classify
from mccwe.bits import items_of
from mccwe.instances import (
    InstanceSpec,
    built_in,
    generate,
    parse_allocation,
    parse_instance,
    parse_outcome,
    parse_rational,
    write_instance,
    write_outcome,
)
from mccwe.oracle import optimal_integral

F = Fraction


def test_fig1a_classification():
    report = classify(built_in("fig1a", eps=F(1, 10)))
    assert report.uniform_budget_additive
    assert not report.identical_budgets


def test_fig1b_classification():
    report = classify(built_in("fig1b"))
    assert report.uniform_budget_additive
    assert report.identical_budgets


def test_nonuniform_example_not_uniform():
    report = classify(built_in("nonuniform_identical_budget"))
    assert not report.uniform_budget_additive
    assert report.identical_budgets


def test_bundling_necessity_combinatorics():
    inst = built_in("bundling_necessity", m=16)
    assert inst.n == 5
    smalls = [v.desired for v in inst.agents[:-1]]
    for s in smalls:
        assert s.bit_count() == 4
    for i in range(4):
        for j in range(i + 1, 4):
            assert (smalls[i] & smalls[j]).bit_count() == 1
    for item in range(16):
        assert sum(1 for s in smalls if s >> item & 1) <= 2
    assert inst.agents[-1].desired == (1 << 16) - 1
    assert inst.agents[-1].value_if_served == 16


def test_bundling_necessity_rejects_non_squares():
    with pytest.raises(BadParams):
        built_in("bundling_necessity", m=12)
    with pytest.raises(BadParams):
        built_in("bundling_necessity", m=1)


def test_eps_validation():
    with pytest.raises(BadParams):
        built_in("fig1a", eps=F(1))
    with pytest.raises(BadParams):
        built_in("nonuniform_identical_budget", eps=F(0))


def test_partition_reduction_balanced_split():
    inst = built_in("partition_reduction", weights=(1, 1, 2))
    _x, welfare = optimal_integral(inst)
    assert welfare == 4  # balanced split exists: {2} vs {0,1}
    lopsided = built_in("partition_reduction", weights=(1, 1, 6))
    _x, welfare = optimal_integral(lopsided)
    assert welfare < 8


def test_generator_determinism():
    a = generate("random_single_minded", 4, 3, seed=1)
    b = generate("random_single_minded", 4, 3, seed=1)
    assert a == b
    c = generate("random_single_minded", 4, 3, seed=2)
    assert a != c


def test_random_superadditive_really_is():
    for seed in range(30):
        inst = generate("random_superadditive", 5, 3, seed)
        assert classify(inst).superadditive


def test_random_uniform_flags():
    inst = generate("random_uniform_budget_additive", 4, 3, 9, identical_budgets=True)
    report = classify(inst)
    assert report.uniform_budget_additive
    assert report.identical_budgets


def test_instance_spec_builds():
    assert InstanceSpec("fig1b").build() == built_in("fig1b")
    spec = InstanceSpec("random_single_minded", {"m": 3, "n": 2, "seed": 4})
    assert spec.build() == generate("random_single_minded", 3, 2, 4)
    with pytest.raises(BadParams):
        InstanceSpec("mystery").build()


def test_instance_round_trips():
    corpus = [
        built_in("fig1a", eps=F(1, 10)),
        built_in("fig1b"),
        built_in("revenue_example", big=F(100)),
        built_in("bundling_necessity", m=16),
        built_in("nonuniform_identical_budget", eps=F(1, 8)),
        built_in("partition_reduction", weights=(1, 1, 2)),
    ]
    for inst in corpus:
        assert parse_instance(write_instance(inst)) == inst


def test_random_instance_round_trips():
    for seed in range(60):
        for family, m, n in (
            ("random_superadditive", 4, 2),
            ("random_single_minded", 5, 3),
            ("random_uniform_budget_additive", 4, 3),
        ):
            inst = generate(family, m, n, seed)
            assert parse_instance(write_instance(inst)) == inst


def test_outcome_round_trip():
    x = allocation(3, [0b001, 0b110])
    for out in (
        Outcome(x, prices=(F(1), F(51, 2))),
        Outcome(x, item_prices=(F(1), F(2), F(2))),
        Outcome(allocation(3, [0b001, 0b010]), prices=(F(1), F(1)), x0_price=F(0)),
    ):
        assert parse_outcome(write_outcome(out), 3) == out
        assert parse_outcome(write_outcome(out)) == out  # m inferred


def test_parse_allocation_accepts_outcome_documents():
    x = allocation(3, [0b001, 0b110])
    text = write_outcome(Outcome(x, prices=(F(0), F(0))))
    assert parse_allocation(text, 3) == x


def test_parse_rational_errors():
    assert parse_rational("3/4", "f") == F(3, 4)
    assert parse_rational("-2", "f") == -2
    with pytest.raises(ParseError):
        parse_rational("1/0", "f")
    with pytest.raises(ParseError):
        parse_rational("0.5", "f")
    with pytest.raises(ParseError):
        parse_rational("x", "f")


def test_parse_instance_errors_name_location():
    good = write_instance(built_in("fig1b"))
    with pytest.raises(ParseError, match="format"):
        parse_instance(good.replace('"format": 1', '"format": 2'))
    with pytest.raises(ParseError, match="agents"):
        parse_instance(good.replace('"budget": "2"', '"budget": "1/0"'))
    with pytest.raises(ParseError, match="line"):
        parse_instance(good[:-3])


def test_parse_outcome_price_arity_mismatch():
    x = allocation(2, [0b01, 0b10])
    text = write_outcome(Outcome(x, prices=(F(1), F(1))))
    broken = text.replace('"agents": [\n      "1",\n      "1"\n    ]', '"agents": ["1"]')
    assert broken != text
    with pytest.raises(ParseError, match="bundle"):
        parse_outcome(broken, 2)
