import itertools
import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import business_days, obs
from tzeff.contract_calendar import ContractLabel, Segment, contract_for, tiles
from tzeff.errors import EmptySeriesError, NotReplicableError
from tzeff.ingest import Panel
from tzeff.replication import (
    DEFAULT_RATE,
    Compounding,
    WeightMode,
    WeightScheme,
    composition_for,
    discount_weight,
    months_to_delivery,
    quarterly_composition,
    replicate,
    weight_function,
    yearly_composition,
)

# Expected portfolio definitions by calendar month.
COMPOSITION_TABLE = {
    1: ["AQ11=1/3(M3 + M4 + M5)"],
    2: ["AQ11=1/3(M2 + M3 + M4)"],
    3: ["AQ11=1/3(M1 + M2 + M3)", "AQ21=1/3(M4 + M5 + M6)"],
    4: ["AQ12=1/3(M3 + M4 + M5)", "AY1=1/4(Q32+Q42+Q52+Q62)"],
    5: ["AQ12=1/3(M2 + M3 + M4)", "AY1=1/4(Q32+Q42+Q52+Q62)"],
    6: ["AQ12=1/3(M1 + M2 + M3)", "AQ22=1/3(M4 + M5 + M6)", "AY1=1/4(Q32+Q42+Q52+Q62)"],
    7: ["AQ13=1/3(M3 + M4 + M5)", "AY1=1/4(Q23+Q33+Q43+Q53)"],
    8: ["AQ13=1/3(M2 + M3 + M4)", "AY1=1/4(Q23+Q33+Q43+Q53)"],
    9: ["AQ13=1/3(M1 + M2 + M3)", "AQ23=1/3(M4 + M5 + M6)", "AY1=1/4(Q23+Q33+Q43+Q53)"],
    10: ["AQ14=1/3(M3 + M4 + M5)", "AY1=1/4(Q14+Q24+Q34+Q44)"],
    11: ["AQ14=1/3(M2 + M3 + M4)", "AY1=1/4(Q14+Q24+Q34+Q44)"],
    12: ["AQ14=1/3(M1 + M2 + M3)", "AQ24=1/3(M4 + M5 + M6)", "AY1=1/4(Q14+Q24+Q34+Q44)"],
}


def render(target, labels):
    """Table notation: monthly legs joined by ' + ', quarterly legs by '+'."""
    sep = " + " if target.segment is Segment.QUARTERLY else "+"
    return f"A{target}=1/{len(labels)}({sep.join(str(l) for l in labels)})"


def generated_table(month):
    t = date(2012, month, 15)
    c = (month - 1) // 3 + 1
    cells = []
    for b in (1, 2):
        target = ContractLabel(Segment.QUARTERLY, b, c)
        try:
            cells.append(render(target, quarterly_composition(b, c, month)))
        except NotReplicableError:
            pass
    if c > 1:
        cells.append(render(ContractLabel(Segment.YEARLY, 1), composition_for("Y1", t).labels))
    return cells


@pytest.mark.parametrize("month", range(1, 13))
def test_composition_table_verbatim(month):
    assert generated_table(month) == COMPOSITION_TABLE[month]


def test_first_quarter_yearly_portfolio():
    assert [str(l) for l in yearly_composition(1, 1)] == ["Q41", "Q51", "Q61", "Q71"]
    assert [str(l) for l in yearly_composition(1, 3)] == ["Q23", "Q33", "Q43", "Q53"]
    assert [str(l) for l in yearly_composition(1, 4)] == ["Q14", "Q24", "Q34", "Q44"]
    with pytest.raises(NotReplicableError):
        yearly_composition(2, 1)


def test_infeasible_quarterly():
    with pytest.raises(NotReplicableError, match="not replicable"):
        quarterly_composition(2, 1, 1)
    with pytest.raises(NotReplicableError):
        quarterly_composition(1, 2, 1)


def brute_force_compositions():
    """Every (target, month) pair for which some composition exists."""
    for month, b in itertools.product(range(1, 13), range(1, 8)):
        c = (month - 1) // 3 + 1
        try:
            yield ContractLabel(Segment.QUARTERLY, b, c), month, quarterly_composition(b, c, month)
        except NotReplicableError:
            continue
    for month in range(1, 13):
        yield ContractLabel(Segment.YEARLY, 1), month, yearly_composition(1, (month - 1) // 3 + 1)


def test_compositions_tile_target_delivery():
    found = list(brute_force_compositions())
    assert len(found) == 12 + 4 + 12
    for target, month, legs in found:
        t = date(2013, month, 1)
        periods = [contract_for(l, t).delivery for l in legs]
        assert tiles(periods, contract_for(target, t).delivery), (target, month)


def test_feasible_set_matches_exhaustive_search():
    # Independent oracle: search all triples of consecutive monthly labels that tile.
    for month, b in itertools.product(range(1, 13), range(1, 8)):
        t = date(2013, month, 1)
        target = contract_for(ContractLabel(Segment.QUARTERLY, b), t).delivery
        hits = [
            j for j in range(1, 5)
            if tiles([contract_for(f"M{j + i}", t).delivery for i in range(3)], target)
        ]
        c = (month - 1) // 3 + 1
        try:
            got = [quarterly_composition(b, c, month)[0].index]
        except NotReplicableError:
            got = []
        assert got == hits


def trunc4(x):
    return math.floor(x * 1e4) / 1e4


def test_discount_weight_fixtures():
    w = [discount_weight(j, DEFAULT_RATE) for j in (3, 4, 5)]
    assert [trunc4(x) for x in w] == [0.9943, 0.9925, 0.9906]
    assert w == pytest.approx([0.9943, 0.9925, 0.9906], abs=1e-4)
    assert discount_weight(0, 0.3) == 1.0
    assert discount_weight(0, 0.3, Compounding.ANNUAL) == 1.0
    with pytest.raises(ValueError):
        discount_weight(-1, 0.02)


def test_annual_compounding():
    assert discount_weight(12, 0.05, Compounding.ANNUAL) == pytest.approx(1 / 1.05)
    assert discount_weight(12, 0.05) == pytest.approx(math.exp(-0.05))
    w = [discount_weight(j, DEFAULT_RATE, Compounding.ANNUAL) for j in (3, 4, 5)]
    assert [trunc4(x) for x in w] == [0.9944, 0.9925, 0.9907]


def test_weight_function():
    assert [trunc4(w) for w in weight_function([3, 4, 5], DEFAULT_RATE)] == [0.3339, 0.3333, 0.3327]
    assert weight_function([3, 4, 5], DEFAULT_RATE) == pytest.approx([0.3339, 0.3333, 0.3327], abs=1e-4)
    assert weight_function([3, 4, 5], 0.07, WeightMode.EQUAL) == (1 / 3, 1 / 3, 1 / 3)
    assert weight_function([1], 0.05) == (1.0,)
    with pytest.raises(ValueError):
        weight_function([])


@given(st.lists(st.integers(0, 36), min_size=1, max_size=6), st.floats(0, 0.2))
def test_exact_weights_sum_to_one(js, r):
    assert abs(sum(weight_function(js, r)) - 1.0) < 1e-12


@given(st.floats(0, 0.05), st.lists(st.floats(40, 60), min_size=3, max_size=3))
def test_equal_vs_exact_deviation(r, legs):
    w = np.array(weight_function([3, 4, 5], r))
    gap = float(np.max(np.abs(w - 1 / 3)))
    diff = abs(float(w @ legs) - float(np.mean(legs)))
    assert diff <= max(legs) * gap * 3 + 1e-12
    assert diff < 1e-3 * float(np.mean(legs))


def test_months_to_delivery():
    jan = date(2012, 1, 10)
    assert [months_to_delivery(l, jan) for l in quarterly_composition(1, 1, 1)] == [3, 4, 5]
    assert [months_to_delivery(l, date(2012, 4, 2)) for l in yearly_composition(1, 2)] == [9, 12, 15, 18]


def test_composition_weights_exact_mode():
    comp = composition_for("Q11", date(2012, 1, 10), WeightScheme(WeightMode.EXACT))
    assert str(comp) == "M3+M4+M5"
    assert [trunc4(w) for w in comp.weights] == [0.3339, 0.3333, 0.3327]


def _leg_panel(prices, month=1):
    days = business_days(date(2012, month, 2), 3)
    rows = []
    for d in days:
        for j, p in zip((3, 4, 5), prices):
            rows.append(obs(d, contract_for(f"M{j}", d).code, p))
        rows.append(obs(d, contract_for("Q1", d).code, 50.0))
    return Panel("DE", tuple(rows))


@pytest.mark.parametrize(
    "prices, scheme, expected",
    [
        ((50, 50, 50), WeightScheme(WeightMode.EXACT), 50.0),
        ((48, 50, 52), WeightScheme(), 50.0),
        # 50 - 2 (w3 - w5) with unrounded weights.
        ((48, 50, 52), WeightScheme(WeightMode.EXACT), 49.99749),
    ],
)
def test_replicate_prices(prices, scheme, expected):
    p = replicate("Q11", _leg_panel(prices), scheme)
    assert len(p) == 3
    np.testing.assert_allclose(p.raw_prices, expected, atol=1e-5)
    assert set(p.contracts) == {"Q-2012Q2"}


def test_replicate_volume_is_min_leg_and_linear():
    panel = _leg_panel((48, 50, 52))
    p = replicate("Q11", panel)
    assert np.all(p.volumes == 10.0)
    a = replicate("Q11", _leg_panel((2 * 48 + 1, 2 * 50 + 1, 2 * 52 + 1)))
    np.testing.assert_allclose(a.raw_prices, 2 * p.raw_prices + 1)


def test_replicate_skips_missing_legs():
    panel = _leg_panel((48, 50, 52))
    rows = [o for o in panel.observations if not (o.contract_code == "M-2012-04" and o.date == panel.index[1])]
    p = replicate("Q11", Panel("DE", tuple(rows)))
    assert p.dates == (panel.index[0], panel.index[2])


def test_replicate_empty():
    with pytest.raises(EmptySeriesError):
        replicate("Q11", _leg_panel((48, 50, 52), month=2).__class__("DE", ()))
    with pytest.raises(NotReplicableError):
        composition_for("M1", date(2012, 1, 2))


def test_replicate_matches_target_on_clean_market(clean_panel):
    for label in ["Q11", "Q12", "Q13", "Q14", "Q21", "Y1"]:
        p = replicate(label, clean_panel)
        s = clean_panel.series(label).subset(p.dates)
        assert s.dates == p.dates
        np.testing.assert_allclose(p.raw_prices, s.raw_prices, atol=1e-9)
