"""Conditional-table families: fuzzy weights, exact ratios, floor, combine."""

from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from competrace.cpd import (
    ConditionalTable,
    FuzzyTerm,
    combine,
    evidence_table,
    identity_table,
    inclusion_raw_columns,
    inclusion_table,
    phi,
    specialization_table,
    temporal_table,
)

# Normal-CDF weights at the five fuzzy offsets, frozen from a 30-digit
# mpmath evaluation (independent of the math.erfc implementation under test).
PHI_ORACLE = {
    0: 0.5,
    -1: 0.15865525393145705141,
    -2: 0.0227501319481792072,
    -3: 0.0013498980316300945267,
    -4: 3.1671241833119921254e-05,
}

PHI0 = PHI_ORACLE[0]
PHI1 = PHI_ORACLE[-1]
PHI2 = PHI_ORACLE[-2]
PHI3 = PHI_ORACLE[-3]
PHI4 = PHI_ORACLE[-4]


def col(table: ConditionalTable, j: int, raw: bool = False) -> np.ndarray:
    return (table.raw if raw else table.values)[:, j]


def normalized(entries) -> np.ndarray:
    v = np.array(entries, dtype=float)
    return v / v.sum()


def test_fuzzy_term_probabilities_match_oracle():
    for term in FuzzyTerm:
        assert term.probability == pytest.approx(
            PHI_ORACLE[term.value], abs=1e-10
        ), term


def test_phi_basics():
    assert phi(0.0) == 0.5
    xs = [-4, -3, -2, -1, 0, 1, 2]
    ys = [phi(x) for x in xs]
    assert all(a < b for a, b in zip(ys, ys[1:]))
    assert phi(1.0) == pytest.approx(1.0 - PHI1, abs=1e-12)
    with pytest.raises(ValueError):
        phi(float("nan"))
    with pytest.raises(ValueError):
        phi(float("inf"))


def test_specialization_raw_layout():
    t = specialization_table()
    assert np.allclose(col(t, 0, raw=True), [PHI0, PHI2, PHI3], atol=1e-10)
    assert np.allclose(col(t, 1, raw=True), [PHI1, PHI0, PHI2], atol=1e-10)
    assert np.allclose(col(t, 2, raw=True), [PHI2, PHI0, PHI1], atol=1e-10)


def test_specialization_normalized_by_column():
    t = specialization_table()
    assert np.allclose(col(t, 0), normalized([PHI0, PHI2, PHI3]), atol=1e-12)
    assert np.allclose(col(t, 2), normalized([PHI2, PHI0, PHI1]), atol=1e-12)


def test_inclusion_exact_ratios_n2():
    low, medium = inclusion_raw_columns(2)
    assert low == [Fraction(3, 5), Fraction(1, 5), Fraction(1, 5)]
    assert medium == [Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)]


@pytest.mark.parametrize("n", range(1, 6))
def test_inclusion_low_column_matches_level_counting(n):
    # Independent oracle: enumerate all 3**n sub-competence level assignments;
    # the super-competence is Low exactly when the minimum level is Low, and
    # the Low column is the conditional distribution of one sub-competence.
    counts = [0, 0, 0]
    total = 0
    for levels in product(range(3), repeat=n):
        if min(levels) == 0:
            total += 1
            counts[levels[0]] += 1
    low, _ = inclusion_raw_columns(n)
    assert low == [Fraction(c, total) for c in counts]


@pytest.mark.parametrize("n", range(1, 9))
def test_inclusion_columns_sum_to_one_exactly(n):
    low, medium = inclusion_raw_columns(n)
    assert sum(low) == 1
    assert sum(medium) == 1
    assert low[1] == low[2]
    assert low[0] == Fraction(3 ** (n - 1), 3**n - 2**n)
    assert medium[0] == Fraction(1, 2**n)


def test_inclusion_structural_zero_floored_at_n1():
    low, medium = inclusion_raw_columns(1)
    assert low == [Fraction(1), Fraction(0), Fraction(0)]
    assert medium == [Fraction(1, 2), Fraction(1, 2), Fraction(0)]
    t = inclusion_table(1)
    # raw keeps the zeros; values floor them to the smallest fuzzy weight
    assert col(t, 0, raw=True)[1] == 0.0
    assert (t.values > 0).all()
    assert np.allclose(col(t, 1), normalized([0.5, 0.5, PHI4]), atol=1e-12)
    assert np.allclose(col(t, 0), normalized([1.0, PHI4, PHI4]), atol=1e-12)


def test_inclusion_high_column_uses_fuzzy_weights():
    for n in (1, 2, 5):
        t = inclusion_table(n)
        assert np.allclose(col(t, 2, raw=True), [PHI3, PHI2, PHI0], atol=1e-10)
        assert np.allclose(col(t, 2), normalized([PHI3, PHI2, PHI0]), atol=1e-12)


def test_inclusion_rejects_bad_n():
    with pytest.raises(ValueError):
        inclusion_raw_columns(0)
    with pytest.raises(ValueError):
        inclusion_table(-1)


def test_evidence_raw_layout():
    t = evidence_table()
    assert np.allclose(col(t, 0, raw=True), [PHI0, PHI2, PHI3], atol=1e-10)
    assert np.allclose(col(t, 1, raw=True), [PHI1, PHI0, PHI1], atol=1e-10)
    assert np.allclose(col(t, 2, raw=True), [PHI2, PHI1, PHI0], atol=1e-10)


def test_evidence_medium_row_normalized():
    # The likelihood vector a Medium observation contributes, one entry per
    # competence level, each normalized within its own column.
    t = evidence_table()
    s_low = PHI0 + PHI2 + PHI3
    s_med = PHI0 + 2 * PHI1
    s_high = PHI0 + PHI1 + PHI2
    assert t.values[1, 0] == pytest.approx(PHI2 / s_low, abs=1e-12)
    assert t.values[1, 1] == pytest.approx(PHI0 / s_med, abs=1e-12)
    assert t.values[1, 2] == pytest.approx(PHI1 / s_high, abs=1e-12)


def test_temporal_raw_layout():
    t = temporal_table()
    assert np.allclose(col(t, 0, raw=True), [PHI0, PHI3, PHI4], atol=1e-10)
    assert np.allclose(col(t, 1, raw=True), [PHI3, PHI0, PHI4], atol=1e-10)
    assert np.allclose(col(t, 2, raw=True), [PHI4, PHI3, PHI0], atol=1e-10)


def test_temporal_medium_given_high():
    t = temporal_table()
    expected = PHI3 / (PHI0 + PHI3 + PHI4)
    assert t.values[1, 2] == pytest.approx(expected, abs=1e-12)


def test_temporal_relaxation_scale():
    stock = temporal_table(1.0)
    relaxed = temporal_table(0.5)
    # shrinking the offsets makes level changes more plausible ...
    assert relaxed.values[1, 0] > stock.values[1, 0]
    assert relaxed.values[2, 2] < stock.values[2, 2]
    # ... while the diagonal raw weight stays at the zero-offset value
    assert np.allclose(np.diag(relaxed.raw), 0.5, atol=1e-15)
    with pytest.raises(ValueError):
        temporal_table(0.0)
    with pytest.raises(ValueError):
        temporal_table(-1.0)


def test_identity_table_is_exact_copy():
    t = identity_table()
    assert np.array_equal(t.values, np.eye(3))
    assert np.array_equal(t.raw, np.eye(3))  # zero floor does not apply


@pytest.mark.parametrize(
    "make",
    [
        specialization_table,
        evidence_table,
        temporal_table,
        lambda: inclusion_table(1),
        lambda: inclusion_table(4),
        lambda: temporal_table(0.25),
    ],
)
def test_tables_are_column_stochastic_and_positive(make):
    t = make()
    assert np.allclose(t.values.sum(axis=0), 1.0, atol=1e-12)
    assert (t.values > 0).all()
    assert (t.values < 1).all()


@given(st.floats(min_value=0.05, max_value=5.0, allow_nan=False))
def test_temporal_any_scale_is_column_stochastic(scale):
    t = temporal_table(scale)
    assert np.allclose(t.values.sum(axis=0), 1.0, atol=1e-12)
    assert (t.values > 0).all()


@given(st.integers(min_value=1, max_value=12))
def test_inclusion_any_n_is_column_stochastic(n):
    t = inclusion_table(n)
    assert np.allclose(t.values.sum(axis=0), 1.0, atol=1e-12)
    assert (t.values > 0).all()


def test_combine_two_tables_hand_product():
    spec = specialization_table()
    incl = inclusion_table(2)
    joint = combine([(spec, "general"), (incl, "super")])
    assert joint.parents == ("general", "super")
    assert joint.values.shape == (3, 9)
    # column for (general=High, super=High): big-endian index 2*3+2
    expected = normalized(spec.values[:, 2] * incl.values[:, 2])
    assert np.allclose(joint.values[:, 8], expected, atol=1e-12)
    # column for (general=Low, super=Medium): index 0*3+1
    expected = normalized(spec.values[:, 0] * incl.values[:, 1])
    assert np.allclose(joint.values[:, 1], expected, atol=1e-12)
    assert np.allclose(joint.values.sum(axis=0), 1.0, atol=1e-12)


def test_combine_is_order_independent():
    spec = specialization_table()
    incl = inclusion_table(3)
    temp = temporal_table()
    a = combine([(spec, "x"), (incl, "y"), (temp, "z")])
    b = combine([(temp, "z"), (spec, "x"), (incl, "y")])
    assert a.parents == b.parents == ("x", "y", "z")
    assert np.array_equal(a.values, b.values)


def test_combine_single_table_passthrough():
    t = evidence_table()
    joint = combine([(t, "only")])
    assert joint.parents == ("only",)
    assert np.array_equal(joint.values, t.values)


def test_combine_rejects_bad_inputs():
    t = specialization_table()
    with pytest.raises(ValueError):
        combine([])
    with pytest.raises(ValueError):
        combine([(t, "a"), (t, "a")])
    joint = combine([(t, "a"), (evidence_table(), "b")])
    with pytest.raises(ValueError):
        combine([(joint, "c")])


def test_conditional_table_validation():
    eye = np.eye(3)
    with pytest.raises(ValueError):
        ConditionalTable("bad", eye[:2], eye[:2])  # wrong row count
    with pytest.raises(ValueError):
        ConditionalTable("bad", -eye, eye)  # negative raw entry
    with pytest.raises(ValueError):
        ConditionalTable("bad", eye, eye * 0.9)  # columns not stochastic
    with pytest.raises(ValueError):
        ConditionalTable("bad", np.ones((3, 4)) / 3, np.ones((3, 4)) / 3)


def test_conditional_table_is_immutable():
    t = specialization_table()
    with pytest.raises(ValueError):
        t.values[0, 0] = 0.0
