"""Factor algebra and the two inference engines against hand oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from competrace.inference import (
    ENUMERATION_GUARD,
    Factor,
    InconsistentEvidenceError,
    InferenceError,
    StateSpaceGuardError,
    Variable,
    condition,
    eliminate,
    enumerate_joint,
    marginalize,
    multiply,
    variables,
)

P_A = np.array([0.2, 0.3, 0.5])
# cpt[b, a] = P(B = b | A = a)
CPT_AB = np.array(
    [
        [0.7, 0.2, 0.1],
        [0.2, 0.5, 0.3],
        [0.1, 0.3, 0.6],
    ]
)
CPT_BC = np.array(
    [
        [0.6, 0.3, 0.05],
        [0.3, 0.4, 0.15],
        [0.1, 0.3, 0.8],
    ]
)


def chain_factors():
    return [
        Factor(("a",), P_A),
        Factor(("b", "a"), CPT_AB),
        Factor(("c", "b"), CPT_BC),
    ]


def test_posterior_matches_bayes_rule():
    # P(A | B=1) by direct Bayes: prior times the b=1 row, renormalized.
    expected = P_A * CPT_AB[1, :]
    expected = expected / expected.sum()
    for engine in (eliminate, enumerate_joint):
        result = engine(chain_factors()[:2], {"b": 1}, ["a"])
        assert np.allclose(result["a"], expected, atol=1e-12)


def test_chain_marginal_matches_matrix_product():
    expected = CPT_BC @ (CPT_AB @ P_A)
    for engine in (eliminate, enumerate_joint):
        result = engine(chain_factors(), {}, ["c"])
        assert np.allclose(result["c"], expected, atol=1e-12)


def test_evidence_at_the_far_end_of_the_chain():
    # P(A | C=2) via explicit joint summation.
    joint = np.einsum("a,ba,cb->abc", P_A, CPT_AB, CPT_BC)
    expected = joint[:, :, 2].sum(axis=1)
    expected = expected / expected.sum()
    for engine in (eliminate, enumerate_joint):
        result = engine(chain_factors(), {"c": 2}, ["a"])
        assert np.allclose(result["a"], expected, atol=1e-12)


def test_query_on_evidence_variable_is_point_mass():
    for engine in (eliminate, enumerate_joint):
        result = engine(chain_factors(), {"b": 2}, ["b", "a"])
        assert np.array_equal(result["b"], [0.0, 0.0, 1.0])


def test_marginals_are_normalized():
    result = eliminate(chain_factors(), {"c": 0}, ["a", "b"])
    for var in ("a", "b"):
        assert result[var].sum() == pytest.approx(1.0, abs=1e-12)
        assert (result[var] >= 0).all()


def test_multiply_on_disjoint_and_overlapping_scopes():
    f = Factor(("x",), np.array([1.0, 2.0]))
    g = Factor(("y",), np.array([3.0, 4.0, 5.0]))
    prod = multiply(f, g)
    assert prod.scope == ("x", "y")
    assert np.array_equal(prod.values, np.outer([1, 2], [3, 4, 5]))

    h = Factor(("y", "x"), np.arange(6.0).reshape(3, 2))
    prod2 = multiply(g, h)
    assert prod2.scope == ("y", "x")
    assert np.array_equal(prod2.values, np.array([3.0, 4, 5])[:, None] * h.values)


def test_multiply_rejects_conflicting_cardinalities():
    f = Factor(("x",), np.ones(2))
    g = Factor(("x",), np.ones(3))
    with pytest.raises(InferenceError):
        multiply(f, g)


def test_marginalize_and_condition():
    f = Factor(("x", "y"), np.arange(6.0).reshape(2, 3))
    summed = marginalize(f, "y")
    assert summed.scope == ("x",)
    assert np.array_equal(summed.values, [3.0, 12.0])
    sliced = condition(f, "y", 1)
    assert sliced.scope == ("x",)
    assert np.array_equal(sliced.values, [1.0, 4.0])
    with pytest.raises(InferenceError):
        marginalize(f, "z")
    with pytest.raises(InferenceError):
        condition(f, "y", 3)


def test_factor_validation():
    with pytest.raises(ValueError):
        Factor(("x", "x"), np.ones((2, 2)))
    with pytest.raises(ValueError):
        Factor(("x",), np.ones((2, 2)))
    with pytest.raises(ValueError):
        Factor(("x",), np.array([-0.1, 1.1]))
    f = Factor(("x",), np.ones(3))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_variable_cardinality_floor():
    assert Variable("v").cardinality == 3
    with pytest.raises(ValueError):
        Variable("v", 1)


def test_variables_conflict_detection():
    fs = [Factor(("x",), np.ones(2)), Factor(("x", "y"), np.ones((3, 2)))]
    with pytest.raises(InferenceError):
        variables(fs)


def test_unknown_query_and_evidence_variables():
    fs = chain_factors()
    for engine in (eliminate, enumerate_joint):
        with pytest.raises(InferenceError):
            engine(fs, {}, ["nope"])
        with pytest.raises(InferenceError):
            engine(fs, {"nope": 0}, ["a"])


def test_inconsistent_evidence_raises():
    copy = Factor(("b", "a"), np.eye(3))
    fs = [Factor(("a",), np.ones(3) / 3), copy]
    for engine in (eliminate, enumerate_joint):
        with pytest.raises(InconsistentEvidenceError):
            engine(fs, {"a": 0, "b": 1}, ["a"])


def test_disconnected_components():
    fs = chain_factors() + [Factor(("lonely",), np.array([0.25, 0.25, 0.5]))]
    for engine in (eliminate, enumerate_joint):
        result = engine(fs, {"b": 0}, ["lonely", "a"])
        assert np.allclose(result["lonely"], [0.25, 0.25, 0.5], atol=1e-12)


def test_enumeration_guard_counts_post_evidence_states():
    # 15 ternary variables in a chain: 3**15 > guard, but conditioning two
    # of them leaves 3**13 < guard, so evidence must be applied first.
    n = 15
    assert 3**n > ENUMERATION_GUARD > 3 ** (n - 2)
    rng = np.random.default_rng(7)
    fs = [Factor(("v0",), np.ones(3) / 3)]
    for i in range(1, n):
        fs.append(
            Factor((f"v{i}", f"v{i-1}"), rng.uniform(0.1, 1.0, size=(3, 3)))
        )
    with pytest.raises(StateSpaceGuardError):
        enumerate_joint(fs, {}, ["v0"])
    conditioned = enumerate_joint(fs, {"v3": 1, "v9": 2}, ["v0"])
    full = eliminate(fs, {"v3": 1, "v9": 2}, ["v0"])
    assert np.allclose(conditioned["v0"], full["v0"], atol=1e-9)


def test_eliminate_is_deterministic():
    a = eliminate(chain_factors(), {"c": 1}, ["a", "b"])
    b = eliminate(chain_factors(), {"c": 1}, ["a", "b"])
    for var in ("a", "b"):
        assert np.array_equal(a[var], b[var])


@st.composite
def factor_graphs(draw):
    n = draw(st.integers(min_value=2, max_value=5))
    ids = [f"v{i}" for i in range(n)]
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    rng = np.random.default_rng(seed)
    n_factors = draw(st.integers(min_value=1, max_value=4))
    factors = []
    covered = set()
    for _ in range(n_factors):
        size = draw(st.integers(min_value=1, max_value=min(3, n)))
        scope = tuple(draw(st.permutations(ids))[:size])
        factors.append(Factor(scope, rng.uniform(0.1, 1.0, size=(3,) * size)))
        covered.update(scope)
    for vid in ids:
        if vid not in covered:
            factors.append(Factor((vid,), rng.uniform(0.1, 1.0, size=3)))
    n_evidence = draw(st.integers(min_value=0, max_value=n - 1))
    ev_vars = draw(st.permutations(ids))[:n_evidence]
    evidence = {v: draw(st.integers(min_value=0, max_value=2)) for v in ev_vars}
    return factors, evidence, ids


@settings(max_examples=60, deadline=None)
@given(factor_graphs())
def test_engines_agree_on_random_graphs(case):
    factors, evidence, ids = case
    fast = eliminate(factors, evidence, ids)
    fast_flipped = eliminate(factors, evidence, ids, reverse_ties=True)
    slow = enumerate_joint(factors, evidence, ids)
    for vid in ids:
        assert np.abs(fast[vid] - slow[vid]).max() <= 1e-9
        assert np.abs(fast_flipped[vid] - slow[vid]).max() <= 1e-9
        assert fast[vid].sum() == pytest.approx(1.0, abs=1e-9)
