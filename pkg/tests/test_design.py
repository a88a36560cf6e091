import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import nondecreasing_tuples
from pinvforecast.design import (
    DesignMatrix,
    MonomialBasis,
    build_design_matrix,
    count_terms,
    enumerate_monomials,
    evaluate_monomials,
    total_coefficients,
)
from pinvforecast.embedding import EmbeddingConfig, Series, delay_embed
from pinvforecast.errors import DimensionError, NumericalError


def test_count_terms_examples():
    assert count_terms(5, 1) == 5
    assert count_terms(5, 2) == len(nondecreasing_tuples(5, 2)) == 15
    assert count_terms(5, 3) == len(nondecreasing_tuples(5, 3)) == 35


@pytest.mark.parametrize("d,k", [(d, k) for d in range(1, 7) for k in range(1, 5)])
def test_count_terms_matches_enumeration(d, k):
    assert count_terms(d, k) == len(nondecreasing_tuples(d, k))


def test_count_terms_large_and_overflow():
    assert count_terms(32, 32) == 916312070471295267
    with pytest.raises(NumericalError):
        count_terms(200, 100)
    with pytest.raises(DimensionError):
        count_terms(0, 1)


def test_total_coefficients_benchmark_values():
    assert total_coefficients(5, 3) == 56
    assert total_coefficients(4, 3) == 35
    assert total_coefficients(7, 0) == 1


def test_enumerate_small_bases():
    assert enumerate_monomials(2, 2).terms == ((), (1,), (2,), (1, 1), (1, 2), (2, 2))
    assert enumerate_monomials(1, 3).terms == ((), (1,), (1, 1), (1, 1, 1))
    assert len(enumerate_monomials(5, 3)) == 56


@pytest.mark.parametrize("d,np_", [(1, 0), (3, 2), (4, 3), (5, 3), (6, 4)])
def test_basis_invariants(d, np_):
    basis = enumerate_monomials(d, np_)
    assert basis.terms[0] == ()
    assert len(basis) == total_coefficients(d, np_)
    degrees = [len(t) for t in basis.terms]
    assert degrees == sorted(degrees)
    for k in range(1, np_ + 1):
        block = [t for t in basis.terms if len(t) == k]
        assert block == sorted(set(block))
        assert block == nondecreasing_tuples(d, k)
        assert all(list(t) == sorted(t) for t in block)


def _series_with_row(row, target=0.0):
    # most-recent-first row anchored at n = len(row) - 1
    return Series(list(reversed(row)) + [target])


def test_design_row_by_hand():
    s = _series_with_row([2.0, 3.0], target=7.0)
    basis = enumerate_monomials(2, 2)
    dm = build_design_matrix(delay_embed(s, EmbeddingConfig(2)), s, T=1, M=1, basis=basis)
    assert dm.w.tolist() == [[1.0, 2.0, 3.0, 4.0, 6.0, 9.0]]
    assert dm.targets.tolist() == [7.0]


def test_design_row_of_zeros():
    s = _series_with_row([0.0] * 4, target=1.0)
    basis = enumerate_monomials(4, 3)
    dm = build_design_matrix(delay_embed(s, EmbeddingConfig(4)), s, T=1, M=1, basis=basis)
    assert dm.w[0, 0] == 1.0
    assert not dm.w[0, 1:].any()


def test_design_mackey_glass_shape(mg_series):
    basis = enumerate_monomials(5, 3)
    dm = build_design_matrix(delay_embed(mg_series, EmbeddingConfig(5)), mg_series, T=1, M=300, basis=basis)
    assert dm.w.shape == (300, 56)
    assert dm.sigma_meta.rank <= 56
    assert dm.sigma_meta.s_max >= dm.sigma_meta.s_min > 0


def test_design_infeasible_m_names_maximum():
    s = Series(np.arange(20.0))
    dl = delay_embed(s, EmbeddingConfig(3))
    with pytest.raises(DimensionError, match="at most 16"):
        build_design_matrix(dl, s, T=2, M=17, basis=enumerate_monomials(3, 1))
    dm = build_design_matrix(dl, s, T=2, M=16, basis=enumerate_monomials(3, 1))
    assert dm.base_indices[-1] + 2 == 19


def test_design_round_trip_against_raw_samples(rng):
    vals = rng.standard_normal(80)
    s = Series(vals)
    cfg = EmbeddingConfig(3, 2)
    basis = enumerate_monomials(3, 3)
    T = 3
    dm = build_design_matrix(delay_embed(s, cfg), s, T=T, M=50, basis=basis)
    assert np.all(dm.w[:, 0] == 1.0)
    for n, base in enumerate(dm.base_indices):
        assert dm.targets[n] == vals[base + T]
        for j, term in enumerate(basis.terms):
            expected = 1.0
            for i in term:
                expected *= vals[base - (i - 1) * cfg.lag]
            assert dm.w[n, j] == expected


@settings(max_examples=50, deadline=None)
@given(
    row=st.lists(st.floats(-3, 3, allow_nan=False), min_size=4, max_size=4),
    term=st.lists(st.integers(1, 4), min_size=1, max_size=4),
)
def test_monomial_permutation_symmetry(row, term):
    vals = {}
    for perm in set(itertools.permutations(term)):
        basis = MonomialBasis(d=4, degree=len(term), terms=(perm,))
        vals[perm] = evaluate_monomials(np.array([row]), basis)[0, 0]
    ref = next(iter(vals.values()))
    for v in vals.values():
        assert v == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_standardize_zscores_coordinates(rng):
    s = Series(5.0 + 3.0 * rng.standard_normal(200))
    dm = build_design_matrix(delay_embed(s, EmbeddingConfig(2)), s, 1, 150, enumerate_monomials(2, 1), standardize=True)
    assert np.allclose(dm.w[:, 1:].mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(dm.w[:, 1:].std(axis=0), 1.0)
    assert dm.scaling is not None


def test_from_arrays_shape_check():
    with pytest.raises(DimensionError):
        DesignMatrix.from_arrays(np.eye(3), np.ones(2))
