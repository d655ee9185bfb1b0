import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import LOG_B, LOG_PHI2
from corpus import corpus, unimodular
from slowent.action import (
    LyapunovFunctional,
    LyapunovSpectrum,
    compute_spectrum,
    evaluate_exponent,
    int_det,
    int_inverse,
    int_matmul,
    int_matpow,
    suspend,
    verify_action,
)
from slowent.catalog import cubic_rank2, rotation
from slowent.errors import AlreadySuspended, DimensionMismatch, NonCommuting, NonUnimodular


def test_verify_accepts_commuting_pair():
    act = verify_action([[[2, 1], [1, 1]], [[1, 1], [1, 0]]])
    assert (act.dim, act.rank) == (2, 2)


def test_verify_reports_noncommuting_pair():
    with pytest.raises(NonCommuting) as info:
        verify_action([[[2, 1], [1, 1]], [[3, 1], [2, 1]]])
    assert info.value.pair == (0, 1)


def test_verify_rejects_det_two():
    with pytest.raises(NonUnimodular):
        verify_action([[[2, 0], [0, 1]]])


def test_verify_rejects_mixed_sizes():
    with pytest.raises(DimensionMismatch):
        verify_action([[[2, 1], [1, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]])


def test_big_integer_powers_are_exact():
    m = int_matpow(((2, 1), (1, 1)), 200)
    assert int_det(m) == 1
    assert int_matmul(m, int_matpow(((2, 1), (1, 1)), -200)) == ((1, 0), (0, 1))


def test_inverse_of_cat_map():
    assert int_inverse(((2, 1), (1, 1))) == ((1, -1), (-1, 2))


def test_fibonacci_spectrum(fib_spec):
    c = [f.coeffs[0] for f in fib_spec.functionals]
    assert c[0] == pytest.approx(LOG_PHI2, abs=1e-12)
    assert c[1] == pytest.approx(-LOG_PHI2, abs=1e-12)
    assert [f.multiplicity for f in fib_spec.functionals] == [1, 1]


def test_t4_spectrum(t4_spec):
    got = np.array([f.coeffs for f in t4_spec.functionals])
    want = np.array([[LOG_PHI2, 0], [-LOG_PHI2, 0], [0, LOG_B], [0, -LOG_B]])
    assert np.max(np.abs(got - want)) < 1e-12


def test_inverse_action_negates(fib):
    inv = compute_spectrum(fib.inverse())
    assert inv.functionals[0].coeffs[0] == pytest.approx(LOG_PHI2, abs=1e-12)
    # ordering is by value, so the negated set is the same set
    assert sorted(f.coeffs[0] for f in inv.functionals) == pytest.approx([-LOG_PHI2, LOG_PHI2])


def test_complex_pair_has_multiplicity_two():
    spec = compute_spectrum(cubic_rank2())
    assert [f.multiplicity for f in spec.functionals] == [1, 2]
    spec.check_invariants()


def test_rotation_has_single_zero_functional():
    spec = compute_spectrum(rotation())
    assert len(spec.functionals) == 1
    assert spec.functionals[0].multiplicity == 2
    assert spec.functionals[0].is_zero()


def test_jordan_block_is_zero():
    spec = compute_spectrum(verify_action([[[1, 1], [0, 1]]]))
    assert spec.functionals[0].is_zero() and spec.functionals[0].multiplicity == 2


def test_evaluate_exponent(fib_spec, t4_spec):
    assert evaluate_exponent(fib_spec, [0]).tolist() == [0.0, 0.0]
    assert evaluate_exponent(fib_spec, [2]) == pytest.approx([2 * LOG_PHI2, -2 * LOG_PHI2])
    assert evaluate_exponent(t4_spec, [1, 1]) == pytest.approx([LOG_PHI2, -LOG_PHI2, LOG_B, -LOG_B])
    with pytest.raises(DimensionMismatch):
        evaluate_exponent(t4_spec, [1])


def test_suspend(fib_spec, t4_spec):
    s1 = suspend(fib_spec)
    assert s1.functionals[-1].orbit_direction and s1.functionals[-1].coeffs == (0.0,)
    s2 = suspend(t4_spec)
    assert s2.functionals[-1].multiplicity == 2
    assert int(s2.multiplicities(include_orbit=True).sum()) == 6
    s2.check_invariants()
    with pytest.raises(AlreadySuspended):
        suspend(s2)


def test_orbit_functional_must_be_zero():
    with pytest.raises(ValueError):
        LyapunovFunctional((1.0,), 1, orbit_direction=True)


def test_corpus_is_valid():
    acts = corpus()
    assert len(acts) >= 20
    for a in acts:
        compute_spectrum(a).check_invariants()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(range(3)))
def test_conjugation_invariance(seed, which):
    base = corpus(size=3, seed=11)[which]
    p = unimodular(base.dim, np.random.default_rng(seed))
    a = compute_spectrum(base)
    b = compute_spectrum(base.conjugate(p))
    assert a.multiplicities().tolist() == b.multiplicities().tolist()
    assert np.max(np.abs(a.coeff_matrix() - b.coeff_matrix())) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_exponents_of_products_are_linear(i, j):
    # chi(t) of the action evaluated at t equals log|eig| of M(t)
    act = verify_action([[[2, 1], [1, 1]], [[1, 1], [1, 0]]])
    spec = compute_spectrum(act)
    m = np.array(act.element((i, j)), dtype=float)
    eig = np.sort(np.log(np.abs(np.linalg.eigvals(m))))
    assert np.sort(evaluate_exponent(spec, [i, j])) == pytest.approx(eig, abs=1e-8)


def test_spectrum_is_deterministic(t4):
    assert compute_spectrum(t4, seed=3) == compute_spectrum(t4, seed=3)
