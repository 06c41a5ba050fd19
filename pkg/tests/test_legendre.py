import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levybridge.legendre import (
    antiderivative_all,
    antiderivative_cross_integral,
    gauss_legendre_rule,
    shifted_legendre,
    shifted_legendre_all,
    shifted_legendre_antiderivative,
)


def test_degree_zero_is_one():
    for t in (0.0, 0.3, 1.0):
        assert shifted_legendre(0, t) == 1.0


def test_degree_one_root_at_half():
    assert shifted_legendre(1, 0.5) == 0.0


def test_endpoint_values():
    # value at 0 alternates sign with the degree, value at 1 is one
    assert shifted_legendre(4, 0.0) == 1.0
    assert shifted_legendre(3, 0.0) == -1.0
    assert shifted_legendre(7, 1.0) == 1.0
    for k in range(31):
        assert abs(shifted_legendre(k, 0.0) - (-1.0) ** k) <= 1e-12
        assert abs(shifted_legendre(k, 1.0) - 1.0) <= 1e-12


def test_orthogonality_by_quadrature():
    x, w = gauss_legendre_rule(64)
    table = shifted_legendre_all(20, x)
    gram = (table * w) @ table.T
    for k in range(21):
        for l in range(21):
            expected = 1.0 / (2 * k + 1) if k == l else 0.0
            assert abs(gram[k, l] - expected) <= 1e-10


def test_antiderivative_endpoints():
    assert shifted_legendre_antiderivative(1, 1.0) == 0.0
    assert shifted_legendre_antiderivative(5, 0.0) == 0.0
    for k in range(1, 31):
        assert shifted_legendre_antiderivative(k, 1.0) == 0.0
        assert shifted_legendre_antiderivative(k, 0.0) == 0.0


def test_antiderivative_matches_quadrature():
    # independent oracle: integrate the degree-1 polynomial 2r - 1 on [0, 1/2]
    x, w = gauss_legendre_rule(32, 0.0, 0.5)
    oracle = float(np.sum(w * (2.0 * x - 1.0)))
    assert abs(oracle - (-0.25)) < 1e-14
    assert abs(shifted_legendre_antiderivative(1, 0.5) - (-0.25)) < 1e-14

    for k in (2, 3, 7):
        for t in (0.2, 0.55, 0.9):
            x, w = gauss_legendre_rule(64, 0.0, t)
            oracle = float(np.sum(w * shifted_legendre(k, x)))
            assert abs(shifted_legendre_antiderivative(k, t) - oracle) < 1e-12


def test_antiderivative_derivative_consistency():
    # central differences of the antiderivative recover the polynomial
    h = 1e-6
    for k in (1, 4, 9):
        for t in np.linspace(0.02, 0.98, 50):
            num = (
                shifted_legendre_antiderivative(k, t + h)
                - shifted_legendre_antiderivative(k, t - h)
            ) / (2 * h)
            assert abs(num - shifted_legendre(k, t)) < 1e-6


def test_cross_integral_values():
    assert antiderivative_cross_integral(1, 2) == 1.0 / 30.0
    assert antiderivative_cross_integral(2, 1) == -1.0 / 30.0
    assert antiderivative_cross_integral(1, 3) == 0.0


def test_cross_integral_antisymmetry():
    for k in range(1, 31):
        for l in range(1, 31):
            assert antiderivative_cross_integral(k, l) == -antiderivative_cross_integral(l, k)


def test_cross_integral_matches_quadrature():
    # the Stieltjes integral equals int_0^1 (antiderivative of Q_k) Q_l dt
    x, w = gauss_legendre_rule(96)
    for k in (1, 2, 5):
        for l in (1, 2, 3, 4, 5, 6):
            integrand = shifted_legendre_antiderivative(k, x) * shifted_legendre(l, x)
            oracle = float(np.sum(w * integrand))
            assert abs(antiderivative_cross_integral(k, l) - oracle) < 1e-12


def test_tables_match_scalar():
    t = np.linspace(0.0, 1.0, 17)
    table = shifted_legendre_all(12, t)
    anti = antiderivative_all(12, t)
    for k in range(13):
        assert np.array_equal(table[k], shifted_legendre(k, t))
    for k in range(1, 13):
        assert np.allclose(anti[k - 1], shifted_legendre_antiderivative(k, t), rtol=0, atol=0)


def test_domain_errors():
    with pytest.raises(ValueError):
        shifted_legendre(3, 1.5)
    with pytest.raises(ValueError):
        shifted_legendre(3, -0.1)
    with pytest.raises(ValueError):
        shifted_legendre(-1, 0.5)
    with pytest.raises(ValueError):
        shifted_legendre_antiderivative(0, 0.5)
    with pytest.raises(ValueError):
        antiderivative_cross_integral(0, 1)
    with pytest.raises(ValueError):
        gauss_legendre_rule(0)


@given(
    k=st.integers(min_value=0, max_value=60),
    t=st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
)
def test_bounded_by_one(k, t):
    # Legendre polynomials never exceed one in magnitude on the interval
    assert abs(shifted_legendre(k, t)) <= 1.0 + 1e-12
