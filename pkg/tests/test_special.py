import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from cwe.errors import DomainError
from cwe.numerics import (
    normal_cdf,
    normal_quantile,
    reg_lower_gamma,
    reg_upper_gamma,
)


def test_upper_gamma_at_zero_is_one():
    assert reg_upper_gamma(0.5, 0.0) == 1.0


def test_upper_gamma_exponential_closed_form():
    assert reg_upper_gamma(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-13)


def test_upper_gamma_half_matches_erfc():
    z = 1.1596
    assert reg_upper_gamma(0.5, z * z) == pytest.approx(math.erfc(z), rel=1e-12)
    assert reg_upper_gamma(0.5, z * z) == pytest.approx(0.101, abs=5e-4)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5, 5.0])
def test_upper_plus_lower_is_one(s):
    x = np.linspace(0.0, 50.0, 2001)
    total = reg_upper_gamma(s, x) + reg_lower_gamma(s, x)
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.0, 1.5, 2.5, 5.0, 30.0])
def test_against_scipy(s):
    x = np.concatenate([np.linspace(0, 3 * s + 20, 1500), [1e-8, s + 1.0, s + 1.0 - 1e-9]])
    np.testing.assert_allclose(reg_upper_gamma(s, x), sp.gammaincc(s, x), rtol=1e-11, atol=1e-15)
    np.testing.assert_allclose(reg_lower_gamma(s, x), sp.gammainc(s, x), rtol=1e-11, atol=1e-15)


def test_lower_gamma_small_argument_keeps_relative_precision():
    # 1 - Q would cancel catastrophically here
    assert reg_lower_gamma(1.5, 1e-12) == pytest.approx(sp.gammainc(1.5, 1e-12), rel=1e-12)


@given(st.floats(0.1, 20), st.floats(0, 60), st.floats(0, 5))
@settings(max_examples=200, deadline=None)
def test_upper_gamma_nonincreasing_in_x(s, x, dx):
    assert reg_upper_gamma(s, x + dx) <= reg_upper_gamma(s, x) + 1e-15


@pytest.mark.parametrize("args", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.1), (math.nan, 1.0),
                                  (1.0, math.inf)])
def test_gamma_domain_errors(args):
    with pytest.raises(DomainError):
        reg_upper_gamma(*args)


def test_gamma_returns_float_for_scalars():
    assert isinstance(reg_upper_gamma(2, 3), float)


@pytest.mark.parametrize("q, z", [(0.95, 1.6449), (0.55, 0.1257)])
def test_normal_quantile_table_values(q, z):
    assert normal_quantile(q) == pytest.approx(z, abs=5e-5)


def test_normal_quantile_median():
    assert normal_quantile(0.5) == 0.0


def test_normal_quantile_inverts_cdf():
    qs = np.linspace(0.001, 0.999, 999)
    back = np.array([normal_cdf(normal_quantile(q)) for q in qs])
    np.testing.assert_allclose(back, qs, atol=1e-8)
    np.testing.assert_allclose([normal_quantile(q) for q in qs], sp.ndtri(qs), atol=1e-12)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.2, 1.5, math.nan])
def test_normal_quantile_domain(q):
    with pytest.raises(DomainError):
        normal_quantile(q)
