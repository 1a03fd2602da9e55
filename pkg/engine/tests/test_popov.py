import os
import sys
# Add engine root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
"""
Tests de la couche de quadrature : g(γ), dérivées et coefficients b₁, b₂.
"""

import pytest

from app.semianalytic import (
    b1_of_gamma,
    g_derivatives,
    g_of_gamma,
    g_of_gamma_reference,
    popov_coefficients,
)


def test_g_at_zero_is_one():
    assert g_of_gamma(0.0) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0, 4.0, 20.0])
def test_g_matches_fixed_step_reference(gamma):
    assert g_of_gamma(gamma) == pytest.approx(g_of_gamma_reference(gamma), abs=1e-9)


def test_g_decreases_with_gamma():
    values = [g_of_gamma(gamma) for gamma in (0.0, 0.5, 1.0, 2.0, 4.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_small_gamma_expansion():
    coeffs = popov_coefficients(0.01)
    assert coeffs.b1 == pytest.approx(1.0 - 0.01 ** 2 / 4, abs=1e-5)
    assert coeffs.b2 == pytest.approx(0.01 ** 2 / 2, abs=1e-5)
    assert b1_of_gamma(0.01) == coeffs.b1


@pytest.mark.parametrize("gamma", [0.5, 1.0, 4.0])
def test_first_derivative_matches_finite_difference(gamma):
    h = 1e-4
    _, dg, _ = g_derivatives(gamma)
    fd = (g_of_gamma(gamma + h) - g_of_gamma(gamma - h)) / (2 * h)
    assert dg == pytest.approx(fd, abs=1e-7)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 4.0])
def test_b2_matches_finite_difference(gamma):
    h = 1e-4
    fd_b1_prime = (b1_of_gamma(gamma + h) - b1_of_gamma(gamma - h)) / (2 * h)
    assert popov_coefficients(gamma).b2 == pytest.approx(-gamma * fd_b1_prime, abs=1e-6)


def test_coefficients_are_memoized():
    assert popov_coefficients(2.0) is popov_coefficients(2.0)


def test_negative_gamma_rejected():
    with pytest.raises(ValueError):
        g_of_gamma(-0.1)
    with pytest.raises(ValueError):
        popov_coefficients(-1.0)
