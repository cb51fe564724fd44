"""Elliptic integral, resonance condition, and analytic transfer probability.

The closed-form implementation (scipy.special.ellipe) is cross-checked
against an independent adaptive-quadrature oracle over a wide negative-
parameter range; resonance roots are checked against bracketing facts and
their weak-field limit.
"""

import math

import numpy as np
import pytest

from lzsweep.analytics import (
    elliptic_e2,
    elliptic_e2_quadrature,
    lz_probability,
    resonance_condition,
    resonance_curve,
    resonance_gamma,
)


def test_elliptic_special_values():
    assert elliptic_e2(0.0) == pytest.approx(math.pi / 2.0, abs=1e-14)
    assert elliptic_e2(1.0) == pytest.approx(1.0, abs=1e-14)
    # computed once with the quadrature oracle and frozen
    assert elliptic_e2(-1.0) == pytest.approx(1.9100988945138557, rel=1e-13)


def test_elliptic_rejects_parameter_above_one():
    with pytest.raises(ValueError):
        elliptic_e2(1.0001)


@pytest.mark.parametrize("m", [-1e4, -3e3, -100.0, -7.5, -1.0, -0.1, 0.0,
                               0.25, 0.5, 0.9, 0.99])
def test_elliptic_matches_quadrature_oracle(m):
    ref = elliptic_e2_quadrature(m)
    assert elliptic_e2(m) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_elliptic_asymptotic_large_negative():
    # E(-x) -> sqrt(x) for x -> inf, with monotonically shrinking error
    errs = [abs(elliptic_e2(-x) / math.sqrt(x) - 1.0) for x in (1e4, 1e6, 1e8)]
    assert errs[0] < 1e-3 and errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[2] < 1e-7


def test_resonance_weak_field_limit():
    # gamma -> inf: M(n, gamma) -> n (E(0) = pi/2)
    for n in (1, 2, 3):
        assert resonance_condition(n, 1e3) == pytest.approx(n, abs=1e-5)
        assert resonance_condition(n, 1e6) == pytest.approx(n, abs=1e-11)


def test_resonance_monotone_in_gamma():
    g = np.geomspace(0.1, 100.0, 50)
    m = np.array([resonance_condition(1, float(x)) for x in g])
    assert np.all(np.diff(m) > 0.0)
    assert np.all(m < 1.0)


def test_resonance_known_value():
    # frozen from this implementation after verifying the weak-field and
    # bracketing behavior: n=1, gamma=1
    assert resonance_condition(1, 1.0) == pytest.approx(0.8223638740939032, rel=1e-12)


def test_two_photon_resonance_root_position():
    # M = 1 crossing of the n = 2 curve sits between gamma 0.3 and 0.5
    g = resonance_gamma(2, 1.0)
    assert 0.30 <= g <= 0.50
    # and the root actually solves the condition
    assert resonance_condition(2, g) == pytest.approx(1.0, rel=1e-10)


def test_resonance_curve_bundles_parity():
    curve = resonance_curve(2, np.geomspace(0.2, 5.0, 7))
    assert curve.n == 2
    assert curve.even is True
    assert curve.m.shape == curve.gamma.shape
    assert resonance_curve(3, np.array([1.0])).even is False


def test_lz_probability_values():
    assert lz_probability(0.0) == 1.0
    assert lz_probability(0.25) == pytest.approx(math.exp(-math.pi / 2.0), rel=1e-14)
    assert lz_probability(10.0) == pytest.approx(math.exp(-20.0 * math.pi), rel=1e-14)


def test_lz_probability_monotone():
    d = np.linspace(0.0, 5.0, 40)
    p = np.array([lz_probability(float(x)) for x in d])
    assert np.all(np.diff(p) < 0.0)
