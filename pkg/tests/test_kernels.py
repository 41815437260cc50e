import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soliton_lab.errors import DomainTooSmallError, UnsupportedKernelError
from soliton_lab.kernels import (MAX_CLOSED_FORM_POWER, SechKernelSpec, all_specs,
                                 ft_sech_oracle, ft_sech_power, x_cosech)

ROOT_HALF_PI = math.sqrt(math.pi / 2)

# Frozen from mpmath quadrature of (2 pi)^(-1/2) int sech^l(x) cos(x xi) dx at 30 digits.
MPMATH_VALUES = {
    (3, 1.0): 0.499491824904296930714810954994,
    (2, 2.0): 0.217047783060037830619858900843,
    (5, 3.0): 0.168869656846173874703227284231,
}
# Imaginary part of the transform of sech^4 tanh at xi = 1.5, same oracle with sin.
MPMATH_TANH_4_AT_1_5 = -0.140468189751910204455579670064

powers = st.integers(min_value=1, max_value=MAX_CLOSED_FORM_POWER)
frequencies = st.floats(min_value=-10, max_value=10, allow_nan=False)


def test_sech_at_zero_is_root_half_pi():
    assert ft_sech_power(SechKernelSpec(1), 0.0) == pytest.approx(1.2533141373155003, abs=1e-15)


def test_sech_squared_at_zero_uses_removable_limit():
    assert ft_sech_power(SechKernelSpec(2), 0.0) == pytest.approx(ROOT_HALF_PI * 2 / math.pi, abs=1e-15)


@pytest.mark.parametrize("power,xi", sorted(MPMATH_VALUES))
def test_closed_form_matches_high_precision_quadrature(power, xi):
    assert ft_sech_power(SechKernelSpec(power), xi) == pytest.approx(MPMATH_VALUES[(power, xi)], abs=1e-14)


def test_sech_cubed_at_one():
    # closed form (1 + xi^2)/2 sqrt(pi/2) sech(pi xi / 2), evaluated with mpmath
    expected = float(mpmath.sqrt(mpmath.pi / 2) * mpmath.sech(mpmath.pi / 2))
    assert ft_sech_power(SechKernelSpec(3), 1.0) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.4994918249042969, abs=1e-15)


def test_tanh_kernel_at_zero_vanishes():
    assert ft_sech_power(SechKernelSpec(1, True), 0.0) == 0


def test_tanh_kernel_against_high_precision_quadrature():
    value = ft_sech_power(SechKernelSpec(4, True), 1.5)
    assert value.real == 0
    assert value.imag == pytest.approx(MPMATH_TANH_4_AT_1_5, abs=1e-14)


def test_trapezoid_oracle_sech_squared():
    spec = SechKernelSpec(2)
    assert abs(ft_sech_oracle(spec, 2.0) - ft_sech_power(spec, 2.0)) <= 1e-10


def test_trapezoid_oracle_sech_fifth():
    spec = SechKernelSpec(5)
    assert abs(ft_sech_oracle(spec, 3.0) - ft_sech_power(spec, 3.0)) <= 1e-10


def test_trapezoid_oracle_odd_integrand_vanishes():
    assert abs(ft_sech_oracle(SechKernelSpec(8, True), 0.0)) <= 1e-12


@pytest.mark.parametrize("spec", all_specs(), ids=lambda s: s.label)
def test_oracle_agreement_on_band(spec):
    xi = np.linspace(-10, 10, 201)
    assert np.max(np.abs(ft_sech_power(spec, xi) - ft_sech_oracle(spec, xi))) <= 1e-8


@pytest.mark.parametrize("power", [0, 9, -1])
def test_unsupported_power_rejected(power):
    with pytest.raises(UnsupportedKernelError):
        SechKernelSpec(power)


def test_oracle_rejects_short_domain():
    with pytest.raises(DomainTooSmallError):
        ft_sech_oracle(SechKernelSpec(1), 1.0, half_length=10.0)


def test_oracle_rejects_coarse_grid():
    with pytest.raises(DomainTooSmallError):
        ft_sech_oracle(SechKernelSpec(2), 1.0, points=1 << 12)


@given(powers.filter(lambda p: p <= 6), frequencies)
def test_recursion_two_steps_up(power, xi):
    lower = ft_sech_power(SechKernelSpec(power), xi)
    upper = ft_sech_power(SechKernelSpec(power + 2), xi)
    predicted = (power**2 + xi**2) / (power * (power + 1)) * lower
    assert abs(upper - predicted) <= 1e-13 * max(abs(upper), 1e-300)


@given(powers, frequencies)
def test_tanh_relation(power, xi):
    plain = ft_sech_power(SechKernelSpec(power), xi)
    tanh = ft_sech_power(SechKernelSpec(power, True), xi)
    assert abs(tanh - xi / (1j * power) * plain) <= 1e-13 * max(abs(tanh), 1e-300)


@given(powers, frequencies)
def test_parity_and_realness(power, xi):
    plain = ft_sech_power(SechKernelSpec(power), np.array([xi, -xi]))
    tanh = ft_sech_power(SechKernelSpec(power, True), np.array([xi, -xi]))
    assert plain[0] == plain[1]
    assert tanh[0] == -tanh[1]
    assert np.isrealobj(plain)
    assert np.all(tanh.real == 0)


@given(st.floats(min_value=0.25, max_value=4), st.floats(min_value=-30, max_value=30))
def test_x_cosech_even(scale, z):
    assert x_cosech(z, scale) == x_cosech(-z, scale)


@settings(max_examples=20)
@given(st.floats(min_value=0.25, max_value=4))
def test_x_cosech_value_at_zero(scale):
    assert x_cosech(0.0, scale) == pytest.approx(2 * scale / math.pi, rel=1e-15)


@pytest.mark.parametrize("z", [1e-8, 1e-4, 1.0])
@pytest.mark.parametrize("omega", [1.0, 2.0])
def test_x_cosech_against_mpmath(z, omega):
    scale = math.sqrt(omega)
    with mpmath.workdps(50):
        a = mpmath.pi / (2 * mpmath.sqrt(omega))
        reference = float(mpmath.mpf(z) / mpmath.sinh(a * z))
    assert abs(x_cosech(z, scale) - reference) <= 1e-12 * abs(reference)
