import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from prodmat.specfun import (
    BalanceError,
    GammaPoleError,
    MeijerParams,
    beta,
    log_gamma,
    loop_integral,
    meijer_convolution_step,
    meijer_g_contour,
    meijer_g_l0,
    meijer_g_residues,
    pfaff_saalschutz,
    pochhammer,
    residue_sum,
)

mpmath.mp.dps = 30


def mp_meijer(params: MeijerParams, x: float) -> float:
    return float(mpmath.meijerg([[], list(params.a)], [list(params.b), []], x))


# log Gamma


def test_log_gamma_examples():
    assert abs(log_gamma(1.0)) < 1e-15
    assert log_gamma(0.5).real == pytest.approx(0.5723649429247001, rel=1e-15)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(GammaPoleError):
        log_gamma(z)


@given(st.floats(-30, 60), st.floats(-40, 40))
@settings(max_examples=200)
def test_log_gamma_matches_mpmath(x, y):
    z = complex(x, y)
    if y == 0 and x <= 0 and x == round(x):
        return
    ref = complex(mpmath.loggamma(mpmath.mpc(x, y)))
    got = complex(log_gamma(z))
    assert abs(got - ref) <= 1e-13 * max(1.0, abs(ref))


def test_log_gamma_recurrence_random_points():
    rng = np.random.default_rng(1)
    z = rng.uniform(0.1, 30, 100) + 1j * rng.uniform(-20, 20, 100)
    lhs = log_gamma(z + 1) - log_gamma(z) - np.log(z)
    # principal logs may differ by multiples of 2 pi i
    k = np.round(lhs.imag / (2 * np.pi))
    assert np.max(np.abs(lhs - 2j * np.pi * k)) < 1e-13


def test_log_gamma_reflection():
    z = np.array([0.3 + 0.2j, 0.7 - 1.5j, 0.1 + 3j])
    lhs = np.exp(log_gamma(z) + log_gamma(1 - z))
    np.testing.assert_allclose(lhs, np.pi / np.sin(np.pi * z), rtol=1e-13)


def test_pochhammer_examples():
    assert pochhammer(3.2, 0) == 1.0
    assert pochhammer(1, 5) == 120
    assert pochhammer(0.5, 3) == pytest.approx(1.875)
    assert beta(2.0, 3.0) == pytest.approx(1 / 12, rel=1e-14)


# contour machinery


def test_loop_integral_matches_residue_sum():
    poles = [-1.0, -1.0, -2.0, -3.5]
    zeros = [0.5]
    for x in (0.05, 0.2, 0.3):
        assert loop_integral(poles, zeros, x) == pytest.approx(residue_sum(poles, zeros, x), rel=1e-10)


def test_residue_sum_simple_pole():
    # (1/2 pi i) loop of x^{-s}/(s + b) picks x^b
    assert residue_sum([-0.7], [], 0.3) == pytest.approx(0.3**0.7, rel=1e-14)


# Meijer G


def test_meijer_l1_closed_form():
    x = np.array([0.1, 0.5, 0.9])
    np.testing.assert_allclose(meijer_g_l0(MeijerParams([3.0], [2.0]), x), x**2, rtol=1e-14)
    np.testing.assert_allclose(meijer_g_l0(MeijerParams([3.0], [0.0]), x), (1 - x) ** 2 / 2, rtol=1e-13)


def test_meijer_vanishes_beyond_one():
    for p in (MeijerParams([3.0], [1.0]), MeijerParams([4.0, 2.0], [1.0, 0.0])):
        assert meijer_g_l0(p, 1.5) == 0.0


INTEGER_PARAMS = [
    MeijerParams([4.0, 2.0], [1.0, 0.0]),
    MeijerParams([5.0, 3.0], [2.0, 2.0]),
    MeijerParams([6.0, 4.0, 2.0], [1.0, 1.0, 0.0]),
    MeijerParams([3.0, 3.0, 3.0], [0.0, 1.0, 2.0]),
]


@pytest.mark.parametrize("params", INTEGER_PARAMS)
@pytest.mark.parametrize("x", [0.01, 0.1, 0.4, 0.8, 0.97])
def test_meijer_integer_gaps_match_mpmath(params, x):
    assert meijer_g_l0(params, x) == pytest.approx(mp_meijer(params, x), rel=1e-10)


@pytest.mark.parametrize("params", [MeijerParams([2.5, 1.7], [0.3, 0.0]), MeijerParams([3.2, 2.1], [1.1, 0.4])])
@pytest.mark.parametrize("x", [0.05, 0.3, 0.7])
def test_meijer_noninteger_gaps_match_mpmath(params, x):
    assert meijer_g_l0(params, x) == pytest.approx(mp_meijer(params, x), rel=1e-8)


@pytest.mark.parametrize("params", INTEGER_PARAMS[:2])
def test_meijer_contour_and_residues_agree(params):
    for x in (0.05, 0.2, 0.3):
        assert meijer_g_contour(params, x) == pytest.approx(meijer_g_residues(params, x), rel=1e-9)


@pytest.mark.parametrize("params", INTEGER_PARAMS[:2])
@pytest.mark.parametrize("j", [1, 2, 3])
def test_meijer_mellin_moments(params, j):
    val, _ = quad(lambda x: x ** (j - 1) * meijer_g_l0(params, x), 0, 1, epsabs=1e-13, epsrel=1e-11, limit=200)
    exact = math.prod(math.gamma(b + j) for b in params.b) / math.prod(math.gamma(a + j) for a in params.a)
    assert val == pytest.approx(exact, rel=1e-7)


def test_convolution_step_one_to_two_factors():
    lhs, rhs = meijer_convolution_step(MeijerParams([3.0], [1.0]), m=5, nu=0, n=2, y=0.25)
    assert lhs == pytest.approx(rhs, rel=1e-7)


def test_convolution_step_beyond_support():
    lhs, rhs = meijer_convolution_step(MeijerParams([3.0], [1.0]), m=5, nu=0, n=2, y=1.2)
    assert lhs == 0.0 and rhs == 0.0


def test_convolution_step_degenerate_kernel():
    # nu = m - n - 1 makes (1 - x)^0
    lhs, rhs = meijer_convolution_step(MeijerParams([4.0], [1.0]), m=6, nu=3, n=2, y=0.4)
    assert lhs == pytest.approx(rhs, rel=1e-7)


# Pfaff-Saalschutz


def test_pfaff_saalschutz_trivial_and_unbalanced():
    assert pfaff_saalschutz(0, 0.3, 0.4, 0.5, 1.2) == (1.0, 1.0)
    with pytest.raises(BalanceError):
        pfaff_saalschutz(2, 0.3, 0.4, 0.5, 0.5)


@given(
    st.integers(0, 6),
    st.floats(-3, 3).filter(lambda v: abs(v - round(v)) > 0.05),
    st.floats(-3, 3).filter(lambda v: abs(v - round(v)) > 0.05),
    st.floats(0.1, 4).filter(lambda v: abs(v - round(v)) > 0.05),
)
def test_pfaff_saalschutz_random_balanced(k, a, b, c):
    d = 1 - k + a + b - c
    # keep denominators of both sides away from zero
    assume(all(abs(d + j) > 0.05 and abs(c - a - b + j) > 0.05 for j in range(k)))
    lhs, rhs = pfaff_saalschutz(k, a, b, c, d)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)
