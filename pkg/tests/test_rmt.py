import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from prodmat.rmt import (
    ProcessParams,
    corner_gram_eigenvalues,
    haar_unitary,
    joint_density,
    normalization_Z,
    rng_stream,
    sample_product_process,
    spherical_moment_2x2,
    truncate,
    weight_c,
    weight_params,
    weight_w,
)


@st.composite
def valid_params(draw, max_n=3, max_factors=3):
    n = draw(st.integers(1, max_n))
    factors = draw(st.integers(1, max_factors))
    p = draw(st.integers(1, factors))
    nu = [draw(st.integers(0, 2)) for _ in range(factors)]
    m = [2 * n + nu[0] + draw(st.integers(0, 3))]
    # sampling also needs the previous width to fit: m_j >= n + nu_{j-1}
    m += [max(n + nu[j] + 1, n + nu[j - 1]) + draw(st.integers(0, 3)) for j in range(1, factors)]
    return ProcessParams(n, p, factors - p + 1, tuple(m), tuple(nu))


def test_params_validation():
    with pytest.raises(ValueError):
        ProcessParams(2, 1, 1, (4,), (1,))  # m_1 < 2n + nu_1
    with pytest.raises(ValueError):
        ProcessParams(2, 2, 1, (6, 2), (1, 0))  # m_2 < n + nu_2 + 1
    with pytest.raises(ValueError):
        ProcessParams(2, 2, 1, (6,), (1,))  # wrong length


# Haar sampling


def test_haar_one_by_one_is_a_phase():
    u = haar_unitary(1, rng_stream(0), size=50)
    np.testing.assert_allclose(np.abs(u[:, 0, 0]), 1.0, atol=1e-12)


def test_haar_is_unitary():
    rng = rng_stream(1)
    for _ in range(100):
        u = haar_unitary(8, rng)
        assert np.abs(u.conj().T @ u - np.eye(8)).max() <= 1e-12


def test_haar_second_moment():
    u = haar_unitary(4, rng_stream(2), size=100_000)
    v = np.abs(u[:, 0, 0]) ** 2
    assert abs(v.mean() - 0.25) <= 4 * v.std(ddof=1) / math.sqrt(v.size)


def test_haar_fourth_moment_of_entry():
    # E|U_11|^4 = 2 / (m (m + 1))
    u = haar_unitary(3, rng_stream(3), size=100_000)
    v = np.abs(u[:, 0, 0]) ** 4
    assert abs(v.mean() - 2 / 12) <= 4 * v.std(ddof=1) / math.sqrt(v.size)


def test_truncation_examples():
    u = haar_unitary(5, rng_stream(4))
    np.testing.assert_array_equal(truncate(u, 5, 5), u)
    assert truncate(u, 1, 1)[0, 0] == u[0, 0]
    with pytest.raises(ValueError):
        truncate(u, 6, 2)
    for r, c in [(2, 3), (4, 1), (3, 3)]:
        sv = np.linalg.svd(truncate(u, r, c), compute_uv=False)
        assert np.all((sv >= 0) & (sv <= 1 + 1e-12))


# process sampling


@given(valid_params(), st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_process_levels_sorted_in_unit_interval(params, seed):
    x = sample_product_process(params, rng_stream(seed), 20)
    assert x.shape == (20, params.p, params.n)
    assert np.all(np.diff(x, axis=-1) >= 0)
    assert np.all((x >= 0) & (x <= 1))


def test_sampler_rejects_blocks_that_do_not_fit():
    params = ProcessParams(1, 1, 2, (4, 2), (2, 0))  # T_2 would be 1 x 3 inside U(2)
    with pytest.raises(ValueError):
        sample_product_process(params, rng_stream(0), 2)


def test_process_levels_interlace():
    params = ProcessParams(3, 2, 1, (7, 4), (1, 0))
    x = sample_product_process(params, rng_stream(5), 2000)
    lo, hi = x[:, 1], x[:, 0]
    # level 2 lies below level 1 and interlaces: y_1 <= x_1 <= y_2 <= x_2 <= ...
    assert np.all(lo <= hi + 1e-12)
    assert np.all(hi[:, :-1] <= lo[:, 1:] + 1e-12)


def test_same_seed_same_samples():
    params = ProcessParams(2, 2, 1, (6, 4), (1, 0))
    a = sample_product_process(params, rng_stream(9, 3), 10)
    b = sample_product_process(params, rng_stream(9, 3), 10)
    np.testing.assert_array_equal(a, b)


def test_jacobi_two_by_two_first_moment():
    params = ProcessParams(2, 1, 1, (4,), (0,))
    x = sample_product_process(params, rng_stream(6), 100_000)[:, 0]
    s = x.sum(axis=1)
    assert abs(s.mean() - 1.0) <= 3 * s.std(ddof=1) / math.sqrt(s.size)


def test_corner_gram_matches_process_sampler_law():
    ev = corner_gram_eigenvalues(50_000, 1, rng_stream(7))
    prod = ev[:, 0] * ev[:, 1]
    assert abs(prod.mean() - 1 / 6) <= 3 * prod.std(ddof=1) / math.sqrt(prod.size)


# weights, density, normalization


def test_weight_one_factor_closed_form():
    params = ProcessParams(2, 1, 1, (7,), (1,))
    x = np.array([0.2, 0.5, 0.8])
    d = 7 - 4 - 1
    for k in (1, 2):
        np.testing.assert_allclose(weight_w(k, 1, params, x), x ** (1 + k - 1) * (1 - x) ** d, rtol=1e-13)
    assert weight_w(1, 1, params, 1.2) == 0.0


def test_weight_recurrence_by_quadrature():
    params = ProcessParams(2, 1, 2, (6, 5), (1, 1))
    n, m, nu = 2, 5, 1
    for k in (1, 2):
        for y in (0.15, 0.5):
            val, _ = quad(
                lambda t: t**nu * (1 - t) ** (m - n - nu - 1) * weight_w(k, 1, params, y / t) / t, y, 1, epsabs=1e-13, epsrel=1e-11
            )
            assert weight_w(k, 2, params, y) == pytest.approx(val, rel=1e-7)


def test_one_point_density_integrates_to_one():
    params = ProcessParams(1, 1, 1, (4,), (1,))
    val, _ = quad(lambda x: joint_density(params, [[x]]), 0, 1, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_jacobi_density_closed_form():
    params = ProcessParams(2, 1, 1, (4,), (0,))
    for a, b in [(0.1, 0.3), (0.2, 0.9), (0.5, 0.51)]:
        assert joint_density(params, [[a, b]]) == pytest.approx(12 * (b - a) ** 2, rel=1e-12)


def test_density_vanishes_off_interlacing():
    params = ProcessParams(1, 2, 1, (4, 3), (1, 0))
    assert joint_density(params, [[0.3], [0.6]]) == 0.0
    assert joint_density(params, [[0.6], [0.3]]) > 0


def test_normalization_one_point_by_quadrature():
    params = ProcessParams(1, 1, 1, (3,), (0,))
    val, _ = quad(lambda x: weight_w(1, 1, params, x), 0, 1, epsabs=1e-14)
    assert normalization_Z(params) == pytest.approx(val, rel=1e-10)


@given(valid_params(max_n=4, max_factors=4))
@settings(max_examples=50)
def test_normalization_positive(params):
    assert normalization_Z(params) > 0


def test_spherical_moment_examples():
    assert spherical_moment_2x2((0, 0)) == 1.0
    assert spherical_moment_2x2((1, 0), 1) == pytest.approx(0.5, rel=1e-15)
    assert spherical_moment_2x2((1, 0), 2) == pytest.approx(0.25, rel=1e-15)
    assert spherical_moment_2x2((1, 1), 1) == pytest.approx(1 / 6, rel=1e-15)


def test_one_point_mean_from_mellin_moments():
    params = ProcessParams(1, 1, 2, (4, 3), (1, 0))
    w = weight_params(params, 1, 2)

    def moment(j):
        return weight_c(params, 2) * math.prod(math.gamma(b + j) for b in w.b) / math.prod(math.gamma(a + j) for a in w.a)

    assert normalization_Z(params) == pytest.approx(moment(1), rel=1e-13)
    val, _ = quad(lambda x: x * joint_density(params, [[x]]), 0, 1, epsabs=1e-13, epsrel=1e-11)
    assert val == pytest.approx(moment(2) / moment(1), rel=1e-8)
