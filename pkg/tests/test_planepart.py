import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from oracles import brute_plane_partitions
from prodmat.planepart import (
    ConditionViolation,
    HeatBathSampler,
    PlanePartition,
    SizeLimitError,
    SkewShape,
    SliceSelection,
    boundary_params,
    diag_slices,
    effective_measure_weight,
    exact_enumeration,
    is_monotone,
    marginal_extract,
    mcmc_sampler,
    partition_function,
    sample_plane_partitions,
    slice_array,
    theorem_param_map,
    volume,
)
from prodmat.rmt import joint_density, rng_stream, sample_product_process
from prodmat.symfun import Partition, interlaces

# 4 x 3 box whose slices 4 and 5 are (5,1,0) and (7,5,1)
BOX_4x3 = SkewShape(4, 3)
BOX_4x3_FILLING = PlanePartition(BOX_4x3, [[7, 6, 4], [5, 5, 3], [3, 1, 1], [2, 1, 0]])


@st.composite
def skew_shapes(draw, max_side=4):
    A = draw(st.integers(1, max_side))
    B = draw(st.integers(1, max_side))
    pi = sorted((draw(st.integers(0, B)) for _ in range(A)), reverse=True)
    if pi and pi[-1] == B:
        pi[-1] = B - 1  # keep at least one support cell
    return SkewShape(A, B, Partition(pi))


@st.composite
def fillings(draw, max_side=4):
    shape = draw(skew_shapes(max_side))
    raw = np.array(draw(st.lists(st.integers(0, 9), min_size=shape.A * shape.B, max_size=shape.A * shape.B)))
    e = raw.reshape(shape.A, shape.B)
    # suffix maxima toward the bottom-right make every support row and column decrease
    e = np.maximum.accumulate(e[::-1, ::-1], axis=0)
    e = np.maximum.accumulate(e, axis=1)[::-1, ::-1]
    return PlanePartition(shape, np.where(shape.mask(), e, 0))


# shapes and fillings


def test_shape_validation():
    with pytest.raises(ValueError):
        SkewShape(2, 2, (3,))
    with pytest.raises(ValueError):
        SkewShape(1, 2, (1, 1))
    with pytest.raises(ValueError):
        SkewShape(0, 2)


def test_filling_must_be_monotone():
    with pytest.raises(ValueError):
        PlanePartition(SkewShape(2, 2), [[1, 2], [0, 0]])
    with pytest.raises(ValueError):
        PlanePartition(SkewShape(1, 1), [[-1]])
    # cells off the support are ignored
    pp = PlanePartition(SkewShape(2, 2, (1,)), [[9, 3], [4, 1]])
    assert pp.entries[0, 0] == 0


def test_volume_examples():
    assert volume(PlanePartition(SkewShape(3, 2), np.zeros((3, 2)))) == 0
    assert volume(PlanePartition(SkewShape(1, 1), [[7]])) == 7


@given(fillings())
@settings(max_examples=100, deadline=None)
def test_slice_sizes_sum_to_volume(pp):
    assert sum(s.size for s in diag_slices(pp)) == volume(pp)


@given(fillings())
@settings(max_examples=100, deadline=None)
def test_slices_interlace_by_boundary_direction(pp):
    _, L = boundary_params(pp.shape)
    slices = diag_slices(pp)
    assert len(slices) == pp.shape.A + pp.shape.B + 1
    assert slices[0] == Partition() and slices[-1] == Partition()
    for k in range(1, len(slices)):
        lo, hi = slices[k - 1], slices[k]
        assert interlaces(lo, hi) if k in L else interlaces(hi, lo)


def test_zero_filling_has_empty_slices():
    pp = PlanePartition(SkewShape(3, 2, (1,)), np.zeros((3, 2)))
    assert all(s == Partition() for s in diag_slices(pp))


def test_box_4x3_slices():
    slices = diag_slices(BOX_4x3_FILLING)
    assert slices[3] == Partition((5, 1, 0))
    assert slices[4] == Partition((7, 5, 1))


# boundary encoding and the parameter map


def test_boundary_params_seven_by_six():
    betas, L = boundary_params(SkewShape(7, 6, (4, 4, 4, 2, 2, 1)))
    assert betas == [12, 9, 7, 5, 4, 3, 2, 1]
    assert len(betas) // 2 == 4
    assert len(L) == 7


@pytest.mark.parametrize("A,B", [(1, 1), (3, 2), (5, 4)])
def test_boundary_params_empty_pi(A, B):
    betas, L = boundary_params(SkewShape(A, B))
    assert betas == [A + 1, 1]
    assert L == set(range(1, A + 1))


@given(skew_shapes(6))
def test_label_set_has_A_elements(shape):
    betas, L = boundary_params(shape)
    assert len(L) == shape.A
    assert betas[0] == shape.A + shape.pi[0] + 1
    assert all(x > y for x, y in zip(betas, betas[1:]))


def test_param_map_box_4x3():
    params = theorem_param_map(BOX_4x3, SliceSelection((4, 5)))
    assert (params.n, params.p, params.l, params.m, params.nu) == (3, 2, 1, (7, 4), (1, 0))


@pytest.mark.parametrize("A,B,alphas", [(5, 2, (3, 4, 6)), (6, 3, (4, 6)), (3, 1, (2,))])
def test_param_map_empty_pi(A, B, alphas):
    params = theorem_param_map(SkewShape(A, B), SliceSelection(alphas))
    assert params.n == B
    assert params.m[0] == A + B
    assert params.m[1:] == tuple(A + B + 1 - a for a in alphas[:-1])
    assert params.nu == tuple(A + 1 - a for a in alphas)


def test_param_map_rejects_low_first_slice():
    # needs alpha_1 >= B - pi_1 + beta_2 = 4
    with pytest.raises(ConditionViolation, match="alpha_1"):
        theorem_param_map(BOX_4x3, SliceSelection((3, 5)))


def test_param_map_with_two_runs_may_not_fit_as_matrices():
    # m = (3, 5, 2), nu = (1, 3, 0): the third block would be 1 x 4 inside U(2)
    shape = SkewShape(3, 2, (1, 1))
    params = theorem_param_map(shape, SliceSelection((4, 5)))
    assert (params.l, params.m, params.nu) == (2, (3, 5, 2), (1, 3, 0))
    with pytest.raises(ValueError):
        sample_product_process(params, rng_stream(0), 1)
    # the limiting density itself is still defined
    assert joint_density(params, [[0.3], [0.2]]) > 0


def test_slice_selection_validation():
    with pytest.raises(ValueError):
        SliceSelection((4, 4))
    with pytest.raises(ValueError):
        SliceSelection(())
    with pytest.raises(ValueError):
        SliceSelection((4, 6)).check(BOX_4x3)


@given(skew_shapes(5), st.data())
@settings(max_examples=100)
def test_param_map_valid_or_raises(shape, data):
    betas, _ = boundary_params(shape)
    alphas = sorted(data.draw(st.sets(st.integers(betas[1], betas[0]), min_size=1, max_size=3)))
    try:
        params = theorem_param_map(shape, SliceSelection(tuple(alphas)))
    except ConditionViolation:
        return
    assert params.n == shape.B - shape.pi[0]
    assert params.m[0] >= 2 * params.n + params.nu[0]
    if params.l == 1:
        # with one vertical run every block of the matrix product fits inside its unitary
        assert all(params.m[j] == params.n + params.nu[j - 1] for j in range(1, len(params.m)))


# exact enumeration


def test_enumeration_single_cell():
    enum = exact_enumeration(SkewShape(1, 1), 0.5, 3)
    probs = {int(pp.entries[0, 0]): p for pp, p in enum.probs.items()}
    assert probs == pytest.approx({0: 8 / 15, 1: 4 / 15, 2: 2 / 15, 3: 1 / 15}, rel=1e-15)
    assert enum.tail_bound == pytest.approx(0.5**4 / 0.5)


def test_enumeration_column_of_two():
    q = 0.4
    enum = exact_enumeration(SkewShape(2, 1), q, 2)
    pairs = {(int(pp.entries[0, 0]), int(pp.entries[1, 0])): p for pp, p in enum.probs.items()}
    expected = {(a, b): q ** (a + b) for a in range(3) for b in range(a + 1)}
    Z = sum(expected.values())
    assert len(pairs) == 6
    assert pairs == pytest.approx({k: v / Z for k, v in expected.items()}, rel=1e-14)


@pytest.mark.parametrize("A,B,pi,H", [(2, 2, (), 3), (2, 3, (1,), 3), (3, 2, (2, 1), 4), (3, 3, (2,), 2)])
def test_enumeration_matches_brute_force(A, B, pi, H):
    shape = SkewShape(A, B, pi)
    enum = exact_enumeration(shape, 0.5, H)
    got = {pp.entries.tobytes() for pp in enum.probs}
    brute = set()
    for t in brute_plane_partitions(A, B, pi, H):
        e = np.zeros((A, B), dtype=np.int64)
        for (i, j), v in t.items():
            e[i, j] = v
        brute.add(e.tobytes())
    assert got == brute


def test_enumeration_size_limit():
    with pytest.raises(SizeLimitError):
        exact_enumeration(SkewShape(4, 4), 0.5, 20, limit=10**5)


def test_partition_function_single_cell():
    for q in (0.1, 0.5, 0.9):
        assert partition_function(SkewShape(1, 1), q) == pytest.approx(1 / (1 - q), rel=1e-15)


@pytest.mark.parametrize("shape", [SkewShape(2, 2), SkewShape(2, 3, (1,)), SkewShape(3, 2, (2, 1))])
def test_partition_function_matches_truncated_sum(shape):
    q, H = 0.3, 30
    enum = exact_enumeration(shape, q, H)
    truncated = math.fsum(q ** enum.configs.sum(axis=(1, 2)).astype(float))
    assert truncated == pytest.approx(partition_function(shape, q), rel=1e-12)
    assert enum.omitted <= enum.tail_bound


@pytest.mark.parametrize("alpha,H", [(1, 12), (2, 30), (3, 30)])
def test_effective_measure_matches_enumeration(alpha, H):
    # H = 12 truncates about 1e-4 of the mass, so the nonempty slices need a taller cap
    shape, q = SkewShape(2, 2), 0.5
    enum = exact_enumeration(shape, q, H)
    sel = SliceSelection((alpha,))
    lam = slice_array(enum.configs, shape, alpha, 2)
    empty = enum.weights[lam.sum(axis=1) == 0].sum()
    one_box = enum.weights[(lam[:, 0] == 1) & (lam[:, 1] == 0)].sum()
    w0 = effective_measure_weight(shape, sel, q, [()])
    assert w0 == 1.0
    w1 = effective_measure_weight(shape, sel, q, [(1,)])
    assert w1 / w0 == pytest.approx(one_box / empty, rel=1e-6, abs=1e-12)


def test_effective_measure_containment_violation():
    sel = SliceSelection((4, 5))
    assert effective_measure_weight(BOX_4x3, sel, 0.5, [(3, 1), (1,)]) == 0.0


# sampler


def test_sampler_single_cell_is_geometric():
    q, N = 0.5, 100_000
    x = sample_plane_partitions(SkewShape(1, 1), q, N, rng_stream(11), burn_in=1, thin=1)[:, 0, 0]
    bins = 12
    observed = np.bincount(np.minimum(x, bins), minlength=bins + 1)
    probs = np.array([(1 - q) * q**k for k in range(bins)] + [q**bins])
    assert chisquare(observed, N * probs).pvalue > 0.001


def test_sampler_concentrates_at_zero_for_tiny_q():
    x = sample_plane_partitions(SkewShape(3, 3), 1e-6, 1000, rng_stream(12), burn_in=50)
    assert np.mean(x.sum(axis=(1, 2)) == 0) > 0.99


def test_sampler_keeps_monotonicity():
    shape = SkewShape(3, 4, (2, 1))
    sampler = HeatBathSampler(shape, 0.7, chains=200, rng=rng_stream(13))
    sampler.sweep(50, check=True)
    assert is_monotone(sampler.state, shape.mask())
    assert np.all(sampler.state[:, ~shape.mask()] == 0)


def test_sampled_slices_interlace():
    samples = sample_plane_partitions(SkewShape(3, 3), 0.6, 1000, rng_stream(14), burn_in=100, chains=100)
    _, L = boundary_params(SkewShape(3, 3))
    for e in samples:
        slices = diag_slices(PlanePartition(SkewShape(3, 3), e))
        assert sum(s.size for s in slices) == e.sum()
        for k in range(1, len(slices)):
            lo, hi = slices[k - 1], slices[k]
            assert interlaces(lo, hi) if k in L else interlaces(hi, lo)


def test_mcmc_sampler_reproducible():
    a = mcmc_sampler(SkewShape(2, 3), 0.5, 30, rng=rng_stream(15))
    b = mcmc_sampler(SkewShape(2, 3), 0.5, 30, rng=rng_stream(15))
    assert a == b
    with pytest.raises(ValueError):
        mcmc_sampler(SkewShape(2, 3), 0.5, 0)
    with pytest.raises(ValueError):
        HeatBathSampler(SkewShape(2, 3), 1.0)


def test_sampler_matches_enumeration_marginal():
    shape, q = SkewShape(2, 2), 0.5
    enum = exact_enumeration(shape, q, 30)
    exact_mean = float(np.dot(enum.weights, enum.configs[:, 0, 0]))
    x = sample_plane_partitions(shape, q, 50_000, rng_stream(16), burn_in=100, thin=10, chains=5000)[:, 0, 0]
    assert abs(x.mean() - exact_mean) <= 4 * x.std(ddof=1) / math.sqrt(x.size)


# marginals


def test_marginal_extract_box_4x3():
    levels = marginal_extract(BOX_4x3_FILLING, SliceSelection((4, 5)), 0.5)
    np.testing.assert_allclose(levels[0], [0.03125, 0.5, 1.0], rtol=1e-15)
    np.testing.assert_allclose(levels[1], np.sort([0.5**7, 0.5**5, 0.5]), rtol=1e-15)


def test_marginal_extract_zero_filling_and_stack():
    zero = PlanePartition(BOX_4x3, np.zeros((4, 3)))
    np.testing.assert_array_equal(marginal_extract(zero, SliceSelection((4, 5)), 0.3), np.ones((2, 3)))
    stack = np.stack([zero.entries, BOX_4x3_FILLING.entries])
    out = marginal_extract(stack, SliceSelection((4, 5)), 0.5, shape=BOX_4x3)
    assert out.shape == (2, 2, 3)
    assert np.all((out > 0) & (out <= 1))
    with pytest.raises(ValueError):
        marginal_extract(stack, SliceSelection((4, 5)), 0.5)
