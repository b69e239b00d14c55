"""Acceptance criteria as functions returning TestReports.

Each ``criterion_k`` runs at its pre-registered tolerance and appends a
runtime report whose band is the time budget (infinite when none is set).
The selftest command and the pytest acceptance suite both call these.
"""
from __future__ import annotations

import math
import time
from itertools import product

import numpy as np
from scipy.integrate import dblquad, quad

from . import harness as H
from . import kernels as K
from .planepart import (
    SkewShape,
    SliceSelection,
    _diagonal_cells,
    slice_array,
    effective_measure_weight,
    exact_enumeration,
    sample_plane_partitions,
)
from .rmt import ProcessParams, joint_density, normalization_Z, rng_stream, spherical_moment_2x2, unnormalized_density
from .specfun import pfaff_saalschutz
from .symfun import Partition, Specialization, cauchy_h, partitions_in_box, partitions_of, schur_eval, skew_schur_eval

SEED = 20240611
TWO_LEVEL = ProcessParams(2, 2, 1, (6, 4), (1, 0))
BOX_4x3_SLICES_4_5 = (SkewShape(4, 3), SliceSelection((4, 5)))


def _with_runtime(label: str, budget_s: float, fn) -> list[H.TestReport]:
    start = time.perf_counter()
    reports = fn()
    elapsed = time.perf_counter() - start
    reports.append(H.TestReport(f"{label} runtime_s", elapsed, 0.0, budget_s, "trivial", runtime_ms=1000 * elapsed))
    return reports


def criterion_1(N: int = 100_000, seed: int = SEED) -> list[H.TestReport]:
    """Jacobi 2x2 moments from Haar corners within 3 standard errors; under 60 s."""
    return _with_runtime("c1", 60, lambda: H.run_jacobi_density_test(N, seed=seed))


def criterion_2(N: int = 100_000, seed: int = SEED) -> list[H.TestReport]:
    """Two-factor spherical moments within 3 sigma; the (1,0) target is exactly 1/4; under 120 s."""

    def body():
        out = [H.run_moment_test(mu, 2, N, seed=seed + k) for k, mu in enumerate([(1, 0), (2, 0), (1, 1)])]
        out.append(H.TestReport("c2 target mu=(1,0)", spherical_moment_2x2((1, 0), 2), 0.25, 0.0, "closed-form"))
        return out

    return _with_runtime("c2", 120, body)


def criterion_3(params: ProcessParams = TWO_LEVEL) -> list[H.TestReport]:
    """Integral of K(r,x;r,x) equals n within 1e-6 for both levels and both kernels; under 30 s."""

    def body():
        out = []
        for kind in ("contour", "em"):
            ker = K.kernel_handle(params, kind)
            for r in range(1, params.p + 1):
                out.append(H.TestReport(f"c3 trace {kind} level {r}", H.kernel_trace(ker, r), params.n, 1e-6, "closed-form"))
        return out

    return _with_runtime("c3", 30, body)


def _c4_configs(params: ProcessParams):
    p = params.p
    singles = [[(1, 0.2)], [(1, 0.55)], [(p, 0.35)], [(p, 0.8)], [(1, 0.9)]]
    pairs = [
        [(1, 0.3), (p, 0.6)],
        [(p, 0.25), (1, 0.7)],
        [(1, 0.45), (1, 0.65)],
        [(p, 0.15), (p, 0.5)],
        [(1, 0.6), (p, 0.4)],
        [(1, 0.1), (p, 0.1)],
    ]
    return singles + pairs


def criterion_4(params: ProcessParams = TWO_LEVEL) -> list[H.TestReport]:
    """rho_1 and rho_2 from the contour and transition-function kernels agree to 1e-6; under 60 s."""

    def body():
        ck, em = K.kernel_handle(params, "contour"), K.kernel_handle(params, "em")
        out = []
        for pts in _c4_configs(params):
            a, b = K.correlation_function(ck, pts), K.correlation_function(em, pts)
            out.append(H.TestReport(f"c4 rho_{len(pts)} {pts}", a - b, 0.0, 1e-6, "oracle", details={"contour": a, "em": b}))
        return out

    return _with_runtime("c4", 60, body)


def _rho2_integral(params: ProcessParams, nodes: int = 24) -> float:
    """Tensor Gauss-Legendre integral of rho_2 over the unit square.

    With one level and one factor the kernel is a polynomial in x times a
    polynomial in y, so the rule is exact once nodes exceed half the degree.
    """
    ck = K.ContourKernel(params)
    g, w = np.polynomial.legendre.leggauss(nodes)
    g, w = (g + 1) / 2, w / 2
    X, Y = np.meshgrid(g, g, indexing="ij")
    d = ck(1, g, 1, g)
    rho2 = np.outer(d, d) - ck(1, X, 1, Y) * ck(1, Y, 1, X)
    return float((np.outer(w, w) * rho2).sum())


def _one_point_marginal(params: ProcessParams, x: float) -> float:
    """Density of one unlabeled point of a one-level ensemble, integrating out the others (n <= 2)."""
    if params.n == 1:
        return joint_density(params, [[x]])
    val, _ = quad(lambda y: joint_density(params, [sorted([x, y])]), 0, 1, points=[x], epsabs=1e-12, epsrel=1e-10)
    return val


def criterion_5() -> list[H.TestReport]:
    """Integral of rho_2 equals n(n-1) and rho_1 equals the quadrature marginal, both to 1e-4."""

    def body():
        out = []
        for params in (ProcessParams(1, 1, 1, (3,), (0,)), ProcessParams(2, 1, 1, (6,), (1,))):
            n = params.n
            out.append(H.TestReport(f"c5 n={n} int rho_2", _rho2_integral(params), n * (n - 1), 1e-4, "trivial"))
            ck = K.ContourKernel(params)
            for x in (0.15, 0.4, 0.65, 0.9):
                out.append(
                    H.TestReport(f"c5 n={n} rho_1({x})", ck(1, x, 1, x) - _one_point_marginal(params, x), 0.0, 1e-4, "oracle")
                )
        return out

    return _with_runtime("c5", math.inf, body)


def numeric_normalization(params: ProcessParams) -> float:
    """Integral of the unnormalized density over ordered configurations (two coordinates at most)."""
    if params.n * params.p == 1:
        val, _ = quad(lambda x: unnormalized_density(params, [[x]]), 0, 1, epsabs=1e-14, epsrel=1e-10, limit=200)
    elif params.n == 2 and params.p == 1:
        val, _ = dblquad(lambda y, x: unnormalized_density(params, [[x, y]]), 0, 1, lambda x: x, 1, epsabs=1e-12, epsrel=1e-8)
    elif params.n == 1 and params.p == 2:
        # the top point sits below the bottom one
        val, _ = dblquad(lambda y, x: unnormalized_density(params, [[x], [y]]), 0, 1, 0, lambda x: x, epsabs=1e-14, epsrel=1e-9)
    else:
        raise ValueError("numeric normalization covers at most two coordinates")
    return val


def criterion_6() -> list[H.TestReport]:
    """Closed-form normalization matches numeric integration to relative 1e-6 for two factors."""

    def body():
        out = []
        for params in (
            ProcessParams(1, 1, 2, (4, 3), (1, 0)),
            ProcessParams(1, 2, 1, (4, 3), (1, 0)),
            ProcessParams(2, 1, 2, (6, 4), (1, 0)),
        ):
            rel = numeric_normalization(params) / normalization_Z(params) - 1
            out.append(H.TestReport(f"c6 Z n={params.n} p={params.p} l={params.l}", rel, 0.0, 1e-6, "closed-form"))
        return out

    return _with_runtime("c6", math.inf, body)


C7_POINTS = [(1, 3, 1, 3), (2, 15, 2, 15), (2, 7, 2, 12), (1, 5, 2, 9), (2, 10, 1, 6)]


def criterion_7(params: ProcessParams = TWO_LEVEL) -> list[H.TestReport]:
    """Discrete kernel over eps y tends to the continuous kernel: errors drop strictly at 5 points."""

    def body():
        out = []
        for pt, errs in zip(C7_POINTS, H.discrete_limit_errors(params, C7_POINTS)):
            drops = sum(1 for a, b in zip(errs, errs[1:]) if not b < a)
            out.append(H.TestReport(f"c7 point {pt} non-decreasing steps", drops, 0, 0, "closed-form", details={"errors": errs}))
        return out

    return _with_runtime("c7", math.inf, body)


def criterion_8(eps_list=(0.1, 0.05, 0.025), tol: float = 0.1) -> list[H.TestReport]:
    """Scaled Schur quantities: strictly decreasing error and final error below 0.1, per fixture."""

    def body():
        out = []
        for kind, fixtures in H.SCHUR_FIXTURES.items():
            for k, fx in enumerate(fixtures):
                errs = [H.schur_limit_error(kind, fx, e) for e in eps_list]
                drops = sum(1 for a, b in zip(errs, errs[1:]) if not b < a)
                out.append(H.TestReport(f"c8 {kind}[{k}] non-decreasing steps", drops, 0, 0, "closed-form", details={"errors": errs}))
                out.append(H.TestReport(f"c8 {kind}[{k}] final error", errs[-1], 0.0, tol, "closed-form", details={"errors": errs}))
        return out

    return _with_runtime("c8", math.inf, body)


def empirical_tv(samples: np.ndarray, enum) -> float:
    """Total variation between the empirical law of ``samples`` and a truncated enumeration.

    Samples outside the enumerated support count fully towards the distance.
    """
    A, B = enum.shape.A, enum.shape.B
    base = enum.H + 1
    weights = base ** np.arange(A * B)
    key_enum = enum.configs.reshape(len(enum.configs), -1) @ weights
    inside = np.all(samples <= enum.H, axis=(1, 2))
    key_s = samples[inside].reshape(int(inside.sum()), -1) @ weights
    uniq, counts = np.unique(key_s, return_counts=True)
    emp = dict(zip(uniq.tolist(), (counts / len(samples)).tolist()))
    tv = sum(abs(emp.pop(int(k), 0.0) - w) for k, w in zip(key_enum, enum.weights))
    tv += sum(emp.values()) + (1 - inside.mean())
    return 0.5 * tv


C9_SHAPE, C9_Q, C9_H = SkewShape(2, 2), 0.5, 8


def criterion_9(N: int = 2000, seed: int = SEED) -> list[H.TestReport]:
    """Heat-bath samples within TV 0.02 of the enumeration (entries <= 8); under 120 s."""

    def body():
        enum = exact_enumeration(C9_SHAPE, C9_Q, C9_H)
        s = sample_plane_partitions(C9_SHAPE, C9_Q, N, rng=rng_stream(seed, 9), burn_in=200, thin=20, chains=N)
        return [
            H.TestReport(
                "c9 TV heat-bath vs enumeration",
                empirical_tv(s, enum),
                0.0,
                0.02,
                "oracle",
                seed=seed,
                details={"N": N, "tail_bound": enum.tail_bound, "omitted_mass": enum.omitted},
            )
        ]

    return _with_runtime("c9", 120, body)


def tv_against_iid_floor(N: int, draws: int = 20, seed: int = SEED, z: float = 3.29) -> H.TestReport:
    """Heat-bath TV against the spread of TV for exact i.i.d. draws of the same size.

    The i.i.d. draws come from a tall enumeration (entries up to 40, omitted
    mass below 1e-10), so they carry the same truncation bias as the chain.
    Passes when the chain's TV lies below the i.i.d. mean plus z standard deviations.
    """
    enum = exact_enumeration(C9_SHAPE, C9_Q, C9_H)
    tall = exact_enumeration(C9_SHAPE, C9_Q, 40)
    rng = rng_stream(seed, 90)
    floor = [empirical_tv(tall.configs[rng.choice(len(tall.weights), N, p=tall.weights)], enum) for _ in range(draws)]
    mean, sd = float(np.mean(floor)), float(np.std(floor, ddof=1))
    s = sample_plane_partitions(C9_SHAPE, C9_Q, N, rng=rng_stream(seed, 91), burn_in=200, thin=20, chains=2000)
    tv = empirical_tv(s, enum)
    return H.TestReport(
        f"TV heat-bath minus i.i.d. floor N={N}",
        tv - mean,
        0.0,
        z * sd,
        "oracle",
        seed=seed,
        details={"tv": tv, "iid_mean": mean, "iid_sd": sd, "tail_bound": enum.tail_bound, "omitted_mass": enum.omitted},
    )


C10_FIXTURES = [
    (SkewShape(2, 2), SliceSelection((2, 3))),
    (SkewShape(2, 2), SliceSelection((1, 3))),
    (SkewShape(2, 2), SliceSelection((1, 2, 3))),
    (SkewShape(2, 2), SliceSelection((3,))),
    (SkewShape(2, 2, (1,)), SliceSelection((3, 4))),
]


def slice_marginals(enum, slices: SliceSelection) -> dict:
    """Law of the selected slices under an enumeration, keyed by tuples of Partitions."""
    shape = enum.shape
    parts = [slice_array(enum.configs, shape, a, len(_diagonal_cells(shape, a))) for a in slices.alphas]
    widths = [p.shape[1] for p in parts]
    keys, inverse = np.unique(np.concatenate(parts, axis=1), axis=0, return_inverse=True)
    mass = np.bincount(inverse.ravel(), weights=enum.weights, minlength=len(keys))
    out = {}
    for row, m in zip(keys, mass):
        cuts = np.cumsum([0] + widths)
        out[tuple(Partition(int(v) for v in row[cuts[i] : cuts[i + 1]]) for i in range(len(widths)))] = float(m)
    return out


def criterion_10(q: float = 0.4, H_max: int = 25, cutoff: float = 1e-5) -> list[H.TestReport]:
    """Effective-measure weight ratios match enumeration marginals to relative 1e-6 on A=B=2."""

    def body():
        out = []
        for shape, slices in C10_FIXTURES:
            enum = exact_enumeration(shape, q, H_max)
            marg = slice_marginals(enum, slices)
            ref = max(marg, key=marg.get)
            w_ref = effective_measure_weight(shape, slices, q, ref)
            worst = 0.0
            for key, prob in marg.items():
                if prob < cutoff:
                    continue
                ratio = effective_measure_weight(shape, slices, q, key) / w_ref
                worst = max(worst, abs(ratio / (prob / marg[ref]) - 1))
            out.append(
                H.TestReport(
                    f"c10 pi={shape.pi.parts} alphas={slices.alphas}",
                    worst,
                    0.0,
                    1e-6,
                    "oracle",
                    details={"omitted_mass": enum.omitted},
                )
            )
        return out

    return _with_runtime("c10", math.inf, body)


def criterion_11(N: int = 20_000, seed: int = SEED, q_list=(0.8, 0.9, 0.95)) -> list[H.TestReport]:
    """4 x 3 box, slices 4 and 5: KS distance drops across q beyond bootstrap bands; under 10 min."""
    shape, slices = BOX_4x3_SLICES_4_5
    return _with_runtime(
        "c11",
        600,
        lambda: [H.run_limit_theorem_test(shape, slices, q_list, N, seed=seed, burn_in=1000, thin=20, chains=2000)],
    )


def _pfaff_reports() -> list[H.TestReport]:
    worst = 0.0
    for k in range(7):
        for a, b, c in [(0.3, 1.7, 2.2), (2.5, -0.4, 1.35), (1.0, 2.0, 3.5), (-3.3, 0.6, 4.1)]:
            d = 1 - k + a + b - c
            lhs, rhs = pfaff_saalschutz(k, a, b, c, d)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    return [H.TestReport("c12 Pfaff-Saalschutz k<=6", worst, 0.0, 1e-10, "closed-form")]


def _zhang_chen_reports() -> list[H.TestReport]:
    worst = 0.0
    for alpha, beta in [(0, 0), (1, 0), (1, 2), (0.5, 3.5), (3, 1)]:
        for N in range(1, 6):
            i = np.arange(N)
            M = np.array([[math.gamma(alpha + 1 + a + b) / math.gamma(alpha + 1) * math.gamma(alpha + beta + 2) / math.gamma(alpha + beta + 2 + a + b) for b in i] for a in i])
            worst = max(worst, float(np.abs(K.zhang_chen_inverse(alpha, beta, N) @ M - np.eye(N)).max()))
    return [H.TestReport("c12 Zhang-Chen inverse N<=5", worst, 0.0, 1e-10, "closed-form")]


def cauchy_residual(a, b, L: int = 40) -> float:
    """Relative gap between the truncated Cauchy sum over lambda_1 <= L and the product."""
    rows = min(len(a), len(b))
    total = math.fsum(schur_eval(lam, a) * schur_eval(lam, b) for lam in partitions_in_box(rows, L))
    return abs(total / cauchy_h(a, b) - 1)


def branching_residual(spec1, spec2, max_size: int = 6) -> float:
    """Largest relative gap in s_lam(spec1 u spec2) = sum_mu s_{lam/mu}(spec2) s_mu(spec1)."""
    joint = Specialization(spec1).union(spec2)
    worst = 0.0
    for size in range(max_size + 1):
        for lam in partitions_of(size):
            lhs = schur_eval(lam, joint)
            rhs = math.fsum(
                skew_schur_eval(lam, mu, spec2) * schur_eval(mu, spec1)
                for s in range(size + 1)
                for mu in partitions_of(s)
            )
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300) if lhs else abs(rhs))
    return worst


def duality_residual(q: float, max_part: int = 10) -> float:
    """Largest relative gap in the label-variable symmetry of two-row Schur ratios."""

    def ratio(lam, mu):
        return schur_eval(lam, (q ** (mu[0] + 1), q ** mu[1])) / schur_eval(lam, (1.0, q))

    shapes = [(a, b) for a in range(max_part + 1) for b in range(a + 1)]
    worst = 0.0
    for lam, mu in product(shapes, shapes):
        x, y = ratio(lam, mu), ratio(mu, lam)
        worst = max(worst, abs(x - y) / abs(y))
    return worst


def criterion_12() -> list[H.TestReport]:
    """Algebraic identities at their stated tolerances; under 10 s."""

    def body():
        out = _pfaff_reports() + _zhang_chen_reports()
        cauchy = max(
            cauchy_residual(a, b)
            for a, b in [((0.5, 0.3), (0.9, 0.4)), ((0.7, 0.2, 0.1), (0.6, 0.5)), ((0.25,), (0.5, 0.5, 0.5))]
        )
        out.append(H.TestReport("c12 Cauchy-Littlewood L=40", cauchy, 0.0, 1e-8, "closed-form"))
        branch = max(branching_residual(s1, s2) for s1, s2 in [((0.3, 0.7), (0.5,)), ((0.2,), (0.4, 0.9, 0.6))])
        out.append(H.TestReport("c12 branching |lam|<=6", branch, 0.0, 1e-10, "closed-form"))
        for q in (0.3, 0.7):
            out.append(H.TestReport(f"c12 duality q={q}", duality_residual(q), 0.0, 1e-12, "closed-form"))
        return out

    return _with_runtime("c12", 10, body)


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 13)}


def run_all(which=None) -> dict[int, list[H.TestReport]]:
    """Run the selected criteria (all by default) in order."""
    return {k: CRITERIA[k]() for k in (which or sorted(CRITERIA))}
