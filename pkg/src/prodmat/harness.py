"""Monte Carlo drivers, convergence checks and result files.

Every check returns a TestReport. A report passes exactly when its
statistic lies within ``band`` of ``target``; composite checks fold their
extra conditions into the statistic (for example an error sequence that
fails to decrease reports an infinite statistic).
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.stats import ks_2samp

from . import kernels as K
from .planepart import (
    SkewShape,
    SliceSelection,
    marginal_extract,
    sample_plane_partitions,
    theorem_param_map,
)
from .rmt import (
    ProcessParams,
    _as_rng,
    corner_gram_eigenvalues,
    joint_density,
    rng_stream,
    sample_product_process,
    spherical_moment_2x2,
)
from .specfun import MeijerParams, meijer_g_l0
from .symfun import as_partition, complete_homogeneous, schur_eval, skew_schur_eval

PROVENANCE = ("closed-form", "oracle", "trivial")


@dataclass
class RunConfig:
    """One JSON document per run; ``params`` holds the command-specific block."""

    params: dict = field(default_factory=dict)
    seed: int = 0
    N: int = 1000
    burn_in: int = 200
    thin: int = 20
    tol: float = 1e-10
    out: str | None = None
    format: str = "csv"
    timing: bool = True

    def __post_init__(self):
        if int(self.N) < 1:
            raise ValueError("N must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.burn_in < 0 or self.thin < 1:
            raise ValueError("burn_in must be >= 0 and thin >= 1")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    @classmethod
    def from_json(cls, path, **overrides) -> "RunConfig":
        """Load a config file; non-None keyword overrides win over file fields."""
        data = {}
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Hash of every field that affects results; the output location does not."""
        d = self.to_dict()
        for k in ("out", "format", "timing"):
            d.pop(k)
        return config_hash(d)


@dataclass
class TestReport:
    """Outcome of one check; ``passed`` is derived from statistic, target and band."""

    __test__ = False  # not a pytest test class

    name: str
    statistic: float
    target: float
    band: float
    provenance: str
    seed: int | None = None
    runtime_ms: float = 0.0
    details: dict = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"target of {self.name!r} needs a provenance tag from {PROVENANCE}")
        self.statistic = float(self.statistic)
        self.target = float(self.target)
        self.band = float(self.band)
        self.passed = bool(abs(self.statistic - self.target) <= self.band)


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, 1000.0 * (time.perf_counter() - start)


# moments of the 2 x 2 picture


def _schur_two_vars(mu, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """s_mu(a, b) = h_{mu1} h_{mu2} - h_{mu1+1} h_{mu2-1}, stable when a and b meet."""

    def h(k):
        if k < 0:
            return np.zeros_like(a)
        return sum(a**i * b ** (k - i) for i in range(k + 1))

    return h(mu[0]) * h(mu[1]) - h(mu[0] + 1) * h(mu[1] - 1)


def run_moment_test(mu, factors: int, N: int, rng=None, seed: int | None = None) -> TestReport:
    """Monte Carlo E[s_mu(a)/s_mu(1,1)] over products of 2x2 corner Grams of U(4), 3 standard errors."""
    mu = as_partition(mu)
    if len(mu) > 2:
        raise ValueError("mu must have at most two parts")
    rng = rng_stream(seed) if rng is None and seed is not None else _as_rng(rng)

    def body():
        ev = corner_gram_eigenvalues(N, factors, rng)
        vals = _schur_two_vars(mu, ev[:, 0], ev[:, 1]) / (mu[0] - mu[1] + 1)
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(N)) if N > 1 else 0.0

    (mean, se), ms = _timed(body)
    return TestReport(
        name=f"moment mu={mu.padded(2)} factors={factors}",
        statistic=mean,
        target=spherical_moment_2x2(mu, factors),
        band=3 * se,
        provenance="closed-form",
        seed=seed,
        runtime_ms=ms,
        details={"N": N, "stderr": se},
    )


def run_jacobi_density_test(N: int, rng=None, seed: int | None = None) -> list[TestReport]:
    """Moments of the 2x2 corner Gram eigenvalues against their density 12 (a2 - a1)^2.

    Targets: E[a1 + a2] = 1, E[a1^2 + a1 a2 + a2^2] = 9/10, E[a1 a2] = 1/6.
    """
    rng = rng_stream(seed) if rng is None and seed is not None else _as_rng(rng)
    (ev, ms) = _timed(lambda: corner_gram_eigenvalues(N, 1, rng))
    a, b = ev[:, 0], ev[:, 1]
    out = []
    for label, vals, target in [
        ("E[a1+a2]", a + b, 1.0),
        ("E[s_(2)]", a * a + a * b + b * b, 0.9),
        ("E[s_(1,1)]", a * b, 1.0 / 6.0),
    ]:
        se = float(vals.std(ddof=1) / math.sqrt(N))
        out.append(
            TestReport(
                name=f"jacobi {label}",
                statistic=float(vals.mean()),
                target=target,
                band=3 * se,
                provenance="oracle",
                seed=seed,
                runtime_ms=ms,
                details={"N": N, "stderr": se},
            )
        )
    return out


# asymptotics of Schur functions


def _lattice(r: Sequence[float], eps: float):
    lam = [int(round(-math.log(v) / eps)) for v in r]
    return lam, [math.exp(-eps * l) for l in lam]


def _vandermonde(x: Sequence[float]) -> float:
    return float(np.prod([x[j] - x[i] for i in range(len(x)) for j in range(i + 1, len(x))]))


def schur_limit_error(kind: str, fixture: dict, eps: float) -> float:
    """Relative error between the eps-scaled Schur quantity and its limit.

    Rows are lambda_i = round(-ln r_i / eps); the limit is evaluated at the
    lattice points exp(-eps lambda_i) so rounding adds no error of its own.
    """
    f = fixture
    if kind == "schur":
        N, M, nu = f["N"], f["M"], f["nu"]
        lam, r = _lattice(f["r"], eps)
        order = np.argsort(r)
        lam, r = [lam[i] for i in order], [r[i] for i in order]
        variables = [math.exp(-(i + nu) * eps) for i in range(1, M + 1)]
        lhs = eps ** (M * N - N * (N + 1) / 2) * schur_eval(lam, variables)
        rhs = np.prod([v ** (1 + nu) * (1 - v) ** (M - N) for v in r]) * _vandermonde(r)
        rhs /= np.prod([math.gamma(M - N + j) for j in range(1, N + 1)])
    elif kind == "complete":
        M, nu = f["M"], f["nu"]
        (k, m), (r, s) = _lattice([f["r"], f["s"]], eps)
        variables = [math.exp(-(i + nu) * eps) for i in range(1, M + 1)]
        lhs = eps ** (M - 1) * (complete_homogeneous(variables, k - m)[k - m] if k >= m else 0.0)
        rhs = r ** (1 + nu) / s ** (M + nu) * max(s - r, 0.0) ** (M - 1) / math.gamma(M)
    elif kind == "skew":
        N, M, nu = f["N"], f["M"], f["nu"]
        lam, r = _lattice(f["r"], eps)
        mu, s = _lattice(f["s"], eps)
        variables = [math.exp(-(i + nu) * eps) for i in range(1, M + 1)]
        lhs = eps ** (M * N - N) * skew_schur_eval(lam, mu, variables)
        D = np.linalg.det(np.array([[max(s[j] - r[i], 0.0) ** (M - 1) for j in range(N)] for i in range(N)]))
        rhs = np.prod(r) ** (1 + nu) / np.prod(s) ** (M + nu) * D / math.gamma(M) ** N
    elif kind == "product":
        n, m, nus = f["n"], f["m"], f["nu"]
        p = len(m)
        lam, x = _lattice(f["x"], eps)
        order = np.argsort(x)
        lam, x = [lam[i] for i in order], [x[i] for i in order]
        variables = [math.exp(-e * eps) for a in range(p) for e in range(1 + nus[a], m[a] - n + 1)]
        power = sum(m[k] - n - nus[k] for k in range(p)) * n - n * (n + 1) / 2
        lhs = eps**power * schur_eval(lam, variables)
        d1 = m[0] - 2 * n - nus[0]
        pref = math.gamma(d1 + 1) ** n / np.prod([math.gamma(d1 + j) for j in range(1, n + 1)])
        G = np.empty((n, n))
        for k in range(1, n + 1):
            a = [m[i] - n + 1 for i in range(p - 1, 0, -1)] + [m[0] - 2 * n + k + 1]
            b = [nus[i] + 1 for i in range(p - 1, 0, -1)] + [nus[0] + k]
            G[:, k - 1] = meijer_g_l0(MeijerParams(a, b), np.array(x))
        rhs = pref * np.linalg.det(G)
    else:
        raise ValueError(f"unknown Schur quantity {kind!r}")
    return abs(lhs / rhs - 1.0)


# schur: s_lambda(q^(1+nu), ..., q^(M+nu)) against r^(1+nu) (1-r)^(M-N) Vandermonde form
# complete: h_(k-m) of the same variables against r^(1+nu) (s-r)^(M-1) / s^(M+nu)
# skew: s_(lambda/mu) against a determinant of (s_j - r_i)^(M-1)
# product: s_lambda over all factor variables against a Meijer G determinant
SCHUR_FIXTURES = {
    "schur": [{"N": 1, "M": 2, "nu": 0, "r": (0.5,)}, {"N": 2, "M": 4, "nu": 0, "r": (0.3, 0.6)}],
    "complete": [{"M": 3, "nu": 1, "r": 0.3, "s": 0.6}],
    "skew": [{"N": 2, "M": 3, "nu": 0, "r": (0.2, 0.5), "s": (0.4, 0.7)}],
    "product": [{"n": 2, "m": (6, 4), "nu": (1, 0), "x": (0.3, 0.6)}],
}


def run_schur_asymptotics_test(
    kind: str,
    eps_list: Sequence[float] = (0.1, 0.05, 0.025),
    fixtures: Sequence[dict] | None = None,
    tol: float = 0.1,
) -> TestReport:
    """Worst final relative error over the fixtures, infinite unless every error sequence decreases strictly."""
    fixtures = SCHUR_FIXTURES[kind] if fixtures is None else list(fixtures)

    def body():
        return [[schur_limit_error(kind, f, e) for e in eps_list] for f in fixtures]

    errs, ms = _timed(body)
    monotone = all(all(b < a for a, b in zip(row, row[1:])) for row in errs)
    final = max(row[-1] for row in errs)
    return TestReport(
        name=f"schur asymptotics {kind}",
        statistic=final if monotone else math.inf,
        target=0.0,
        band=tol,
        provenance="closed-form",
        runtime_ms=ms,
        details={"eps": list(eps_list), "errors": errs, "monotone": monotone, "final": final},
    )


# plane partitions against the product process


def ks_bootstrap(a: np.ndarray, b: np.ndarray, rng, resamples: int = 1000) -> tuple[float, float]:
    """Two-sample KS distance and its bootstrap standard error."""
    d = float(ks_2samp(a, b).statistic)
    boot = np.empty(resamples)
    for i in range(resamples):
        boot[i] = ks_2samp(rng.choice(a, a.size), rng.choice(b, b.size)).statistic
    return d, float(boot.std(ddof=1))


def run_limit_theorem_test(
    shape: SkewShape,
    slices: SliceSelection,
    q_list: Sequence[float],
    N: int,
    rng=None,
    *,
    seed: int | None = None,
    burn_in: int = 500,
    thin: int = 20,
    chains: int = 2000,
    resamples: int = 1000,
    z: float = 3.29,
) -> TestReport:
    """KS distance D(q) between the largest top-level point of the slices and of the matrix product.

    The statistic counts consecutive q pairs where D fails to drop by more
    than z combined bootstrap standard errors (z = 3.29 is two-sided 0.001).
    """
    params = theorem_param_map(shape, slices)
    if rng is None:
        streams = [rng_stream(0 if seed is None else seed, k) for k in range(len(q_list) + 2)]
    else:
        base = _as_rng(rng)
        streams = [base] * (len(q_list) + 2)

    def body():
        ref = sample_product_process(params, streams[0], N)[:, -1, -1]
        D, se = [], []
        for k, q in enumerate(q_list):
            fill = sample_plane_partitions(
                shape, q, N, rng=streams[k + 1], burn_in=burn_in, thin=thin, chains=min(chains, N)
            )
            top = marginal_extract(fill, slices, q, shape)[:, -1, -1]
            d, s = ks_bootstrap(top, ref, streams[-1], resamples)
            D.append(d)
            se.append(s)
        return D, se

    (D, se), ms = _timed(body)
    misses = sum(1 for i in range(len(D) - 1) if not D[i] - D[i + 1] > z * math.hypot(se[i], se[i + 1]))
    return TestReport(
        name=f"limit theorem A={shape.A} B={shape.B} alphas={slices.alphas}",
        statistic=misses,
        target=0,
        band=0,
        provenance="closed-form",
        seed=seed,
        runtime_ms=ms,
        details={"q": list(q_list), "D": D, "stderr": se, "params": asdict(params)},
    )


# kernel oracle suite


def kernel_trace(kernel, r: int) -> float:
    """Integral of K(r, x; r, x) over (0, 1)."""
    val, _ = quad(lambda x: kernel(r, x, r, x), 0.0, 1.0, epsabs=1e-11, epsrel=1e-11, limit=200)
    return val


def discrete_limit_errors(params: ProcessParams, points, eps_list=(0.1, 0.05, 0.025)) -> list[list[float]]:
    """Relative error of K_hat / (eps y) against the continuous kernel.

    Each point (r, a, s, b) stands for x = exp(-a/10), y = exp(-b/10), which
    are lattice points for every eps in the default list.
    """
    ck = K.ContourKernel(params)
    out = []
    for r, a, s, b in points:
        x, y = math.exp(-a / 10), math.exp(-b / 10)
        exact = ck(r, x, s, y)
        row = []
        for eps in eps_list:
            u, v = round(a / 10 / eps), round(b / 10 / eps)
            if abs(u * eps - a / 10) > 1e-12 or abs(v * eps - b / 10) > 1e-12:
                raise ValueError(f"point {(r, a, s, b)} is off the lattice for eps = {eps}")
            d = K.discrete_or_kernel(params, eps, K.DiscreteKernelQuery(r, u, s, v)) / (eps * y)
            row.append(abs(d / exact - 1))
        out.append(row)
    return out


def _default_pairs(params: ProcessParams):
    p = params.p
    pts = [(1, 0.2), (1, 0.55), (p, 0.35), (p, 0.8), (1, 0.9)]
    pairs = [((r, x), (r, x)) for r, x in pts]
    pairs += [((1, 0.3), (p, 0.6)), ((p, 0.25), (1, 0.7)), ((1, 0.45), (1, 0.65)), ((p, 0.15), (p, 0.5)), ((1, 0.6), (p, 0.4))]
    return pairs


def run_kernel_crosschecks(params: ProcessParams, tol: float = 1e-6) -> TestReport:
    """Trace, density, transition-function vs contour and discrete limit checks; counts failures."""

    def body():
        ck = K.kernel_handle(params, "contour")
        em = K.kernel_handle(params, "em")
        checks = {}
        for r in range(1, params.p + 1):
            for name, ker in (("contour", ck), ("em", em)):
                checks[f"trace level {r} {name}"] = abs(kernel_trace(ker, r) - params.n)
        if params.p == 1 and params.n == 1:
            checks["density vs kernel"] = max(
                abs(ck(1, x, 1, x) - joint_density(params, [[x]])) for x in (0.1, 0.4, 0.7, 0.95)
            )
        worst = 0.0
        for (a, b) in _default_pairs(params):
            for pts in ([a], [a, b]) if a != b else ([a],):
                worst = max(worst, abs(K.correlation_function(ck, pts) - K.correlation_function(em, pts)))
        checks["em vs contour"] = worst
        errs = discrete_limit_errors(params, [(1, 3, 1, 3), (params.p, 7, params.p, 12), (1, 5, params.p, 9)])
        checks["discrete limit decreasing"] = 0.0 if all(all(b < a for a, b in zip(e, e[1:])) for e in errs) else 1.0
        return checks

    checks, ms = _timed(body)
    failed = [k for k, v in checks.items() if not v <= tol]
    return TestReport(
        name=f"kernel crosschecks n={params.n} p={params.p} l={params.l}",
        statistic=len(failed),
        target=0,
        band=0,
        provenance="oracle",
        runtime_ms=ms,
        details={"checks": checks, "failed": failed},
    )


# result files

CSV_COLUMNS = ["test_name", "statistic", "target", "band", "pass", "seed", "runtime_ms", "provenance", "config_hash"]


def config_hash(config) -> str:
    """Short SHA-256 of the canonical JSON form of a configuration."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def emit_results(
    reports: Sequence[TestReport],
    format: str,
    path,
    *,
    config=None,
    timing: bool = True,
) -> None:
    """Write reports as CSV or JSON with a fixed column order.

    With ``timing=False`` runtimes are written as 0 so identical runs give
    byte-identical files.
    """
    if isinstance(config, RunConfig):
        digest = config.digest()
    else:
        digest = config_hash(config) if config is not None else ""
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            w.writerow(
                [
                    r.name,
                    _fmt(r.statistic),
                    _fmt(r.target),
                    _fmt(r.band),
                    "true" if r.passed else "false",
                    "" if r.seed is None else int(r.seed),
                    _fmt(r.runtime_ms if timing else 0.0),
                    r.provenance,
                    digest,
                ]
            )
        text = buf.getvalue()
    elif format == "json":
        rows = []
        for r in reports:
            d = asdict(r)
            if not timing:
                d["runtime_ms"] = 0.0
            rows.append(d)
        text = json.dumps({"config_hash": digest, "reports": rows}, sort_keys=True, indent=2, default=_jsonable) + "\n"
    else:
        raise ValueError(f"unknown format {format!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def load_results(path, format: str) -> list[TestReport]:
    """Read a file written by emit_results."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        if format == "csv":
            for row in csv.DictReader(fh):
                out.append(
                    TestReport(
                        name=row["test_name"],
                        statistic=float(row["statistic"]),
                        target=float(row["target"]),
                        band=float(row["band"]),
                        provenance=row["provenance"],
                        seed=int(row["seed"]) if row["seed"] else None,
                        runtime_ms=float(row["runtime_ms"]),
                    )
                )
        elif format == "json":
            for d in json.load(fh)["reports"]:
                d = dict(d)
                d.pop("passed")
                out.append(TestReport(**d))
        else:
            raise ValueError(f"unknown format {format!r}")
    return out
