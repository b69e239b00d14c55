"""Products of truncated Haar unitary matrices.

Level k of the process holds the squared singular values of
T_{k+l-1} ... T_1, where T_j is the (n+nu_j) x (n+nu_{j-1}) top-left block of
an independent Haar unitary of size m_j. The module samples the process and
evaluates its exact joint density, weight functions and normalization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .specfun import MeijerParams, log_gamma, meijer_g_l0
from .symfun import as_partition


@dataclass(frozen=True)
class ProcessParams:
    """n points per level, p levels, l initial factors, sizes m and shifts nu.

    ``m`` and ``nu`` have p + l - 1 entries and are 1-indexed in the
    mathematical sense: ``m[0]`` is m_1.
    """

    n: int
    p: int
    l: int
    m: tuple[int, ...]
    nu: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(v) for v in self.m))
        object.__setattr__(self, "nu", tuple(int(v) for v in self.nu))
        n, p, l = self.n, self.p, self.l
        if n < 1 or p < 1 or l < 1:
            raise ValueError("n, p and l must be positive")
        if len(self.m) != p + l - 1 or len(self.nu) != p + l - 1:
            raise ValueError(f"m and nu need p + l - 1 = {p + l - 1} entries")
        if any(v < 0 for v in self.nu):
            raise ValueError("nu entries must be nonnegative")
        if self.m[0] < 2 * n + self.nu[0]:
            raise ValueError(f"m_1 = {self.m[0]} < 2n + nu_1 = {2 * n + self.nu[0]}")
        for j in range(1, p + l - 1):
            if self.m[j] < n + self.nu[j] + 1:
                raise ValueError(
                    f"m_{j + 1} = {self.m[j]} < n + nu_{j + 1} + 1 = {n + self.nu[j] + 1}"
                )

    @property
    def factors(self) -> int:
        return self.p + self.l - 1

    def gap(self, j: int) -> int:
        """m_j - n - nu_j for 1-based j."""
        return self.m[j - 1] - self.n - self.nu[j - 1]

    def truncated(self, factors: int, levels: int | None = None) -> "ProcessParams":
        """Same sizes with only the first ``factors`` matrices, as p levels with l fixed."""
        p = factors - self.l + 1 if levels is None else levels
        l = factors - p + 1
        return ProcessParams(self.n, p, l, self.m[:factors], self.nu[:factors])


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for a (seed, stream) pair.

    Philox is counter based, so each stream is reproducible no matter how
    tasks are scheduled.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def haar_unitary(m: int, rng=None, size: int | None = None) -> np.ndarray:
    """Haar unitary of size m via QR of a complex Ginibre matrix.

    The phases of diag(R) are moved into Q so the law is exactly Haar.
    With ``size`` a stack of independent matrices is returned.
    """
    rng = _as_rng(rng)
    shape = (m, m) if size is None else (size, m, m)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def truncate(U: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Top-left rows x cols block."""
    if rows > U.shape[-2] or cols > U.shape[-1] or rows < 1 or cols < 1:
        raise ValueError(f"cannot take a {rows}x{cols} block of a {U.shape[-2:]} matrix")
    return U[..., :rows, :cols]


def sample_product_process(params: ProcessParams, rng=None, size: int | None = None) -> np.ndarray:
    """Squared singular values of the running products, shape (p, n).

    With ``size`` the result has shape (size, p, n). Each level is sorted
    ascending and clamped to [0, 1].
    """
    rng = _as_rng(rng)
    n = params.n
    batch = 1 if size is None else size
    dims = [n] + [n + v for v in params.nu]
    prod = None
    levels = []
    for j in range(params.factors):
        rows, cols = dims[j + 1], dims[j]
        if max(rows, cols) > params.m[j]:
            raise ValueError(f"a {rows}x{cols} truncation does not fit in U({params.m[j]})")
        T = truncate(haar_unitary(params.m[j], rng, size=batch), rows, cols)
        prod = T if prod is None else T @ prod
        if j >= params.l - 1:
            sv = np.linalg.svd(prod, compute_uv=False)
            levels.append(np.clip(np.sort(sv**2, axis=-1), 0.0, 1.0))
    out = np.stack(levels, axis=1)
    return out[0] if size is None else out


def weight_c(params: ProcessParams, l: int) -> float:
    """Prefactor Gamma(m_1-2n-nu_1+1) prod_{j=2..l} Gamma(m_j-n-nu_j)."""
    n = params.n
    out = math.lgamma(params.m[0] - 2 * n - params.nu[0] + 1)
    out += sum(math.lgamma(params.gap(j)) for j in range(2, l + 1))
    return math.exp(out)


def weight_params(params: ProcessParams, k: int, l: int) -> MeijerParams:
    n, m, nu = params.n, params.m, params.nu
    a = [m[j] - n for j in range(l - 1, 0, -1)] + [m[0] - 2 * n + k]
    b = [nu[j] for j in range(l - 1, 0, -1)] + [nu[0] + k - 1]
    return MeijerParams(a, b)


def weight_w(k: int, l: int, params: ProcessParams, x):
    """Weight w_k^(l)(x) built from the first l factors; zero for x >= 1."""
    if not 1 <= k <= params.n:
        raise ValueError(f"k must lie in 1..{params.n}")
    if not 1 <= l <= params.factors:
        raise ValueError(f"l must lie in 1..{params.factors}")
    return weight_c(params, l) * meijer_g_l0(weight_params(params, k, l), x)


def log_normalization_Z(params: ProcessParams) -> float:
    n = params.n
    d1 = params.m[0] - 2 * n - params.nu[0]
    out = sum(math.lgamma(d1 + j) + math.lgamma(j) for j in range(1, n + 1))
    out += n * sum(math.lgamma(params.gap(k)) for k in range(2, params.factors + 1))
    for k in range(1, params.factors + 1):
        nu_k = params.nu[k - 1]
        for j in range(1, params.m[k - 1] - n - nu_k + 1):
            # log (j + nu_k)_n
            out -= math.lgamma(j + nu_k + n) - math.lgamma(j + nu_k)
    return out


def normalization_Z(params: ProcessParams) -> float:
    """Normalization of the joint density over ordered configurations."""
    return math.exp(log_normalization_Z(params))


def _interlace_det(x_lo: np.ndarray, x_hi: np.ndarray, m: int, n: int, nu: int) -> float:
    """det[(y_j)^nu (x_k - y_j)_+^(m-n-nu-1) x_k^(n-m)]_{k,j}, x = x_lo, y = x_hi."""
    e = m - n - nu - 1
    diff = x_lo[:, None] - x_hi[None, :]
    pos = np.where(diff > 0, diff, 0.0)
    core = (diff > 0).astype(float) if e == 0 else pos**e
    M = x_hi[None, :] ** nu * core * x_lo[:, None] ** float(n - m)
    return float(np.linalg.det(M))


def unnormalized_density(params: ProcessParams, config) -> float:
    x = np.asarray(config, dtype=float).reshape(params.p, params.n)
    if np.any(x <= 0) or np.any(x >= 1):
        return 0.0
    n, l = params.n, params.l
    top = x[-1]
    out = float(np.prod([top[j] - top[i] for i in range(n) for j in range(i + 1, n)]))
    for r in range(1, params.p):
        out *= _interlace_det(x[r - 1], x[r], params.m[l + r - 1], n, params.nu[l + r - 1])
        if out == 0.0:
            return 0.0
    W = np.array([weight_w(k, l, params, x[0]) for k in range(1, n + 1)])
    return out * float(np.linalg.det(W))


def joint_density(params: ProcessParams, config) -> float:
    """Joint density of all levels; ``config`` has shape (p, n), rows ascending."""
    d = unnormalized_density(params, config)
    return d / normalization_Z(params) if d != 0.0 else 0.0


def spherical_moment_2x2(mu, factors: int = 1) -> float:
    """E[s_mu(a) / s_mu(1,1)] for eigenvalues a of a product of ``factors``
    independent Gram matrices T T*, T the 2x2 corner of a Haar U(4)."""
    mu = as_partition(mu)
    if len(mu) > 2:
        raise ValueError("mu must have at most two parts")
    single = 1.0
    for i in (1, 2):
        single *= i * (i + 1) / ((mu[i - 1] - i + 3) * (mu[i - 1] - i + 4))
    return single**factors


def corner_gram_eigenvalues(N: int, factors: int = 1, rng=None) -> np.ndarray:
    """Eigenvalues of a product of ``factors`` Gram matrices of 2x2 corners of U(4).

    Returns an (N, 2) array sorted ascending. The product of positive
    matrices is similar to a positive matrix, so the eigenvalues are real.
    """
    rng = _as_rng(rng)
    prod = None
    for _ in range(factors):
        T = truncate(haar_unitary(4, rng, size=N), 2, 2)
        G = T @ np.conj(np.swapaxes(T, -1, -2))
        prod = G if prod is None else prod @ G
    ev = np.linalg.eigvals(prod).real
    return np.sort(ev, axis=-1)
