"""Correlation kernels of the product process and of its discrete Schur-process model.

Three constructions live here:

* ``kernel_contour``: a double contour integral over two circles, one around
  the t-poles 0..n-1 and one around the negative zeta-poles.
* ``discrete_or_kernel``: the kernel of the Schur process whose
  specializations are geometric series in q = exp(-eps); after a gauge
  factor it converges to the continuous kernel as eps -> 0.
* ``em_kernel``: the biorthogonal form built from transition functions,
  an explicit inverse of the total transition matrix and the finite
  P/Q expansion.

Kernels from different constructions may differ by a gauge
K(r,x;s,y) -> f_r(x) K / f_s(y), so they are compared through diagonal values
and correlation determinants only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .rmt import ProcessParams, weight_w
from .specfun import ConvergenceError, MeijerParams, loop_integral, meijer_g_l0, residue_sum
from .symfun import complete_homogeneous


class ContourOverlapError(ValueError):
    """The two integration circles cannot be separated."""


class RadiusSelectionError(ValueError):
    """No admissible radii exist for the discrete kernel contours."""


class ConditioningError(ArithmeticError):
    """A finite expansion cancelled too many digits to be trusted."""


@dataclass(frozen=True)
class KernelQuery:
    """Evaluation point (r, x; s, y) with 1-based levels and positions in (0, 1)."""

    r: int
    x: float
    s: int
    y: float

    def check(self, params: ProcessParams) -> None:
        for lev in (self.r, self.s):
            if not 1 <= lev <= params.p:
                raise ValueError(f"level {lev} outside 1..{params.p}")
        for pos in (self.x, self.y):
            if not 0 < pos < 1:
                raise ValueError(f"position {pos} outside (0, 1)")


@dataclass(frozen=True)
class DiscreteKernelQuery:
    """Evaluation point (r, u; s, v); u = lambda_i - i is an integer >= -n."""

    r: int
    u: int
    s: int
    v: int

    def check(self, params: ProcessParams) -> None:
        for lev in (self.r, self.s):
            if not 1 <= lev <= params.p:
                raise ValueError(f"level {lev} outside 1..{params.p}")
        for pos in (self.u, self.v):
            if int(pos) != pos or pos < -params.n:
                raise ValueError(f"position {pos} must be an integer >= -{params.n}")


def _circle(center: float, radius: float, N: int):
    """Nodes and weights so that sum(w f(s)) approximates (1/2 pi i) of f around the circle."""
    theta = 2 * np.pi * (np.arange(N) + 0.5) / N
    e = np.exp(1j * theta)
    return center + radius * e, radius * e / N


def _d(params: ProcessParams, idx: int) -> int:
    """m_a - n - nu_a for 0-based factor index."""
    return params.m[idx] - params.n - params.nu[idx]


def _g_term(params: ProcessParams, r: int, s: int, x, y) -> np.ndarray:
    """G^{s-r,0} over factors a = r+l .. s+l-1 at y/x; zero for y >= x."""
    l, n = params.l, params.n
    idx = range(r + l - 1, s + l - 1)
    mp = MeijerParams([params.m[i] - n for i in idx], [params.nu[i] for i in idx])
    return meijer_g_l0(mp, np.asarray(y / x, dtype=float))


# continuous double contour kernel


class ContourKernel:
    """Double contour kernel evaluated by the trapezoid rule on two circles.

    The integrand is split into a t-part A(t) x^t, a zeta-part
    B(zeta) y^{-zeta-1} and the Cauchy factor 1/(zeta - t), so a batch of
    points costs one bilinear form per node count.
    """

    def __init__(
        self,
        params: ProcessParams,
        *,
        scale: float = 1.0,
        nodes: int = 128,
        max_nodes: int = 4096,
        tol: float = 1e-10,
    ):
        self.params = params
        self.scale = float(scale)
        self.nodes = int(nodes)
        self.max_nodes = int(max_nodes)
        self.tol = float(tol)
        self._cache: dict = {}

    def _geometry(self, s: int):
        n, l = self.params.n, self.params.l
        idx = range(s + l - 1)
        # zeta-poles fill [-(max m_a - n), -min(1 + nu_a)]
        lo = -max(self.params.m[i] - n for i in idx)
        hi = -min(1 + self.params.nu[i] for i in idx)
        gap = -hi
        delta = 0.45 * gap * self.scale
        if 2 * delta >= gap:
            raise ContourOverlapError(f"scale {self.scale} makes the circles touch")
        t_circle = ((n - 1) / 2, (n - 1) / 2 + delta)
        z_circle = ((lo + hi) / 2, (hi - lo) / 2 + delta)
        return t_circle, z_circle

    def _t_part(self, r: int, s: int, N: int):
        key = ("t", r, s, N)
        if key not in self._cache:
            n, l = self.params.n, self.params.l
            (c, R), _ = self._geometry(s)
            t, w = _circle(c, R, N)
            logA = np.zeros(N, dtype=complex)
            for k in range(n):
                logA -= np.log(t - k)
            for i in range(r + l - 1):
                b = self.params.nu[i] + 1
                for j in range(_d(self.params, i)):
                    logA += np.log(t + b + j)
            self._cache[key] = (t, w * np.exp(logA))
        return self._cache[key]

    def _z_part(self, s: int, N: int):
        key = ("z", s, N)
        if key not in self._cache:
            n, l = self.params.n, self.params.l
            _, (c, R) = self._geometry(s)
            z, w = _circle(c, R, N)
            logB = np.zeros(N, dtype=complex)
            for k in range(n):
                logB += np.log(z - k)
            for i in range(s + l - 1):
                b = self.params.nu[i] + 1
                for j in range(_d(self.params, i)):
                    logB -= np.log(z + b + j)
            self._cache[key] = (z, w * np.exp(logB))
        return self._cache[key]

    def _double(self, r: int, s: int, x: np.ndarray, y: np.ndarray, N: int) -> np.ndarray:
        t, A = self._t_part(r, s, N)
        z, B = self._z_part(s, N)
        X = np.exp(np.log(x)[:, None] * t[None, :]) * A[None, :]
        Y = np.exp(-np.log(y)[:, None] * (z[None, :] + 1)) * B[None, :]
        C = 1.0 / (z[None, :] - t[:, None])
        return np.einsum("pi,ij,pj->p", X, C, Y).real

    def double_contour(self, r: int, s: int, x, y) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.atleast_1d(np.asarray(y, dtype=float))
        x, y = np.broadcast_arrays(x, y)
        x, y = x.ravel(), y.ravel()
        N = self.nodes
        prev = self._double(r, s, x, y, N)
        while N < self.max_nodes:
            N *= 2
            cur = self._double(r, s, x, y, N)
            if np.all(np.abs(cur - prev) <= self.tol * np.maximum(1.0, np.abs(cur))):
                return cur
            prev = cur
        raise ConvergenceError(f"double contour did not settle with {N} nodes")

    def __call__(self, r: int, x, s: int, y):
        scalar = np.ndim(x) == 0 and np.ndim(y) == 0
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        xs, ys = np.broadcast_arrays(xs, ys)
        out = self.double_contour(r, s, xs, ys).reshape(xs.shape)
        if s > r:
            out = out - _g_term(self.params, r, s, xs, ys) / xs
        return float(out.ravel()[0]) if scalar else out


def kernel_contour(params: ProcessParams, q: KernelQuery, **kw) -> float:
    """Continuous kernel K(r, x; s, y) by two-circle quadrature."""
    q.check(params)
    return ContourKernel(params, **kw)(q.r, q.x, q.s, q.y)


def kernel_residues(params: ProcessParams, q: KernelQuery) -> float:
    """Same kernel from residues: exact at t = 0..n-1, then per-zeta residue sums.

    Valid when the zeta-poles are simple; with repeated poles the residue
    helper still applies since it handles any multiplicity.
    """
    q.check(params)
    n, l = params.n, params.l
    r, s, x, y = q.r, q.s, q.x, q.y
    poles = []
    for i in range(s + l - 1):
        poles += [-(params.nu[i] + 1 + j) for j in range(_d(params, i))]
    total = 0.0
    for i in range(n):
        # residue of A(t) x^t at t = i
        res_t = (-1) ** (n - 1 - i) / (math.factorial(i) * math.factorial(n - 1 - i))
        for a in range(r + l - 1):
            res_t *= math.prod(i + params.nu[a] + 1 + j for j in range(_d(params, a)))
        # 1/(zeta - i) cancels the zeta - i factor of B
        zeros = [k for k in range(n) if k != i]
        total += res_t * x**i * residue_sum(poles, zeros, y)[0] / y
    if s > r:
        total -= float(_g_term(params, r, s, np.array([x]), np.array([y]))[0]) / x
    return float(total)


# discrete Schur-process kernel


def _exponents(params: ProcessParams, level: int) -> list[int]:
    """Exponents b with q^b in rho_0^+ .. rho_{level-1}^+."""
    out = []
    for i in range(level + params.l - 1):
        out += list(range(1 + params.nu[i], params.m[i] - params.n + 1))
    return out


def _gauge_power(params: ProcessParams, r: int, s: int) -> int:
    return len(_exponents(params, s)) - len(_exponents(params, r))


def _h_term(params: ProcessParams, eps: float, r: int, s: int, u: int, v: int) -> float:
    """h_{v-u} of the specializations strictly between levels r and s."""
    if v < u:
        return 0.0
    idx = range(r + params.l - 1, s + params.l - 1)
    alphas = [math.exp(-eps * b) for i in idx for b in range(1 + params.nu[i], params.m[i] - params.n + 1)]
    return float(complete_homogeneous(alphas, v - u)[v - u])


def _deformed_double(params, eps, r, s, u, v, N):
    n = params.n
    Br, Bs = _exponents(params, r), _exponents(params, s)
    bmin, bmax = min(Bs), max(Bs)
    delta = 0.45 * bmin
    tc, tR = (n - 1) / 2, (n - 1) / 2 + delta
    zc, zR = -(bmin + bmax) / 2, (bmax - bmin) / 2 + delta
    # e^{eps s} repeats with period 2 pi i / eps; keep every circle and
    # every difference t - zeta inside one period
    span = (n - 1) + bmax + 2 * delta
    if max(tR, zR) * eps >= math.pi or span * eps >= 2 * math.pi:
        raise RadiusSelectionError(f"eps = {eps} too large for these sizes")
    t, wt = _circle(tc, tR, N)
    z, wz = _circle(zc, zR, N)
    logA = -eps * u * t
    for i in range(n):
        logA -= np.log(1 - np.exp(eps * (t - i)))
    for a in Br:
        logA += np.log(1 - np.exp(-eps * (a + t)))
    logB = eps * v * z
    for i in range(n):
        logB += np.log(1 - np.exp(eps * (z - i)))
    for b in Bs:
        logB -= np.log(1 - np.exp(-eps * (b + z)))
    A = wt * np.exp(logA)
    B = wz * np.exp(logB)
    C = 1.0 / (1 - np.exp(eps * (t[:, None] - z[None, :])))
    return eps**2 * float((A @ C @ B).real)


def _circle_double(params, eps, r, s, u, v, N):
    n = params.n
    q = math.exp(-eps)
    Br, Bs = _exponents(params, r), _exponents(params, s)
    bmin = min(Bs + Br) if Br else min(Bs)
    if r >= s:
        rz, rw = math.exp(-eps * bmin / 3), math.exp(2 * eps * bmin / 3)
    else:
        rz, rw = math.exp(-eps * bmin * 2 / 3), math.exp(-eps * bmin / 3)
    theta = 2 * np.pi * (np.arange(N) + 0.5) / N
    z = rz * np.exp(1j * theta)
    w = rw * np.exp(1j * theta)
    logf = -(u + 1) * np.log(z)
    for a in Br:
        logf += np.log(1 - q**a / z)
    for i in range(n):
        logf -= np.log(1 - q**i * z)
    logg = -(v + 1) * np.log(w)
    for i in range(n):
        logg += np.log(1 - q**i / w)
    for b in Bs:
        logg -= np.log(1 - q**b * w)
    F = z * np.exp(logf) / N
    G = w * np.exp(logg) / N
    C = 1.0 / (z[:, None] * w[None, :] - 1)
    return float((F @ C @ G).real)


def discrete_or_kernel(
    params: ProcessParams,
    eps: float,
    q: DiscreteKernelQuery,
    *,
    method: str = "deformed",
    gauge: bool = True,
    nodes: int = 128,
    max_nodes: int = 1 << 14,
    tol: float = 1e-12,
) -> float:
    """Kernel of the Schur process with q = exp(-eps) specializations.

    ``method='deformed'`` integrates in the logarithmic variables over circles
    around the finite pole sets; ``method='circle'`` integrates over the
    original |z|, |w| circles and needs far more nodes as eps shrinks. With
    ``gauge`` the result is multiplied by eps^{|B_s| - |B_r|} so that
    K / (eps y) tends to the continuous kernel at y = exp(-eps v).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    q.check(params)
    r, s, u, v = q.r, q.s, int(q.u), int(q.v)
    rule = {"deformed": _deformed_double, "circle": _circle_double}[method]
    N = nodes
    prev = rule(params, eps, r, s, u, v, N)
    while True:
        N *= 2
        cur = rule(params, eps, r, s, u, v, N)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            break
        if N >= max_nodes:
            raise ConvergenceError(f"discrete kernel did not settle with {N} nodes")
        prev = cur
    out = cur
    if r < s and method == "deformed":
        # the circle form has |z| < |w| there and already contains this term
        out -= _h_term(params, eps, r, s, u, v)
    if gauge:
        out *= eps ** _gauge_power(params, r, s)
    return float(out)


# transition-function (biorthogonal) kernel


def em_transition(params: ProcessParams, r: int, s: int, x, y) -> float:
    """Transition function phi_{r,s}.

    Level 0 and level p+1 are index slots: for r = 0 the argument x is an
    integer i in 1..n, for s = p+1 the argument y is an integer j in 1..n.
    """
    n, p, l = params.n, params.p, params.l
    if r >= s:
        return 0.0
    if not (0 <= r and s <= p + 1):
        raise ValueError(f"need 0 <= r < s <= {p + 1}")
    if r == 0 and s == p + 1:
        return float(em_total_matrix(params)[int(x) - 1, int(y) - 1])
    if r == 0:
        return float(weight_w(int(x), s - 1 + l, params, y))
    if s == p + 1:
        j = int(y)
        out = float(x) ** (j - 1)
        for a in range(r + l - 1, p + l - 1):
            out *= math.exp(
                math.lgamma(params.nu[a] + j) + math.lgamma(_d(params, a)) - math.lgamma(params.m[a] - n + j)
            )
        return out
    pref = math.exp(sum(math.lgamma(_d(params, a)) for a in range(r + l - 1, s + l - 1)))
    return pref * float(_g_term(params, r, s, np.array([x]), np.array([y]))[0]) / x


def em_total_matrix(params: ProcessParams) -> np.ndarray:
    """Total transition matrix phi_{0,p+1}(i, j), i, j = 1..n, in Gamma-ratio form."""
    n, p, l = params.n, params.p, params.l
    m, nu = params.m, params.nu
    logc = math.lgamma(m[0] - 2 * n - nu[0] + 1) + sum(math.lgamma(_d(params, a)) for a in range(1, p + l - 1))
    A = np.empty((n, n))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            v = logc + math.lgamma(nu[0] + i + j - 1) - math.lgamma(m[0] - 2 * n + i + j)
            for a in range(1, p + l - 1):
                v += math.lgamma(nu[a] + j) - math.lgamma(m[a] - n + j)
            A[i - 1, j - 1] = math.exp(v)
    return A


def _lpoch(a: float, k: int) -> float:
    """log |(a)_k| with a sign-free product; raises on a vanishing factor."""
    out = 0.0
    for i in range(k):
        f = a + i
        if f == 0:
            raise ZeroDivisionError(f"Pochhammer ({a})_{k} vanishes")
        out += math.log(abs(f))
    return out


def _poch(a: float, k: int) -> float:
    return math.prod(a + i for i in range(k))


def zhang_chen_inverse(alpha: float, beta: float, N: int) -> np.ndarray:
    """Explicit inverse of M_ij = (alpha+1)_{i+j} / (alpha+beta+2)_{i+j}, i, j = 0..N-1."""
    if N < 1:
        raise ValueError("N must be at least 1")
    for v in (alpha, beta):
        if v < 0 and float(-v).is_integer():
            raise ZeroDivisionError(f"-{v} is a nonnegative integer")
    ab = alpha + beta
    out = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            total = 0.0
            for k in range(max(i, j), N):
                total += (
                    (2 * k + ab + 1)
                    * _poch(alpha + 1, k)
                    * math.factorial(k)
                    * _poch(ab + i + 1, k)
                    * _poch(ab + j + 1, k)
                    / (
                        _poch(ab + 1, k)
                        * _poch(beta + 1, k)
                        * math.factorial(k - i)
                        * math.factorial(i)
                        * math.factorial(k - j)
                        * math.factorial(j)
                    )
                )
            pref = (-1) ** (i + j) * _poch(ab + 1, i) * _poch(ab + 1, j)
            pref /= _poch(alpha + 1, i) * _poch(alpha + 1, j) * (ab + 1)
            out[i, j] = pref * total
    return out


def em_inverse_matrix(params: ProcessParams, method: str = "zhang_chen") -> np.ndarray:
    """Inverse of the total transition matrix.

    The matrix factors as c * Mcheck * D with D diagonal in j, and Mcheck is
    a multiple of the Hankel matrix inverted in closed form. ``method='solve'``
    inverts numerically instead.
    """
    n, p, l = params.n, params.p, params.l
    if method == "solve":
        return np.linalg.inv(em_total_matrix(params))
    if method != "zhang_chen":
        raise ValueError(f"unknown method {method!r}")
    m, nu = params.m, params.nu
    alpha, beta = nu[0], m[0] - 2 * n - nu[0]
    logc = math.lgamma(beta + 1) + sum(math.lgamma(_d(params, a)) for a in range(1, p + l - 1))
    logk = math.lgamma(nu[0] + 1) - math.lgamma(m[0] - 2 * n + 2)
    gamma = zhang_chen_inverse(alpha, beta, n)
    logD = np.array(
        [sum(math.lgamma(nu[a] + j) - math.lgamma(m[a] - n + j) for a in range(1, p + l - 1)) for j in range(1, n + 1)]
    )
    return gamma * np.exp(-logD - logc - logk)[:, None]


def em_kernel_direct(params: ProcessParams, q: KernelQuery, method: str = "zhang_chen") -> float:
    """-phi_{r,s}(x,y) + sum_ij phi_{r,p+1}(x,i) (A^{-1})_ij phi_{0,s}(j,y)."""
    q.check(params)
    n, p = params.n, params.p
    Ainv = em_inverse_matrix(params, method)
    left = np.array([em_transition(params, q.r, p + 1, q.x, i) for i in range(1, n + 1)])
    right = np.array([em_transition(params, 0, q.s, j, q.y) for j in range(1, n + 1)])
    return float(left @ Ainv @ right) - em_transition(params, q.r, q.s, q.x, q.y)


def em_P(params: ProcessParams, r: int, k: int, x: float) -> float:
    """P_{r,k}(x) as its finite sum over the residues at 0..k."""
    n, p, l = params.n, params.p, params.l
    m, nu = params.m, params.nu
    M1 = m[0] - 2 * n
    logpref = math.lgamma(nu[0] + 1) - math.lgamma(M1 + 1)
    logpref += sum(math.lgamma(_d(params, a)) for a in range(r + l - 1, p + l - 1))
    total = 0.0
    for i in range(k + 1):
        lg = math.lgamma(M1 + i + k + 1) - math.lgamma(k - i + 1) - math.lgamma(i + 1)
        lg += sum(math.lgamma(m[a] - n + i + 1) for a in range(1, r + l - 1))
        lg -= sum(math.lgamma(nu[a] + i + 1) for a in range(r + l - 1))
        total += (-1) ** (k - i) * math.exp(lg + logpref) * x**i
    return total


def _q_poles_zeros(params: ProcessParams, s: int, k: int):
    n, l = params.n, params.l
    m, nu = params.m, params.nu
    M1 = m[0] - 2 * n
    # Gamma(nu_1+u) / Gamma(M1+1+u)
    poles = [-(nu[0] + i) for i in range(M1 + 1 - nu[0])]
    # Gamma(nu_a+u) / Gamma(m_a-n+u), a >= 2
    for a in range(1, s + l - 1):
        poles += [-(nu[a] + i) for i in range(_d(params, a))]
    # 1 / (u + M1 + 1)_k
    poles += [-(M1 + 1 + i) for i in range(k)]
    # (u - k)_k
    zeros = [k - i for i in range(k)]
    return poles, zeros


def _q_prefactor(params: ProcessParams, s: int, k: int) -> float:
    n, l = params.n, params.l
    m, nu = params.m, params.nu
    M1 = m[0] - 2 * n
    out = (-1) ** k * math.exp(
        math.lgamma(M1 - nu[0] + 1) - math.lgamma(M1 + 1) + math.lgamma(M1 + 1 + k) - math.lgamma(k + 1)
    )
    out *= _poch(nu[0] - M1 - k, k) / _poch(1 + nu[0], k)
    out *= math.exp(sum(math.lgamma(_d(params, a)) for a in range(1, s + l - 1)))
    return out


def em_Q(params: ProcessParams, s: int, k: int, y, *, method: str = "contour"):
    """Q_{s,k}(y) from its single contour integral around all poles.

    ``method='residues'`` sums the residues exactly instead, which is
    accurate for y away from 1.
    """
    poles, zeros = _q_poles_zeros(params, s, k)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    if method == "contour":
        val = loop_integral(poles, zeros, ys)
    elif method == "residues":
        val = residue_sum(poles, zeros, ys)
    else:
        raise ValueError(f"unknown method {method!r}")
    out = _q_prefactor(params, s, k) * val
    return out if np.ndim(y) else float(out[0])


def _ktilde_coefficients(params: ProcessParams) -> np.ndarray:
    n, p, l = params.n, params.p, params.l
    m, nu = params.m, params.nu
    M1 = m[0] - 2 * n
    logc0 = math.lgamma(M1 + 1) - math.lgamma(M1 - nu[0] + 1) - math.lgamma(nu[0] + 1)
    logc0 -= sum(math.lgamma(_d(params, a)) for a in range(1, p + l - 1))
    c = np.empty(n)
    for k in range(n):
        c[k] = (
            math.factorial(k)
            * _poch(nu[0] + 1, k)
            * (2 * k + M1 + 1)
            / (_poch(M1 + 1, k) * _poch(M1 - nu[0] + 1, k))
        )
    return math.exp(logc0) * c


def em_kernel(params: ProcessParams, q: KernelQuery, *, max_loss: float = 1e6) -> float:
    """Kernel -phi_{r,s}(x,y) + sum_k c_k P_{r,k}(x) Q_{s,k}(y).

    Raises ConditioningError when the terms of the sum exceed the result by
    more than ``max_loss``, i.e. when more than six digits cancel.
    """
    q.check(params)
    c = _ktilde_coefficients(params)
    terms = np.array([c[k] * em_P(params, q.r, k, q.x) * em_Q(params, q.s, k, q.y) for k in range(params.n)])
    total = math.fsum(terms)
    size = float(np.abs(terms).sum())
    if size > max_loss * abs(total) and size > 1e-300:
        raise ConditioningError(f"K-tilde sum lost {math.log10(size / max(abs(total), 1e-300)):.1f} digits")
    return total - em_transition(params, q.r, q.s, q.x, q.y)


def correlation_function(kernel: Callable, points: Sequence) -> float:
    """det[K(r_i, x_i; r_j, x_j)] for points given as (level, position) pairs."""
    pts = list(points)
    if not pts:
        return 1.0
    M = np.array([[kernel(ri, xi, rj, xj) for (rj, xj) in pts] for (ri, xi) in pts], dtype=float)
    return float(np.linalg.det(M))


def kernel_handle(params: ProcessParams, kind: str = "contour", **kw) -> Callable:
    """Callable (r, x, s, y) -> K for 'contour', 'em' or 'em_direct'."""
    if kind == "contour":
        ck = ContourKernel(params, **kw)
        return lambda r, x, s, y: ck(r, x, s, y)
    if kind == "em":
        return lambda r, x, s, y: em_kernel(params, KernelQuery(r, x, s, y), **kw)
    if kind == "em_direct":
        return lambda r, x, s, y: em_kernel_direct(params, KernelQuery(r, x, s, y), **kw)
    raise ValueError(f"unknown kernel kind {kind!r}")
