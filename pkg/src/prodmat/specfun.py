"""Special functions: complex log-Gamma, Pochhammer symbols, Meijer G of type
G^{l,0}_{l,l} and the Pfaff-Saalschutz summation.

The Meijer G evaluation integrates prod Gamma(b+s)/prod Gamma(a+s) x^{-s}
along a loop around the negative real axis. When every gap a_j - b_j is a
positive integer the integrand is rational times x^{-s}, so the loop can be
closed into a circle around the finite pole set and the periodic trapezoid
rule converges geometrically. Otherwise the loop is a wedge whose two rays
leave the real axis at angles +-3pi/4 and are integrated with tanh-sinh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class GammaPoleError(ValueError):
    """log_gamma evaluated at a nonpositive integer."""


class ConvergenceError(RuntimeError):
    """A quadrature did not settle within its refinement budget."""


class BalanceError(ValueError):
    """Pfaff-Saalschutz called with an unbalanced parameter set."""


# Stirling series coefficients B_{2k} / (2k (2k-1)), k = 1..12
_STIRLING = np.array([
    1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360,
    1 / 156, -3617 / 122400, 43867 / 244188, -174611 / 125400,
    77683 / 5796, -236364091 / 1506960,
])
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)
_SHIFT = 20.0


def log_gamma(z):
    """Principal branch of log Gamma(z) for complex z (scalar or array).

    The Stirling series is used once |z| >= 20 and |arg z| <= 0.8 pi; other
    arguments are pushed right with Gamma(z) = Gamma(z + K) / (z (z+1) ...
    (z+K-1)). Summing principal logs keeps the cut on the negative real axis.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any((z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))):
        raise GammaPoleError("log_gamma has a pole at nonpositive integers")
    acc = np.zeros_like(z)
    w = z.copy()
    # shift until Stirling is accurate: |w| >= 20 and |arg w| <= 0.8 pi
    active = (np.abs(w) < _SHIFT) | (np.abs(np.angle(w)) > 0.8 * np.pi)
    while np.any(active):
        acc[active] += np.log(w[active])
        w[active] += 1.0
        active = (np.abs(w) < _SHIFT) | (np.abs(np.angle(w)) > 0.8 * np.pi)
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in _STIRLING[::-1]:
        series = series * inv2 + c
    out = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv - acc
    return out[0] if scalar else out


def pochhammer(a, m: int):
    """Rising factorial (a)_m = a (a+1) ... (a+m-1)."""
    if m < 0:
        raise ValueError("pochhammer needs m >= 0")
    out = np.ones_like(np.asarray(a, dtype=float))
    for j in range(m):
        out = out * (a + j)
    return out if np.ndim(out) else float(out)


def beta(a: float, b: float) -> float:
    return float(np.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b)).real)


@dataclass(frozen=True)
class MeijerParams:
    """Upper parameters ``a`` and lower parameters ``b`` of G^{l,0}_{l,l}."""

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __init__(self, a: Sequence[float], b: Sequence[float]):
        a, b = tuple(float(v) for v in a), tuple(float(v) for v in b)
        if len(a) != len(b) or not a:
            raise ValueError("a and b must be nonempty and of equal length")
        if any(ai - bi <= 0 for ai, bi in zip(a, b)):
            raise ValueError("each gap a_j - b_j must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def l(self) -> int:
        return len(self.a)

    def extend(self, a: float, b: float) -> "MeijerParams":
        return MeijerParams((a,) + self.a, (b,) + self.b)

    def integer_gaps(self) -> tuple[int, ...] | None:
        gaps = [ai - bi for ai, bi in zip(self.a, self.b)]
        if all(abs(g - round(g)) < 1e-12 for g in gaps):
            return tuple(int(round(g)) for g in gaps)
        return None

    def poles(self) -> np.ndarray:
        """All poles with multiplicity (integer gaps only)."""
        gaps = self.integer_gaps()
        if gaps is None:
            raise ValueError("pole set is infinite unless all gaps are integers")
        return np.concatenate([-bj - np.arange(d) for bj, d in zip(self.b, gaps)])


def _as_params(params) -> MeijerParams:
    if isinstance(params, MeijerParams):
        return params
    a, b = params
    return MeijerParams(a, b)


def _log_gamma_ratio(params: MeijerParams, s: np.ndarray) -> np.ndarray:
    """log of prod Gamma(b_j + s) / Gamma(a_j + s), up to multiples of 2 pi i."""
    out = np.zeros_like(s, dtype=complex)
    for aj, bj in zip(params.a, params.b):
        out += log_gamma(bj + s) - log_gamma(aj + s)
    return out


def _loop_radius(half_width: float, deficit: float, logx: float) -> float:
    """Circle radius for one argument x = exp(logx).

    Near x = 1 the value is tiny compared with the integrand on a tight
    circle; widening to deficit / |log x| (the saddle of |s|^-deficit x^-s)
    removes that cancellation. For small x a thin margin keeps the growth
    of x^{-s} on the right edge small.
    """
    lx = -logx
    margin = float(np.clip(2.0 / lx, 0.25, 1.0)) if lx > 0 else 1.0
    radius = half_width + margin
    if lx > 0 and deficit > 0:
        radius = max(radius, deficit / lx)
    # quantize so nearby arguments share one set of nodes
    return float(2.0 ** (np.ceil(4 * np.log2(radius)) / 4))


def _poly_log(s: np.ndarray, roots) -> np.ndarray:
    out = np.zeros_like(s, dtype=complex)
    for r in roots:
        out += np.log(s - r)
    return out


def loop_integral(poles, zeros, x, *, nodes=128, scale=1.0, tol=1e-11, max_nodes=1 << 16):
    """(1/2 pi i) of prod(s - zeros) / prod(s - poles) x^{-s} around all poles.

    The poles must be real. The contour is a circle centred on the pole
    interval, traversed counterclockwise, with the periodic trapezoid rule
    doubled until successive values agree.
    """
    poles = np.asarray(poles, dtype=float)
    zeros = np.asarray(zeros, dtype=complex)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = float(poles.min()), float(poles.max())
    center = 0.5 * (lo + hi)
    logx = np.log(x)
    deficit = poles.size - zeros.size
    radii = np.array([_loop_radius(0.5 * (hi - lo), deficit, v) for v in logx])
    out = np.empty(x.shape)
    for radius in np.unique(radii):
        pick = radii == radius
        out[pick] = _loop_fixed(poles, zeros, center, scale * radius, logx[pick], nodes, tol, max_nodes)
    return out


def _loop_fixed(poles, zeros, center, radius, logx, nodes, tol, max_nodes):
    def rule(N):
        theta = 2 * np.pi * (np.arange(N) + 0.5) / N
        e = np.exp(1j * theta)
        s = center + radius * e
        base = _poly_log(s, zeros) - _poly_log(s, poles) + np.log(radius * e / N)
        terms = np.exp(base[None, :] - s[None, :] * logx[:, None])
        return terms.sum(axis=1).real, np.abs(terms).sum(axis=1)

    prev, _ = rule(nodes)
    N = nodes
    while N < max_nodes:
        N *= 2
        cur, size = rule(N)
        if np.all(np.abs(cur - prev) <= tol * np.abs(cur) + 1e-15 * size):
            return cur
        prev = cur
    raise ConvergenceError(f"loop quadrature did not settle with {N} nodes")


def residue_sum(poles, zeros, x):
    """Sum of residues of prod(s - zeros) / prod(s - poles) x^{-s}, exact.

    Poles may repeat. At a pole p of order k the residue is the coefficient
    of (s-p)^(k-1) in a truncated Taylor product around p.
    """
    poles = np.round(np.asarray(poles, dtype=float), 12)
    zeros = np.asarray(zeros, dtype=float)
    logx = np.log(np.atleast_1d(np.asarray(x, dtype=float)))
    uniq, mult = np.unique(poles, return_counts=True)
    total = np.zeros(logx.shape)
    for p, k in zip(uniq, mult):
        series = np.zeros((logx.size, k))
        for j in range(k):
            series[:, j] = (-logx) ** j / math.factorial(j)
        series *= np.exp(-p * logx)[:, None]
        factors = [np.array([p - z, 1.0] + [0.0] * k)[:k] for z in zeros]
        for q, c in zip(uniq, mult):
            if q != p:
                inv = np.array([(-1) ** j / (p - q) ** (j + 1) for j in range(k)])
                factors += [inv] * c
        for f in factors:
            series = np.stack([series[:, : j + 1] @ f[j::-1] for j in range(k)], axis=1)
        total += series[:, k - 1]
    return total


def _tanh_sinh(f, T, tol=1e-11, level_max=12):
    """Tanh-sinh rule on [0, T] for a vector valued integrand f(t) -> (len(t), k).

    Convergence is judged against the integral of |f| so that cancellation
    in a small result does not stall the refinement.
    """
    def nodes(u):
        sh = 0.5 * np.pi * np.sinh(u)
        t = 0.5 * T * (1 + np.tanh(sh))
        dt = 0.25 * np.pi * T * np.cosh(u) / np.cosh(sh) ** 2
        keep = (t > 0) & (t < T)
        return t[keep], dt[keep]

    h = 0.5
    t, dt = nodes(np.arange(-4.0, 4.0 + h / 2, h))
    vals = f(t) * dt[:, None]
    total, mass = vals.sum(axis=0), np.abs(vals).sum(axis=0)
    prev = total * h
    for _ in range(level_max):
        h /= 2
        t, dt = nodes(np.arange(-4.0 + h, 4.0, 2 * h))
        vals = f(t) * dt[:, None]
        total, mass = total + vals.sum(axis=0), mass + np.abs(vals).sum(axis=0)
        cur = total * h
        if np.all(np.abs(cur - prev) <= tol * np.maximum(np.abs(cur), 1e-4 * mass * h)):
            return cur
        prev = cur
    raise ConvergenceError("tanh-sinh did not settle on a Hankel ray")


def _g_wedge(params, x, scale=1.0, tol=1e-11):
    """Two rays at +-3pi/4 from a vertex to the right of every pole."""
    out = np.empty(x.shape)
    for i, xi in enumerate(x):
        out[i] = _wedge_one(params, math.log(xi), scale, tol)
    return out


def _wedge_one(params, logx, scale, tol):
    total_gap = sum(aj - bj for aj, bj in zip(params.a, params.b))
    # same saddle reasoning as the closed loop: push the vertex right near x = 1
    offset = scale * max(0.5, total_gap / -logx)
    vertex = -min(params.b) + offset
    phase = np.exp(0.75j * np.pi)
    decay = -logx * math.sin(math.pi / 4)
    # integrand ~ |s|^-gap exp(-decay t) relative to its value at the vertex
    T = 40.0 / decay
    for _ in range(200):
        if -total_gap * math.log1p(T / (abs(vertex) + 1)) - decay * T < -40:
            break
        T *= 1.25

    def f(t):
        s = vertex + t * phase
        vals = np.exp(_log_gamma_ratio(params, s) - s * logx) * phase
        # upper ray minus the conjugate lower ray, over 2 pi i
        return (vals.imag / np.pi)[:, None]

    return float(_tanh_sinh(f, T, tol=tol)[0])


def meijer_g_l0(params, x, *, scale: float = 1.0, nodes: int = 128):
    """G^{l,0}_{l,l}(a; b | x); zero for x >= 1.

    ``params`` is a MeijerParams or an (a, b) pair. ``scale`` stretches the
    contour and ``nodes`` sets the starting trapezoid size; both exist for
    contour-independence checks.
    """
    params = _as_params(params)
    if params.l == 1:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs <= 0):
            raise ValueError("Meijer G needs x > 0")
        out = np.zeros(xs.shape)
        inside = xs < 1
        a, b = params.a[0], params.b[0]
        xi = xs[inside]
        out[inside] = (1 - xi) ** (a - b - 1) * xi**b / math.gamma(a - b)
        return out if np.ndim(x) else float(out[0])
    return meijer_g_contour(params, x, scale=scale, nodes=nodes)


def meijer_g_contour(params, x, *, scale: float = 1.0, nodes: int = 128):
    """Contour quadrature without the l = 1 closed-form shortcut."""
    params = _as_params(params)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs <= 0):
        raise ValueError("Meijer G needs x > 0")
    out = np.zeros(xs.shape)
    inside = xs < 1
    if np.any(inside):
        if params.integer_gaps() is not None:
            out[inside] = loop_integral(params.poles(), [], xs[inside], nodes=nodes, scale=scale)
        else:
            out[inside] = _g_wedge(params, xs[inside], scale=scale)
    return out if np.ndim(x) else float(out[0])


def meijer_g_residues(params, x):
    """Finite residue sum for integer gaps, any pole multiplicity."""
    params = _as_params(params)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(xs.shape)
    inside = (xs > 0) & (xs < 1)
    out[inside] = residue_sum(params.poles(), [], xs[inside])
    return out if np.ndim(x) else float(out[0])


def meijer_convolution_step(params_in, m: int, nu: int, n: int, y: float):
    """Both sides of the one-factor Meijer G convolution.

    Returns (lhs, rhs) with lhs the quadrature of
    int_0^1 x^nu (1-x)^(m-n-nu-1) G(y/x) dx/x and rhs
    Gamma(m-n-nu) times G with (m-n; nu) prepended.
    """
    from scipy.integrate import quad

    params_in = _as_params(params_in)
    gap = m - n - nu
    if gap < 1:
        raise ValueError(f"m - n - nu = {gap} < 1: the convolution integral diverges")
    rhs = math.gamma(gap) * meijer_g_l0(params_in.extend(m - n, nu), y)
    if y >= 1:
        return 0.0, rhs

    def integrand(x):
        return x ** (nu - 1) * (1 - x) ** (gap - 1) * meijer_g_l0(params_in, y / x)

    lhs, _ = quad(integrand, y, 1.0, epsabs=1e-14, epsrel=1e-11, limit=200)
    return lhs, rhs


def pfaff_saalschutz(k: int, a: float, b: float, c: float, d: float):
    """Terminating balanced 3F2(-k, a, b; c, d; 1) and its product form."""
    if abs(c + d - (1 - k + a + b)) > 1e-12:
        raise BalanceError(f"c + d = {c + d} but 1 - k + a + b = {1 - k + a + b}")
    lhs, term = 0.0, 1.0
    for j in range(k + 1):
        lhs += term
        if j < k:
            term *= (-k + j) * (a + j) * (b + j) / ((c + j) * (d + j) * (j + 1))
    rhs = pochhammer(c - a, k) * pochhammer(c - b, k) / (pochhammer(c, k) * pochhammer(c - a - b, k))
    return lhs, float(rhs)
