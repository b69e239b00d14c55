"""Skew plane partitions weighted by q^Volume.

A skew plane partition fills the cells of the A x B box outside a Young
diagram pi (which sits in the top-left corner) with nonnegative integers
that weakly decrease along rows and down columns. Its diagonals are
interlacing Young diagrams, so selected diagonals form a Schur process whose
eps -> 0 limit (q = exp(-eps)) is a product process of truncated unitaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .rmt import ProcessParams, _as_rng
from .symfun import Partition, as_partition, schur_eval, skew_schur_eval


class ConditionViolation(ValueError):
    """The selected slices give process parameters outside the valid range."""


class SizeLimitError(ValueError):
    """An exhaustive enumeration would be too large."""


@dataclass(frozen=True)
class SkewShape:
    """Support B^A / pi: the A x B box minus the diagram pi in its top-left corner."""

    A: int
    B: int
    pi: Partition = Partition()

    def __post_init__(self):
        object.__setattr__(self, "pi", as_partition(self.pi))
        if self.A < 1 or self.B < 1:
            raise ValueError("A and B must be positive")
        if len(self.pi) > self.A or self.pi[0] > self.B:
            raise ValueError(f"{self.pi} does not fit in a {self.A} x {self.B} box")

    def mask(self) -> np.ndarray:
        """Boolean A x B array, True on support cells."""
        cols = np.arange(self.B)[None, :]
        rows = np.array([self.pi[i] for i in range(self.A)])[:, None]
        return cols >= rows

    @property
    def cells(self) -> int:
        return self.A * self.B - self.pi.size


@dataclass(frozen=True, eq=False)
class PlanePartition:
    """Filling of a skew shape; ``entries`` is A x B with zeros off the support."""

    shape: SkewShape
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int64)
        if e.shape != (self.shape.A, self.shape.B):
            raise ValueError(f"entries must have shape {(self.shape.A, self.shape.B)}")
        mask = self.shape.mask()
        e = np.where(mask, e, 0)
        if np.any(e < 0):
            raise ValueError("entries must be nonnegative")
        if not is_monotone(e, mask):
            raise ValueError("entries must weakly decrease along rows and columns")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def key(self) -> tuple:
        return (self.shape, self.entries.tobytes())

    def __eq__(self, other) -> bool:
        return isinstance(other, PlanePartition) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"PlanePartition({self.entries.tolist()})"


def is_monotone(entries: np.ndarray, mask: np.ndarray) -> bool:
    """Weak decrease down columns and along rows, checked on support cells only.

    Works on a single A x B array or a stack of them.
    """
    e = np.asarray(entries)
    down = mask[:-1, :] & mask[1:, :]
    right = mask[:, :-1] & mask[:, 1:]
    ok_down = np.all(~down | (e[..., :-1, :] >= e[..., 1:, :]))
    ok_right = np.all(~right | (e[..., :, :-1] >= e[..., :, 1:]))
    return bool(ok_down and ok_right)


def volume(pp: PlanePartition) -> int:
    return int(pp.entries.sum())


def _diagonal_cells(shape: SkewShape, k: int):
    """Support cells (i, j), 0-based, on the diagonal of slice k (1-based)."""
    mask = shape.mask()
    off = k - shape.A - 1
    return [(i, i + off) for i in range(shape.A) if 0 <= i + off < shape.B and mask[i, i + off]]


def diag_slices(pp: PlanePartition) -> list[Partition]:
    """Slices lambda^(1) .. lambda^(A+B+1); slice k reads the diagonal j - i = k - A - 1."""
    shape = pp.shape
    out = []
    for k in range(1, shape.A + shape.B + 2):
        out.append(Partition(int(pp.entries[i, j]) for i, j in _diagonal_cells(shape, k)))
    return out


def boundary_params(shape: SkewShape) -> tuple[list[int], set[int]]:
    """Boundary labels of the vertical runs and the label set L(pi).

    L(pi) = {A + pi_i - i + 1} holds the labels j whose boundary step j -> j+1
    is vertical. Each maximal vertical run [b, t) contributes the pair (t, b);
    pairs are listed from the topmost run down, so betas[0] = A + pi_1 + 1.
    """
    A = shape.A
    L = {A + shape.pi[i] - (i + 1) + 1 for i in range(A)}
    runs = []
    j = 1
    top = A + shape.B + 1
    while j < top:
        if j in L:
            start = j
            while j in L:
                j += 1
            runs.append((j, start))
        else:
            j += 1
    betas = [v for run in reversed(runs) for v in run]
    return betas, L


@dataclass(frozen=True)
class SliceSelection:
    """Strictly increasing slice indices alpha_1 < ... < alpha_p (1-based)."""

    alphas: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(v) for v in self.alphas)
        if not a:
            raise ValueError("select at least one slice")
        if any(x >= y for x, y in zip(a, a[1:])):
            raise ValueError(f"slice indices must increase strictly: {a}")
        object.__setattr__(self, "alphas", a)

    @property
    def p(self) -> int:
        return len(self.alphas)

    def check(self, shape: SkewShape) -> None:
        betas, _ = boundary_params(shape)
        # the top vertical run is [beta_2, beta_1]; alpha_p = beta_1 is allowed
        if not betas[1] <= self.alphas[0] or not self.alphas[-1] <= betas[0]:
            raise ValueError(
                f"slices {self.alphas} must lie in [{betas[1]}, {betas[0]}]"
            )


def theorem_param_map(shape: SkewShape, slices: SliceSelection) -> ProcessParams:
    """Product-process parameters whose law is the eps -> 0 limit of the selected slices."""
    slices.check(shape)
    betas, _ = boundary_params(shape)
    A, B, pi1 = shape.A, shape.B, shape.pi[0]
    n = B - pi1
    if n < 1:
        raise ConditionViolation("n = B - pi_1 must be positive")
    l = len(betas) // 2
    a = slices.alphas
    p = len(a)
    m = [A + B + 1 - betas[1]]
    nu = [A + pi1 + 1 - a[0]]
    for k in range(2, l + 1):
        m.append(A + B + 1 - betas[2 * k - 1])
        nu.append(A + pi1 + 1 - betas[2 * k - 2])
    for k in range(1, p):
        m.append(A + B + 1 - a[k - 1])
        nu.append(A + pi1 + 1 - a[k])
    if m[0] < 2 * n + nu[0]:
        raise ConditionViolation(
            f"m_1 = {m[0]} < 2n + nu_1 = {2 * n + nu[0]}; needs alpha_1 >= B - pi_1 + beta_2 = {n + betas[1]}"
        )
    for j in range(1, len(m)):
        if m[j] < n + nu[j] + 1:
            raise ConditionViolation(f"m_{j + 1} = {m[j]} < n + nu_{j + 1} + 1 = {n + nu[j] + 1}")
    return ProcessParams(n=n, p=p, l=l, m=tuple(m), nu=tuple(nu))


# sampling


class HeatBathSampler:
    """Parallel single-site heat-bath chains for the q^Volume measure.

    Cells of one checkerboard colour have no support neighbours of the same
    colour, so each colour is resampled at once from its exact conditional:
    a geometric law q^v restricted to [lower, upper], where lower is the
    larger south/east neighbour (0 at the border) and upper is the smaller
    north/west neighbour (unbounded at the border).
    """

    def __init__(self, shape: SkewShape, q: float, chains: int = 1, rng=None, init=None):
        if not 0 < q < 1:
            raise ValueError("q must lie in (0, 1)")
        self.shape = shape
        self.q = float(q)
        self.rng = _as_rng(rng)
        self.mask = shape.mask()
        A, B = shape.A, shape.B
        if init is None:
            self.state = np.zeros((chains, A, B), dtype=np.int64)
        else:
            self.state = np.broadcast_to(np.asarray(init, dtype=np.int64), (chains, A, B)).copy()
        big = np.iinfo(np.int64).max // 4
        self._big = big
        # pads: north/west outside the support act as +inf, south/east as 0
        colour = (np.arange(A)[:, None] + np.arange(B)[None, :]) % 2
        self._colours = [self.mask & (colour == c) for c in (0, 1)]
        self.sweeps_done = 0

    def _bounds(self):
        s = self.state
        C, A, B = s.shape
        up = np.full((C, A + 2, B + 2), self._big, dtype=np.int64)
        up[:, 1:-1, 1:-1] = np.where(self.mask, s, self._big)
        lo = np.zeros((C, A + 2, B + 2), dtype=np.int64)
        lo[:, 1:-1, 1:-1] = np.where(self.mask, s, 0)
        upper = np.minimum(up[:, :-2, 1:-1], up[:, 1:-1, :-2])
        lower = np.maximum(lo[:, 2:, 1:-1], lo[:, 1:-1, 2:])
        return lower, upper

    def _half_sweep(self, sel: np.ndarray) -> None:
        lower, upper = self._bounds()
        lo = lower[:, sel]
        span = upper[:, sel] - lo
        u = self.rng.random(lo.shape)
        logq = math.log(self.q)
        bounded = span < self._big // 2
        # inverse CDF of q^k on 0..span, or on all k >= 0 when unbounded
        tail = np.where(bounded, np.exp(np.minimum(span + 1, 10**6) * logq), 0.0)
        k = np.floor(np.log1p(-u * (1.0 - tail)) / logq).astype(np.int64)
        k = np.where(bounded, np.minimum(k, span), k)
        self.state[:, sel] = lo + np.maximum(k, 0)

    def sweep(self, count: int = 1, check: bool = False) -> None:
        for _ in range(count):
            for sel in self._colours:
                if sel.any():
                    self._half_sweep(sel)
            if check and not is_monotone(self.state, self.mask):
                raise AssertionError("heat-bath update broke monotonicity")
            self.sweeps_done += 1

    def partitions(self) -> list[PlanePartition]:
        return [PlanePartition(self.shape, e) for e in self.state]


def mcmc_sampler(shape: SkewShape, q: float, sweeps: int, rng=None, init=None) -> PlanePartition:
    """One chain run for ``sweeps`` heat-bath sweeps from ``init`` (zero by default)."""
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    sampler = HeatBathSampler(shape, q, chains=1, rng=rng, init=init)
    sampler.sweep(sweeps)
    return sampler.partitions()[0]


def sample_plane_partitions(
    shape: SkewShape,
    q: float,
    count: int,
    rng=None,
    *,
    burn_in: int = 200,
    thin: int = 20,
    chains: int | None = None,
) -> np.ndarray:
    """``count`` samples as a (count, A, B) array.

    ``chains`` independent chains each run ``burn_in`` sweeps and then
    contribute one sample every ``thin`` sweeps.
    """
    chains = count if chains is None else min(chains, count)
    per_chain = -(-count // chains)
    sampler = HeatBathSampler(shape, q, chains=chains, rng=rng)
    sampler.sweep(burn_in)
    out = []
    for t in range(per_chain):
        if t:
            sampler.sweep(thin)
        out.append(sampler.state.copy())
    return np.concatenate(out, axis=0)[:count]


# exact oracle


@dataclass(frozen=True)
class Enumeration:
    """Truncated law of plane partitions with entries at most H.

    ``configs`` is an (N, A, B) array with matching ``weights`` that sum
    to 1. ``tail_bound`` is q^(H+1) / (1 - q) times the number of cells;
    ``omitted`` is the exact missing mass, from the product formula for the
    full partition function.
    """

    shape: SkewShape
    configs: np.ndarray
    weights: np.ndarray
    H: int
    tail_bound: float
    omitted: float

    @cached_property
    def probs(self) -> dict:
        """Map from PlanePartition to probability."""
        return {PlanePartition(self.shape, e): float(w) for e, w in zip(self.configs, self.weights)}


def partition_function(shape: SkewShape, q: float) -> float:
    """Sum of q^Volume over all fillings.

    Equals the product of 1/(1 - q^(j-i)) over boundary steps i < j with i
    vertical and j horizontal.
    """
    _, L = boundary_params(shape)
    out = 1.0
    for i in L:
        for j in range(i + 1, shape.A + shape.B + 1):
            if j not in L:
                out /= 1.0 - q ** (j - i)
    return out


def exact_enumeration(shape: SkewShape, q: float, H: int, limit: int = 10**7) -> Enumeration:
    """All monotone fillings with entries in 0..H, weighted by q^Volume and normalized."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    mask = shape.mask()
    A, B = shape.A, shape.B
    cells = [(i, j) for i in range(A) for j in range(B) if mask[i, j]]
    # grow all partial fillings cell by cell in reading order
    partial = np.zeros((1, A, B), dtype=np.int64)
    for i, j in cells:
        hi = np.full(len(partial), H, dtype=np.int64)
        if i > 0 and mask[i - 1, j]:
            hi = np.minimum(hi, partial[:, i - 1, j])
        if j > 0 and mask[i, j - 1]:
            hi = np.minimum(hi, partial[:, i, j - 1])
        total = int((hi + 1).sum())
        if total > limit:
            raise SizeLimitError(f"more than {limit} fillings")
        rep = np.repeat(np.arange(len(partial)), hi + 1)
        start = np.concatenate([[0], np.cumsum(hi + 1)[:-1]])
        values = np.arange(total) - np.repeat(start, hi + 1)
        partial = partial[rep]
        partial[:, i, j] = values
    vol = partial.sum(axis=(1, 2))
    w = q ** vol.astype(float)
    Z = math.fsum(w)
    return Enumeration(
        shape=shape,
        configs=partial,
        weights=w / Z,
        H=H,
        tail_bound=q ** (H + 1) / (1 - q) * shape.cells,
        omitted=max(0.0, 1.0 - Z / partition_function(shape, q)),
    )


# slices as point configurations


def slice_array(entries: np.ndarray, shape: SkewShape, k: int, n: int) -> np.ndarray:
    """Slice k of one or many fillings, zero padded or cut to length n, shape (..., n)."""
    cells = _diagonal_cells(shape, k)
    e = np.asarray(entries)
    out = np.zeros(e.shape[:-2] + (n,), dtype=np.int64)
    for t, (i, j) in enumerate(cells[:n]):
        out[..., t] = e[..., i, j]
    return out


def marginal_extract(pp, slices: SliceSelection, q: float, shape: SkewShape | None = None) -> np.ndarray:
    """Points q^(lambda_j^(alpha_k)) for k = 1..p, j = 1..n, each level ascending.

    ``pp`` is a PlanePartition or an (N, A, B) stack of fillings together
    with ``shape``; the result has shape (p, n) or (N, p, n).
    """
    if isinstance(pp, PlanePartition):
        shape, entries = pp.shape, pp.entries
    else:
        if shape is None:
            raise ValueError("an array of fillings needs its shape")
        entries = np.asarray(pp)
    n = shape.B - shape.pi[0]
    levels = [q ** slice_array(entries, shape, k, n).astype(float) for k in slices.alphas]
    return np.sort(np.stack(levels, axis=-2), axis=-1)


def effective_measure_weight(shape: SkewShape, slices: SliceSelection, q: float, diagrams: Sequence) -> float:
    """Unnormalized law of (lambda^(alpha_1), ..., lambda^(alpha_p)).

    The first factor carries one variable q^(A+pi_1+1-j) for every vertical
    boundary step j below alpha_1, each skew factor the steps between two
    selected slices, and the last factor the n horizontal steps on top,
    rescaled to (1, q, ..., q^(n-1)).
    """
    slices.check(shape)
    diagrams = [as_partition(d) for d in diagrams]
    if len(diagrams) != slices.p:
        raise ValueError(f"need {slices.p} diagrams")
    _, L = boundary_params(shape)
    c = shape.A + shape.pi[0] + 1
    n = shape.B - shape.pi[0]
    a = slices.alphas
    w = schur_eval(diagrams[0], [q ** (c - j) for j in sorted(L) if j < a[0]])
    for k in range(1, slices.p):
        if w == 0.0:
            return 0.0
        between = [q ** (c - j) for j in range(a[k - 1], a[k]) if j in L]
        w *= skew_schur_eval(diagrams[k], diagrams[k - 1], between)
    return w * schur_eval(diagrams[-1], [q**i for i in range(n)])
