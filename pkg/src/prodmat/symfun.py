"""Schur functions, specializations and Schur-process weights.

Everything is evaluated in double precision. Schur functions go through the
Jacobi-Trudi determinant over complete homogeneous symmetric functions, which
stays well defined when variables repeat (the bialternant would be 0/0).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True, init=False)
class Partition:
    """Young diagram stored as its nonzero parts, weakly decreasing."""

    parts: tuple[int, ...]

    def __init__(self, parts: Iterable[int] = ()):
        parts = tuple(int(p) for p in parts)
        if any(p < 0 for p in parts):
            raise ValueError(f"negative part in {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be weakly decreasing: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i: int) -> int:
        # parts beyond the length are zero
        return self.parts[i] if i < len(self.parts) else 0

    @property
    def size(self) -> int:
        return sum(self.parts)

    def padded(self, length: int) -> tuple[int, ...]:
        if length < len(self.parts):
            raise ValueError(f"{self} has more than {length} parts")
        return self.parts + (0,) * (length - len(self.parts))

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(sum(1 for p in self.parts if p > j) for j in range(self.parts[0]))

    def contains(self, other: "Partition") -> bool:
        """True when ``other`` fits inside this diagram."""
        other = as_partition(other)
        if len(other) > len(self):
            return False
        return all(self[i] >= other[i] for i in range(len(other)))

    def __repr__(self) -> str:
        return f"Partition{self.parts}"


def as_partition(lam) -> Partition:
    return lam if isinstance(lam, Partition) else Partition(lam)


def interlaces(mu, lam) -> bool:
    """mu ≺ lam: lam_1 ≥ mu_1 ≥ lam_2 ≥ mu_2 ≥ ..."""
    mu, lam = as_partition(mu), as_partition(lam)
    if len(mu) > len(lam):
        return False
    return all(lam[i] >= mu[i] >= lam[i + 1] for i in range(len(lam)))


def partitions_in_box(rows: int, max_part: int) -> Iterator[Partition]:
    """All partitions with at most ``rows`` parts, each at most ``max_part``."""
    for parts in itertools.combinations_with_replacement(range(max_part, -1, -1), rows):
        yield Partition(parts)


def partitions_of(size: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``size`` (largest part capped at ``max_part``)."""
    if max_part is None:
        max_part = size
    if size == 0:
        yield Partition()
        return
    for first in range(min(size, max_part), 0, -1):
        for rest in partitions_of(size - first, first):
            yield Partition((first,) + rest.parts)


@dataclass(frozen=True, init=False)
class Specialization:
    """Finite list of positive variables substituted into symmetric functions."""

    alphas: tuple[float, ...]

    def __init__(self, alphas: Iterable[float] = ()):
        alphas = tuple(float(a) for a in alphas)
        if any(not a > 0 for a in alphas):
            raise ValueError("specialization variables must be strictly positive")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def geometric(cls, q: float, t: int, s: int) -> "Specialization":
        """(q^t, q^(t+1), ..., q^s); empty when t > s."""
        return cls(q ** k for k in range(t, s + 1))

    @classmethod
    def principal(cls, q: float, M: int) -> "Specialization":
        return cls.geometric(q, 0, M - 1)

    def union(self, other) -> "Specialization":
        return Specialization(self.alphas + as_spec(other).alphas)

    __or__ = union

    def __len__(self) -> int:
        return len(self.alphas)

    def array(self) -> np.ndarray:
        return np.array(self.alphas, dtype=float)


def as_spec(spec) -> Specialization:
    return spec if isinstance(spec, Specialization) else Specialization(spec)


def union(*specs) -> Specialization:
    out = Specialization()
    for s in specs:
        out = out.union(s)
    return out


def power_sums(spec, kmax: int) -> np.ndarray:
    """p_1, ..., p_kmax of the specialization."""
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    a = as_spec(spec).array()
    k = np.arange(1, kmax + 1)
    return (a[None, :] ** k[:, None]).sum(axis=1)


def complete_homogeneous(spec, kmax: int) -> np.ndarray:
    """h_0, ..., h_kmax, the coefficients of prod_i 1/(1 - alpha_i u)."""
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    h = np.zeros(kmax + 1)
    h[0] = 1.0
    for a in as_spec(spec).alphas:
        # multiplying by 1/(1 - a u) is a running sum with ratio a
        for k in range(1, kmax + 1):
            h[k] += a * h[k - 1]
    return h


def _jacobi_trudi(lam: Partition, mu: Partition, spec: Specialization) -> float:
    N = len(lam)
    if N == 0:
        return 1.0
    h = complete_homogeneous(spec, lam[0] + N)
    M = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            k = lam[i] - mu[j] - i + j
            if 0 <= k < len(h):
                M[i, j] = h[k]
    return float(np.linalg.det(M))


def schur_eval(lam, spec) -> float:
    """s_lam at the specialization via Jacobi-Trudi."""
    lam, spec = as_partition(lam), as_spec(spec)
    if len(lam) > len(spec):
        return 0.0
    if len(spec) <= 2:
        return _schur_few(lam, spec.alphas)
    return _jacobi_trudi(lam, Partition(), spec)


def _schur_few(lam: Partition, x: tuple[float, ...]) -> float:
    """s_lam in at most two variables as a sum of positive terms, free of cancellation."""
    if len(x) == 0:
        return 1.0 if lam.size == 0 else 0.0
    if len(x) == 1:
        return x[0] ** lam[0]
    a, b = x
    k = lam[0] - lam[1]
    return (a * b) ** lam[1] * math.fsum(a**i * b ** (k - i) for i in range(k + 1))


def skew_schur_eval(lam, mu, spec) -> float:
    """s_{lam/mu} at the specialization; zero unless mu is inside lam.

    A skew shape whose columns are longer than the number of variables gives
    zero; with one variable this is the interlacing condition.
    """
    lam, mu, spec = as_partition(lam), as_partition(mu), as_spec(spec)
    if not lam.contains(mu):
        return 0.0
    if lam == mu:
        return 1.0
    lc, mc = lam.conjugate(), mu.conjugate()
    if max(lc[j] - mc[j] for j in range(len(lc))) > len(spec):
        return 0.0
    return _jacobi_trudi(lam, mu, spec)


def schur_principal(lam, q: float, M: int) -> float:
    """s_lam(1, q, ..., q^(M-1)) from the product formula."""
    lam = as_partition(lam)
    if M < len(lam):
        raise ValueError(f"{lam} has more than M={M} nonzero parts")
    x = np.array(lam.padded(M), dtype=float)
    out = q ** float(np.dot(np.arange(M), x))
    for i in range(M):
        for j in range(i + 1, M):
            out *= (1.0 - q ** (x[i] - x[j] - i + j)) / (1.0 - q ** (j - i))
    return float(out)


def cauchy_h(specA, specB) -> float:
    """H(A; B) = prod_{i,j} 1/(1 - a_i b_j)."""
    a, b = as_spec(specA).array(), as_spec(specB).array()
    ab = np.outer(a, b)
    if np.any(ab >= 1.0):
        raise ValueError("Cauchy product diverges: some a_i b_j >= 1")
    return float(np.prod(1.0 / (1.0 - ab)))


def cauchy_h_power_sums(specA, specB, tol: float = 1e-16) -> float:
    """H(A; B) as exp(sum_k p_k(A) p_k(B) / k), truncated once terms drop below tol."""
    a, b = as_spec(specA).array(), as_spec(specB).array()
    if a.size == 0 or b.size == 0:
        return 1.0
    r = float(np.max(np.outer(a, b)))
    if r >= 1.0:
        raise ValueError("Cauchy product diverges: some a_i b_j >= 1")
    total, k = 0.0, 1
    while True:
        term = np.sum(a**k) * np.sum(b**k) / k
        total += term
        # remaining terms are bounded by a geometric series in r
        if term * r / (1.0 - r) < tol or k > 100000:
            break
        k += 1
    return float(np.exp(total))


def schur_process_weight(diagrams: Sequence, plus: Sequence, minus: Sequence) -> float:
    """Unnormalized weight of the chain lam1 ⊃ mu1 ⊂ lam2 ⊃ ... ⊂ lam_p.

    ``diagrams`` alternates lam^1, mu^1, ..., lam^p; ``plus`` holds
    rho_0^+ ... rho_{p-1}^+ and ``minus`` holds rho_1^- ... rho_p^-.
    """
    diagrams = [as_partition(d) for d in diagrams]
    p = (len(diagrams) + 1) // 2
    if len(diagrams) != 2 * p - 1 or len(plus) != p or len(minus) != p:
        raise ValueError("need 2p-1 diagrams, p plus and p minus specializations")
    lams, mus = diagrams[0::2], diagrams[1::2]
    w = schur_eval(lams[0], plus[0])
    for k in range(p - 1):
        if w == 0.0:
            return 0.0
        w *= skew_schur_eval(lams[k], mus[k], minus[k])
        w *= skew_schur_eval(lams[k + 1], mus[k], plus[k + 1])
    return w * schur_eval(lams[-1], minus[-1])


# two-row measures for the 2x2 picture

def _s2(lam: Partition, q: float) -> float:
    """s_lam(1, q) for a partition with at most two parts."""
    l1, l2 = lam[0], lam[1]
    return (q**l2 - q ** (l1 + 1)) / (1.0 - q)


def _norm2(q: float) -> float:
    return (1 - q) * (1 - q**2) ** 2 * (1 - q**3)


def two_row_measure_Pq(lam, q: float) -> float:
    """Schur measure s_lam(1,q) s_lam(q,q^2), normalized."""
    lam = as_partition(lam)
    if len(lam) > 2:
        raise ValueError("two-row measure needs at most two parts")
    return _norm2(q) * _s2(lam, q) * schur_eval(lam, (q, q**2))


def two_row_product_measure(nu, q: float) -> float:
    """Law of the two-row diagram after one transition step from the Schur measure."""
    nu = as_partition(nu)
    if len(nu) > 2:
        raise ValueError("two-row measure needs at most two parts")
    return _norm2(q) ** 2 * _s2(nu, q) * schur_eval(nu, (q, q**2, q, q**2))


def two_row_transition(lam, nu, q: float) -> float:
    """Markov step lam -> nu driven by the specialization (q, q^2)."""
    lam, nu = as_partition(lam), as_partition(nu)
    if len(lam) > 2 or len(nu) > 2:
        raise ValueError("two-row transition needs at most two parts")
    if not nu.contains(lam):
        return 0.0
    return _norm2(q) * _s2(nu, q) * skew_schur_eval(nu, lam, (q, q**2)) / _s2(lam, q)


def geometric_tail_bound(ratio: float, L: int, degree: int = 0) -> float:
    """Upper bound on sum_{k > L} (k+1)^degree ratio^k."""
    if not 0 <= ratio < 1:
        raise ValueError("ratio must lie in [0, 1)")
    # once (k+2)/(k+1) raised to degree times ratio drops below c < 1 the tail is geometric
    k = L + 1
    first = (k + 1) ** degree * ratio**k
    c = ((k + 2) / (k + 1)) ** degree * ratio
    if c < 1:
        return first / (1 - c)
    total = 0.0
    while True:
        term = (k + 1) ** degree * ratio**k
        total += term
        k += 1
        c = ((k + 2) / (k + 1)) ** degree * ratio
        if c < 0.99:
            return total + (k + 1) ** degree * ratio**k / (1 - c)
