"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import itertools
from fractions import Fraction


def ssyt_schur(lam, mu, xs) -> Fraction:
    """Skew Schur function as a sum over semistandard fillings of lam/mu, exact in rationals."""
    lam, mu = list(lam), list(mu) + [0] * (len(lam) - len(mu))
    cells = [(i, j) for i in range(len(lam)) for j in range(mu[i], lam[i])]
    n = len(xs)
    total = Fraction(0)
    for values in itertools.product(range(n), repeat=len(cells)):
        t = dict(zip(cells, values))
        ok = all(
            (j == mu[i] or (i, j - 1) not in t or t[(i, j - 1)] <= v) and ((i - 1, j) not in t or t[(i - 1, j)] < v)
            for (i, j), v in t.items()
        )
        if ok:
            term = Fraction(1)
            for v in values:
                term *= xs[v]
            total += term
    return total


def bialternant_schur(lam, xs) -> Fraction:
    """s_lam = det[x_i^(lam_j + n - j)] / det[x_i^(n - j)] with exact rationals (distinct xs)."""
    n = len(xs)
    lam = list(lam) + [0] * (n - len(lam))

    def det(M):
        M = [row[:] for row in M]
        out = Fraction(1)
        for c in range(n):
            piv = next((r for r in range(c, n) if M[r][c] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != c:
                M[c], M[piv] = M[piv], M[c]
                out = -out
            out *= M[c][c]
            for r in range(c + 1, n):
                f = M[r][c] / M[c][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
        return out

    num = det([[x ** (lam[j] + n - 1 - j) for j in range(n)] for x in xs])
    den = det([[x ** (n - 1 - j) for j in range(n)] for x in xs])
    return num / den


def brute_plane_partitions(A: int, B: int, pi, H: int):
    """All monotone fillings of the A x B box minus pi with entries 0..H, by exhaustion."""
    pi = list(pi) + [0] * (A - len(pi))
    cells = [(i, j) for i in range(A) for j in range(pi[i], B)]
    for values in itertools.product(range(H + 1), repeat=len(cells)):
        t = dict(zip(cells, values))
        if all(
            ((i + 1, j) not in t or t[(i + 1, j)] <= v) and ((i, j + 1) not in t or t[(i, j + 1)] <= v)
            for (i, j), v in t.items()
        ):
            yield t
