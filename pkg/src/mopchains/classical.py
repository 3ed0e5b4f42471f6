"""Tridiagonal (birth-death) chains and their orthogonal polynomials.

User-facing values live on [-1, 1], the natural interval of the Chebyshev
example.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
from mpmath import mp
from scipy.sparse import diags

from .errors import DomainError, NumericError
from .numerics import DEFAULT_DIGITS, to_mpf


@dataclass(frozen=True)
class TridiagonalChain:
    """Transition probabilities ``p_n`` (down), ``q_n`` (stay), ``r_n`` (up)."""

    p: Callable[[int], Fraction]
    q: Callable[[int], Fraction]
    r: Callable[[int], Fraction]
    name: str = "tridiagonal"

    def check(self, upto: int = 50):
        if self.q(0) + self.r(0) != 1:
            raise DomainError("row 0 must satisfy q0 + r0 = 1")
        for n in range(1, upto):
            p, q, r = self.p(n), self.q(n), self.r(n)
            if p + q + r != 1 or p <= 0 or r <= 0 or q < 0:
                raise DomainError(f"row {n} is not a valid birth-death row")
        return True

    def entry(self, n, m):
        if n < 0 or m < 0:
            return Fraction(0)
        if m == n + 1:
            return self.r(n)
        if m == n:
            return self.q(n)
        if m == n - 1:
            return self.p(n)
        return Fraction(0)

    def dense(self, N):
        return [[self.entry(n, m) for m in range(N)] for n in range(N)]

    def sparse_truncation(self, N):
        return diags(
            [[float(self.p(n)) for n in range(1, N)], [float(self.q(n)) for n in range(N)],
             [float(self.r(n)) for n in range(N - 1)]],
            [-1, 0, 1], shape=(N, N), format="csr")


def chebyshev_chain() -> TridiagonalChain:
    half = Fraction(1, 2)
    return TridiagonalChain(
        p=lambda n: half if n >= 1 else Fraction(0),
        q=lambda n: Fraction(0),
        r=lambda n: Fraction(1) if n == 0 else half,
        name="chebyshev",
    )


def op_sequence(chain: TridiagonalChain, N: int, x):
    """``P_0 .. P_N`` at ``x`` from ``x P_n = r_n P_{n+1} + q_n P_n + p_n P_{n-1}``."""
    if N < 1:
        raise DomainError("need N >= 1")
    prev, cur = 0, 1
    out = [cur]
    for n in range(N):
        nxt = ((x - chain.q(n)) * cur - chain.p(n) * prev) / chain.r(n)
        prev, cur = cur, nxt
        out.append(cur)
    return out


def associated_sequence(chain: TridiagonalChain, N: int, z):
    """First associated polynomials ``P1_0 .. P1_N`` (coefficients shifted by one)."""
    prev, cur = 0, 1
    out = [cur]
    for k in range(N):
        nxt = ((z - chain.q(k + 1)) * cur - chain.p(k + 1) * prev) / chain.r(k + 1)
        prev, cur = cur, nxt
        out.append(cur)
    return out


def power_row(chain: TridiagonalChain, n: int, steps: int):
    """Row ``n`` of ``P**steps`` as a dict, exact and without truncation."""
    vec = {n: Fraction(1)}
    for _ in range(steps):
        nxt = {}
        for s, w in vec.items():
            for t in (s - 1, s, s + 1):
                e = chain.entry(s, t)
                if e:
                    nxt[t] = nxt.get(t, 0) + w * e
        vec = nxt
    return vec


def return_probabilities(chain: TridiagonalChain, terms: int):
    """``w_k = (P**k)[0][0]`` for ``k < terms``."""
    out, vec = [], {0: Fraction(1)}
    for _ in range(terms):
        out.append(vec.get(0, Fraction(0)))
        nxt = {}
        for s, w in vec.items():
            for t in (s - 1, s, s + 1):
                e = chain.entry(s, t)
                if e:
                    nxt[t] = nxt.get(t, 0) + w * e
        vec = nxt
    return out


@dataclass
class SpectralSeries:
    coefficients: list
    z: object
    value: object
    remainder_bound: object
    note: str = "valid for |z| > 1"


def stieltjes_series(chain: TridiagonalChain, z, terms: int, digits: int = DEFAULT_DIGITS) -> SpectralSeries:
    """Partial sum of ``sum_k w_k / z**(k+1)`` with a bound on the omitted tail.

    Since ``0 <= w_k <= 1`` the tail is at most ``|z|**-terms / (|z| - 1)``.
    """
    if terms < 1:
        raise DomainError("terms must be >= 1")
    with mp.workdps(digits):
        zv = to_mpf(z, digits) if not isinstance(z, complex) else mpmath.mpc(z)
        if abs(zv) <= 1:
            raise DomainError("the resolvent series needs |z| > 1")
        w = return_probabilities(chain, terms)
        value = mpmath.fsum(to_mpf(wk, digits) / zv ** (k + 1) for k, wk in enumerate(w))
        bound = abs(zv) ** (-terms) / (abs(zv) - 1)
    return SpectralSeries(w, z, value, bound)


def markov_stieltjes_ratio(chain: TridiagonalChain, z, n: int, digits: int = DEFAULT_DIGITS):
    """``N_n(z) / P_n(z)`` where ``N_n = P1_{n-1} / r_0`` is the numerator polynomial."""
    if n < 1:
        raise DomainError("need n >= 1")
    with mp.workdps(digits):
        zv = to_mpf(z, digits)
        if abs(zv) <= 1:
            raise DomainError("the ratio converges only for |z| > 1")
        P = op_sequence(chain, n, zv)
        P1 = associated_sequence(chain, n - 1, zv)
        return P1[n - 1] / (to_mpf(chain.r(0), digits) * P[n])


@dataclass
class GaussRule:
    nodes: list
    weights: list
    digits: int

    def integrate(self, f):
        with mp.workdps(self.digits):
            return mpmath.fsum(w * f(x) for x, w in zip(self.nodes, self.weights))


@functools.lru_cache(maxsize=64)
def chain_measure(chain: TridiagonalChain, nodes: int, digits: int = DEFAULT_DIGITS) -> GaussRule:
    """Gauss rule of the chain's spectral measure (Golub-Welsch on the symmetrized matrix).

    The rule with ``nodes`` points integrates polynomials of degree up to
    ``2 * nodes - 1`` exactly against the probability measure for which the
    chain's polynomials are orthogonal.
    """
    with mp.workdps(digits + 10):
        J = mpmath.matrix(nodes, nodes)
        for i in range(nodes):
            J[i, i] = to_mpf(chain.q(i), digits + 10)
        for i in range(nodes - 1):
            J[i, i + 1] = J[i + 1, i] = mpmath.sqrt(to_mpf(chain.r(i) * chain.p(i + 1), digits + 10))
        try:
            E, Q = mpmath.eigsy(J)
        except Exception as exc:
            raise NumericError(f"eigensolver failed: {exc}") from exc
        pairs = sorted((E[i], Q[0, i] ** 2) for i in range(nodes))
    with mp.workdps(digits):
        return GaussRule([+x for x, _ in pairs], [+w for _, w in pairs], digits)


def gram_matrix(chain: TridiagonalChain, upto: int, digits: int = DEFAULT_DIGITS):
    """``integral P_n P_m dmu`` for ``n, m <= upto``."""
    rule = chain_measure(chain, upto + 2, digits)
    with mp.workdps(digits):
        values = [op_sequence(chain, upto, x) for x in rule.nodes]
        return [[mpmath.fsum(w * v[n] * v[m] for w, v in zip(rule.weights, values))
                 for m in range(upto + 1)] for n in range(upto + 1)]


def associated_by_integral(chain: TridiagonalChain, n: int, z, digits: int = DEFAULT_DIGITS):
    """``integral (P_n(z) - P_n(x)) / (z - x) dmu(x)`` by Gauss quadrature.

    The integrand is a polynomial of degree ``n - 1`` in ``x``, so an
    ``n``-point rule is exact.
    """
    rule = chain_measure(chain, max(n, 1) + 1, digits)
    with mp.workdps(digits):
        zv = to_mpf(z, digits)
        Pz = op_sequence(chain, n, zv)[n]
        return rule.integrate(lambda x: (Pz - op_sequence(chain, n, x)[n]) / (zv - x))
