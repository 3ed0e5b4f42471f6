"""The two stochastic matrices diagonally similar to H and to its transpose."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp
from scipy.sparse import diags
from scipy.sparse.linalg import svds

from .errors import ConsistencyError, DomainError, NumericError, PositivityError
from .gaussborel import BandedHessenberg
from .numerics import UnitPoly, UnitRatio, sign_of, to_mpf

UNIFORM_RATIO = Fraction(8, 27)  # 2 * kappa


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, UnitPoly, UnitRatio))


def _as_float(x) -> float:
    if isinstance(x, (UnitPoly, UnitRatio)):
        return float(x.evaluate(20))
    return float(x)


@dataclass
class StochasticPair:
    """Truncations ``hatH`` (bands -2..+1) and ``checkH`` (bands -1..+2).

    ``row_status`` maps each row to ``"interior"``, ``"boundary"`` (a band
    is structurally absent, rows 0-1 of hatH and row 0 of checkH) or
    ``"edge"`` (a band would reach past the truncation).  Edge rows are
    never renormalized and never asserted.
    """

    hatH: list
    checkH: list
    sigmaII: list
    sigmaI: list
    source: BandedHessenberg
    normalization: str = "oracle"
    boundary: str = "strict"
    row_status: dict = field(default_factory=dict)
    row_sums: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.hatH)

    @property
    def exact(self) -> bool:
        return self.source.mode == "exact"

    def matrix(self, chain: str):
        if chain == "hat":
            return self.hatH
        if chain == "check":
            return self.checkH
        raise DomainError(f"unknown chain {chain!r}")

    def float_matrix(self, chain: str) -> np.ndarray:
        return np.array([[_as_float(v) for v in row] for row in self.matrix(chain)], dtype=float)

    def mpf_matrix(self, chain: str, digits: int = 30):
        return [[to_mpf(v, digits) for v in row] for row in self.matrix(chain)]

    def band(self, chain: str, n: int):
        """Nonzero-band column range of row ``n`` clipped to the truncation."""
        lo, hi = (n - 2, n + 1) if chain == "hat" else (n - 1, n + 2)
        return range(max(0, lo), min(self.size - 1, hi) + 1)

    def interior_rows(self, chain: str):
        return [n for n in range(self.size) if self.row_status[chain][n] == "interior"]


def _row_status(chain, n, N):
    if chain == "hat":
        if n + 1 >= N:
            return "edge"
        return "boundary" if n < 2 else "interior"
    if n + 2 >= N:
        return "edge"
    return "boundary" if n < 1 else "interior"


def _zero_like(x):
    return Fraction(0) if _is_exact(x) else mpmath.mpf(0)


def make_stochastic_pair(H: BandedHessenberg, B1, q, N: int | None = None, boundary: str = "strict",
                         normalization: str = "oracle") -> StochasticPair:
    """``hatH = sigma_II^-1 H sigma_II`` and ``checkH = sigma_I^-1 H^T sigma_I``.

    ``boundary="strict"`` asserts that the boundary rows also sum to 1 (true
    when ``B1`` and ``q`` are the genuine values at 1); ``"semi"`` only
    reports them, which is what a geometric normalization gives.
    """
    N = N or min(H.truncation_size, len(B1), len(q))
    if N > min(H.truncation_size, len(B1), len(q)):
        raise DomainError("truncation exceeds the available coefficients")
    if boundary not in ("strict", "semi"):
        raise DomainError(f"unknown boundary mode {boundary!r}")
    for name, seq in (("B(1)", B1), ("q", q)):
        for n in range(N):
            if sign_of(seq[n]) <= 0:
                raise PositivityError(f"{name}[{n}] is not positive")
    exact = H.mode == "exact"
    zero = Fraction(0) if exact else mpmath.mpf(0)
    hat = [[zero] * N for _ in range(N)]
    check = [[zero] * N for _ in range(N)]
    names = {-2: "a", -1: "b", 0: "c", 1: "superdiagonal"}
    with mp.workdps((H.digits or 30) + 10):
        for n in range(N):
            for m in range(max(0, n - 2), min(N, n + 2)):
                h = H.entry(n, m)
                v = h * B1[m] / B1[n]
                if sign_of(v) < 0:
                    raise PositivityError(f"hatH[{n}][{m}] < 0 (coefficient {names[m - n]}_{n} = {h})")
                hat[n][m] = v
            for m in range(max(0, n - 1), min(N, n + 3)):
                h = H.entry(m, n)
                v = h * q[m] / q[n]
                if sign_of(v) < 0:
                    raise PositivityError(f"checkH[{n}][{m}] < 0 (coefficient {names[n - m]}_{m} = {h})")
                check[n][m] = v
    pair = StochasticPair(hat, check, list(B1[:N]), list(q[:N]), H, normalization, boundary)
    tol = 0 if exact else 1e-12 * N
    for chain, mat in (("hat", hat), ("check", check)):
        status, sums = {}, {}
        for n in range(N):
            st = _row_status(chain, n, N)
            status[n] = st
            if st == "edge":
                continue
            total = _row_sum(mat[n], pair.band(chain, n))
            sums[n] = total
            asserted = st == "interior" or boundary == "strict"
            if asserted and not _is_one(total, tol):
                raise ConsistencyError(
                    f"{chain} row {n} sums to {_as_float(total):.15g}, not 1 ({normalization} normalization)")
        pair.row_status[chain] = status
        pair.row_sums[chain] = sums
    return pair


def _row_sum(row, cols):
    total = None
    for m in cols:
        total = row[m] if total is None else total + row[m]
    return total


def _is_one(x, tol) -> bool:
    if tol == 0:
        return x == 1
    return abs(_as_float(x) - 1.0) <= tol


def geometric_values(ratio, N: int):
    """``B1 = ratio**n`` and ``q = ratio**-n``."""
    ratio = Fraction(ratio)
    return [ratio**n for n in range(N)], [ratio ** (-n) for n in range(N)]


def pair_for_family(family, normalization: str = "auto", N: int | None = None) -> StochasticPair:
    """Stochastic pair of a :class:`PolynomialFamily`.

    ``oracle`` uses the computed values at 1.  ``geometric`` uses
    ``(8/27)**n`` and its inverse, the normalization under which the uniform
    hypergeometric operator gives Toeplitz matrices; only interior rows are
    stochastic then.  ``auto`` picks ``geometric`` for the uniform tuple and
    ``oracle`` otherwise.
    """
    N = N or family.size or family.truncation
    system = family.system
    if normalization == "auto":
        uniform = system is not None and system.kind == "hypergeometric" and system.params.is_uniform
        normalization = "geometric" if uniform else "oracle"
    if normalization == "oracle":
        return make_stochastic_pair(family.hessenberg, family.B_at_1, family.q_at_1, N, "strict", "oracle")
    if normalization == "geometric":
        B1, q = geometric_values(UNIFORM_RATIO, N)
        if family.mode != "exact":
            with mp.workdps(family.digits or 30):
                B1, q = [to_mpf(v) for v in B1], [to_mpf(v) for v in q]
        return make_stochastic_pair(family.hessenberg, B1, q, N, "semi", "geometric")
    raise DomainError(f"unknown normalization {normalization!r}")


# -- relations between the two matrices ---------------------------------------------


@dataclass
class DualityReport:
    checked: int
    failures: list
    max_residual: float

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_duality(pair: StochasticPair, tol: float = 1e-20) -> DualityReport:
    """``checkH[n][n-k] = B[n-k] q[n-k] / (B[n] q[n]) * hatH[n-k][n]`` for |k| <= 2."""
    N = pair.size
    B, q = pair.sigmaII, pair.sigmaI
    failures, worst, checked = [], 0.0, 0
    for n in range(N):
        for k in range(-2, 3):
            m = n - k
            if not 0 <= m < N:
                continue
            lhs = pair.checkH[n][m]
            rhs = (B[m] * q[m]) / (B[n] * q[n]) * pair.hatH[m][n]
            checked += 1
            if pair.exact:
                if not (lhs == rhs):
                    failures.append((n, k))
            else:
                r = abs(_as_float(lhs) - _as_float(rhs))
                worst = max(worst, r)
                if r > tol:
                    failures.append((n, k))
    return DualityReport(checked, failures, worst)


@dataclass
class TransposedLimitReport:
    rows: list
    discrepancy: list
    head: float
    tail: float
    window_max: float
    slope: float
    offsets: tuple = (-2, -1, 0, 1, 2)

    @property
    def decreasing(self) -> bool:
        return self.tail <= self.head


def verify_transposed_limit(pair: StochasticPair, window: int = 20,
                            offsets=(-2, -1, 0, 1, 2)) -> TransposedLimitReport:
    """Distance between ``checkH`` and the transpose of ``hatH`` along the bands.

    For each row with complete bands in both matrices, takes the largest
    ``|checkH[n][n+k] - hatH[n+k][n]|`` over ``k`` in ``offsets`` (by default
    -2..2; the ``+-2`` offsets are zero in one of the two matrices).
    ``head``/``tail`` are the maxima over the first and last thirds;
    ``slope`` is a least-squares fit of log-discrepancy against ``log n``.
    """
    N = pair.size
    if N < window + 10:
        raise DomainError(f"truncation {N} is too small for a window of {window}")
    hat, check = pair.float_matrix("hat"), pair.float_matrix("check")
    rows = [n for n in range(2, N - 3)]
    disc = []
    for n in rows:
        d = 0.0
        for k in offsets:
            m = n + k
            if 0 <= m < N:
                d = max(d, abs(check[n, m] - hat[m, n]))
        disc.append(d)
    third = max(1, len(rows) // 3)
    head, tail = max(disc[:third]), max(disc[-third:])
    xs = [math.log(n) for n, d in zip(rows, disc) if d > 0]
    ys = [math.log(d) for d in disc if d > 0]
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else 0.0
    return TransposedLimitReport(rows, disc, head, tail, max(disc[-window:]), slope, tuple(offsets))


# -- norm-one rescaling ---------------------------------------------------------------


@dataclass
class RescaledOperator:
    original: BandedHessenberg
    norm_estimate: float
    a: list
    b: list
    c: list
    sigma: str = "diag(norm**n)"
    sizes: tuple = ()


def _sparse_truncation(op, N):
    if hasattr(op, "sparse_truncation"):
        return op.sparse_truncation(N)
    gen = getattr(op, "generator", None)
    if N > op.truncation_size and gen is None:
        raise NumericError(f"operator has only {op.truncation_size} rows; cannot build a {N}x{N} truncation")

    def coeff(seq, idx, n):
        if n < op.truncation_size:
            return float(seq[n])
        return float(gen(n)[idx])

    a = [coeff(op.a, 0, n) for n in range(2, N)]
    b = [coeff(op.b, 1, n) for n in range(1, N)]
    c = [coeff(op.c, 2, n) for n in range(N)]
    return diags([a, b, c, [1.0] * (N - 1)], [-2, -1, 0, 1], shape=(N, N), format="csr")


def truncation_norm(op, N: int) -> float:
    A = _sparse_truncation(op, N)
    if N <= 64:
        return float(np.linalg.norm(A.toarray(), 2))
    return float(svds(A, k=1, return_singular_vectors=False, random_state=0)[0])


def estimate_norm(op, eps: float = 1e-6, start: int = 64, max_size: int = 1 << 14):
    """Largest singular value of growing truncations, Richardson-extrapolated.

    Truncation norms of a banded operator approach the operator norm like
    ``N**-2``; the extrapolated sequence ``(4 s(2N) - s(N)) / 3`` is accepted
    once two consecutive values agree to ``eps``.
    """
    sizes, norms, extrap = [], [], []
    N = start
    limit = max_size
    if not hasattr(op, "sparse_truncation") and getattr(op, "generator", None) is None:
        limit = min(max_size, op.truncation_size)
    while N <= limit:
        sizes.append(N)
        norms.append(truncation_norm(op, N))
        if len(norms) >= 2:
            extrap.append((4 * norms[-1] - norms[-2]) / 3)
            if abs(norms[-1] - norms[-2]) <= eps:
                return norms[-1], tuple(sizes)
            if len(extrap) >= 2 and abs(extrap[-1] - extrap[-2]) <= eps:
                return extrap[-1], tuple(sizes)
        N *= 2
    raise NumericError(f"norm estimate did not stabilize to {eps} (sizes {sizes}, values {norms})",
                       partial=norms[-1] if norms else None)


def rescale_to_unit_norm(H: BandedHessenberg, eps: float = 1e-6, norm: float | None = None) -> RescaledOperator:
    """Divide by the norm after the similarity ``diag(norm**n)``.

    Passing ``norm`` skips the estimate (e.g. ``norm=1`` leaves the bands
    unchanged).
    """
    sizes = ()
    if norm is None:
        norm, sizes = estimate_norm(H, eps)
    a = [v / norm**3 for v in map(float, H.a)]
    b = [v / norm**2 for v in map(float, H.b)]
    c = [v / norm for v in map(float, H.c)]
    return RescaledOperator(H, norm, a, b, c, sizes=sizes)


def toeplitz_generator(H: BandedHessenberg):
    """Constant-band generator when every extracted row from 2 on is identical."""
    a, b, c = H.a[2], H.b[2], H.c[2]
    if all(H.a[n] == a and H.b[n] == b and H.c[n] == c for n in range(2, H.truncation_size)):
        return lambda n: (a, b, c)
    return None
