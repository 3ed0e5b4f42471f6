"""Truncated moment matrices of weight systems.

Both weights are normalized to probability densities before moments are
taken, so every column starts from a moment of a density.  The constant that
relates the two raw weights (``odd_unit``) is recorded but never multiplied
in; it drops out of every quantity built downstream except the value of the
type I linear forms at 1, which is handled through ``endpoint_ratio``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath
from mpmath import mp

from .errors import DomainError
from .numerics import (
    DEFAULT_DIGITS,
    TranscendentalUnit,
    beta_ratio,
    hyp2f1,
    log_beta,
    log_gamma,
    parse_scalar,
    pochhammer,
    to_mpf,
)
from .weights import WeightSystem


@dataclass(frozen=True)
class MomentLayout:
    """Column ``k`` holds ``x**(k // 2)`` against weight ``1 + k % 2``.

    With ``interleaved=False`` there is a single weight and column ``k`` holds
    ``x**k`` (a Hankel matrix).
    """

    size: int
    interleaved: bool = True

    def column(self, k: int):
        if not self.interleaved:
            return k, 1
        return k // 2, 1 + k % 2

    def power(self, j: int, k: int) -> int:
        return j + self.column(k)[0]


@dataclass
class MomentMatrix:
    entries: list
    layout: MomentLayout
    mode: str  # "exact" or "numeric"
    digits: int | None
    normalization: str
    odd_unit: object = None
    endpoint_ratio: object = None
    support: tuple = (0, 1)
    affine_map: str | None = None
    moment_fn: object = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.layout.size

    def __getitem__(self, jk):
        j, k = jk
        return self.entries[j][k]

    def raw_entry(self, j: int, k: int, digits: int = DEFAULT_DIGITS):
        """Entry with the cross-weight constant multiplied back into odd columns."""
        value = self.entries[j][k]
        if self.layout.interleaved and k % 2 == 1 and self.odd_unit is not None:
            unit = self.odd_unit
            if isinstance(unit, TranscendentalUnit):
                with mp.workdps(digits):
                    return to_mpf(value, digits) * unit.value(digits)
            return value * unit
        return value

    def odd_columns_rational(self) -> bool:
        return self.mode == "exact" and all(
            isinstance(v, (int, Fraction)) for row in self.entries for v in row
        )

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v)
            return mpmath.nstr(v, self.digits or DEFAULT_DIGITS, strip_zeros=False)

        unit = self.odd_unit
        if isinstance(unit, TranscendentalUnit):
            unit = {"name": unit.name, "value": mpmath.nstr(unit.value(30), 30)}
        elif unit is not None:
            unit = str(unit)
        return {
            "size": self.size,
            "mode": self.mode,
            "digits": self.digits,
            "interleaved": self.layout.interleaved,
            "normalization": self.normalization,
            "odd_unit": unit,
            "support": [str(s) for s in self.support],
            "affine_map": self.affine_map,
            "entries": [[enc(v) for v in row] for row in self.entries],
        }


def _fill(size, moment, interleaved=True):
    """Build the matrix from a ``moment(power, which)`` function, sharing values."""
    layout = MomentLayout(size, interleaved)
    cache = {}
    rows = []
    for j in range(size):
        row = []
        for k in range(size):
            power, which = layout.column(k)
            key = (j + power, which)
            if key not in cache:
                cache[key] = moment(*key)
            row.append(cache[key])
        rows.append(row)
    return layout, rows


def jp_moment(params, power: int, which: int) -> Fraction:
    """Moment ``power`` of the normalized Jacobi-Pineiro weight ``which``."""
    return beta_ratio(power, params.exponent(which), params.alpha0)


def build_jp_moments(params, N: int, mode: str = "exact", digits: int | None = None) -> MomentMatrix:
    if N < 2:
        raise DomainError("moment matrix needs N >= 2")
    system = WeightSystem("jacobi_pineiro", params)
    a1, a2, a0 = params.alpha1, params.alpha2, params.alpha0

    # column recursion: each column is a geometric-like product, filled incrementally
    memo = {1: [Fraction(1)], 2: [Fraction(1)]}

    def moment(power, which):
        seq = memo[which]
        alpha = params.exponent(which)
        while len(seq) <= power:
            k = len(seq) - 1
            seq.append(seq[-1] * (k + alpha + 1) / (k + alpha + a0 + 2))
        return seq[power]

    if _is_integer(a0):
        unit = _jp_unit_rational(params)
    else:
        def evaluate(d):
            with mp.workdps(d + 5):
                return mpmath.exp(log_beta(a2 + 1, a0 + 1, d + 5) - log_beta(a1 + 1, a0 + 1, d + 5))

        unit = TranscendentalUnit(f"u[{a1},{a2},{a0}]", evaluate)
    layout, rows = _fill(N, moment)
    matrix = MomentMatrix(
        rows, layout, "exact", None,
        normalization="each weight divided by its total mass B(alpha_i+1, alpha0+1)",
        odd_unit=unit, endpoint_ratio=system.endpoint_ratio(),
        moment_fn=lambda p, w: jp_moment(params, p, w),
    )
    if mode == "numeric":
        return to_numeric(matrix, digits or DEFAULT_DIGITS)
    return matrix


def _is_integer(x: Fraction) -> bool:
    return x.denominator == 1


def _jp_unit_rational(params) -> Fraction:
    """B(a2+1, a0+1) / B(a1+1, a0+1) for integer alpha0 (a finite Pochhammer ratio)."""
    m = int(params.alpha0) + 1
    return pochhammer(params.alpha1 + 1, m) / pochhammer(params.alpha2 + 1, m)


def ll_moment_exact(params, power: int, which: int) -> Fraction:
    """Mellin moment of the normalized hypergeometric density (exact)."""
    a, b, c, d = params.a, params.b, params.c, params.d
    if which == 2:
        b, c = b + 1, c + 1
    return pochhammer(a, power) * pochhammer(b, power) / (pochhammer(c, power) * pochhammer(d, power))


def ll_moment_series(params, power: int, which: int, digits: int = DEFAULT_DIGITS):
    """The same moment obtained by integrating the 2F1 factor term by term.

    The term-by-term Beta series sums to a 2F1 at unit argument, evaluated by
    Gauss's theorem with the normalizing Gamma prefactor.
    """
    a, b, c, d = params.a, params.b, params.c, params.d
    if which == 2:
        b, c = b + 1, c + 1
    delta = c + d - a - b
    work = digits + 10
    with mp.workdps(work):
        log_pref = (log_gamma(c, work) + log_gamma(d, work) - log_gamma(a, work)
                    - log_gamma(b, work) - log_gamma(delta, work))
        value = mpmath.exp(log_pref + log_beta(a + power, delta, work)) * hyp2f1(
            c - b, d - b, a + power + delta, 1, work)
    with mp.workdps(digits):
        return +value


def build_ll_moments(params, N: int, mode: str = "numeric", digits: int = DEFAULT_DIGITS) -> MomentMatrix:
    if N < 2:
        raise DomainError("moment matrix needs N >= 2")
    system = WeightSystem("hypergeometric", params)
    common = dict(
        normalization="each weight is a probability density (Gamma prefactor)",
        odd_unit=Fraction(1), endpoint_ratio=system.endpoint_ratio(),
        moment_fn=lambda p, w: ll_moment_exact(params, p, w),
    )
    if mode == "exact":
        layout, rows = _fill(N, lambda p, w: ll_moment_exact(params, p, w))
        return MomentMatrix(rows, layout, "exact", None, **common)
    layout, rows = _fill(N, lambda p, w: ll_moment_series(params, p, w, digits))
    common["moment_fn"] = lambda p, w, d=digits: ll_moment_series(params, p, w, d)
    return MomentMatrix(rows, layout, "numeric", digits, **common)


def chebyshev_moment(k: int) -> Fraction:
    """Moments of the arcsine law on [-1, 1]: ``C(k, k/2) / 2**k`` for even k."""
    if k % 2:
        return Fraction(0)
    return Fraction(comb(k, k // 2), 2**k)


def build_classical_moments(measure, N: int) -> MomentMatrix:
    """Hankel moment matrix of a single weight.

    ``measure`` is ``"chebyshev"`` (arcsine law, reported on [-1, 1]) or a
    tuple ``("jacobi", p, q)`` for ``x**q (1-x)**p`` normalized on [0, 1].
    """
    if N < 2:
        raise DomainError("moment matrix needs N >= 2")
    if measure == "chebyshev":
        layout, rows = _fill(N, lambda p, w: chebyshev_moment(p), interleaved=False)
        return MomentMatrix(rows, layout, "exact", None, "probability measure",
                            support=(-1, 1), affine_map="x01 = (1 + x) / 2",
                            moment_fn=lambda p, w: chebyshev_moment(p))
    if isinstance(measure, tuple) and measure[0] == "jacobi":
        p, q = parse_scalar(measure[1]), parse_scalar(measure[2])
        fn = lambda k, w: beta_ratio(k, q, p)  # noqa: E731
        layout, rows = _fill(N, fn, interleaved=False)
        return MomentMatrix(rows, layout, "exact", None, "probability measure", moment_fn=fn)
    raise DomainError(f"unknown classical measure {measure!r}")


def to_numeric(matrix: MomentMatrix, digits: int) -> MomentMatrix:
    """Round an exact moment matrix to ``digits`` significant digits."""
    if matrix.mode == "numeric":
        return matrix
    cache = {}
    rows = []
    with mp.workdps(digits):
        for row in matrix.entries:
            out = []
            for v in row:
                key = id(v)
                if key not in cache:
                    cache[key] = to_mpf(v, digits)
                out.append(cache[key])
            rows.append(out)
    return MomentMatrix(rows, matrix.layout, "numeric", digits, matrix.normalization,
                        matrix.odd_unit, matrix.endpoint_ratio, matrix.support,
                        matrix.affine_map, matrix.moment_fn)


def build_moments(system: WeightSystem, N: int, mode: str = "exact", digits: int | None = None) -> MomentMatrix:
    if system.kind == "jacobi_pineiro":
        return build_jp_moments(system.params, N, mode, digits)
    if system.kind == "hypergeometric":
        return build_ll_moments(system.params, N, mode, digits or DEFAULT_DIGITS)
    if system.kind == "classical_jacobi":
        p, q = system.params
        return build_classical_moments(("jacobi", p, q), N)
    raise DomainError(f"unknown weight system kind {system.kind!r}")
