"""Exact and multiprecision numerical primitives.

Exact scalars are :class:`fractions.Fraction`; precision scalars are
``mpmath.mpf`` values produced inside an ``mpmath.workdps(digits)`` block.
Every numerical routine takes an explicit ``digits`` budget instead of
relying on the global mpmath context.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import mpmath
from mpmath import mp

from .errors import DomainError, NumericError

DEFAULT_DIGITS = 30


def parse_scalar(text) -> Fraction:
    """Parse ``"-1/4"``, ``"0.25"``, ``"3"`` or a number into an exact rational.

    Decimal strings are expanded literally (``"0.1"`` is ``1/10``, not the
    nearest binary double).
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, Rational):
        return Fraction(int(text.numerator), int(text.denominator))
    if isinstance(text, float):
        return Fraction(repr(text))
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse {text!r} as an exact rational") from exc


def format_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else str(x.numerator)
    return str(x)


def to_mpf(x, digits: int = DEFAULT_DIGITS):
    """Convert an exact or multiprecision scalar to ``mpf`` at ``digits``."""
    if isinstance(x, (UnitPoly, UnitRatio)):
        return x.evaluate(digits)
    with mp.workdps(digits):
        if isinstance(x, Rational):
            return mpmath.mpf(int(x.numerator)) / int(x.denominator)
        if hasattr(x, "as_integer_ratio") and not isinstance(x, float):
            n, d = x.as_integer_ratio()
            return mpmath.mpf(int(n)) / int(d)
        return mpmath.mpf(x)


def pochhammer(x, k: int):
    """Rising factorial ``x (x+1) ... (x+k-1)``; equals 1 for ``k == 0``."""
    if k < 0:
        raise DomainError("pochhammer needs k >= 0")
    result = Fraction(1) if isinstance(x, (int, Fraction)) else 1
    for j in range(k):
        result *= x + j
    return result


def log_gamma(x, digits: int = DEFAULT_DIGITS):
    """Natural logarithm of the Gamma function for ``x > 0``."""
    with mp.workdps(digits + 5):
        xv = to_mpf(x, digits + 5)
        if xv <= 0:
            raise DomainError(f"log_gamma needs a positive argument, got {x}")
        value = mpmath.loggamma(xv)
    with mp.workdps(digits):
        return +value


def log_beta(a, b, digits: int = DEFAULT_DIGITS):
    with mp.workdps(digits + 5):
        value = log_gamma(a, digits + 5) + log_gamma(b, digits + 5) - log_gamma(
            to_mpf(a, digits + 5) + to_mpf(b, digits + 5), digits + 5
        )
    with mp.workdps(digits):
        return +value


def beta_ratio(k: int, a, b) -> Fraction:
    """Normalized Jacobi moment ``B(k+a+1, b+1) / B(a+1, b+1)``, exactly.

    This is the k-th moment of the probability density proportional to
    ``x**a * (1-x)**b`` on [0, 1].
    """
    a, b = parse_scalar(a), parse_scalar(b)
    if a <= -1 or b <= -1:
        raise DomainError(f"beta_ratio needs a, b > -1 (got a={a}, b={b})")
    result = Fraction(1)
    for j in range(k):
        result *= (j + a + 1) / (j + a + b + 2)
    return result


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss rule on [0, 1] for the weight ``x**q * (1-x)**p``."""

    nodes: tuple
    weights: tuple
    jacobi_exponents: tuple
    digits: int

    @property
    def degree_exact(self) -> int:
        return 2 * len(self.nodes) - 1

    @property
    def mass(self):
        with mp.workdps(self.digits):
            return mpmath.fsum(self.weights)

    def integrate(self, f: Callable, normalized: bool = False):
        """Sum ``w_i f(x_i)``; with ``normalized`` the weights are scaled to total 1."""
        with mp.workdps(self.digits):
            total = mpmath.fsum(w * f(x) for x, w in zip(self.nodes, self.weights))
            if normalized:
                total /= self.mass
            return total


def _jacobi_recurrence(n: int, alpha: Fraction, beta: Fraction):
    """Monic Jacobi recurrence on [-1, 1] for ``(1-t)**alpha (1+t)**beta``.

    Returns exact diagonal entries and squared off-diagonal entries.
    """
    s = alpha + beta
    diag = [(beta - alpha) / (s + 2)]
    for k in range(1, n):
        diag.append((beta * beta - alpha * alpha) / ((2 * k + s) * (2 * k + s + 2)))
    off2 = []
    for k in range(1, n):
        if k == 1:
            off2.append(4 * (1 + alpha) * (1 + beta) / ((2 + s) ** 2 * (3 + s)))
        else:
            off2.append(
                4 * k * (k + alpha) * (k + beta) * (k + s)
                / ((2 * k + s) ** 2 * (2 * k + s + 1) * (2 * k + s - 1))
            )
    return diag, off2


@functools.lru_cache(maxsize=512)
def _gauss_jacobi_cached(n, p, q, digits):
    diag, off2 = _jacobi_recurrence(n, p, q)
    with mp.workdps(digits + 10):
        # t in [-1, 1] maps to x = (1 + t) / 2
        J = mpmath.matrix(n, n)
        for i in range(n):
            J[i, i] = (1 + to_mpf(diag[i], digits + 10)) / 2
        for i in range(n - 1):
            J[i, i + 1] = J[i + 1, i] = mpmath.sqrt(to_mpf(off2[i], digits + 10)) / 2
        try:
            E, Q = mpmath.eigsy(J)
        except Exception as exc:  # mpmath raises plain exceptions on non-convergence
            raise NumericError(f"Golub-Welsch eigensolver failed: {exc}") from exc
        mass = mpmath.exp(log_beta(q + 1, p + 1, digits + 10))
        pairs = sorted((E[i], mass * Q[0, i] ** 2) for i in range(n))
    with mp.workdps(digits):
        nodes = tuple(+x for x, _ in pairs)
        weights = tuple(+w for _, w in pairs)
    return QuadratureRule(nodes, weights, (p, q), digits)


def gauss_jacobi(n: int, p, q, digits: int = DEFAULT_DIGITS) -> QuadratureRule:
    """n-point Gauss rule on [0, 1] for ``x**q (1-x)**p`` via Golub-Welsch.

    The weights sum to ``B(q+1, p+1)``.
    """
    p, q = parse_scalar(p), parse_scalar(q)
    if n < 1:
        raise DomainError("gauss_jacobi needs n >= 1")
    if p <= -1 or q <= -1:
        raise DomainError(f"gauss_jacobi needs p, q > -1 (got p={p}, q={q})")
    return _gauss_jacobi_cached(n, p, q, digits)


def _is_nonpositive_int(x) -> bool:
    return x <= 0 and x == int(x)


def _series_2f1(a1, a2, b1, z, tol, max_terms):
    """Direct summation with a rigorous tail bound (real parameters, 0 <= z < 1)."""
    term = mpmath.mpf(1)
    total = mpmath.mpf(1)
    k = 0
    start_bound = max(-a1, -a2, -b1, 0)
    while k < max_terms:
        term *= (a1 + k) * (a2 + k) / ((b1 + k) * (k + 1)) * z
        k += 1
        total += term
        if term == 0:
            return total
        if k > start_bound:
            # sup over j >= k of the term ratio; all factors are positive here
            bound = z * (1 + max(0, a1 - 1) / (1 + k)) * (1 + max(0, a2 - b1) / (b1 + k))
            if bound < 1:
                tail = abs(term) * bound / (1 - bound)
                if tail <= tol * abs(total):
                    return total
    raise NumericError(f"2F1 series did not reach tolerance within {max_terms} terms", partial=total)


def hyp2f1(a1, a2, b1, z, digits: int = DEFAULT_DIGITS, max_terms: int = 200_000):
    """Gauss hypergeometric function for real parameters and ``0 <= z <= 1``.

    For ``z`` close to 1 the standard connection formula maps the evaluation
    to two series in ``1 - z``; at ``z == 1`` Gauss's summation theorem is used.
    """
    work = digits + 10
    with mp.workdps(work):
        a1, a2, b1, z = (to_mpf(v, work) for v in (a1, a2, b1, z))
        if _is_nonpositive_int(b1):
            raise DomainError("2F1 lower parameter must not be a non-positive integer")
        if z < 0 or z > 1:
            raise DomainError("hyp2f1 is implemented for 0 <= z <= 1 only")
        tol = mpmath.mpf(10) ** (-digits - 2)
        if z == 0:
            value = mpmath.mpf(1)
        elif z == 1:
            s = b1 - a1 - a2
            if s <= 0:
                raise DomainError("2F1 diverges at z = 1 unless b1 - a1 - a2 > 0")
            value = mpmath.gamma(b1) * mpmath.gamma(s) * mpmath.rgamma(b1 - a1) * mpmath.rgamma(b1 - a2)
        else:
            s = b1 - a1 - a2
            terminating = _is_nonpositive_int(a1) or _is_nonpositive_int(a2)
            if z > mpmath.mpf(3) / 4 and not terminating and s != int(s):
                w = 1 - z
                first = (
                    mpmath.gamma(b1) * mpmath.gamma(s) * mpmath.rgamma(b1 - a1) * mpmath.rgamma(b1 - a2)
                    * _series_2f1(a1, a2, 1 - s, w, tol, max_terms)
                )
                second = (
                    mpmath.gamma(b1) * mpmath.gamma(-s) * mpmath.rgamma(a1) * mpmath.rgamma(a2)
                    * w ** s * _series_2f1(b1 - a1, b1 - a2, 1 + s, w, tol, max_terms)
                )
                value = first + second
            else:
                value = _series_2f1(a1, a2, b1, z, tol, max_terms)
    with mp.workdps(digits):
        return +value


# ---------------------------------------------------------------------------
# Exact arithmetic over Q[u] for a single transcendental unit u.


@dataclass(frozen=True)
class TranscendentalUnit:
    """A named real constant known only through a numerical evaluator."""

    name: str
    evaluator: Callable[[int], object]

    def value(self, digits: int = DEFAULT_DIGITS):
        return _unit_value(self, digits)


@functools.lru_cache(maxsize=256)
def _unit_value(unit, digits):
    with mp.workdps(digits):
        return +unit.evaluator(digits)


def _trim(coeffs):
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(Fraction(c) for c in coeffs) or (Fraction(0),)


class UnitPoly:
    """Polynomial in a transcendental unit with rational coefficients.

    Equality is exact: two polynomials are equal iff their coefficients are.
    """

    __slots__ = ("coeffs", "unit")

    def __init__(self, coeffs: Sequence, unit: TranscendentalUnit):
        self.coeffs = _trim(coeffs)
        self.unit = unit

    @classmethod
    def linear(cls, const, slope, unit):
        return cls((const, slope), unit)

    def _coerce(self, other):
        if isinstance(other, UnitPoly):
            if other.unit is not self.unit and other.unit != self.unit:
                raise ValueError("cannot mix different transcendental units")
            return other
        if isinstance(other, (int, Fraction)):
            return UnitPoly((other,), self.unit)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UnitPoly([x + y for x, y in zip(a, b)], self.unit)

    __radd__ = __add__

    def __neg__(self):
        return UnitPoly([-c for c in self.coeffs], self.unit)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return UnitPoly(out, self.unit)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return UnitPoly([c / other for c in self.coeffs], self.unit)
        return UnitRatio(self, other)

    def __rtruediv__(self, other):
        return UnitRatio(self._coerce(other), self)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_rational(self) -> bool:
        return len(self.coeffs) == 1

    def evaluate(self, digits: int = DEFAULT_DIGITS):
        """Numerical value, with precision raised until cancellation is covered."""
        if self.is_rational():
            return to_mpf(self.coeffs[0], digits)
        work = digits + 10
        for _ in range(12):
            with mp.workdps(work):
                u = self.unit.value(work)
                terms = [to_mpf(c, work) * u**i for i, c in enumerate(self.coeffs)]
                total = mpmath.fsum(terms)
                scale = max(abs(t) for t in terms)
                if total != 0:
                    lost = float(mpmath.log10(scale / abs(total)))
                    if lost < work - digits - 5:
                        with mp.workdps(digits):
                            return +total
            work *= 2
        raise NumericError("unit polynomial evaluation did not resolve cancellation")

    def sign(self) -> int:
        if self.is_rational():
            c = self.coeffs[0]
            return (c > 0) - (c < 0)
        v = self.evaluate(DEFAULT_DIGITS)
        return (v > 0) - (v < 0)

    def __float__(self):
        return float(self.evaluate(20))

    def __repr__(self):
        terms = [f"{c}*{self.unit.name}^{i}" if i else str(c) for i, c in enumerate(self.coeffs)]
        return f"UnitPoly({' + '.join(terms)})"


class UnitRatio:
    """Quotient of two :class:`UnitPoly` values (an element of Q(u))."""

    __slots__ = ("num", "den")

    def __init__(self, num: UnitPoly, den: UnitPoly):
        if isinstance(den, UnitPoly) and den.coeffs == (Fraction(0),):
            raise ZeroDivisionError("UnitRatio with zero denominator")
        self.num = num
        self.den = den

    @property
    def unit(self):
        return self.num.unit

    def _coerce(self, other):
        if isinstance(other, UnitRatio):
            return other
        if isinstance(other, (int, Fraction, UnitPoly)):
            return UnitRatio(self.num._coerce(other), UnitPoly((1,), self.unit))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return UnitRatio(self.num + other.num, self.den)
        return UnitRatio(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return UnitRatio(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, UnitPoly)):
            return UnitRatio(self.num * other, self.den)
        if isinstance(other, UnitRatio):
            return UnitRatio(self.num * other.num, self.den * other.den)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, UnitPoly)):
            return UnitRatio(self.num, self.den * other)
        if isinstance(other, UnitRatio):
            return UnitRatio(self.num * other.den, self.den * other.num)
        return NotImplemented

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        return hash((self.num, self.den))

    def evaluate(self, digits: int = DEFAULT_DIGITS):
        with mp.workdps(digits + 5):
            value = self.num.evaluate(digits + 5) / self.den.evaluate(digits + 5)
        with mp.workdps(digits):
            return +value

    def sign(self) -> int:
        return self.num.sign() * self.den.sign()

    def __float__(self):
        return float(self.evaluate(20))

    def __repr__(self):
        return f"UnitRatio({self.num!r} / {self.den!r})"


def sign_of(x) -> int:
    if isinstance(x, (UnitPoly, UnitRatio)):
        return x.sign()
    return (x > 0) - (x < 0)


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, UnitPoly, UnitRatio))


def digits_to_bits(digits: int) -> int:
    return int(math.ceil(digits * math.log2(10))) + 8
