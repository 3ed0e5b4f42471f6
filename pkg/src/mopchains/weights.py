"""Weight systems on [0, 1] and the recurrence/transience classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp

from .errors import DomainError
from .numerics import (
    DEFAULT_DIGITS,
    TranscendentalUnit,
    hyp2f1,
    log_beta,
    log_gamma,
    parse_scalar,
    pochhammer,
    to_mpf,
)

UNIFORM_TUPLE = (Fraction(4, 3), Fraction(5, 3), Fraction(2), Fraction(5, 2))


def _is_integer(x: Fraction) -> bool:
    return x.denominator == 1


def _nonpositive_integer(x: Fraction) -> bool:
    return _is_integer(x) and x <= 0


@dataclass(frozen=True)
class JacobiPineiroParams:
    alpha1: Fraction
    alpha2: Fraction
    alpha0: Fraction

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha0"):
            value = parse_scalar(getattr(self, name))
            object.__setattr__(self, name, value)
            if value <= -1:
                raise DomainError(f"{name} must be > -1, got {value}")
        if _is_integer(self.alpha1 - self.alpha2):
            raise DomainError("alpha1 - alpha2 must not be an integer")

    @property
    def positive(self) -> bool:
        """Whether the Hessenberg coefficients are positive (|alpha1 - alpha2| < 1)."""
        return abs(self.alpha1 - self.alpha2) < 1

    def exponent(self, which: int) -> Fraction:
        return {1: self.alpha1, 2: self.alpha2}[which]

    def as_strings(self) -> dict:
        return {"alpha1": str(self.alpha1), "alpha2": str(self.alpha2), "alpha0": str(self.alpha0)}


@dataclass(frozen=True)
class HypergeometricParams:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction
    delta: Fraction = field(init=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, parse_scalar(getattr(self, name)))
        object.__setattr__(self, "delta", self.c + self.d - self.a - self.b)
        if self.a <= 0 or self.b <= 0 or self.delta <= 0:
            raise DomainError("hypergeometric weights need a, b, delta > 0")
        for label, value in (("d-a", self.d - self.a), ("d-b", self.d - self.b),
                             ("c+1-a", self.c + 1 - self.a), ("c-b", self.c - self.b)):
            if _nonpositive_integer(value):
                raise DomainError(f"{label} must not be a non-positive integer")

    @property
    def is_uniform(self) -> bool:
        return (self.a, self.b, self.c, self.d) == UNIFORM_TUPLE

    def shifted(self) -> "HypergeometricParams":
        """Parameters of the second weight, ``(a, b+1; c+1, d)``."""
        return HypergeometricParams(self.a, self.b + 1, self.c + 1, self.d)

    def as_strings(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("a", "b", "c", "d")}


@dataclass(frozen=True)
class WeightSystem:
    """A pair of weights on [0, 1] (or a single classical Jacobi weight).

    ``kind`` is one of ``"jacobi_pineiro"``, ``"hypergeometric"`` and
    ``"classical_jacobi"``; ``params`` holds the matching parameter record
    (for the classical kind, a ``(p, q)`` pair of exponents of ``(1-x)`` and
    ``x``).
    """

    kind: str
    params: object
    support: tuple = (0, 1)

    @classmethod
    def jacobi_pineiro(cls, alpha1, alpha2, alpha0):
        return cls("jacobi_pineiro", JacobiPineiroParams(alpha1, alpha2, alpha0))

    @classmethod
    def hypergeometric(cls, a, b, c, d):
        return cls("hypergeometric", HypergeometricParams(a, b, c, d))

    @classmethod
    def classical_jacobi(cls, p, q):
        p, q = parse_scalar(p), parse_scalar(q)
        if p <= -1 or q <= -1:
            raise DomainError("classical Jacobi exponents must be > -1")
        return cls("classical_jacobi", (p, q))

    @property
    def label(self) -> str:
        if self.kind == "jacobi_pineiro":
            p = self.params
            return f"JP({p.alpha1}, {p.alpha2}, {p.alpha0})"
        if self.kind == "hypergeometric":
            p = self.params
            return f"LL({p.a}, {p.b}, {p.c}, {p.d})"
        return f"Jacobi{self.params}"

    def density(self, which: int, x, digits: int = DEFAULT_DIGITS):
        """Weight ``which`` normalized to a probability density on [0, 1]."""
        if self.kind == "jacobi_pineiro":
            p = self.params
            alpha = p.exponent(which)
            with mp.workdps(digits + 5):
                value = jp_weight(p, which, x, digits + 5) / mpmath.exp(
                    log_beta(alpha + 1, p.alpha0 + 1, digits + 5))
        elif self.kind == "hypergeometric":
            if self.params.is_uniform:
                value = ll_weight_closed(which, x, digits + 5)
            else:
                value = ll_weight_series(self.params, which == 2, x, digits + 5)
        else:
            raise DomainError("density() is defined for two-weight systems only")
        with mp.workdps(digits):
            return +value

    def endpoint_ratio(self):
        """Limit at x = 1 of (normalized w2) / (normalized w1).

        Returned exactly when it is rational, otherwise as a
        :class:`TranscendentalUnit`.
        """
        if self.kind == "hypergeometric":
            p = self.params
            # the Gamma prefactors differ by c/b; the remaining factors agree at x = 1
            return p.c / p.b
        if self.kind == "jacobi_pineiro":
            p = self.params
            if _is_integer(p.alpha0):
                m = int(p.alpha0) + 1
                return pochhammer(p.alpha2 + 1, m) / pochhammer(p.alpha1 + 1, m)
            a1, a2, a0 = p.alpha1, p.alpha2, p.alpha0

            def evaluate(digits):
                with mp.workdps(digits + 5):
                    return mpmath.exp(log_beta(a1 + 1, a0 + 1, digits + 5) - log_beta(a2 + 1, a0 + 1, digits + 5))

            return TranscendentalUnit(f"rho[{a1},{a2},{a0}]", evaluate)
        raise DomainError("endpoint ratio is defined for two-weight systems only")


def jp_weight(params: JacobiPineiroParams, which: int, x, digits: int = DEFAULT_DIGITS):
    """Unnormalized Jacobi-Pineiro weight ``x**alpha_which * (1-x)**alpha0``."""
    alpha = params.exponent(which)
    with mp.workdps(digits):
        xv = to_mpf(x, digits)
        if xv <= 0 or xv >= 1:
            if (xv <= 0 and alpha < 0) or (xv >= 1 and params.alpha0 < 0):
                raise DomainError("weight is unbounded at this endpoint")
            if xv < 0 or xv > 1:
                raise DomainError("x must lie in [0, 1]")
        return xv ** to_mpf(alpha, digits) * (1 - xv) ** to_mpf(params.alpha0, digits)


def _ll_prefactor(a, b, c, d, digits):
    delta = c + d - a - b
    with mp.workdps(digits):
        return mpmath.exp(
            log_gamma(c, digits) + log_gamma(d, digits)
            - log_gamma(a, digits) - log_gamma(b, digits) - log_gamma(delta, digits)
        )


def ll_weight_series(params: HypergeometricParams, shifted: bool, x, digits: int = DEFAULT_DIGITS):
    """Hypergeometric weight ``omega(x; a, b; c, d)`` (or the shifted tuple)."""
    a, b, c, d = params.a, params.b, params.c, params.d
    if shifted:
        b, c = b + 1, c + 1
    delta = c + d - a - b
    work = digits + 10
    with mp.workdps(work):
        xv = to_mpf(x, work)
        if xv <= 0 or xv > 1:
            raise DomainError("ll_weight_series needs 0 < x <= 1")
        if xv == 1:
            if delta > 1:
                value = mpmath.mpf(0)
            elif delta == 1:
                value = _ll_prefactor(a, b, c, d, work)
            else:
                raise DomainError("weight is unbounded at x = 1 for delta < 1")
        else:
            value = (
                _ll_prefactor(a, b, c, d, work)
                * xv ** to_mpf(a - 1, work)
                * (1 - xv) ** to_mpf(delta - 1, work)
                * hyp2f1(c - b, d - b, delta, 1 - xv, work)
            )
    with mp.workdps(digits):
        return +value


def ll_weight_closed(which: int, x, digits: int = DEFAULT_DIGITS):
    """Cube-root closed forms of the two weights for the tuple (4/3, 5/3, 2, 5/2)."""
    with mp.workdps(digits + 5):
        xv = to_mpf(x, digits + 5)
        if xv < 0 or xv > 1:
            raise DomainError("x must lie in [0, 1]")
        s = mpmath.sqrt(1 - xv)
        up, down = mpmath.cbrt(1 + s), mpmath.cbrt(1 - s)
        if which == 1:
            value = 81 * mpmath.sqrt(3) / (16 * mpmath.pi) * mpmath.cbrt(xv) * (up - down)
        elif which == 2:
            value = 243 * mpmath.sqrt(3) / (160 * mpmath.pi) * mpmath.cbrt(xv) * (up**4 - down**4)
        else:
            raise DomainError("which must be 1 or 2")
    with mp.workdps(digits):
        return +value


@dataclass(frozen=True)
class Classification:
    verdict: str  # "recurrent" | "transient" | "boundary_flagged"
    rationale: str
    readings: dict = field(default_factory=dict)

    def __str__(self):
        return self.verdict


def classify_chain(system: WeightSystem) -> Classification:
    """Decide recurrence of both dual chains from the weight exponents.

    Both chains are recurrent iff the integral of ``w1(x) / (1 - x)`` diverges,
    which is decided by the exponent of ``(1 - x)`` in ``w1``.
    """
    if system.kind == "jacobi_pineiro":
        a0 = system.params.alpha0
        if a0 < 0:
            return Classification("recurrent", f"alpha0 = {a0} < 0: integral of w1/(1-x) diverges")
        if a0 > 0:
            return Classification("transient", f"alpha0 = {a0} > 0: integral of w1/(1-x) converges")
        return Classification(
            "boundary_flagged",
            "alpha0 = 0: the integral diverges logarithmically, but the JP corollary "
            "states transience for alpha0 >= 0",
            readings={"integral_test": "recurrent", "jp_corollary": "transient"},
        )
    if system.kind == "hypergeometric":
        delta = system.params.delta
        if delta <= 1:
            return Classification("recurrent", f"delta = {delta} in (0, 1]")
        return Classification("transient", f"delta = {delta} > 1")
    raise DomainError(f"classification is not defined for kind {system.kind!r}")


def divergence_probe(system: WeightSystem, eps=(1e-2, 1e-4, 1e-6, 1e-8), digits: int = 20):
    """Numerically integrate ``w1/(1-x)`` on ``[1/2, 1-eps]`` for shrinking ``eps``.

    Diagnostic only: bounded growth suggests convergence, unbounded growth
    divergence.  The verdict of :func:`classify_chain` does not use it.
    """
    out = []
    with mp.workdps(digits):
        for e in eps:
            e = mpmath.mpf(e)
            value = mpmath.quad(lambda x: system.density(1, x, digits) / (1 - x),
                                [mpmath.mpf(1) / 2, 1 - mpmath.sqrt(e), 1 - e])
            out.append((float(e), float(value)))
    return out


def parse_system(family: str, values) -> WeightSystem:
    """Build a weight system from a family name and parameter strings."""
    values = [parse_scalar(v) for v in values]
    if family == "jp":
        if len(values) != 3:
            raise DomainError("jp needs three parameters: alpha1 alpha2 alpha0")
        return WeightSystem.jacobi_pineiro(*values)
    if family == "ll":
        if len(values) != 4:
            raise DomainError("ll needs a four-parameter tuple a,b,c,d")
        return WeightSystem.hypergeometric(*values)
    raise DomainError(f"unknown family {family!r}")
