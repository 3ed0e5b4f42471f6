"""LDU factorization of the moment matrix and everything read off from it.

Writing the moment matrix as ``g = L D U`` (unit lower ``L``, diagonal ``D``,
unit upper ``U``, no pivoting) gives the type II coefficient matrix
``S = L^-1``, the diagonal ``Htilde = D`` and the type I coefficient matrix
``Stilde = (U^T)^-1``.  The Hessenberg operator ``S Lambda S^-1`` is never
formed by inversion: it satisfies ``L H = Lambda L`` and is recovered row by
row, which also proves the band structure as it goes.

Elimination runs on gmpy2 ``mpq`` (exact) or ``mpfr`` (numeric) values;
results are handed out as ``Fraction`` or ``mpmath.mpf``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath
from gmpy2 import mpfr, mpq
from mpmath import mp

from .errors import DomainError, NumericError, PositivityError, SingularMinorError, StructureError
from .moments import MomentMatrix, build_moments
from .numerics import (
    DEFAULT_DIGITS,
    TranscendentalUnit,
    UnitPoly,
    digits_to_bits,
    gauss_jacobi,
    sign_of,
    to_mpf,
)
from .weights import WeightSystem

log = logging.getLogger(__name__)


# -- scalar plumbing ---------------------------------------------------------


def _mpq(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _mpf_to_mpfr(x):
    sign, man, exp, _ = x._mpf_
    if not man:
        return mpfr(0)
    v = gmpy2.mul_2exp(mpfr(int(man)), exp)
    return -v if sign else v


def _native(x, bits):
    """Convert a moment entry to the elimination type (``mpq`` if ``bits`` is None)."""
    if bits is None:
        return _mpq(x)
    if isinstance(x, Fraction):
        return mpfr(_mpq(x))
    if isinstance(x, mpmath.mpf):
        return _mpf_to_mpfr(x)
    return mpfr(x)


def _public(x, digits):
    """Convert an elimination value to ``Fraction`` (exact) or ``mpf``."""
    if isinstance(x, type(mpq())):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, type(mpfr())):
        n, d = x.as_integer_ratio()
        with mp.workdps(digits):
            return mpmath.mpf(int(n)) / int(d)
    return x


# -- factorization -----------------------------------------------------------


class GaussBorelFactorization:
    """``g = S^-1 Htilde Stilde^-T`` computed as ``g = L D U``.

    The packed elimination array is kept: below the diagonal it holds ``L``,
    on and above it holds ``D U``.  ``S`` and ``Stilde`` are full inverses
    computed on first access, which is only sensible for small sizes.
    """

    def __init__(self, packed, moments: MomentMatrix, bits: int | None):
        self._a = packed
        self.moments = moments
        self.bits = bits
        self.size = len(packed)
        self.mode = "exact" if bits is None else "numeric"
        self.digits = None if bits is None else int(bits * math.log10(2)) - 3
        self._S = None
        self._Stilde = None

    # native accessors
    def lower(self, i, j):
        if i == j:
            return self._one()
        return self._a[i][j] if j < i else self._zero()

    def upper(self, i, j):
        if i == j:
            return self._one()
        return self._a[i][j] / self._a[i][i] if j > i else self._zero()

    def pivot(self, i):
        return self._a[i][i]

    def _one(self):
        return mpq(1) if self.bits is None else mpfr(1)

    def _zero(self):
        return mpq(0) if self.bits is None else mpfr(0)

    def out(self, x):
        return _public(x, self.digits or DEFAULT_DIGITS)

    @property
    def Htilde(self):
        return [self.out(self._a[i][i]) for i in range(self.size)]

    @property
    def S(self):
        if self._S is None:
            n = self.size
            X = [[self._zero()] * n for _ in range(n)]
            for i in range(n):
                X[i][i] = self._one()
                for j in range(i):
                    s = self._zero()
                    for k in range(j, i):
                        s += self._a[i][k] * X[k][j]
                    X[i][j] = -s
            self._S = [[self.out(v) for v in row] for row in X]
        return self._S

    @property
    def Stilde(self):
        if self._Stilde is None:
            self._Stilde = [[self.out(v) for v in row] for row in
                            (self._stilde_row(n) + [self._zero()] * (self.size - n - 1)
                             for n in range(self.size))]
        return self._Stilde

    def _stilde_row(self, n):
        """Row ``n`` of ``(U^T)^-1``: solve ``row . U^T = e_n`` backwards."""
        row = [self._zero()] * (n + 1)
        row[n] = self._one()
        for j in range(n - 1, -1, -1):
            s = self._zero()
            for k in range(j + 1, n + 1):
                s += row[k] * self.upper(j, k)
            row[j] = -s
        return row

    def typeI_row(self, n):
        """Row ``n`` of ``Htilde^-1 Stilde`` in native arithmetic."""
        piv = self._a[n][n]
        return [v / piv for v in self._stilde_row(n)]

    def residual(self):
        """max |g - L D U| over all entries (0 exactly in exact mode)."""
        n = self.size
        worst = 0
        for i in range(n):
            for j in range(n):
                s = self._zero()
                for k in range(min(i, j) + 1):
                    s += self.lower(i, k) * self._a[k][k] * self.upper(k, j)
                diff = abs(s - _native(self.moments.entries[i][j], self.bits))
                worst = max(worst, diff)
        return self.out(worst) if worst else (Fraction(0) if self.bits is None else mpmath.mpf(0))


def factorize(g: MomentMatrix, bits: int | None = None) -> GaussBorelFactorization:
    """Doolittle elimination without pivoting.

    Exact matrices are eliminated in rationals unless ``bits`` is given, in
    which case the entries are rounded to ``bits``-bit floats first.  A zero
    pivot raises :class:`SingularMinorError` naming the minor.
    """
    if g.mode == "numeric" and bits is None:
        bits = digits_to_bits(g.digits)
    ctx = gmpy2.get_context().copy()
    if bits is not None:
        ctx.precision = bits
    with gmpy2.context(ctx):
        A = [[_native(x, bits) for x in row] for row in g.entries]
        n = len(A)
        for k in range(n):
            piv = A[k][k]
            if piv == 0:
                raise SingularMinorError(k)
            rk = A[k]
            for i in range(k + 1, n):
                ri = A[i]
                l = ri[k] / piv
                if l:
                    for j in range(k + 1, n):
                        ri[j] -= l * rk[j]
                ri[k] = l
    return GaussBorelFactorization(A, g, bits)


# -- Hessenberg operator -----------------------------------------------------


@dataclass
class BandedHessenberg:
    """Tetradiagonal lower Hessenberg operator with unit superdiagonal.

    ``a[n]`` sits at ``(n, n-2)``, ``b[n]`` at ``(n, n-1)`` and ``c[n]`` at
    ``(n, n)``; ``a[0] = a[1] = b[0] = 0``.  Coefficients are known for rows
    ``0 .. len(c) - 1``.
    """

    a: list
    b: list
    c: list
    mode: str = "exact"
    digits: int | None = None
    label: str = ""
    offband: float = 0.0
    generator: object = field(default=None, repr=False)  # n -> (a_n, b_n, c_n) beyond the truncation

    @property
    def truncation_size(self) -> int:
        return len(self.c)

    def entry(self, n, m):
        if m == n + 1:
            return 1
        if m == n:
            return self.c[n]
        if m == n - 1:
            return self.b[n]
        if m == n - 2:
            return self.a[n]
        return 0

    def dense(self, N=None):
        N = N or self.truncation_size
        zero = Fraction(0) if self.mode == "exact" else mpmath.mpf(0)
        return [[self.entry(n, m) if -2 <= m - n <= 1 else zero for m in range(N)] for n in range(N)]

    def positive(self) -> bool:
        return all(sign_of(v) > 0 for v in self.a[2:]) and all(
            sign_of(v) > 0 for v in self.b[1:]) and all(sign_of(v) > 0 for v in self.c)

    def sup_bands(self):
        return tuple(max(abs(float(v)) for v in seq[start:]) for seq, start in
                     ((self.a, 2), (self.b, 1), (self.c, 0)))


def extract_hessenberg(f: GaussBorelFactorization, label: str = "", tol=None) -> BandedHessenberg:
    """Solve ``L H = Lambda L`` for the rows of ``H`` and check the bands.

    Row ``n`` needs row ``n + 1`` of ``L``, so a factorization of size ``M``
    yields rows ``0 .. M - 2``.  Every entry left of the ``a`` band is
    computed and must vanish: exactly in exact mode, within ``tol`` in
    numeric mode (the largest off-band magnitude is kept in ``offband``).
    """
    M = f.size
    if M < 4:
        raise DomainError("Hessenberg extraction needs a factorization of size >= 4")
    offband = 0
    ctx = gmpy2.get_context().copy()
    if f.bits is not None:
        ctx.precision = f.bits
    rows = []
    with gmpy2.context(ctx):
        for n in range(M - 1):
            row = {}
            for j in range(0, n + 2):
                s = f.lower(n + 1, j)
                # earlier rows are banded, so only k in [j-1, j+2] contribute
                for k in range(max(0, j - 1), min(n, j + 3)):
                    hk = rows[k].get(j)
                    if hk is not None:
                        s -= f._a[n][k] * hk
                row[j] = s
            for j in range(0, n - 2):
                v = row.pop(j)
                if f.bits is not None:
                    offband = max(offband, abs(v))
                if (f.bits is None and v != 0) or (f.bits is not None and tol is not None and abs(v) > tol):
                    raise StructureError(
                        f"Hessenberg entry ({n}, {j}) = {float(v):.3e} lies outside the four bands")
            if row[n + 1] != 1:
                raise StructureError(f"superdiagonal entry at row {n} is not 1")
            rows.append(row)
    out = f.out
    zero = Fraction(0) if f.bits is None else mpmath.mpf(0)
    a = [zero, zero] + [out(rows[n][n - 2]) for n in range(2, M - 1)]
    b = [zero] + [out(rows[n][n - 1]) for n in range(1, M - 1)]
    c = [out(rows[n][n]) for n in range(M - 1)]
    H = BandedHessenberg(a[: M - 1], b, c, f.mode, f.digits, label)
    H.offband = float(offband)
    return H


# -- values at x = 1 -----------------------------------------------------------


def typeII_values_at_1(f: GaussBorelFactorization):
    """``B(1) = S 1``, i.e. the solution of ``L y = 1``."""
    ctx = gmpy2.get_context().copy()
    if f.bits is not None:
        ctx.precision = f.bits
    with gmpy2.context(ctx):
        y = []
        for n in range(f.size):
            s = f._one()
            row = f._a[n]
            for k in range(n):
                s -= row[k] * y[k]
            y.append(s)
    return [f.out(v) for v in y]


def _typeI_parts(f: GaussBorelFactorization):
    """Solve ``U^T z = e`` for the even and odd indicator vectors."""
    ctx = gmpy2.get_context().copy()
    if f.bits is not None:
        ctx.precision = f.bits
    with gmpy2.context(ctx):
        parts = []
        for parity in (0, 1):
            z = []
            for n in range(f.size):
                s = f._one() if n % 2 == parity else f._zero()
                for k in range(n):
                    s -= f._a[k][n] / f._a[k][k] * z[k]
                z.append(s)
            parts.append([z[n] / f._a[n][n] for n in range(f.size)])
    return parts


def normalized_typeI_at_1(f: GaussBorelFactorization, rho=None):
    """Values at 1 of the type I linear forms divided by ``w1``.

    ``rho`` is the limit of ``w2 / w1`` at 1 (both weights normalized as in
    the moment matrix); it defaults to the moment matrix's endpoint ratio.
    A transcendental ``rho`` gives exact :class:`UnitPoly` values in exact
    mode.  The gauge is ``q[0] = 1`` because ``g[0][0] = 1``.
    """
    if rho is None:
        rho = f.moments.endpoint_ratio
    if not f.moments.layout.interleaved:
        raise DomainError("type I values need a two-weight moment matrix")
    even, odd = _typeI_parts(f)
    q = []
    if f.bits is None:
        for e, o in zip(even, odd):
            e, o = f.out(e), f.out(o)
            if isinstance(rho, TranscendentalUnit):
                q.append(UnitPoly.linear(e, o, rho))
            else:
                q.append(e + o * rho)
    else:
        digits = int(f.bits * math.log10(2))
        ctx = gmpy2.get_context().copy()
        ctx.precision = f.bits
        with gmpy2.context(ctx):
            r = _native(rho.value(digits) if isinstance(rho, TranscendentalUnit) else Fraction(rho), f.bits)
            q = [f.out(e + o * r) for e, o in zip(even, odd)]
    for n, v in enumerate(q):
        if sign_of(v) <= 0:
            raise PositivityError(f"type I value at 1 is not positive at index {n}")
    if q and q[0] != 1:
        q = [v / q[0] for v in q]
    return q


# -- polynomial family ---------------------------------------------------------


def _poly_mul_x(p):
    return [0] + list(p)


def _poly_axpy(alpha, x, y):
    """alpha * x + y with zero padding."""
    n = max(len(x), len(y))
    x = list(x) + [0] * (n - len(x))
    y = list(y) + [0] * (n - len(y))
    return [alpha * xi + yi for xi, yi in zip(x, y)]


def horner(coeffs, x):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass
class PolynomialFamily:
    """Type II polynomials, type I linear forms and their values at 1."""

    system: WeightSystem | None
    hessenberg: BandedHessenberg
    factorization: GaussBorelFactorization
    B_at_1: list
    q_at_1: list
    mode: str
    digits: int | None
    size: int = 0
    achieved_digits: int | None = None
    _typeII: list = field(default_factory=list, repr=False)
    _typeI: dict = field(default_factory=dict, repr=False)

    @property
    def truncation(self) -> int:
        return self.hessenberg.truncation_size

    def typeII_coeffs(self, n):
        """Monomial coefficients (constant first) of the monic ``B_n``."""
        if n >= self.truncation:
            raise DomainError(f"B_{n} is beyond the truncation ({self.truncation})")
        H = self.hessenberg
        one = Fraction(1) if self.mode == "exact" else mpmath.mpf(1)
        if not self._typeII:
            self._typeII.append([one])
        with mp.workdps(self.work_digits):
            while len(self._typeII) <= n:
                k = len(self._typeII) - 1  # build B_{k+1} from x B_k
                nxt = _poly_mul_x(self._typeII[k])
                nxt = _poly_axpy(-H.c[k], self._typeII[k], nxt)
                if k >= 1:
                    nxt = _poly_axpy(-H.b[k], self._typeII[k - 1], nxt)
                if k >= 2:
                    nxt = _poly_axpy(-H.a[k], self._typeII[k - 2], nxt)
                self._typeII.append(nxt)
        return self._typeII[n]

    @property
    def work_digits(self) -> int:
        f = self.factorization
        return DEFAULT_DIGITS + 20 if f.bits is None else max(DEFAULT_DIGITS, int(f.bits * math.log10(2)) - 5)

    def typeI_pair(self, n):
        """Coefficient lists ``(A1_n, A2_n)`` so that ``Q_n = A1_n w1 + A2_n w2``."""
        if n not in self._typeI:
            f = self.factorization
            ctx = gmpy2.get_context().copy()
            if f.bits is not None:
                ctx.precision = f.bits
            with gmpy2.context(ctx):
                row = f.typeI_row(n)
            row = [_public(v, self.work_digits) for v in row]
            self._typeI[n] = (row[0::2], row[1::2])
        return self._typeI[n]

    def typeII_at(self, n, x):
        return typeII_at(self, n, x)


def typeII_at(family: PolynomialFamily, n: int, x):
    return horner(family.typeII_coeffs(n), x)


# -- integration against the two weights ---------------------------------------


class ChannelMoments:
    """``m[i][j] = integral of x**j w_i`` for the normalized weights, by quadrature.

    Jacobi-Pineiro weights use Gauss-Jacobi rules that are exact for the
    requested degree; hypergeometric weights use tanh-sinh quadrature (the
    density has an algebraic singularity at 0).  Integrals of polynomials
    are then dot products with these moments.
    """

    def __init__(self, system: WeightSystem, max_power: int, digits: int = 40):
        self.system = system
        self.digits = digits
        self.max_power = max_power
        self.m = {1: [], 2: []}
        if system.kind == "jacobi_pineiro":
            p = system.params
            nodes = max_power // 2 + 3
            for which in (1, 2):
                rule = gauss_jacobi(nodes, p.alpha0, p.exponent(which), digits)
                with mp.workdps(digits):
                    mass = rule.mass
                    self.m[which] = [
                        mpmath.fsum(w * x**j for x, w in zip(rule.nodes, rule.weights)) / mass
                        for j in range(max_power + 1)
                    ]
        elif system.kind == "hypergeometric":
            cache = {}
            for which in (1, 2):
                def dens(x, which=which):
                    key = (which, x)
                    if key not in cache:
                        cache[key] = system.density(which, x, digits)
                    return cache[key]

                with mp.workdps(digits):
                    self.m[which] = [mpmath.quad(lambda x, j=j: dens(x) * x**j, [0, 1])
                                     for j in range(max_power + 1)]
        else:
            raise DomainError(f"channel moments are not defined for kind {system.kind!r}")

    def integrate(self, coeffs, which: int):
        if len(coeffs) - 1 > self.max_power:
            raise DomainError("polynomial degree exceeds the prepared quadrature")
        with mp.workdps(self.digits):
            return mpmath.fsum(to_mpf(c, self.digits) * self.m[which][j] for j, c in enumerate(coeffs))


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return out


def pairing(family: PolynomialFamily, cm: ChannelMoments, left, n, r=0):
    """Integral of ``x**r * left(x) * Q_n`` against both weights.

    ``left`` is a coefficient list.
    """
    A1, A2 = family.typeI_pair(n)
    shift = [0] * r + [1]
    with mp.workdps(cm.digits):
        left = [to_mpf(c, cm.digits) for c in left]
        A1 = [to_mpf(c, cm.digits) for c in A1]
        A2 = [to_mpf(c, cm.digits) for c in A2]
        base = _poly_mul(shift, left)
        return cm.integrate(_poly_mul(base, A1), 1) + cm.integrate(_poly_mul(base, A2), 2)


@dataclass
class OrthogonalityReport:
    name: str
    max_deviation: float
    tolerance: float
    cells: int
    worst: tuple = ()

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def verify_biorthogonality(family: PolynomialFamily, system: WeightSystem, upto: int,
                           tol: float = 1e-8, digits: int = 50) -> OrthogonalityReport:
    cm = ChannelMoments(system, 3 * upto + 4, digits)
    worst, where = 0.0, ()
    for m in range(upto + 1):
        Bm = family.typeII_coeffs(m)
        for k in range(upto + 1):
            dev = abs(float(pairing(family, cm, Bm, k)) - (1.0 if m == k else 0.0))
            if dev > worst:
                worst, where = dev, (m, k)
    return OrthogonalityReport("biorthogonality", worst, tol, (upto + 1) ** 2, where)


def verify_typeII_orthogonality(family, system, upto, tol=1e-8, digits=50) -> OrthogonalityReport:
    """``integral B_n x**j w_a = 0`` for ``j < ceil(n/2)`` (a = 1) and ``j < floor(n/2)`` (a = 2)."""
    cm = ChannelMoments(system, 2 * upto + 2, digits)
    worst, where, cells = 0.0, (), 0
    for n in range(upto + 1):
        Bn = family.typeII_coeffs(n)
        for which, count in ((1, (n + 1) // 2), (2, n // 2)):
            for j in range(count):
                v = abs(float(cm.integrate([0] * j + list(Bn), which)))
                cells += 1
                if v > worst:
                    worst, where = v, (n, which, j)
    return OrthogonalityReport("type II orthogonality", worst, tol, cells, where)


def verify_typeI_orthogonality(family, system, upto, tol=1e-8, digits=50) -> OrthogonalityReport:
    """``integral x**j Q_n = 0`` for ``j < n`` and ``integral x**n Q_n = 1``."""
    cm = ChannelMoments(system, 2 * upto + 2, digits)
    worst, where, cells = 0.0, (), 0
    for n in range(upto + 1):
        for j in range(n + 1):
            v = float(pairing(family, cm, [0] * j + [1], n))
            dev = abs(v - (1.0 if j == n else 0.0))
            cells += 1
            if dev > worst:
                worst, where = dev, (n, j)
    return OrthogonalityReport("type I orthogonality", worst, tol, cells, where)


# -- pipeline -------------------------------------------------------------------


def _family_from(system, g, bits, label):
    f = factorize(g, bits)
    H = extract_hessenberg(f, label)
    B1 = typeII_values_at_1(f)
    for n, v in enumerate(B1):
        if sign_of(v) <= 0:
            raise PositivityError(f"type II value at 1 is not positive at index {n}")
    q = normalized_typeI_at_1(f)
    return f, H, B1, q


def _agreement(x, y) -> float:
    """Number of agreeing significant digits between two mpf sequences."""
    worst = math.inf
    for u, v in zip(x, y):
        u, v = mpmath.mpf(u), mpmath.mpf(v)
        scale = max(abs(u), abs(v), mpmath.mpf(10) ** -60)
        diff = abs(u - v)
        if diff:
            worst = min(worst, float(-mpmath.log10(diff / scale)))
    return worst


def build_family(system: WeightSystem, size: int, mode: str = "exact", digits: int = DEFAULT_DIGITS,
                 max_bits: int = 1 << 15) -> PolynomialFamily:
    """Hessenberg operator with ``size`` rows plus values at 1 for ``size + 3`` indices.

    Numeric mode starts from a bit budget that grows with the moment size
    (the moment matrix is Hilbert-like) and doubles it until two consecutive
    runs agree to ``digits`` digits on every band coefficient, ``B(1)`` and
    ``q``.
    """
    if size < 2:
        raise DomainError("size must be at least 2")
    M = size + 3
    label = system.label
    if mode == "exact":
        g = build_moments(system, M, "exact")
        if system.kind == "jacobi_pineiro" and not g.odd_columns_rational():
            raise StructureError("odd-column unit did not factor out of the moment matrix")
        f, H, B1, q = _family_from(system, g, None, label)
        return PolynomialFamily(system, H, f, B1, q, "exact", None, size)
    if mode != "numeric":
        raise DomainError(f"unknown mode {mode!r}")
    bits = digits_to_bits(digits + int(1.6 * M) + 10)
    previous = None
    while bits <= max_bits:
        mom_digits = int(bits * math.log10(2)) + 10
        if system.kind == "hypergeometric":
            g = build_moments(system, M, "numeric", mom_digits)
        else:
            g = build_moments(system, M, "exact")
        f, H, B1, q = _family_from(system, g, bits, label)
        f.digits = digits
        with mp.workdps(digits + 10):
            current = (H.a[2:] + H.b[1:] + H.c, B1, q)
            if previous is not None:
                agree = min(_agreement(x, y) for x, y in zip(previous[0], current))
                log.debug("bits=%d agreement=%.1f digits", bits, agree)
                if agree >= digits:
                    if H.offband > 10.0 ** (5 - digits):
                        raise StructureError(f"off-band residual {H.offband:.3e} exceeds 1e{5 - digits}")
                    fam = PolynomialFamily(system, H, f, B1, q, "numeric", digits, size,
                                           achieved_digits=int(min(agree, digits + 10)))
                    return _round_family(fam, digits)
        previous = (current, f, H)
        bits *= 2
    raise NumericError(f"numeric factorization did not stabilize to {digits} digits within {max_bits} bits",
                       partial=previous[2] if previous else None)


def _round_family(fam, digits):
    with mp.workdps(digits):
        H = fam.hessenberg
        fam.hessenberg = BandedHessenberg([+v for v in H.a], [+v for v in H.b], [+v for v in H.c],
                                          "numeric", digits, H.label, H.offband)
        fam.B_at_1 = [+v for v in fam.B_at_1]
        fam.q_at_1 = [+v for v in fam.q_at_1]
    return fam
