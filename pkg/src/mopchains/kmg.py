"""r-step transition probabilities, by spectral integral and by matrix power."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction

import mpmath
from mpmath import mp

from .classical import TridiagonalChain, chain_measure, op_sequence
from .errors import DomainError, SizingError
from .gaussborel import ChannelMoments, PolynomialFamily, pairing
from .numerics import to_mpf
from .stochastic import UNIFORM_RATIO, StochasticPair

REACH = {"hat": 1, "check": 2}  # largest upward jump of each chain
METHODS = ("integral", "matrix_power", "both")


@dataclass(frozen=True)
class EvolutionQuery:
    n: int
    m: int
    r: int
    chain: str = "hat"
    method: str = "both"

    def __post_init__(self):
        if self.chain not in REACH:
            raise DomainError(f"chain must be 'hat' or 'check', got {self.chain!r}")
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if min(self.n, self.m, self.r) < 0:
            raise DomainError("n, m and r must be nonnegative")

    @property
    def auto_size(self) -> int:
        return max(self.n, self.m) + REACH[self.chain] * self.r + 3

    @property
    def minimal_size(self) -> int:
        # every row visited before the last step must be complete
        return max(self.m + 1, self.n + REACH[self.chain] * self.r + 1)


def _sigma(family: PolynomialFamily, chain: str, normalization: str):
    if normalization == "geometric":
        ratio = UNIFORM_RATIO if chain == "hat" else 1 / UNIFORM_RATIO
        return lambda k: ratio**k
    values = family.B_at_1 if chain == "hat" else family.q_at_1

    def get(k):
        if k >= len(values):
            raise SizingError(f"value at 1 with index {k} is beyond the computed range ({len(values)})")
        return values[k]
    return get


class KmgEvaluator:
    """Spectral representation of the powers of either stochastic chain.

    ``(hatH**r)[n][m] = (B_m(1)/B_n(1)) * integral x**r B_n Q_m`` and
    ``(checkH**r)[n][m] = (q_m/q_n) * integral x**r B_m Q_n`` where the
    integral runs over both weights.  The prefactors are the diagonal
    similarity, so any diagonal normalization can be substituted.
    """

    def __init__(self, family: PolynomialFamily, normalization: str = "oracle", digits: int = 40):
        if family.system is None:
            raise DomainError("the family carries no weight system to integrate against")
        self.family = family
        self.normalization = normalization
        self.digits = digits
        self._cm = None

    def _moments(self, degree):
        if self._cm is None or self._cm.max_power < degree:
            self._cm = ChannelMoments(self.family.system, max(degree, 16), self.digits)
        return self._cm

    def power_entry(self, n, m, r):
        """``(H**r)[n][m]`` of the Hessenberg operator itself."""
        limit = self.family.truncation + 3
        if max(n, m) >= limit:
            raise SizingError(f"index {max(n, m)} is beyond the factorization ({limit})")
        cm = self._moments(r + n + m + 2)
        return pairing(self.family, cm, self.family.typeII_coeffs(n), m, r)

    def probability(self, query: EvolutionQuery):
        n, m, r = query.n, query.m, query.r
        sigma = _sigma(self.family, query.chain, self.normalization)
        with mp.workdps(self.digits):
            if query.chain == "hat":
                core = self.power_entry(n, m, r)
            else:
                core = self.power_entry(m, n, r)
            return to_mpf(sigma(m), self.digits) / to_mpf(sigma(n), self.digits) * core


def kmg_probability(family: PolynomialFamily, query: EvolutionQuery, normalization: str = "oracle",
                    digits: int = 40):
    return KmgEvaluator(family, normalization, digits).probability(query)


def _arith(pair: StochasticPair, chain: str, digits: int):
    """Exact rows when every entry is rational, otherwise a cached mpf copy."""
    rows = pair.matrix(chain)
    if all(isinstance(v, (int, Fraction)) for row in rows for v in row):
        return rows
    cache = pair.__dict__.setdefault("_mpf_cache", {})
    if (chain, digits) not in cache:
        cache[(chain, digits)] = pair.mpf_matrix(chain, digits)
    return cache[(chain, digits)]


def matrix_power_row(pair: StochasticPair, chain: str, n: int, r: int, digits: int = 40):
    """Row ``n`` of ``M**r`` by banded vector propagation; raises if the truncation is too small."""
    need = n + REACH[chain] * r + 1
    if pair.size < need:
        raise SizingError(f"truncation {pair.size} cannot represent {r} steps from state {n} "
                          f"(needs at least {need})")
    with mp.workdps(digits):
        rows = _arith(pair, chain, digits)
        vec = {n: rows[n][n] * 0 + 1}
        for _ in range(r):
            nxt = {}
            for s, w in vec.items():
                for t in pair.band(chain, s):
                    e = rows[s][t]
                    if e:
                        nxt[t] = nxt.get(t, 0) + w * e
            vec = nxt
        return vec


def matrix_power_probability(pair: StochasticPair, query: EvolutionQuery, digits: int = 40):
    if query.m >= pair.size:
        raise SizingError(f"target state {query.m} is outside the truncation ({pair.size})")
    row = matrix_power_row(pair, query.chain, query.n, query.r, digits)
    return row.get(query.m, 0)


@dataclass
class EvolutionResult:
    n: int
    m: int
    r: int
    chain: str
    integral: str | None = None
    matrix_power: str | None = None
    discrepancy: float | None = None

    def to_json(self) -> str:
        return json.dumps({k: v for k, v in asdict(self).items() if v is not None})


def evolve(query: EvolutionQuery, family: PolynomialFamily, pair: StochasticPair | None = None,
           digits: int = 40, evaluator: KmgEvaluator | None = None) -> EvolutionResult:
    """Answer one query with the requested method(s)."""
    res = EvolutionResult(query.n, query.m, query.r, query.chain)
    iv = mv = None
    if query.method in ("integral", "both"):
        evaluator = evaluator or KmgEvaluator(family, pair.normalization if pair else "oracle", digits)
        iv = evaluator.probability(query)
        res.integral = mpmath.nstr(iv, 20)
    if query.method in ("matrix_power", "both"):
        if pair is None:
            raise DomainError("matrix-power evaluation needs a stochastic pair")
        mv = matrix_power_probability(pair, query, digits)
        res.matrix_power = str(mv) if isinstance(mv, (int, Fraction)) else mpmath.nstr(mv, 20)
    if iv is not None and mv is not None:
        with mp.workdps(digits):
            res.discrepancy = float(abs(iv - to_mpf(mv, digits)))
    return res


def load_queries(path_or_text):
    """Queries from a JSON array of ``{"n", "m", "r", "chain"}`` objects."""
    try:
        with open(path_or_text) as fh:
            data = json.load(fh)
    except (OSError, ValueError):
        try:
            data = json.loads(path_or_text)
        except ValueError as exc:
            raise DomainError(f"queries are neither a readable file nor JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DomainError("query file must hold a JSON array")
    return [EvolutionQuery(int(q["n"]), int(q["m"]), int(q["r"]), q.get("chain", "hat"),
                           q.get("method", "both")) for q in data]


# -- birth-death chains -----------------------------------------------------------


def classical_evolution(chain: TridiagonalChain, n: int, m: int, k: int, digits: int = 30):
    """``(P**k)[n][m] = integral x**k P_n P_m dmu / integral P_m**2 dmu``."""
    if min(n, m, k) < 0:
        raise DomainError("n, m and k must be nonnegative")
    nodes = max(k + n + m, 2 * m) // 2 + 2  # exact for both integrands
    rule = chain_measure(chain, nodes, digits + 10)
    top = max(n, m, 1)
    with mp.workdps(digits + 10):
        vals = [op_sequence(chain, top, x) for x in rule.nodes]
        num = mpmath.fsum(w * x**k * v[n] * v[m] for x, w, v in zip(rule.nodes, rule.weights, vals))
        den = mpmath.fsum(w * v[m] ** 2 for w, v in zip(rule.weights, vals))
        if den == 0:
            raise DomainError(f"degenerate query: integral of P_{m}^2 vanishes")
        out = num / den
    with mp.workdps(digits):
        return +out
