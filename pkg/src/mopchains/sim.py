"""Monte Carlo trajectories of a stochastic pair.

Reproducibility: trajectory ``i`` draws its uniforms from a Philox4x64-10
stream keyed by ``(seed, i)`` with the counter starting at zero, so results
do not depend on batching or on the order trajectories are simulated in.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SizingError
from .kmg import REACH
from .stochastic import StochasticPair

KILLED = -1
PRNG = "numpy Philox4x64-10, key=(seed, trajectory), Generator.random doubles"


@dataclass(frozen=True)
class SimConfig:
    chain: str
    start: int
    steps: int
    trajectories: int
    seed: int = 0
    truncation: int | None = None

    def __post_init__(self):
        if self.chain not in REACH:
            raise DomainError(f"chain must be 'hat' or 'check', got {self.chain!r}")
        if self.steps < 0 or self.trajectories < 1 or self.start < 0:
            raise DomainError("need steps >= 0, trajectories >= 1 and start >= 0")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 bits")
        if self.truncation is None:
            object.__setattr__(self, "truncation", self.start + REACH[self.chain] * self.steps + 3)
        elif self.truncation < self.required_size:
            raise SizingError(f"truncation {self.truncation} lets trajectories reach the edge "
                              f"(needs {self.required_size})")

    @property
    def required_size(self) -> int:
        return self.start + REACH[self.chain] * self.steps + 1


@dataclass
class SimReport:
    config: SimConfig
    visit_counts: np.ndarray  # [t, s]: trajectories in state s after t steps
    killed: np.ndarray  # killed[t]: trajectories absorbed by row deficits by step t
    final_states: np.ndarray = field(repr=False)
    returned: int = 0

    @property
    def return_frequency(self) -> float:
        return self.returned / self.config.trajectories

    def conserved(self) -> bool:
        return bool(np.all(self.visit_counts.sum(axis=1) + self.killed == self.config.trajectories))

    @property
    def rstep_estimates(self) -> dict:
        """``{m: (p, stderr)}`` for every state reached at the final step."""
        return {m: self.estimate(m) for m in np.flatnonzero(self.visit_counts[-1]).tolist()}

    def estimate(self, m: int):
        """Empirical ``P(X_steps = m)`` and its binomial standard error."""
        T = self.config.trajectories
        p = self.visit_counts[-1, m] / T if m < self.visit_counts.shape[1] else 0.0
        return p, math.sqrt(max(p * (1 - p), 0.0) / T)

    def to_json(self) -> dict:
        return {
            "config": dict(self.config.__dict__),
            "prng": PRNG,
            "return_frequency": self.return_frequency,
            "killed": self.killed.tolist(),
            "visit_counts": self.visit_counts.tolist(),
            "rstep_estimates": {str(m): {"p": p, "stderr": se} for m, (p, se) in self.rstep_estimates.items()},
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        N = self.visit_counts.shape[1]
        w.writerow(["t"] + [f"s{k}" for k in range(N)] + ["killed"])
        for t, row in enumerate(self.visit_counts):
            w.writerow([t] + row.tolist() + [int(self.killed[t])])
        return buf.getvalue()


def trajectory_uniforms(seed: int, index: int, steps: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=[seed, index]))
    return gen.random(steps)


def _transition_table(pair: StochasticPair, chain: str):
    """Cumulative band probabilities and offsets for every state of the truncation."""
    M = pair.float_matrix(chain)
    N = pair.size
    lo = -2 if chain == "hat" else -1
    offsets = np.arange(lo, lo + 4)
    probs = np.zeros((N, 4))
    for s in range(N):
        for j, off in enumerate(offsets):
            t = s + off
            if 0 <= t < N:
                probs[s, j] = M[s, t]
    cdf = np.cumsum(probs, axis=1)
    # rows that are exactly stochastic must not leak mass through rounding
    sums = pair.row_sums.get(chain, {})
    for s, total in sums.items():
        if total == 1 or abs(float(total) - 1.0) < 1e-12:
            cdf[s, -1] = 1.0
    return offsets, cdf


def simulate(pair: StochasticPair, config: SimConfig) -> SimReport:
    if pair.size < config.truncation:
        raise SizingError(f"pair truncation {pair.size} is below the configured {config.truncation}")
    offsets, cdf = _transition_table(pair, config.chain)
    T, S, N = config.trajectories, config.steps, pair.size
    U = np.empty((T, S))
    for i in range(T):
        U[i] = trajectory_uniforms(config.seed, i, S)
    state = np.full(T, config.start, dtype=np.int64)
    visits = np.zeros((S + 1, N), dtype=np.int64)
    killed = np.zeros(S + 1, dtype=np.int64)
    visits[0, config.start] = T  # steps=0 leaves all mass here
    ever_back = np.zeros(T, dtype=bool)
    for t in range(S):
        alive = state != KILLED
        s = state[alive]
        u = U[alive, t]
        choice = (u[:, None] >= cdf[s]).sum(axis=1)
        dead = choice >= 4
        nxt = np.where(dead, KILLED, s + offsets[np.minimum(choice, 3)])
        if np.any(nxt >= N):
            raise SizingError("a trajectory left the truncation")  # excluded by the size check
        state[alive] = nxt
        ever_back |= state == config.start
        live = state[state != KILLED]
        visits[t + 1] = np.bincount(live, minlength=N)
        killed[t + 1] = T - live.size
    return SimReport(config, visits, killed, state, int(ever_back.sum()))


@dataclass
class Comparison:
    m: int
    exact: float
    empirical: float
    stderr: float
    z: float

    @property
    def flagged(self) -> bool:
        return abs(self.z) > 4


def empirical_vs_kmg(report: SimReport, exact: dict) -> list:
    """z-scores of the final-step frequencies against exact probabilities ``{m: p}``."""
    T = report.config.trajectories
    out = []
    for m, p in sorted(exact.items()):
        p = float(p)
        phat, _ = report.estimate(m)
        sd = math.sqrt(p * (1 - p) / T) if 0 < p < 1 else 0.0
        if sd == 0.0:
            z = 0.0 if phat == p else math.inf
        else:
            z = (phat - p) / sd
        out.append(Comparison(m, p, phat, sd, z))
    return out
