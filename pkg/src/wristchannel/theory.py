"""Probabilistic model of the attack's benefit on exam outcomes.

The model compares a beneficiary who relies entirely on answers relayed by
the gesture channel against the same student answering on their own (the
"clean option").  Per question the relayed answer is correct with

    beta = p * alpha + (1 - p) * (1 - alpha) / (m - 1)

where ``p`` is the answer writer's probability of knowing the answer,
``alpha`` the gesture-recognition accuracy, and ``m`` the number of answer
options.  Exam-level pass probabilities are binomial tails; the boost
``mu`` is their ratio.  Tails are computed in log space because the
interesting regimes underflow float64 by tens of orders of magnitude.

``simulate_exam`` realizes the per-question mechanics directly (know the
answer / channel delivers it / channel error lands on the right option by
chance) and serves as an independent Monte Carlo check of the closed form.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._rng import splitmix64
from .errors import DegenerateBaseline, InvalidOptions, InvalidParams

LN10 = math.log(10.0)
GRADE_PASS_MARKS = {"A": 90, "C": 70}  # out of n = 100

_SIM_CHUNK = 20_000


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise InvalidParams(f"{name} must be in [0, 1], got {value!r}")
    return value


def _check_options(m: int) -> int:
    if int(m) != m or m < 2:
        raise InvalidOptions(f"answer options per question must be an integer >= 2, got {m!r}")
    return int(m)


@dataclass(frozen=True)
class TheoryParams:
    """Parameter tuple driving all model computations.

    p: probability the answer writer knows a question's answer
    alpha: gesture-recognition accuracy
    m: answer options per question (>= 2)
    theta: clean-option per-question success probability
    n: number of questions
    r: pass mark (minimum correct answers), 1 <= r <= n
    """

    p: float
    alpha: float
    m: int
    theta: float
    n: int
    r: int

    def __post_init__(self):
        _check_prob("p", self.p)
        _check_prob("alpha", self.alpha)
        _check_options(self.m)
        _check_prob("theta", self.theta)
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParams(f"n must be an integer >= 1, got {self.n!r}")
        if int(self.r) != self.r or not (1 <= self.r <= self.n):
            raise InvalidParams(f"r must be an integer in 1..n, got {self.r!r}")


def beta(p: float, alpha: float, m: int) -> float:
    """Per-question success probability of the relayed-answer channel."""
    p = _check_prob("p", p)
    alpha = _check_prob("alpha", alpha)
    m = _check_options(m)
    return p * alpha + (1.0 - p) * (1.0 - alpha) / (m - 1)


def _check_tail_args(n: int, r: int, q: float):
    if int(n) != n or n < 1:
        raise InvalidParams(f"n must be an integer >= 1, got {n!r}")
    if int(r) != r or not (1 <= r <= n):
        raise InvalidParams(f"r must be an integer in 1..n, got {r!r}")
    _check_prob("q", q)


def log_binom_tail(n: int, r: int, q: float) -> float:
    """Natural log of P(X >= r) for X ~ Bin(n, q).

    Stable log-sum-exp over log pmf terms built from log-gamma binomial
    coefficients; exact -inf when q == 0 (and r >= 1), exact 0.0 when the
    tail is certain.
    """
    _check_tail_args(n, r, q)
    if q == 0.0:
        return -math.inf
    if q == 1.0:
        return 0.0
    k = np.arange(r, n + 1, dtype=np.float64)
    log_comb = (math.lgamma(n + 1)
                - np.array([math.lgamma(v + 1) for v in k])
                - np.array([math.lgamma(n - v + 1) for v in k]))
    log_terms = log_comb + k * math.log(q) + (n - k) * math.log1p(-q)
    hi = float(np.max(log_terms))
    s = hi + math.log(float(np.sum(np.exp(log_terms - hi))))
    return min(s, 0.0)


def binom_tail(n: int, r: int, q: float) -> float:
    """P(X >= r) for X ~ Bin(n, q); underflows to 0.0 for extreme tails."""
    lt = log_binom_tail(n, r, q)
    return math.exp(lt) if lt > -math.inf else 0.0


def log10_binom_tail(n: int, r: int, q: float) -> float:
    """Base-10 log of the binomial tail; exact far below float underflow."""
    return log_binom_tail(n, r, q) / LN10


def log10_mu(params: TheoryParams) -> float:
    """log10 of the pass-probability boost ratio.

    Computed as a difference of log tails, never via the ratio of possibly
    underflowed probabilities.
    """
    if params.theta == 0.0:
        raise DegenerateBaseline("clean-option success probability is zero")
    b = beta(params.p, params.alpha, params.m)
    num = log10_binom_tail(params.n, params.r, b)
    den = log10_binom_tail(params.n, params.r, params.theta)
    return num - den


def mu(params: TheoryParams) -> float:
    """Boost ratio itself; may overflow to inf in extreme regimes."""
    lg = log10_mu(params)
    try:
        return 10.0 ** lg
    except OverflowError:
        return math.inf


def theta_threshold(p: float, alpha: float, m: int) -> float:
    """Clean-option skill above which not cheating wins; equals beta."""
    return beta(p, alpha, m)


def prefers_attack(theta: float, p: float, alpha: float, m: int) -> bool:
    """True iff the relayed channel beats the clean option (strictly).

    Indifference (theta == threshold) resolves to the clean option.
    Independent of n and r.
    """
    theta = _check_prob("theta", theta)
    return theta < theta_threshold(p, alpha, m)


def dtheta_dalpha(p: float, m: int) -> float:
    """Partial derivative of the preference threshold in alpha: (p*m-1)/(m-1)."""
    p = _check_prob("p", p)
    m = _check_options(m)
    return (p * m - 1.0) / (m - 1)


@dataclass
class SurfaceGrid:
    """Rectangular (p, alpha) grid of one model quantity.

    ``values[i, j]`` corresponds to ``p_values[i]`` and ``alpha_values[j]``.
    ``meta`` records the fixed parameters and what the cells hold.
    """

    p_values: np.ndarray
    alpha_values: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self, path, sidecar_path=None):
        """Write long-form CSV (p, alpha, value) plus a JSON metadata sidecar."""
        path = str(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["p", "alpha", "value"])
            for i, pv in enumerate(self.p_values):
                for j, av in enumerate(self.alpha_values):
                    w.writerow([f"{pv:.12g}", f"{av:.12g}", f"{self.values[i, j]:.12g}"])
        sidecar = str(sidecar_path) if sidecar_path else path + ".meta.json"
        with open(sidecar, "w") as fh:
            json.dump(
                {
                    "schema_version": 1,
                    "grid": {
                        "p": [float(v) for v in self.p_values],
                        "alpha": [float(v) for v in self.alpha_values],
                    },
                    **self.meta,
                },
                fh,
                indent=2,
                sort_keys=True,
            )
            fh.write("\n")


# Grid cells stay finite even where the attack's success probability is
# exactly zero (p and alpha both at a corner): those cells floor at this
# sentinel instead of -inf.
SURFACE_LOG10_FLOOR = -9999.0


def surface_grid(p_axis, alpha_axis, m: int = 4, theta: float | None = None,
                 n: int = 100, r: int = 90) -> SurfaceGrid:
    """log10 boost surface over a (p, alpha) grid.

    ``theta`` defaults to 1/m, the guessing baseline.  Pass marks 90 and 70
    on n=100 correspond to the "A" and "C" grade targets.
    """
    m = _check_options(m)
    if theta is None:
        theta = 1.0 / m
    p_axis = np.asarray(p_axis, dtype=np.float64)
    alpha_axis = np.asarray(alpha_axis, dtype=np.float64)
    values = np.empty((p_axis.size, alpha_axis.size))
    den = log10_binom_tail(n, r, theta)
    for i, p in enumerate(p_axis):
        for j, a in enumerate(alpha_axis):
            num = log10_binom_tail(n, r, beta(p, a, m))
            values[i, j] = max(num - den, SURFACE_LOG10_FLOOR)
    return SurfaceGrid(p_axis, alpha_axis, values,
                       meta={"quantity": "log10_mu", "m": m, "theta": theta, "n": n, "r": r})


def threshold_surface_grid(p_axis, alpha_axis, m: int = 4) -> SurfaceGrid:
    """Preference-threshold surface theta_th(p, alpha); a hyperbolic paraboloid."""
    m = _check_options(m)
    p_axis = np.asarray(p_axis, dtype=np.float64)
    alpha_axis = np.asarray(alpha_axis, dtype=np.float64)
    values = np.empty((p_axis.size, alpha_axis.size))
    for i, p in enumerate(p_axis):
        for j, a in enumerate(alpha_axis):
            values[i, j] = theta_threshold(p, a, m)
    return SurfaceGrid(p_axis, alpha_axis, values,
                       meta={"quantity": "theta_threshold", "m": m})


@dataclass(frozen=True)
class SimulationResult:
    """Monte Carlo estimate of the pass probability under the attack."""

    estimate: float
    stderr: float
    trials: int
    seed: int
    correct_total: int  # pooled correct answers, for per-question rate checks

    @property
    def question_rate(self) -> float:
        return self.correct_total / (self.trials * self._n_questions)

    _n_questions: int = 1

    def report(self) -> dict:
        return {
            "estimate": self.estimate,
            "standard_error": self.stderr,
            "trials": self.trials,
            "seed": self.seed,
        }


def simulate_exam(params: TheoryParams, trials: int, seed: int) -> SimulationResult:
    """Monte Carlo exam outcomes under the relayed-answer channel.

    Per question the writer knows the answer with probability ``p``; a known
    answer survives recognition with probability ``alpha``; an unknown one
    is rescued by a recognition error landing on the true option with
    probability ``(1-alpha)/(m-1)``.  Counter-based randomness keyed by
    (seed, trial, question) makes the result independent of chunking.
    """
    if int(trials) != trials or trials < 1:
        raise InvalidParams(f"trials must be an integer >= 1, got {trials!r}")
    q_wrong = (1.0 - params.alpha) / (params.m - 1)
    seed_mixed = splitmix64(int(seed) & ((1 << 64) - 1))
    passed = 0
    correct = 0
    done = 0
    while done < trials:
        chunk = min(_SIM_CHUNK, trials - done)
        cp, cc = kernels.exam_trials(seed_mixed, done, chunk, params.n,
                                     params.r, params.p, params.alpha, q_wrong)
        passed += cp
        correct += cc
        done += chunk
    est = passed / trials
    se = math.sqrt(est * (1.0 - est) / trials)
    return SimulationResult(estimate=est, stderr=se, trials=int(trials),
                            seed=int(seed), correct_total=correct,
                            _n_questions=params.n)
