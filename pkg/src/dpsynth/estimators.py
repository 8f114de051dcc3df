"""Companion estimators for the release mechanism, and distortion measurement.

Evaluating a query directly on the synthetic database is biased: every row
survives only with probability 1/g. The unbiased companion estimator inverts
that row-level channel in aggregate,

    est_u(y) = g/(1 - e^-eps) * q(y) - e^-eps/(1 - e^-eps) * C,

where C is the query's centering constant (the mean table mass picked up by
uniform flips). It is exactly unbiased for every input database but may
return values no real database can produce; ``project_proper`` maps the raw
value onto achievable answers, at most doubling the pointwise error.

Distortion is measured two ways: ``exact_distortion`` enumerates every
output (n*l <= 12) and is the oracle-grade ground truth; -
``measure_distortion`` is the Monte Carlo path for realistic sizes. Both
report the applicable closed-form bound alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as bounds_mod
from .core import (
    Database,
    DimensionMismatchError,
    EnumerationTooLargeError,
    EstimatorUndefinedError,
    RandomSource,
    ValidationError,
    all_databases_matrix,
)
from .mechanism import MechanismParams, log_pmf_all_outputs, sample_rows
from .queries import StatisticalQuery

EXACT_BIT_CAP = 12
ACHIEVABLE_CAP = 10**6
_ENUM_ACHIEVABLE_BIT_CAP = 16
_TRIAL_CHUNK = 4096  # fixed chunk size keeps Monte Carlo draws scheduling-independent

ESTIMATORS = ("unbiased", "proper")
MEASURES = ("squared", "absolute")
PROJECTIONS = ("interval_clamp", "exact_range")


@dataclass(frozen=True)
class DistortionReport:
    """Empirical distortion of one (query, database, estimator) triple."""

    query_id: str
    distortion_measure: str
    empirical_mean: float
    empirical_stderr: float
    sample_count: int
    analytic_bound: float
    exact_value: float | None = None

    @property
    def flagged(self) -> bool:
        """True when the Monte Carlo mean is further than 6 standard errors
        from the enumerated exact value (suspicious, not fatal)."""
        if self.exact_value is None:
            return False
        return abs(self.empirical_mean - self.exact_value) > 6.0 * self.empirical_stderr


def _affine_coefficients(params: MechanismParams) -> tuple[float, float]:
    """(scale, shift) with est_u = scale * q(y) - shift * C.

    At the identity boundary (eps >= 700) e^-eps is treated as exact zero so
    the estimator returns q(y) unchanged.
    """
    if params.epsilon == 0.0:
        raise EstimatorUndefinedError(
            "the companion estimators are undefined at epsilon = 0 (zero denominator)"
        )
    if params.is_identity:
        return 1.0, 0.0
    one_minus = -math.expm1(-params.epsilon)
    return params.g / one_minus, math.exp(-params.epsilon) / one_minus


def estimate_unbiased(q: StatisticalQuery, y: Database, params: MechanismParams) -> float:
    """Debiased answer from a synthetic database; exactly unbiased under the
    mechanism for every input database."""
    if params.universe != q.universe:
        raise DimensionMismatchError("mechanism parameters and query use different universes")
    scale, shift = _affine_coefficients(params)
    return scale * q.evaluate(y) - shift * q.centering


def achievable_values(q: StatisticalQuery, cap: int = ACHIEVABLE_CAP) -> np.ndarray:
    """Sorted array of every value q can take on a real database.

    Linear queries are handled by dynamic programming over row counts per
    table value; general heterogeneous queries fall back to exhaustive
    enumeration when n*l is small and error out otherwise (their achievable
    set is generically exponential).
    """
    n = q.n
    if q.heterogeneity == 1:
        # states are (partial sum, rows used); each distinct table value may
        # be assigned to any number of remaining rows, and the last value
        # must absorb the rest
        values = np.unique(q.tables[0])
        states = {(0.0, 0)}
        for idx, v in enumerate(values):
            last = idx == values.size - 1
            nxt = set()
            for s, used in states:
                if last:
                    nxt.add((s + float(v) * (n - used), n))
                else:
                    for m in range(0, n - used + 1):
                        nxt.add((s + float(v) * m, used + m))
            if len(nxt) > cap:
                raise EnumerationTooLargeError(
                    f"achievable-value set exceeds the cap of {cap} distinct sums"
                )
            states = nxt
        return np.unique(np.array([s for s, used in states if used == n]) / q.c_sum)
    bits = n * q.universe.l
    if bits > _ENUM_ACHIEVABLE_BIT_CAP:
        raise EnumerationTooLargeError(
            "exact achievable set of a heterogeneous query needs enumeration; "
            f"n*l = {bits} exceeds {_ENUM_ACHIEVABLE_BIT_CAP}"
        )
    rows = all_databases_matrix(q.universe, n, bit_cap=_ENUM_ACHIEVABLE_BIT_CAP)
    return np.unique(q.evaluate_rows(rows))


def project_proper(q: StatisticalQuery, raw: float, strategy: str = "interval_clamp") -> float:
    """Map a raw estimate onto answers a real database could produce.

    interval_clamp restricts to the exact value interval of q (contains every
    achievable answer, so the factor-2 pointwise guarantee is preserved);
    exact_range returns the nearest achievable value, ties broken toward the
    smaller one.
    """
    if strategy == "interval_clamp":
        lo, hi = q.value_range()
        return min(max(raw, lo), hi)
    if strategy == "exact_range":
        vals = achievable_values(q)
        idx = int(np.searchsorted(vals, raw))
        if idx == 0:
            return float(vals[0])
        if idx == vals.size:
            return float(vals[-1])
        left, right = float(vals[idx - 1]), float(vals[idx])
        # tie toward the smaller value
        return left if raw - left <= right - raw else right
    raise ValidationError(f"unknown projection strategy {strategy!r}")


def _project_vector(q: StatisticalQuery, raw: np.ndarray, strategy: str) -> np.ndarray:
    if strategy == "interval_clamp":
        lo, hi = q.value_range()
        return np.clip(raw, lo, hi)
    vals = achievable_values(q)
    idx = np.searchsorted(vals, raw)
    idx = np.clip(idx, 1, vals.size - 1)
    left = vals[idx - 1]
    right = vals[idx]
    out = np.where(raw - left <= right - raw, left, right)
    out[raw <= vals[0]] = vals[0]
    out[raw >= vals[-1]] = vals[-1]
    return out


def estimate_cut(y: Database, s_set, t_set, epsilon: float) -> float:
    """Debiased directed-cut count from a synthetic edge-indicator database.

    The database must encode a graph: l = 1 and n = |V|^2 with row (i, j) at
    index i*|V| + j. Negative answers (and answers above |S||T|) are legal
    outputs of the unbiased form; clamp to [0, |S||T|] separately if a proper
    value is needed.
    """
    if y.universe.l != 1:
        raise ValidationError("a graph database must have l = 1 (edge indicators)")
    v = math.isqrt(y.n)
    if v * v != y.n:
        raise ValidationError(f"edge-indicator database size {y.n} is not a perfect square")
    s = sorted(set(int(i) for i in s_set))
    t = sorted(set(int(j) for j in t_set))
    if s and t and set(s) & set(t):
        raise ValidationError("cut query needs disjoint vertex sets")
    if (s and (s[0] < 0 or s[-1] >= v)) or (t and (t[0] < 0 or t[-1] >= v)):
        raise ValidationError(f"vertex ids must lie in [0, {v})")
    if not (math.isfinite(epsilon) and epsilon > 0.0):
        raise EstimatorUndefinedError("the cut estimator needs epsilon > 0")
    if not s or not t:
        return 0.0
    raw = float(y.rows.reshape(v, v)[np.ix_(s, t)].sum())
    e = math.exp(-epsilon)
    if epsilon >= 700.0:
        return raw
    return (1.0 + e) / (1.0 - e) * raw - e / (1.0 - e) * (len(s) * len(t))


def _distortion_bound(q: StatisticalQuery, n: int, params: MechanismParams, estimator: str, measure: str) -> float:
    inputs = bounds_mod.BoundInputs(
        n=n, l=q.universe.l, epsilon=min(params.epsilon, 700.0), a=q.a, b=q.b, c=q.c
    )
    proper = estimator == "proper"
    if measure == "squared":
        return bounds_mod.upper_bound_squared(inputs, proper=proper)
    return bounds_mod.upper_bound_absolute(inputs, proper=proper)


def _check_enums(estimator: str, measure: str, projection: str) -> None:
    if estimator not in ESTIMATORS:
        raise ValidationError(f"estimator must be one of {ESTIMATORS}, got {estimator!r}")
    if measure not in MEASURES:
        raise ValidationError(f"measure must be one of {MEASURES}, got {measure!r}")
    if projection not in PROJECTIONS:
        raise ValidationError(f"projection must be one of {PROJECTIONS}, got {projection!r}")


def exact_distortion(
    q: StatisticalQuery,
    x: Database,
    params: MechanismParams,
    estimator: str = "unbiased",
    measure: str = "squared",
    projection: str = "interval_clamp",
) -> float:
    """Expected distortion by full enumeration of the output distribution."""
    _check_enums(estimator, measure, projection)
    q._check(x)
    bits = x.n * x.universe.l
    if bits > EXACT_BIT_CAP:
        raise EnumerationTooLargeError(
            f"exact distortion enumerates 2^{bits} outputs; the cap is 2^{EXACT_BIT_CAP}"
        )
    scale, shift = _affine_coefficients(params)
    if params.is_identity:
        # the release is an exact identity: Y = x with probability 1
        est = scale * q.evaluate(x) - shift * q.centering
        if estimator == "proper":
            est = project_proper(q, est, projection)
        err = est - q.evaluate(x)
        return err * err if measure == "squared" else abs(err)
    rows = all_databases_matrix(x.universe, x.n, bit_cap=EXACT_BIT_CAP)
    probs = np.exp(log_pmf_all_outputs(x, params, rows_matrix=rows))
    est = scale * q.evaluate_rows(rows) - shift * q.centering
    if estimator == "proper":
        est = _project_vector(q, est, projection)
    err = est - q.evaluate(x)
    rho = err * err if measure == "squared" else np.abs(err)
    return float(probs @ rho)


def measure_distortion(
    q: StatisticalQuery,
    x: Database,
    params: MechanismParams,
    estimator: str = "unbiased",
    measure: str = "squared",
    trials: int = 1000,
    rng: RandomSource | None = None,
    projection: str = "interval_clamp",
    with_exact: bool = False,
) -> DistortionReport:
    """Monte Carlo distortion of the chosen estimator at one database.

    Releases ``trials`` independent synthetic databases, evaluates the
    estimator on each and averages the distortion. The mean is accumulated
    with exact (fsum) summation, so it is reproducible to the last bit for a
    given RandomSource regardless of how the internal chunks are scheduled.
    """
    _check_enums(estimator, measure, projection)
    if rng is None:
        raise ValidationError("measure_distortion needs an explicit RandomSource")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    q._check(x)
    scale, shift = _affine_coefficients(params)
    qx = q.evaluate(x)
    gen = rng.generator()
    values = np.empty(trials)
    for start in range(0, trials, _TRIAL_CHUNK):
        count = min(_TRIAL_CHUNK, trials - start)
        rows = sample_rows(x.rows, params, gen, count)
        est = scale * q.evaluate_rows(rows) - shift * q.centering
        if estimator == "proper":
            est = _project_vector(q, est, projection)
        err = est - qx
        values[start : start + count] = err * err if measure == "squared" else np.abs(err)
    mean = math.fsum(values) / trials
    if trials > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = float("inf")
    exact = None
    if with_exact:
        exact = exact_distortion(q, x, params, estimator, measure, projection)
    return DistortionReport(
        query_id=q.label or "query",
        distortion_measure=measure,
        empirical_mean=mean,
        empirical_stderr=stderr,
        sample_count=trials,
        analytic_bound=_distortion_bound(q, x.n, params, estimator, measure),
        exact_value=exact,
    )
