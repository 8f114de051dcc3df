"""The synthetic-database releasing mechanism: per-row randomized response.

The mechanism draws a synthetic database Y from an input database x with
probability proportional to exp(-eps * d(x, y)), where d is the row-level
Hamming distance. Normalizing over D^n factorizes the distribution across
rows: each output row independently keeps the input row with probability
1/g(eps) and otherwise moves to one of the other 2**l - 1 codes uniformly,
where

    g(eps) = 1 + (2**l - 1) * exp(-eps).

Sampling therefore costs two draws per row (a keep/flip Bernoulli and, on
flip, an alternative index), never materializing the 2**l-entry row
distribution. All probability arithmetic for exact pmf evaluation is done in
log space; the normalizer n*log(g) grows linearly in n and would underflow
the plain pmf at realistic sizes.

``verify_dp`` is a brute-force check of the privacy guarantee: it enumerates
every neighbor pair and every output and reports the largest log-probability
ratio, which equals eps exactly for this mechanism.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    Database,
    DataUniverse,
    DimensionMismatchError,
    RandomSource,
    ValidationError,
    all_databases_matrix,
    _check_compatible,
)

try:  # optional acceleration for the exhaustive DP verifier
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        import numba

    # the default TBB layer warns on older TBB builds; omp is always quiet
    numba.config.THREADING_LAYER = "omp"
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    _HAVE_NUMBA = False

# exp(-eps) is below 1e-304 here; the release is an exact identity and the
# estimator corrections vanish.
IDENTITY_EPSILON = 700.0

VERIFY_BIT_CAP = 12


@dataclass(frozen=True)
class MechanismParams:
    """Privacy level together with its derived per-row constants."""

    epsilon: float
    universe: DataUniverse

    def __post_init__(self):
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0.0:
            raise ValidationError(f"epsilon must be a finite nonnegative real, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def is_identity(self) -> bool:
        return self.epsilon >= IDENTITY_EPSILON

    @property
    def g(self) -> float:
        """g(eps) = 1 + (2**l - 1) exp(-eps); lies in [1, 2**l]."""
        return 1.0 + (self.universe.cardinality - 1) * math.exp(-self.epsilon)

    @property
    def log_g(self) -> float:
        return math.log1p((self.universe.cardinality - 1) * math.exp(-self.epsilon))

    @property
    def keep_prob(self) -> float:
        """Probability that a row survives unchanged; in [2**-l, 1]."""
        return 1.0 / self.g

    @property
    def flip_prob(self) -> float:
        """Probability mass assigned to each of the 2**l - 1 alternatives."""
        return math.exp(-self.epsilon) / self.g


def sample_rows(rows: np.ndarray, params: MechanismParams, gen: np.random.Generator, trials: int) -> np.ndarray:
    """Draw ``trials`` independent synthetic row vectors for one input.

    Returns an array of shape (trials, n). Each entry keeps the input row
    with probability 1/g and otherwise flips to a uniform alternative; the
    alternative index is shifted past the input code so that exactly the
    2**l - 1 other values are reachable.
    """
    if params.is_identity:
        return np.broadcast_to(rows, (trials, rows.size)).copy()
    card = params.universe.cardinality
    keep = gen.random((trials, rows.size)) < params.keep_prob
    alt = gen.integers(0, card - 1, size=(trials, rows.size), dtype=np.int64)
    alt += alt >= rows
    return np.where(keep, rows, alt)


def sample_synthetic(x: Database, params: MechanismParams, rng: RandomSource) -> Database:
    """Release one synthetic database for x at privacy level params.epsilon."""
    if x.universe != params.universe:
        raise DimensionMismatchError("database universe does not match mechanism parameters")
    if params.is_identity:
        return Database(x.universe, x.rows)
    out = sample_rows(x.rows, params, rng.generator(), 1)[0]
    return Database(x.universe, out.astype(x.rows.dtype, copy=False))


def exact_log_pmf(x: Database, y: Database, params: MechanismParams) -> float:
    """log Pr[Y = y | x] = -eps * d(x, y) - n * log g(eps)."""
    if x.universe != params.universe:
        raise DimensionMismatchError("database universe does not match mechanism parameters")
    _check_compatible(x, y)
    d = int(np.count_nonzero(x.rows != y.rows))
    return -params.epsilon * d - x.n * params.log_g


def log_pmf_all_outputs(x: Database, params: MechanismParams, rows_matrix: np.ndarray | None = None) -> np.ndarray:
    """Vector of log Pr[Y = y | x] over every output code, in code order.

    ``rows_matrix`` may pass a precomputed ``all_databases_matrix`` to share
    the enumeration across calls.
    """
    if x.universe != params.universe:
        raise DimensionMismatchError("database universe does not match mechanism parameters")
    if rows_matrix is None:
        rows_matrix = all_databases_matrix(x.universe, x.n)
    dists = (rows_matrix != x.rows).sum(axis=1)
    return -params.epsilon * dists - x.n * params.log_g


if _HAVE_NUMBA:

    @numba.njit(cache=True, parallel=True)
    def _nb_distance_matrix(rows):  # pragma: no cover - compiled
        m, n = rows.shape
        out = np.zeros((m, m), dtype=np.int8)
        for i in numba.prange(m):
            for j in range(i + 1, m):
                d = 0
                for r in range(n):
                    if rows[i, r] != rows[j, r]:
                        d += 1
                out[i, j] = d
                out[j, i] = d
        return out

    @numba.njit(cache=True, parallel=True)
    def _nb_edge_chebyshev(dist, heads, tails):  # pragma: no cover - compiled
        best = 0
        for e in numba.prange(heads.size):
            a = dist[heads[e]]
            b = dist[tails[e]]
            local = 0
            for y in range(a.size):
                v = int(a[y]) - int(b[y])
                if v < 0:
                    v = -v
                if v > local:
                    local = v
            best = max(best, local)
        return best


def _np_distance_matrix(rows: np.ndarray) -> np.ndarray:
    m = rows.shape[0]
    out = np.empty((m, m), dtype=np.int8)
    block = max(1, (1 << 22) // max(m, 1))
    for s in range(0, m, block):
        out[s : s + block] = (rows[s : s + block, None, :] != rows[None, :, :]).sum(
            axis=-1, dtype=np.int8
        )
    return out


def _np_edge_chebyshev(dist: np.ndarray, heads: np.ndarray, tails: np.ndarray) -> int:
    best = 0
    block = max(1, (1 << 24) // dist.shape[0])
    for s in range(0, heads.size, block):
        diff = dist[heads[s : s + block]].astype(np.int16)
        diff -= dist[tails[s : s + block]]
        best = max(best, int(np.abs(diff, out=diff).max()))
    return best


@functools.lru_cache(maxsize=2)
def _pairwise_distances(l: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distance matrix over all databases plus its neighbor-pair edge list
    (heads < tails); cached because it is epsilon-independent."""
    rows = all_databases_matrix(DataUniverse(l), n, bit_cap=VERIFY_BIT_CAP)
    if _HAVE_NUMBA:
        dist = _nb_distance_matrix(rows)
    else:
        dist = _np_distance_matrix(rows)
    heads, tails = np.nonzero(dist == 1)
    forward = heads < tails
    return dist, heads[forward], tails[forward]


def verify_dp(universe: DataUniverse, n: int, params: MechanismParams) -> float:
    """Largest |log p(y|x) - log p(y|x')| over all neighbor pairs and outputs.

    Exhaustive over every triple (x, x', y) with d(x, x') = 1; requires
    n*l <= 12. The common normalizer -n*log(g) cancels identically inside
    each difference, so the scan runs on the integer distance matrix and the
    single multiplication by eps happens at the end; no approximation is
    involved. For n = 1 all distances are 0/1, so the per-pair maximum over
    outputs is 1 exactly when the two distance-matrix rows differ anywhere;
    grouping identical rows decides that for every pair without the cubic
    scan.
    """
    if universe != params.universe:
        raise DimensionMismatchError("universe does not match mechanism parameters")
    dist, heads, tails = _pairwise_distances(universe.l, n)
    if n == 1:
        groups: dict[bytes, int] = {}
        gid = np.empty(dist.shape[0], dtype=np.int64)
        for i in range(dist.shape[0]):
            gid[i] = groups.setdefault(dist[i].tobytes(), len(groups))
        max_diff = 1 if bool((gid[heads] != gid[tails]).any()) else 0
    elif _HAVE_NUMBA:
        max_diff = int(_nb_edge_chebyshev(dist, heads, tails))
    else:
        max_diff = _np_edge_chebyshev(dist, heads, tails)
    return params.epsilon * max_diff
