"""Statistical queries: normalized sums of bounded per-row functions.

A statistical query over databases of size n is specified by row functions
phi_1 .. phi_n (arbitrary bounded functions of a single row) and answers

    q(x) = (1 / sum_i c_i) * sum_i phi_i(x_i),

where c_i = max(phi_i) - min(phi_i). The normalization makes the spread of
q over all databases exactly 1, which puts every query on the same distortion
scale. Row functions are stored as dense value tables over the 2**l row
codes: the per-row extrema, the centering constant and the debiasing
coefficients of the companion estimators all need exact sums and extrema
over the whole row domain, and tables make those one vector operation.

Distinct tables are stored once and shared between rows ("heterogeneity" is
the number of distinct row functions; 1 means the query is a linear query).
"""

from __future__ import annotations

import json

import numpy as np

from .core import (
    Database,
    DataUniverse,
    DimensionMismatchError,
    RandomSource,
    ValidationError,
)


class StatisticalQuery:
    """A statistical query with deduplicated dense row-function tables.

    Parameters
    ----------
    universe:
        Row domain the tables are defined over.
    tables:
        Array (k, 2**l) of row-function value tables.
    assignment:
        Integer array (n,) mapping each row to its table.
    label:
        Optional identifier used in reports.
    """

    __slots__ = (
        "universe",
        "tables",
        "assignment",
        "label",
        "a",
        "b",
        "c",
        "c_sum",
        "centering",
        "heterogeneity",
    )

    def __init__(self, universe: DataUniverse, tables, assignment, label: str = ""):
        tables = np.asarray(tables, dtype=np.float64)
        assignment = np.asarray(assignment)
        if tables.ndim != 2 or tables.shape[1] != universe.cardinality:
            raise ValidationError(
                f"row-function tables must have shape (k, {universe.cardinality})"
            )
        if not np.isfinite(tables).all():
            raise ValidationError("row-function tables must be finite")
        if assignment.ndim != 1 or assignment.size == 0:
            raise ValidationError("assignment must be a nonempty 1-d index vector")
        if not np.issubdtype(assignment.dtype, np.integer):
            raise ValidationError("assignment must hold integer table indices")
        if assignment.min() < 0 or assignment.max() >= tables.shape[0]:
            raise ValidationError("assignment indexes a missing table")

        # drop unused tables, then merge duplicates; evaluation is invariant
        # to this re-encoding
        used = np.unique(assignment)
        tables = tables[used]
        assignment = np.searchsorted(used, assignment)
        tables, inverse = np.unique(tables, axis=0, return_inverse=True)
        assignment = inverse[assignment].astype(np.int64)

        row_min = tables.min(axis=1)
        row_max = tables.max(axis=1)
        if not (row_max > row_min).all():
            raise ValidationError("constant row functions are not allowed (need max > min)")

        counts = np.bincount(assignment, minlength=tables.shape[0]).astype(np.float64)
        c_sum = float(counts @ (row_max - row_min))

        object.__setattr__(self, "universe", universe)
        tables.setflags(write=False)
        assignment.setflags(write=False)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "a", float(row_min.min()))
        object.__setattr__(self, "b", float(row_max.max()))
        object.__setattr__(self, "c", float((row_max - row_min).min()))
        object.__setattr__(self, "c_sum", c_sum)
        object.__setattr__(self, "centering", float(counts @ tables.sum(axis=1)) / c_sum)
        object.__setattr__(self, "heterogeneity", int(tables.shape[0]))

    def __setattr__(self, name, value):
        raise AttributeError("StatisticalQuery is immutable")

    @property
    def n(self) -> int:
        return int(self.assignment.size)

    def _check(self, x: Database) -> None:
        if x.universe != self.universe:
            raise DimensionMismatchError("database universe does not match the query")
        if x.n != self.n:
            raise DimensionMismatchError(
                f"query is defined for n={self.n} rows, database has {x.n}"
            )

    def evaluate(self, x: Database) -> float:
        """(1 / sum_i c_i) * sum_i phi_i(x_i)."""
        self._check(x)
        return float(self.tables[self.assignment, x.rows].sum()) / self.c_sum

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """Vectorized evaluate over a (m, n) matrix of row codes."""
        return self.tables[self.assignment[None, :], rows].sum(axis=1) / self.c_sum

    def value_range(self) -> tuple[float, float]:
        """[sum_i a_i, sum_i b_i] / sum_i c_i — the exact span of q; width 1."""
        counts = np.bincount(self.assignment, minlength=self.tables.shape[0]).astype(np.float64)
        lo = float(counts @ self.tables.min(axis=1)) / self.c_sum
        hi = float(counts @ self.tables.max(axis=1)) / self.c_sum
        return lo, hi


def centering_constant(q: StatisticalQuery) -> float:
    """C = (1 / sum_i c_i) * sum_i sum_v phi_i(v); for a k-conjunct predicate
    query this is 2**(l-k)."""
    return q.centering


def make_predicate_query(universe: DataUniverse, n: int, conjunct_bits) -> StatisticalQuery:
    """Counting query for the fraction of rows with all given attribute bits set."""
    bits = sorted(set(int(b) for b in conjunct_bits))
    if not bits:
        raise ValidationError("a predicate query needs at least one conjunct attribute")
    if bits[0] < 0 or bits[-1] >= universe.l:
        raise ValidationError(f"conjunct attribute indices must lie in [0, {universe.l})")
    if n < 1:
        raise ValidationError("n must be >= 1")
    codes = np.arange(universe.cardinality)
    table = np.ones(universe.cardinality)
    for b in bits:
        table *= (codes >> b) & 1
    return StatisticalQuery(
        universe,
        table[None, :],
        np.zeros(n, dtype=np.int64),
        label=f"predicate(bits={bits})",
    )


def make_hamming_query(z: Database) -> StatisticalQuery:
    """The query x -> d(x, z) / n for a reference database z."""
    card = z.universe.cardinality
    values, inverse = np.unique(z.rows, return_inverse=True)
    tables = np.ones((values.size, card))
    tables[np.arange(values.size), values] = 0.0
    return StatisticalQuery(z.universe, tables, inverse.astype(np.int64), label="hamming")


def generate_random_query(
    universe: DataUniverse, n: int, heterogeneity: int, rng: RandomSource
) -> StatisticalQuery:
    """Random query with the given number of distinct row functions.

    Each of the ``heterogeneity`` tables has i.i.d. uniform [0,1] entries and
    is divided by its spread (max - min), so every c_i is exactly 1. Table j
    is assigned to the j-th contiguous block of n/heterogeneity rows, which
    is why heterogeneity must divide n.
    """
    if not 1 <= heterogeneity <= n:
        raise ValidationError(f"heterogeneity must lie in [1, {n}], got {heterogeneity}")
    if n % heterogeneity != 0:
        raise ValidationError(
            f"heterogeneity {heterogeneity} must divide n={n} (contiguous equal blocks)"
        )
    gen = rng.generator()
    tables = gen.random((heterogeneity, universe.cardinality))
    spread = tables.max(axis=1, keepdims=True) - tables.min(axis=1, keepdims=True)
    tables /= spread
    assignment = np.repeat(np.arange(heterogeneity, dtype=np.int64), n // heterogeneity)
    return StatisticalQuery(universe, tables, assignment, label=f"random(h={heterogeneity})")


def query_to_dict(q: StatisticalQuery) -> dict:
    """Serializable description in the explicit-tables schema."""
    return {
        "type": "tables",
        "l": q.universe.l,
        "tables": q.tables.tolist(),
        "assignment": q.assignment.tolist(),
    }


def query_from_dict(spec: dict) -> StatisticalQuery:
    """Build a query from its file representation.

    Supported shapes::

        {"type": "predicate", "l": 3, "n": 100, "conjunct_bits": [0, 2]}
        {"type": "hamming", "l": 2, "z": [0, 3, 1]}
        {"type": "tables", "l": 1, "tables": [[0.0, 1.0]], "assignment": [0, 0]}
    """
    try:
        kind = spec["type"]
    except (TypeError, KeyError):
        raise ValidationError("query definition needs a 'type' field") from None
    if kind == "predicate":
        universe = DataUniverse(int(spec["l"]))
        return make_predicate_query(universe, int(spec["n"]), spec["conjunct_bits"])
    if kind == "hamming":
        universe = DataUniverse(int(spec["l"]))
        z = Database(universe, np.asarray(spec["z"], dtype=np.int64))
        return make_hamming_query(z)
    if kind == "tables":
        universe = DataUniverse(int(spec["l"]))
        return StatisticalQuery(
            universe,
            np.asarray(spec["tables"], dtype=np.float64),
            np.asarray(spec["assignment"], dtype=np.int64),
            label="tables",
        )
    raise ValidationError(f"unknown query type {kind!r}")


def load_query(path) -> StatisticalQuery:
    with open(path, "r", encoding="utf-8") as fh:
        return query_from_dict(json.load(fh))
