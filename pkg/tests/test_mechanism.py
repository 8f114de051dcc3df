import math

import numpy as np
import pytest
import scipy.stats

from dpsynth.core import (
    Database,
    DataUniverse,
    DimensionMismatchError,
    EnumerationTooLargeError,
    RandomSource,
    all_databases_matrix,
)
from dpsynth.mechanism import (
    MechanismParams,
    exact_log_pmf,
    log_pmf_all_outputs,
    sample_synthetic,
    verify_dp,
)

LN3_4 = -0.28768207245178093  # ln(3/4), frozen from a 30-digit evaluation


def db(l, rows):
    return Database(DataUniverse(l), np.asarray(rows, dtype=np.int64))


class TestParams:
    def test_derived_constants(self):
        p = MechanismParams(math.log(3.0), DataUniverse(1))
        assert p.g == pytest.approx(4.0 / 3.0, abs=1e-15)
        assert p.keep_prob == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("l", [1, 2, 5])
    @pytest.mark.parametrize("eps", [0.0, 0.25, 1.0, 5.0, 700.0])
    def test_row_distribution_normalizes(self, l, eps):
        p = MechanismParams(eps, DataUniverse(l))
        card = 2**l
        assert 1.0 <= p.g <= card
        assert 2.0**-l <= p.keep_prob <= 1.0
        total = p.keep_prob + (card - 1) * p.flip_prob
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_epsilon_validated(self):
        with pytest.raises(Exception):
            MechanismParams(-0.5, DataUniverse(1))
        with pytest.raises(Exception):
            MechanismParams(float("nan"), DataUniverse(1))


class TestSampler:
    def test_identity_at_huge_epsilon(self):
        x = db(3, [0, 5, 7, 2, 2])
        y = sample_synthetic(x, MechanismParams(700.0, DataUniverse(3)), RandomSource(1))
        assert y == x

    def test_universe_mismatch(self):
        x = db(1, [0, 1])
        with pytest.raises(DimensionMismatchError):
            sample_synthetic(x, MechanismParams(1.0, DataUniverse(2)), RandomSource(0))

    def test_flip_rate_matches_keep_prob(self):
        # l=1, eps=ln 3: keep probability 3/4, so one flip in four rows
        n = 10**6
        x = db(1, np.zeros(n, dtype=np.int64))
        p = MechanismParams(math.log(3.0), DataUniverse(1))
        y = sample_synthetic(x, p, RandomSource(2718))
        rate = float(np.mean(y.rows != x.rows))
        assert abs(rate - 0.25) < 0.002

    def test_uniform_output_at_zero_epsilon(self):
        # eps=0, l=2: every code equally likely regardless of the input row
        n = 10**6
        x = db(2, np.full(n, 3, dtype=np.int64))
        y = sample_synthetic(x, MechanismParams(0.0, DataUniverse(2)), RandomSource(9))
        counts = np.bincount(y.rows, minlength=4) / n
        assert np.abs(counts - 0.25).max() < 0.002

    def test_replay_reproduces_rows(self):
        x = db(2, [0, 1, 2, 3] * 10)
        p = MechanismParams(0.5, DataUniverse(2))
        a = sample_synthetic(x, p, RandomSource(5, 3))
        b = sample_synthetic(x, p, RandomSource(5, 3))
        assert a == b

    def test_row_independence_chi_square(self):
        # empirical joint of (Y_1, Y_2) factorizes at significance 1e-3
        n_samples = 10**5
        x = db(1, [0, 1])
        p = MechanismParams(1.0, DataUniverse(1))
        gen = RandomSource(77).generator()
        from dpsynth.mechanism import sample_rows

        ys = sample_rows(x.rows, p, gen, n_samples)
        joint = np.zeros((2, 2))
        for a in (0, 1):
            for b in (0, 1):
                joint[a, b] = np.count_nonzero((ys[:, 0] == a) & (ys[:, 1] == b))
        marg0 = joint.sum(axis=1) / n_samples
        marg1 = joint.sum(axis=0) / n_samples
        expected = np.outer(marg0, marg1) * n_samples
        stat = ((joint - expected) ** 2 / expected).sum()
        p_value = scipy.stats.chi2.sf(stat, df=1)
        assert p_value > 1e-3


class TestExactLogPmf:
    def test_zero_distance(self):
        x = db(2, [0, 1, 2])
        p = MechanismParams(1.3, DataUniverse(2))
        assert exact_log_pmf(x, x, p) == pytest.approx(-3 * p.log_g, abs=1e-14)

    def test_hand_value(self):
        x = db(1, [1])
        p = MechanismParams(math.log(3.0), DataUniverse(1))
        assert exact_log_pmf(x, x, p) == pytest.approx(LN3_4, abs=1e-14)

    @pytest.mark.parametrize("l,n", [(1, 2), (1, 6), (2, 3), (3, 2), (2, 6), (1, 12)])
    @pytest.mark.parametrize("eps", [0.0, 0.25, 1.0, 3.0])
    def test_normalization(self, l, n, eps):
        u = DataUniverse(l)
        gen = RandomSource(n * 100 + l).generator()
        x = Database(u, gen.integers(0, u.cardinality, size=n))
        p = MechanismParams(eps, u)
        total = float(np.exp(log_pmf_all_outputs(x, p)).sum())
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_matches_scalar_op(self):
        u = DataUniverse(2)
        x = db(2, [0, 3])
        p = MechanismParams(0.7, u)
        rows = all_databases_matrix(u, 2)
        vec = log_pmf_all_outputs(x, p)
        for code in (0, 5, 12, 15):
            y = Database(u, rows[code])
            assert vec[code] == pytest.approx(exact_log_pmf(x, y, p), abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            exact_log_pmf(db(1, [0]), db(1, [0, 1]), MechanismParams(1.0, DataUniverse(1)))


class TestVerifyDp:
    def test_zero_epsilon(self):
        assert verify_dp(DataUniverse(1), 3, MechanismParams(0.0, DataUniverse(1))) == 0.0

    def test_known_values(self):
        assert verify_dp(DataUniverse(1), 2, MechanismParams(1.0, DataUniverse(1))) == pytest.approx(
            1.0, abs=1e-12
        )
        assert verify_dp(DataUniverse(2), 1, MechanismParams(0.5, DataUniverse(2))) == pytest.approx(
            0.5, abs=1e-12
        )

    @pytest.mark.parametrize("l,n", [(1, 1), (1, 4), (2, 2), (3, 1), (2, 4), (4, 2), (6, 1)])
    @pytest.mark.parametrize("eps", [0.25, 1.0, 2.0])
    def test_budget_met_with_equality(self, l, n, eps):
        u = DataUniverse(l)
        ratio = verify_dp(u, n, MechanismParams(eps, u))
        assert abs(ratio - eps) <= 1e-12
        assert ratio <= eps + 1e-12

    def test_cap(self):
        u = DataUniverse(4)
        with pytest.raises(EnumerationTooLargeError):
            verify_dp(u, 4, MechanismParams(1.0, u))


class TestVerifierFallback:
    @pytest.mark.parametrize("l,n", [(1, 3), (2, 2), (3, 1)])
    def test_numpy_path_matches_accelerated_path(self, l, n):
        from dpsynth.mechanism import (
            _np_distance_matrix,
            _np_edge_chebyshev,
            _pairwise_distances,
        )

        dist, heads, tails = _pairwise_distances(l, n)
        rows = all_databases_matrix(DataUniverse(l), n)
        np_dist = _np_distance_matrix(rows)
        assert np.array_equal(dist, np_dist)
        assert _np_edge_chebyshev(np_dist, heads, tails) == 1


class TestSamplerMatchesPmf:
    @pytest.mark.parametrize(
        "l,n,trials",
        [(1, 2, 10**6), (2, 2, 10**6), (3, 2, 2 * 10**6), (2, 4, 4 * 10**6)],
    )
    def test_total_variation(self, l, n, trials):
        u = DataUniverse(l)
        gen_x = RandomSource(l * 17 + n).generator()
        x = Database(u, gen_x.integers(0, u.cardinality, size=n))
        p = MechanismParams(1.0, u)
        from dpsynth.mechanism import sample_rows

        ys = sample_rows(x.rows, p, RandomSource(31, l).generator(), trials)
        codes = np.zeros(trials, dtype=np.int64)
        for i in range(n):
            codes |= ys[:, i] << (l * i)
        counts = np.bincount(codes, minlength=2 ** (n * l))
        exact = np.exp(log_pmf_all_outputs(x, p))
        tv = 0.5 * float(np.abs(counts / trials - exact).sum())
        assert tv <= 5e-3
