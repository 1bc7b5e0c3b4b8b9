import numpy as np
import pytest

from humsearch.match import (
    MatchResult,
    correlative_match,
    pearson,
    subset_match,
)
from humsearch.peaks import OnsetSequence


def seq(times, unit="seconds"):
    return OnsetSequence(times=np.asarray(times, dtype=np.float64), unit=unit)


def brute_force_subset_match(q, r):
    """Quadratic mutual-nearest oracle with ties toward earlier time."""

    def nearest(x, pool):
        best = 0
        for i in range(1, len(pool)):
            if abs(pool[i] - x) < abs(pool[best] - x):
                best = i
        return best

    pairs = []
    for i, x in enumerate(q):
        j = nearest(x, r)
        if nearest(r[j], q) == i:
            pairs.append((x, r[j]))
    matched = [p[0] for p in pairs]
    detected = [p[1] for p in pairs]
    return matched, detected, len(q) - len(pairs), len(r) - len(pairs)


def brute_force_correlative(q, r):
    """Independent re-implementation of the anchor-cell search."""
    n, m = len(q), len(r)
    span = r[-1] - r[0]
    best = None
    for i in range(n - m + 1):
        for j in range(max(m - 1, i + m - 1), n):
            beta = (q[j] - q[i]) / span
            alpha = q[i] - beta * r[0]
            scaled = alpha + beta * np.asarray(r)
            mq, md, fp, fn = brute_force_subset_match(list(q), list(scaled))
            L = len(mq)
            if L < 2:
                score = 0.0
            else:
                rho = np.corrcoef(mq, md)[0, 1]
                score = (0.0 if not np.isfinite(rho)
                         else rho * L * L / (n * m))
            if best is None or score > best[0]:
                best = (score, alpha, beta)
    return best


class TestPearson:
    def test_identity(self):
        assert pearson([1, 2, 3], [1, 2, 3]) == 1.0

    def test_negation(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == -1.0

    def test_known_value(self):
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(0.981, abs=1e-3)

    def test_zero_variance(self):
        assert pearson([1, 1, 1], [1, 2, 3]) == 0.0

    def test_errors(self):
        with pytest.raises(ValueError):
            pearson([1], [1])
        with pytest.raises(ValueError):
            pearson([1, 2], [1, 2, 3])

    def test_agrees_with_numpy(self, rng):
        a = rng.normal(size=50)
        b = rng.normal(size=50)
        assert pearson(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1],
                                              rel=1e-12)


class TestSubsetMatch:
    def test_identical_sequences(self):
        result = subset_match(seq([1, 2, 3]), seq([1, 2, 3]))
        assert result.false_positives == 0
        assert result.false_negatives == 0
        assert result.matched_entries.times.tolist() == [1, 2, 3]

    def test_extra_query_onset(self):
        result = subset_match(seq([1.0, 2.0, 2.9]), seq([1.0, 3.0]))
        assert result.matched_entries.times.tolist() == [1.0, 2.9]
        assert result.detected_onsets.times.tolist() == [1.0, 3.0]
        assert result.false_positives == 1
        assert result.false_negatives == 0

    def test_tie_breaks_toward_earlier(self):
        result = subset_match(seq([5.0]), seq([1.0, 9.0]))
        assert result.matched_entries.times.tolist() == [5.0]
        assert result.detected_onsets.times.tolist() == [1.0]
        assert result.false_positives == 0
        assert result.false_negatives == 1

    def test_role_swap_symmetry(self, rng):
        for _ in range(50):
            q = np.sort(rng.uniform(0, 10, rng.integers(1, 8)))
            r = np.sort(rng.uniform(0, 10, rng.integers(1, 8)))
            if (len(np.unique(q)) < len(q)) or (len(np.unique(r)) < len(r)):
                continue
            ab = subset_match(seq(q), seq(r))
            ba = subset_match(seq(r), seq(q))
            assert ab.false_positives == ba.false_negatives
            assert ab.false_negatives == ba.false_positives
            # the pairing itself need not be identical under swapping when
            # distance ties are present, but lengths always agree
            assert ab.n_matched == ba.n_matched

    def test_matches_brute_force_oracle(self, rng):
        for _ in range(300):
            q = np.sort(rng.uniform(0, 10, rng.integers(1, 11)))
            r = np.sort(rng.uniform(0, 10, rng.integers(1, 11)))
            result = subset_match(seq(q), seq(r))
            mq, md, fp, fn = brute_force_subset_match(q.tolist(), r.tolist())
            assert result.matched_entries.times.tolist() == mq
            assert result.detected_onsets.times.tolist() == md
            assert result.false_positives == fp
            assert result.false_negatives == fn

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            subset_match(seq([]), seq([1.0]))


class TestCorrelativeMatch:
    def test_identical_is_perfect(self):
        r = seq([0, 1, 2, 4], unit="beats")
        q = seq([0, 1, 2, 4])
        result = correlative_match(q, r)
        assert result.score == pytest.approx(1.0, rel=1e-12)
        assert result.beta == pytest.approx(1.0, rel=1e-12)
        assert result.alpha == pytest.approx(0.0, abs=1e-12)

    def test_affine_recovered_exactly(self):
        beats = np.array([0.0, 1.0, 2.5, 4.0, 6.0])
        q = seq(2.5 * beats + 7.0)
        result = correlative_match(q, seq(beats, unit="beats"))
        assert result.score == pytest.approx(1.0, rel=1e-12)
        assert result.beta == pytest.approx(2.5, rel=1e-12)
        assert result.alpha == pytest.approx(7.0, rel=1e-12)

    def test_spurious_onset_pays_correction_factor(self):
        beats = np.array([0.0, 1.0, 2.0, 4.0])
        warped = 0.4 * beats + 1.0
        with_extra = np.sort(np.append(warped, 1.63))
        result = correlative_match(seq(with_extra), seq(beats, unit="beats"))
        m = len(beats)
        assert result.score == pytest.approx(m / (m + 1), rel=1e-9)

    def test_affine_invariance_of_query(self, rng):
        beats = np.sort(rng.uniform(0, 8, 5))
        q = np.sort(rng.uniform(0, 8, 7))
        base = correlative_match(seq(q), seq(beats, unit="beats"))
        moved = correlative_match(seq(3.25 * q + 11.0),
                                  seq(beats, unit="beats"))
        assert moved.score == pytest.approx(base.score, rel=1e-9, abs=1e-12)

    def test_score_bounded_by_correction(self, rng):
        for _ in range(30):
            q = np.sort(rng.uniform(0, 10, rng.integers(2, 9)))
            r = np.sort(rng.uniform(0, 10, rng.integers(2, 9)))
            result = correlative_match(seq(q), seq(r, unit="beats"))
            match = result.match
            cap = match.n_matched ** 2 / (len(q) * len(r))
            assert result.score <= cap + 1e-12

    def test_matches_naive_cell_oracle(self, rng):
        for _ in range(100):
            n = int(rng.integers(4, 9))
            m = int(rng.integers(2, 5))
            q = np.sort(rng.uniform(0, 10, n))
            r = np.sort(rng.uniform(0, 10, m))
            result = correlative_match(seq(q), seq(r, unit="beats"))
            score, alpha, beta = brute_force_correlative(q, r)
            assert result.score == pytest.approx(score, rel=1e-9, abs=1e-12)

    def test_deficit_case_swaps_and_inverts(self):
        beats = np.array([0.0, 1.0, 2.0, 3.0, 5.0])
        full_query = 0.5 * beats + 2.0
        short_query = full_query[[0, 2, 4]]
        result = correlative_match(seq(short_query), seq(beats, unit="beats"))
        assert result.beta == pytest.approx(0.5, rel=1e-9)
        assert result.alpha == pytest.approx(2.0, rel=1e-9)
        # 3 of 5 reference onsets matched perfectly
        assert result.score == pytest.approx(9 / 15, rel=1e-9)
        assert result.predicted_onsets.unit == "seconds"
        assert result.predicted_onsets.times == pytest.approx(short_query)

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            correlative_match(seq([1.0]), seq([0, 1], unit="beats"))
