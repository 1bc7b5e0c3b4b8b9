"""Onset-sequence matching.

Subset matching pairs two sorted onset sequences by mutual nearest
neighbors, classifying query onsets as true/false positives and reference
onsets as detected/missed.  Correlative matching searches over anchor
pairs defining an affine time map from reference beats to query seconds,
scoring each candidate alignment by the Pearson correlation of the matched
pairs times a penalty of L^2/(m*n) for unmatched onsets on either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .peaks import OnsetSequence

__all__ = [
    "MatchResult",
    "SimilarityResult",
    "subset_match",
    "correlative_match",
    "pearson",
]


@dataclass(frozen=True)
class MatchResult:
    """Mutual-nearest alignment of a query against a reference.

    ``matched_entries`` (subset of the query) and ``detected_onsets``
    (subset of the reference) pair up index-for-index; the leftovers are
    counted as false positives and false negatives respectively.
    """

    matched_entries: OnsetSequence
    detected_onsets: OnsetSequence
    false_positives: int
    false_negatives: int

    @property
    def n_matched(self) -> int:
        return len(self.matched_entries)


@dataclass(frozen=True)
class SimilarityResult:
    """Best-scoring alignment of a query against one reference song."""

    score: float
    alpha: float  # time offset, seconds
    beta: float   # scale, seconds per beat
    predicted_onsets: OnsetSequence
    match: MatchResult


def _nearest_indices(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Index of the nearest target for each point; ties break toward the
    earlier (smaller) target."""
    pos = np.searchsorted(targets, points)
    left = np.clip(pos - 1, 0, len(targets) - 1)
    right = np.clip(pos, 0, len(targets) - 1)
    # prefer left on exact distance ties
    take_right = np.abs(targets[right] - points) < np.abs(points - targets[left])
    return np.where(take_right, right, left)


def subset_match(query: OnsetSequence, reference: OnsetSequence) -> MatchResult:
    """Mutual-nearest-neighbor matching of two sorted onset sequences.

    A query onset x is a true positive iff its nearest reference y has x
    as its own nearest query; the symmetric rule classifies reference
    onsets as detected or missed.
    """
    q = query.times
    r = reference.times
    if len(q) == 0 or len(r) == 0:
        raise ValueError("query and reference must be non-empty")

    nearest_ref = _nearest_indices(q, r)
    nearest_query = _nearest_indices(r, q)
    mutual = nearest_query[nearest_ref] == np.arange(len(q))

    matched = q[mutual]
    detected = r[nearest_ref[mutual]]
    return MatchResult(
        matched_entries=OnsetSequence(times=matched, unit=query.unit),
        detected_onsets=OnsetSequence(times=detected, unit=reference.unit),
        false_positives=len(q) - len(matched),
        false_negatives=len(r) - len(matched),
    )


def pearson(a, b) -> float:
    """Pearson product-moment correlation; 0 when either side has zero
    variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    if len(a) < 2:
        raise ValueError("need at least 2 points")
    da = a - a.mean()
    db = b - b.mean()
    va = np.dot(da, da)
    vb = np.dot(db, db)
    if va == 0.0 or vb == 0.0:
        return 0.0
    return float(np.dot(da, db) / math.sqrt(va * vb))


def _cell_score(q: np.ndarray, scaled_ref: np.ndarray,
                query_unit: str) -> tuple[float, MatchResult]:
    result = subset_match(
        OnsetSequence(times=q, unit=query_unit),
        OnsetSequence(times=scaled_ref, unit=query_unit),
    )
    L = result.n_matched
    if L < 2:
        return 0.0, result
    correction = L * L / (len(q) * len(scaled_ref))
    rho = pearson(result.matched_entries.times, result.detected_onsets.times)
    return rho * correction, result


def _correlative_core(q: np.ndarray, r: np.ndarray, query_unit: str):
    """Anchor-pair search assuming len(q) >= len(r).

    Anchors (i, j) propose that reference endpoints r[0], r[-1] land on
    q[i], q[j]; cells with j - i < m - 1 are geometrically infeasible and
    never selected.  Arg-max ties break toward smallest i, then smallest j.
    """
    n, m = len(q), len(r)
    ref_span = r[-1] - r[0]
    best = None
    for i in range(n - m + 1):
        for j in range(max(m - 1, i + m - 1), n):
            beta = (q[j] - q[i]) / ref_span
            alpha = q[i] - beta * r[0]
            scaled = alpha + beta * r
            score, result = _cell_score(q, scaled, query_unit)
            if best is None or score > best[0]:
                best = (score, alpha, beta, result)
    if best is None:
        raise ValueError("no feasible anchor cell")
    return best


def correlative_match(query: OnsetSequence,
                      reference: OnsetSequence) -> SimilarityResult:
    """Best affine alignment of query onsets (seconds) against reference
    onsets (beats), scored by penalized Pearson correlation.

    When the query has fewer onsets than the reference the roles are
    swapped internally and the fitted map is inverted, so the reported
    alpha/beta and predicted onsets stay query-side.
    """
    q = query.times
    r = reference.times
    if len(q) < 2 or len(r) < 2:
        raise ValueError("need at least 2 onsets on each side")

    if len(q) >= len(r):
        score, alpha, beta, result = _correlative_core(q, r, query.unit)
        return SimilarityResult(
            score=score,
            alpha=alpha,
            beta=beta,
            predicted_onsets=result.matched_entries,
            match=result,
        )

    # deficit case: fit beats = alpha' + beta' * seconds, then invert so
    # matched/detected both come back in query-side seconds
    score, alpha_inv, beta_inv, swapped = _correlative_core(
        r, q, reference.unit)
    matched = OnsetSequence(
        times=(swapped.detected_onsets.times - alpha_inv) / beta_inv,
        unit=query.unit,
    )
    detected = OnsetSequence(
        times=(swapped.matched_entries.times - alpha_inv) / beta_inv,
        unit=query.unit,
    )
    result = MatchResult(
        matched_entries=matched,
        detected_onsets=detected,
        false_positives=swapped.false_negatives,
        false_negatives=swapped.false_positives,
    )
    return SimilarityResult(
        score=score,
        alpha=-alpha_inv / beta_inv,
        beta=1.0 / beta_inv,
        predicted_onsets=matched,
        match=result,
    )
