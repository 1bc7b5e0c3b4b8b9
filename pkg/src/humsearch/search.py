"""Rank database songs against a query onset sequence."""

from __future__ import annotations

from dataclasses import dataclass, field

from .match import correlative_match
from .peaks import OnsetSequence
from .store import Database

__all__ = ["RankedEntry", "RankedResult", "rank"]


@dataclass(frozen=True)
class RankedEntry:
    song_id: str
    title: str
    score: float
    alpha: float
    beta: float
    within_closeness: bool


@dataclass(frozen=True)
class RankedResult:
    """Top candidates sorted by similarity, ties broken by ascending id."""

    entries: tuple[RankedEntry, ...]
    skipped: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def rank(db: Database, query: OnsetSequence, top_k: int = 5,
         closeness: float = 0.05) -> RankedResult:
    """Score the query against every record and return the best ``top_k``.

    Entries whose score comes within ``closeness`` of the maximum are
    flagged as credible alternatives.  Records that cannot be scored are
    skipped and reported, not fatal.
    """
    if len(db) == 0:
        raise ValueError("empty database")
    if len(query) < 2:
        raise ValueError("query needs at least 2 onsets")
    if top_k < 1:
        raise ValueError("top_k must be positive")
    if closeness < 0:
        raise ValueError("closeness must be non-negative")

    scored = []
    skipped = []
    for rec in db.records:
        try:
            sim = correlative_match(query, rec.onsets_beats)
        except ValueError as exc:
            skipped.append((rec.id, str(exc)))
            continue
        scored.append((rec, sim))
    if not scored:
        raise ValueError("no scorable records in database")

    scored.sort(key=lambda pair: (-pair[1].score, pair[0].id))
    best = scored[0][1].score
    entries = tuple(
        RankedEntry(
            song_id=rec.id,
            title=rec.title,
            score=sim.score,
            alpha=sim.alpha,
            beta=sim.beta,
            within_closeness=sim.score >= best - closeness,
        )
        for rec, sim in scored[:top_k]
    )
    return RankedResult(entries=entries, skipped=tuple(skipped))
