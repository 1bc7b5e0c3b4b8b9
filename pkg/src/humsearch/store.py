"""Song onset database persistence.

The database is a single UTF-8 JSON document: a top-level array of
``{"id": str, "title": str, "onsets_beats": [numbers]}`` objects.  Onsets
are stored in beat units, so a record is tempo-free; the affine search in
correlative matching recovers the tempo at query time.  Loading never
silently repairs a violation - every invariant failure is an error.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .peaks import OnsetSequence

__all__ = ["SongRecord", "Database", "DatabaseError", "db_load", "db_save"]


class DatabaseError(ValueError):
    """The database document violates the format or an invariant."""


@dataclass(frozen=True)
class SongRecord:
    id: str
    title: str
    onsets_beats: OnsetSequence

    def __post_init__(self):
        if not self.id:
            raise DatabaseError("record id must be non-empty")
        if self.onsets_beats.unit != "beats":
            raise DatabaseError(f"record {self.id!r}: onsets must be in beats")
        if len(self.onsets_beats) < 2:
            raise DatabaseError(
                f"record {self.id!r}: needs at least 2 onsets")


@dataclass(frozen=True)
class Database:
    records: tuple[SongRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise DatabaseError(f"duplicate id {rec.id!r}")
            seen.add(rec.id)

    def __len__(self) -> int:
        return len(self.records)

    def get(self, song_id: str) -> SongRecord | None:
        for rec in self.records:
            if rec.id == song_id:
                return rec
        return None


def _parse_record(obj, index: int) -> SongRecord:
    where = f"record #{index}"
    if not isinstance(obj, dict):
        raise DatabaseError(f"{where}: expected an object")
    for key in ("id", "title", "onsets_beats"):
        if key not in obj:
            raise DatabaseError(f"{where}: missing key {key!r}")
    song_id = obj["id"]
    title = obj["title"]
    onsets = obj["onsets_beats"]
    if not isinstance(song_id, str) or not isinstance(title, str):
        raise DatabaseError(f"{where}: id and title must be strings")
    if (not isinstance(onsets, list)
            or not all(isinstance(x, (int, float)) for x in onsets)):
        raise DatabaseError(f"{where} ({song_id!r}): onsets_beats must be "
                            "an array of numbers")
    times = np.asarray(onsets, dtype=np.float64)
    if len(times) < 2:
        raise DatabaseError(f"{where} ({song_id!r}): needs at least 2 onsets")
    if not np.all(np.diff(times) > 0):
        raise DatabaseError(f"{where} ({song_id!r}): non-increasing onsets")
    return SongRecord(
        id=song_id,
        title=title,
        onsets_beats=OnsetSequence(times=times, unit="beats"),
    )


def db_load(path) -> Database:
    """Load and fully validate a song database."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatabaseError(f"parse error: {exc}") from exc
    if not isinstance(doc, list):
        raise DatabaseError("top-level document must be an array")
    return Database(records=tuple(
        _parse_record(obj, i) for i, obj in enumerate(doc)))


def db_save(db: Database, path) -> None:
    """Write the database as pretty-printed JSON (whole-file replace)."""
    doc = [
        {
            "id": rec.id,
            "title": rec.title,
            "onsets_beats": [float(t) for t in rec.onsets_beats.times],
        }
        for rec in db.records
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
