"""Tab-separated dataset files: ratings, aspect opinions, and review texts.

Formats (UTF-8, one record per line):
  ratings   user \\t item \\t rating
  opinions  user \\t item \\t aspect \\t polarity
  reviews   user \\t item \\t text      (newlines inside text encoded as \\n)

An optional header line is detected by a non-numeric value in the numeric
column. Malformed lines are skipped with a logged warning carrying the line
number; a missing file is fatal.
"""

from __future__ import annotations

import logging
from collections import Counter
from pathlib import Path
from typing import Optional

from .graph import AspectOpinionRecord, RatingRecord

log = logging.getLogger(__name__)


def _parse_float(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def load_ratings(path, min_user_ratings: int = 0) -> list[RatingRecord]:
    """Parse a ratings file. With min_user_ratings > 0, keep only users having
    at least that many parsed ratings (applied to this file alone)."""
    records: list[RatingRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                log.warning("%s:%d: expected 3 fields, got %d", path, lineno, len(parts))
                continue
            rating = _parse_float(parts[2])
            if rating is None:
                if lineno == 1:
                    continue  # header line
                log.warning("%s:%d: non-numeric rating %r", path, lineno, parts[2])
                continue
            records.append(RatingRecord(parts[0], parts[1], rating))
    if min_user_ratings > 0:
        counts = Counter(rec.user for rec in records)
        records = [rec for rec in records if counts[rec.user] >= min_user_ratings]
    return records


def load_opinions(path) -> list[AspectOpinionRecord]:
    records: list[AspectOpinionRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                log.warning("%s:%d: expected 4 fields, got %d", path, lineno, len(parts))
                continue
            polarity = _parse_float(parts[3])
            if polarity is None:
                if lineno == 1:
                    continue  # header line
                log.warning("%s:%d: non-numeric polarity %r", path, lineno, parts[3])
                continue
            if not parts[2].strip():
                log.warning("%s:%d: empty aspect key", path, lineno)
                continue
            records.append(AspectOpinionRecord(parts[0], parts[1], parts[2], polarity))
    return records


def decode_review_text(text: str) -> str:
    return text.replace("\\n", "\n")


def encode_review_text(text: str) -> str:
    return text.replace("\n", "\\n")


def load_reviews(path) -> dict[tuple[str, str], str]:
    """Review index mapping (user, item) -> text; duplicates keep the last."""
    index: dict[tuple[str, str], str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                log.warning("%s:%d: expected 3 fields, got %d", path, lineno, len(parts))
                continue
            index[(parts[0], parts[1])] = decode_review_text(parts[2])
    return index


def load_dataset(
    ratings_path,
    opinions_path,
    reviews_path=None,
    min_user_ratings: int = 0,
) -> tuple[list[RatingRecord], list[AspectOpinionRecord], dict[tuple[str, str], str]]:
    """Load the full record set for one dataset; the review index is empty
    when no reviews file is given."""
    ratings = load_ratings(ratings_path, min_user_ratings=min_user_ratings)
    opinions = load_opinions(opinions_path)
    reviews = load_reviews(reviews_path) if reviews_path else {}
    return ratings, opinions, reviews


def save_ratings(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(f"{rec.user}\t{rec.item}\t{rec.rating!r}\n")


def save_opinions(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(f"{rec.user}\t{rec.item}\t{rec.aspect}\t{rec.polarity!r}\n")


def save_reviews(index: dict[tuple[str, str], str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (user, item), text in index.items():
            fh.write(f"{user}\t{item}\t{encode_review_text(text)}\n")


def synonym_lexicon(path) -> dict[str, str]:
    """variant \\t canonical pairs for aspect highlighting."""
    lexicon: dict[str, str] = {}
    p = Path(path)
    with open(p, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                log.warning("%s:%d: expected 2 fields, got %d", p, lineno, len(parts))
                continue
            lexicon[parts[0].strip().lower()] = parts[1].strip().lower()
    return lexicon
