"""Raw slider ratings to per-material fingerprints.

Pipeline order: Z-score within each (participant, attribute) group, drop
raters whose per-attribute ratings correlate negatively with the
pre-exclusion consensus, average to a (material, attribute) mean table, then
min-max rescale each attribute column onto [-1, 1].  Also provides the
inter-rater agreement statistic (Fleiss' kappa) and the frequency-times-rank
attribute importance score.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDataWarning, InvalidInputError
from .schema import Fingerprint, N_ATTRIBUTES, SCHEMA_VERSION
from .similarity import pearson


@dataclass(frozen=True)
class RawRating:
    """One slider response on the raw scale (e.g. 0..100)."""

    participant_id: str
    material_id: str
    attribute_id: int
    value: float
    trial_index: int | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.attribute_id <= N_ATTRIBUTES:
            raise InvalidInputError(f"attribute_id out of range: {self.attribute_id}")
        if not math.isfinite(self.value):
            raise InvalidInputError("rating value must be finite")


@dataclass(frozen=True)
class ExclusionReport:
    """Raters removed per attribute, with the offending correlation."""

    excluded: tuple[tuple[str, int, float], ...]
    retained_count: int  # rating rows kept after exclusion

    def to_dict(self) -> dict:
        return {
            "excluded": [
                {"participant_id": p, "attribute_id": a, "correlation": c}
                for p, a, c in self.excluded
            ],
            "retained_count": self.retained_count,
        }


@dataclass(frozen=True)
class ImportanceEntry:
    attribute_name: str
    frequency: float
    mean_rank: float
    importance: float


def zscore_per_participant(ratings: Sequence[RawRating]) -> list[RawRating]:
    """Z-score values within each (participant, attribute) group.

    Uses the sample standard deviation (ddof=1).  A constant-valued (or
    single-rating) group cannot be normalized; it is passed through as
    all-zeros with a DegenerateDataWarning.  Output order matches input.
    """
    groups: dict[tuple[str, int], list[int]] = defaultdict(list)
    for i, r in enumerate(ratings):
        groups[(r.participant_id, r.attribute_id)].append(i)

    out: list[RawRating | None] = [None] * len(ratings)
    for (pid, aid), idxs in groups.items():
        vals = np.array([ratings[i].value for i in idxs], dtype=np.float64)
        std = vals.std(ddof=1) if vals.size >= 2 else 0.0
        if vals.size < 2 or std == 0.0:
            warnings.warn(
                f"constant rating group (participant={pid!r}, attribute={aid}); "
                "passing through as zeros",
                DegenerateDataWarning,
                stacklevel=2,
            )
            normed = np.zeros_like(vals)
        else:
            normed = (vals - vals.mean()) / std
        for i, v in zip(idxs, normed):
            r = ratings[i]
            out[i] = RawRating(r.participant_id, r.material_id, r.attribute_id, float(v), r.trial_index)
    return [r for r in out if r is not None]


def exclude_raters(
    ratings: Sequence[RawRating],
) -> tuple[list[RawRating], ExclusionReport]:
    """Drop raters negatively correlated with the per-attribute consensus.

    For each attribute, the consensus is the per-material mean over all
    participants computed before any exclusion; a participant whose Pearson
    correlation with it is negative is removed for that attribute.  Single
    pass, no re-iteration.  Attributes with fewer than two participants are
    skipped with a warning.
    """
    by_attr: dict[int, list[RawRating]] = defaultdict(list)
    for r in ratings:
        by_attr[r.attribute_id].append(r)

    excluded: list[tuple[str, int, float]] = []
    drop: set[tuple[str, int]] = set()
    for aid in sorted(by_attr):
        rows = by_attr[aid]
        participants = sorted({r.participant_id for r in rows})
        if len(participants) < 2:
            warnings.warn(
                f"attribute {aid} has fewer than 2 participants; exclusion skipped",
                DegenerateDataWarning,
                stacklevel=2,
            )
            continue
        # Per-material consensus mean across all rating rows (pre-exclusion).
        sums: dict[str, float] = defaultdict(float)
        counts: dict[str, int] = defaultdict(int)
        for r in rows:
            sums[r.material_id] += r.value
            counts[r.material_id] += 1
        consensus = {m: sums[m] / counts[m] for m in sums}

        per_participant: dict[str, dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
        for r in rows:
            per_participant[r.participant_id][r.material_id].append(r.value)
        for pid in participants:
            own = per_participant[pid]
            materials = sorted(own)
            if len(materials) < 2:
                continue  # correlation undefined; keep the rater
            mine = [float(np.mean(own[m])) for m in materials]
            cons = [consensus[m] for m in materials]
            corr = pearson(mine, cons)
            if corr < 0.0:
                excluded.append((pid, aid, corr))
                drop.add((pid, aid))

    filtered = [r for r in ratings if (r.participant_id, r.attribute_id) not in drop]
    report = ExclusionReport(excluded=tuple(excluded), retained_count=len(filtered))
    return filtered, report


@dataclass
class RatingTable:
    """Per-(material, attribute) mean ratings with standard errors.

    Cells with no ratings are reported missing (NaN mean, count 0), never
    imputed.
    """

    material_ids: list[str]
    means: np.ndarray  # (M, 16)
    stderrs: np.ndarray  # (M, 16)
    counts: np.ndarray  # (M, 16) int

    def missing_cells(self) -> list[tuple[str, int]]:
        rows, cols = np.nonzero(self.counts == 0)
        return [(self.material_ids[r], int(c) + 1) for r, c in zip(rows, cols)]


def aggregate(ratings: Sequence[RawRating]) -> RatingTable:
    """Arithmetic mean and standard error per (material, attribute) cell.

    Standard error is the sample standard deviation (ddof=1) over sqrt(n);
    a single-rating cell has stderr 0.
    """
    if not ratings:
        raise InvalidInputError("aggregate requires at least one rating")
    material_ids = sorted({r.material_id for r in ratings})
    row_of = {m: i for i, m in enumerate(material_ids)}
    cells: dict[tuple[int, int], list[float]] = defaultdict(list)
    for r in ratings:
        cells[(row_of[r.material_id], r.attribute_id - 1)].append(r.value)

    m = len(material_ids)
    means = np.full((m, N_ATTRIBUTES), np.nan)
    stderrs = np.full((m, N_ATTRIBUTES), np.nan)
    counts = np.zeros((m, N_ATTRIBUTES), dtype=np.int64)
    for (i, j), vals in cells.items():
        # Sorted summation makes the result independent of input order.
        arr = np.sort(np.asarray(vals, dtype=np.float64))
        means[i, j] = arr.mean()
        stderrs[i, j] = arr.std(ddof=1) / math.sqrt(arr.size) if arr.size >= 2 else 0.0
        counts[i, j] = arr.size
    return RatingTable(material_ids, means, stderrs, counts)


def rescale(table: RatingTable) -> list[Fingerprint]:
    """Affine-map each attribute column from [min, max] onto [-1, 1].

    The minimum maps to exactly -1 and the maximum to exactly +1; orderings
    are preserved.  A constant column maps to all zeros with a warning.
    Standard errors are scaled by the same per-column factor.
    """
    missing = table.missing_cells()
    if missing:
        raise InvalidInputError(f"cannot build fingerprints with missing cells: {missing[:5]}")
    values = np.zeros_like(table.means)
    errs = np.zeros_like(table.stderrs)
    for j in range(N_ATTRIBUTES):
        col = table.means[:, j]
        lo, hi = float(col.min()), float(col.max())
        if hi == lo:
            warnings.warn(
                f"attribute {j + 1} is constant across materials; rescaled to zeros",
                DegenerateDataWarning,
                stacklevel=2,
            )
            values[:, j] = 0.0
            errs[:, j] = 0.0
            continue
        span = hi - lo
        values[:, j] = 2.0 * (col - lo) / span - 1.0
        errs[:, j] = table.stderrs[:, j] * (2.0 / span)
    return [
        Fingerprint(
            material_id=mid,
            values=values[i],
            stderr=errs[i],
            schema_version=SCHEMA_VERSION,
        )
        for i, mid in enumerate(table.material_ids)
    ]


def build_fingerprints(
    ratings: Sequence[RawRating],
) -> tuple[list[Fingerprint], ExclusionReport]:
    """Full pipeline: z-score, exclude raters, aggregate, rescale."""
    normalized = zscore_per_participant(ratings)
    filtered, report = exclude_raters(normalized)
    table = aggregate(filtered)
    return rescale(table), report


def fleiss_kappa(assignments: np.ndarray) -> float:
    """Fleiss' kappa for an (subjects x categories) count matrix.

    Every subject row must sum to the same rater count r >= 2.  Returns 1.0
    for perfect agreement; negative values indicate worse-than-chance
    agreement.  If all ratings fall in a single category the expected
    agreement is 1 and the statistic degenerates; 1.0 is returned.
    """
    counts = np.asarray(assignments, dtype=np.float64)
    if counts.ndim != 2 or counts.shape[0] < 1:
        raise InvalidInputError("assignments must be a 2-D subjects x categories matrix")
    if np.any(counts < 0) or not np.all(np.isfinite(counts)):
        raise InvalidInputError("assignment counts must be finite and non-negative")
    row_sums = counts.sum(axis=1)
    r = row_sums[0]
    if r < 2 or not np.all(row_sums == r):
        raise InvalidInputError("every subject must have the same rater count >= 2")
    n_subjects = counts.shape[0]
    p_subject = (np.sum(counts * counts, axis=1) - r) / (r * (r - 1.0))
    p_bar = float(p_subject.mean())
    p_cat = counts.sum(axis=0) / (n_subjects * r)
    p_e = float(np.dot(p_cat, p_cat))
    if p_e == 1.0:
        return 1.0
    return float((p_bar - p_e) / (1.0 - p_e))


def attribute_importance(
    entries: Iterable[tuple[str, float, float]],
) -> list[ImportanceEntry]:
    """Combined importance a_p * (max(a_o) - a_o) from naming frequency a_p
    and mean rank a_o, sorted descending (stable)."""
    items = list(entries)
    if not items:
        return []
    for name, a_p, _ in items:
        if a_p < 0:
            raise InvalidInputError(f"frequency must be >= 0 for {name!r}")
    max_rank = max(a_o for _, _, a_o in items)
    scored = [
        ImportanceEntry(name, float(a_p), float(a_o), float(a_p * (max_rank - a_o)))
        for name, a_p, a_o in items
    ]
    return sorted(scored, key=lambda e: -e.importance)


# --- ratings CSV (header: participant_id,material_id,attribute_id,value) ---

CSV_FIELDS = ("participant_id", "material_id", "attribute_id", "value")


def read_ratings_csv(path) -> list[RawRating]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(CSV_FIELDS) <= set(reader.fieldnames):
            raise InvalidInputError(
                f"ratings CSV must have header {','.join(CSV_FIELDS)}; got {reader.fieldnames}"
            )
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                trial = row.get("trial_index")
                out.append(
                    RawRating(
                        participant_id=row["participant_id"],
                        material_id=row["material_id"],
                        attribute_id=int(row["attribute_id"]),
                        value=float(row["value"]),
                        trial_index=int(trial) if trial not in (None, "") else None,
                    )
                )
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"bad rating at line {lineno}: {exc}") from exc
    return out


def write_ratings_csv(ratings: Sequence[RawRating], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in ratings:
            writer.writerow([r.participant_id, r.material_id, r.attribute_id, repr(r.value)])


def write_exclusion_report(report: ExclusionReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
