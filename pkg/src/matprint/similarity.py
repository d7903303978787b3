"""Fingerprint similarity, ranking, retrieval and typicality.

The similarity score between two fingerprints ``V1, V2`` of length ``n=16`` is

    d(V1, V2) = alpha * R(V1, V2) + (1 - alpha) * [1 - sum_i |V1_i - V2_i| / (2n)]

where ``R`` is the sample Pearson correlation.  Values live in [-1, 1], so the
bracketed term lies in [0, 1].  Higher d means more similar; d(f, f) = 1 for
any non-constant f.  All orderings break ties by ascending material_id so
results are deterministic.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, NotFoundError
from .schema import Fingerprint, MaterialRecord, N_ATTRIBUTES, SimilarityParams


def pearson(v1: Sequence[float], v2: Sequence[float]) -> float:
    """Sample Pearson correlation of two equal-length vectors (length >= 2).

    Returns 0.0 when either vector has zero variance (declared convention:
    no evidence of relation).  Identical non-constant vectors return exactly
    1.0.
    """
    a = np.asarray(v1, dtype=np.float64)
    b = np.asarray(v2, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise InvalidInputError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise InvalidInputError("pearson requires vectors of length >= 2")
    da = a - a.mean()
    db = b - b.mean()
    sa = float(np.dot(da, da))
    sb = float(np.dot(db, db))
    if sa == 0.0 or sb == 0.0:
        return 0.0
    if np.array_equal(a, b):
        return 1.0
    r = float(np.dot(da, db)) / (math.sqrt(sa) * math.sqrt(sb))
    return float(min(1.0, max(-1.0, r)))


def similarity(
    f1: Fingerprint,
    f2: Fingerprint,
    params: SimilarityParams = SimilarityParams(),
) -> float:
    """Similarity score d between two fingerprints (higher = closer).

    Computed as ``l1_term + alpha * (R - l1_term)``, which is algebraically
    the weighted combination above but returns exactly 1.0 for identical
    non-constant fingerprints regardless of alpha.
    """
    if f1.schema_version != f2.schema_version:
        raise InvalidInputError(
            f"schema mismatch: {f1.schema_version!r} vs {f2.schema_version!r}"
        )
    l1_term = 1.0 - float(np.abs(f1.values - f2.values).sum()) / (2.0 * N_ATTRIBUTES)
    r = pearson(f1.values, f2.values)
    return float(l1_term + params.alpha * (r - l1_term))


def rank_by_attribute(
    db: Sequence[MaterialRecord],
    attribute_id: int,
    descending: bool = True,
) -> list[str]:
    """Material ids ordered by one attribute's value; ties by id ascending."""
    if not 1 <= attribute_id <= N_ATTRIBUTES:
        raise InvalidInputError(f"attribute_id out of range: {attribute_id}")
    idx = attribute_id - 1
    sign = -1.0 if descending else 1.0
    ordered = sorted(
        db, key=lambda rec: (sign * float(rec.fingerprint.values[idx]), rec.material_id)
    )
    return [rec.material_id for rec in ordered]


def retrieve(
    db: Sequence[MaterialRecord],
    query: Fingerprint,
    k: int,
    params: SimilarityParams = SimilarityParams(),
) -> list[tuple[str, float]]:
    """Top-k records by descending similarity to the query fingerprint.

    A record whose material_id equals the query's is excluded (self-match).
    k larger than the candidate count returns everything, sorted.
    """
    if not db:
        raise InvalidInputError("retrieve requires a non-empty database")
    if k < 1:
        raise InvalidInputError(f"k must be >= 1, got {k}")
    scored = [
        (rec.material_id, similarity(query, rec.fingerprint, params))
        for rec in db
        if rec.material_id != query.material_id
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def typicality(
    db: Sequence[MaterialRecord],
    material_id: str,
    fraction: float = 0.1,
    params: SimilarityParams = SimilarityParams(),
) -> float:
    """Mean similarity to the ceil(fraction * (n-1)) most similar other
    materials; higher = more typical of the database."""
    if not 0.0 < fraction <= 1.0:
        raise InvalidInputError(f"fraction must be in (0, 1], got {fraction}")
    if len(db) < 2:
        raise InvalidInputError("typicality requires a database of >= 2 materials")
    by_id = {rec.material_id: rec for rec in db}
    if material_id not in by_id:
        raise NotFoundError(f"unknown material_id {material_id!r}")
    query = by_id[material_id].fingerprint
    neighbors = retrieve(db, query, k=len(db) - 1, params=params)
    count = math.ceil(fraction * (len(db) - 1))
    top = [score for _, score in neighbors[:count]]
    return float(np.mean(top))


def similarity_matrix(
    db: Sequence[MaterialRecord],
    params: SimilarityParams = SimilarityParams(),
) -> np.ndarray:
    """Pairwise similarity over the database, in db order.

    Symmetric by construction (each pair computed once and mirrored);
    diagonal is 1.0 for non-constant fingerprints.
    """
    if len(db) < 2:
        raise InvalidInputError("similarity_matrix requires >= 2 materials")
    n = len(db)
    out = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        out[i, i] = similarity(db[i].fingerprint, db[i].fingerprint, params)
        for j in range(i + 1, n):
            score = similarity(db[i].fingerprint, db[j].fingerprint, params)
            out[i, j] = score
            out[j, i] = score
    return out


def attach_typicality(
    db: Sequence[MaterialRecord],
    fraction: float = 0.1,
    params: SimilarityParams = SimilarityParams(),
) -> list[MaterialRecord]:
    """Return records with their typicality field populated."""
    from dataclasses import replace

    return [
        replace(rec, typicality=typicality(db, rec.material_id, fraction, params))
        for rec in db
    ]
