"""Evaluation statistics for fingerprint predictions.

Covers correlation of similarity matrices (upper triangles), correlation of
flattened rating matrices, mean absolute error, top-k retrieval overlap per
attribute, Spearman rank correlation over the top-ranked subset, a
Gaussian-likelihood information criterion, construction of forced-choice
validation trials, and a classical spectral embedding of the similarity
matrix for 2-D maps.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateDataWarning, InvalidInputError
from .schema import Fingerprint, MaterialRecord, N_ATTRIBUTES, SimilarityParams
from .similarity import pearson, retrieve, similarity_matrix


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def corr_similarity_matrices(sm_pred: np.ndarray, sm_gt: np.ndarray) -> float:
    """Pearson correlation of two similarity matrices over their strict
    upper triangles (diagonal excluded)."""
    a, b = _check_same_shape(sm_pred, sm_gt)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"expected square matrices, got {a.shape}")
    for name, m in (("sm_pred", a), ("sm_gt", b)):
        if not np.allclose(m, m.T, atol=1e-9):
            raise InvalidInputError(f"{name} is not symmetric")
    iu = np.triu_indices(a.shape[0], k=1)
    return pearson(a[iu], b[iu])


def corr_ratings(pred: np.ndarray, gt: np.ndarray) -> float:
    """Pearson correlation over all flattened entries of two rating
    matrices (N materials x 16 attributes)."""
    a, b = _check_same_shape(pred, gt)
    return pearson(a.reshape(-1), b.reshape(-1))


def mae(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean absolute element-wise difference."""
    a, b = _check_same_shape(pred, gt)
    return float(np.mean(np.abs(a - b)))


def _top_ids(values: np.ndarray, ids: Sequence[str], k: int) -> list[str]:
    order = sorted(range(len(ids)), key=lambda i: (-values[i], ids[i]))
    return [ids[i] for i in order[:k]]


def topk_overlap(
    pred_values: np.ndarray,
    gt_values: np.ndarray,
    k: int = 5,
    ids: Sequence[str] | None = None,
) -> int:
    """Size of the intersection of the predicted and true top-k material
    sets for one attribute; rank ties break by ascending material id."""
    p, g = _check_same_shape(pred_values, gt_values)
    if p.ndim != 1:
        raise InvalidInputError("topk_overlap expects 1-D value arrays")
    if k > p.size:
        raise InvalidInputError(f"k={k} exceeds {p.size} materials")
    if ids is None:
        ids = [f"{i:06d}" for i in range(p.size)]
    return len(set(_top_ids(p, ids, k)) & set(_top_ids(g, ids, k)))


def rankdata_average(values: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties assigned the average of their positions."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.size, dtype=np.float64)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def spearman(a: np.ndarray, b: np.ndarray) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    x, y = _check_same_shape(a, b)
    return pearson(rankdata_average(x), rankdata_average(y))


def rci(
    pred_values: np.ndarray,
    gt_values: np.ndarray,
    first: int = 100,
    ids: Sequence[str] | None = None,
) -> float:
    """Spearman rank correlation between true and predicted values over the
    ``first`` top-ranked materials (by true value; ties by ascending id).
    ``first`` larger than the population clamps with a warning."""
    p, g = _check_same_shape(pred_values, gt_values)
    if p.ndim != 1:
        raise InvalidInputError("rci expects 1-D value arrays")
    n = p.size
    if first > n:
        warnings.warn(
            f"rci subset {first} exceeds {n} materials; clamping",
            DegenerateDataWarning,
            stacklevel=2,
        )
        first = n
    if ids is None:
        ids = [f"{i:06d}" for i in range(n)]
    order = sorted(range(n), key=lambda i: (-g[i], ids[i]))[:first]
    subset = np.array(order, dtype=np.int64)
    return spearman(g[subset], p[subset])


def aic(residuals: Sequence[float], k_params: int) -> float:
    """Gaussian-likelihood information criterion 2k + n*ln(RSS/n).

    A zero residual sum of squares degenerates to negative infinity (warned).
    """
    res = np.asarray(residuals, dtype=np.float64)
    if res.size == 0:
        raise InvalidInputError("aic requires at least one residual")
    if k_params < 0:
        raise InvalidInputError(f"k_params must be >= 0, got {k_params}")
    rss = float(np.sum(res**2))
    if rss == 0.0:
        warnings.warn("zero residual sum of squares; AIC is -inf", DegenerateDataWarning, stacklevel=2)
        return float("-inf")
    return 2.0 * k_params + res.size * float(np.log(rss / res.size))


@dataclass(frozen=True)
class ValidationTrial:
    """One forced-choice trial: a target plus three four-sample groups drawn
    from true-rating similarity, predicted similarity, and uniform random."""

    target: str
    group_ratings: tuple[str, str, str, str]
    group_model: tuple[str, str, str, str]
    group_random: tuple[str, str, str, str]
    display_order: tuple[str, str, str]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "group_ratings": list(self.group_ratings),
            "group_model": list(self.group_model),
            "group_random": list(self.group_random),
            "display_order": list(self.display_order),
        }


def build_validation_trials(
    db: Sequence[MaterialRecord],
    model_preds: Mapping[str, Fingerprint],
    seed: int = 0,
    params: SimilarityParams = SimilarityParams(),
) -> list[ValidationTrial]:
    """One trial per predicted material.

    The rating group holds the 4 most similar materials to the target's true
    fingerprint, the model group the 4 most similar to its predicted
    fingerprint (both retrieved over the true fingerprints of the database),
    and the random group 4 uniform draws excluding the target.  Groups may
    overlap.  Group order on screen is a seeded random permutation.
    """
    if len(db) < 13:
        raise InvalidInputError(f"need >= 13 materials for trials, got {len(db)}")
    by_id = {rec.material_id: rec for rec in db}
    rng = np.random.default_rng(seed)
    trials = []
    for target in sorted(model_preds):
        if target not in by_id:
            raise InvalidInputError(f"prediction for unknown material {target!r}")
        true_fp = by_id[target].fingerprint
        pred_fp = model_preds[target]
        if pred_fp.material_id != target:
            pred_fp = Fingerprint(
                material_id=target,
                values=pred_fp.values,
                stderr=pred_fp.stderr,
                schema_version=pred_fp.schema_version,
            )
        group_ratings = tuple(mid for mid, _ in retrieve(db, true_fp, k=4, params=params))
        group_model = tuple(mid for mid, _ in retrieve(db, pred_fp, k=4, params=params))
        pool = sorted(mid for mid in by_id if mid != target)
        group_random = tuple(rng.choice(pool, size=4, replace=False).tolist())
        display_order = tuple(rng.permutation(["ratings", "model", "random"]).tolist())
        trials.append(
            ValidationTrial(
                target=target,
                group_ratings=group_ratings,
                group_model=group_model,
                group_random=group_random,
                display_order=display_order,
            )
        )
    return trials


def classical_mds(similarity: np.ndarray, dims: int = 2) -> np.ndarray:
    """Spectral embedding of a similarity matrix into ``dims`` coordinates.

    Similarities convert to dissimilarities delta = 1 - s, which are squared
    and double-centered; the top eigenpairs give the configuration.  Output
    is centered at the origin with a deterministic sign convention (largest
    absolute loading positive per axis).  Negative eigenvalues truncate to
    zero-length axes.
    """
    s = np.asarray(similarity, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidInputError(f"similarity matrix must be square, got {s.shape}")
    if not np.allclose(s, s.T, atol=1e-9):
        raise InvalidInputError("similarity matrix must be symmetric")
    if np.any(s > 1.0 + 1e-9):
        raise InvalidInputError("similarity values must be <= 1")
    if dims < 1:
        raise InvalidInputError(f"dims must be >= 1, got {dims}")
    n = s.shape[0]
    delta = 1.0 - s
    d2 = delta**2
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * centering @ d2 @ centering
    b = (b + b.T) / 2.0  # guard symmetry against rounding
    eigvals, eigvecs = np.linalg.eigh(b)
    order = np.argsort(eigvals)[::-1][:dims]
    coords = np.zeros((n, dims))
    for axis, idx in enumerate(order):
        lam = eigvals[idx]
        if lam <= 0.0:
            continue
        vec = eigvecs[:, idx]
        anchor = int(np.argmax(np.abs(vec)))
        if vec[anchor] < 0:
            vec = -vec
        coords[:, axis] = vec * np.sqrt(lam)
    coords -= coords.mean(axis=0)
    return coords


@dataclass(frozen=True)
class EvalReport:
    """Headline prediction metrics plus per-attribute retrieval diagnostics."""

    r_sm: float
    r_a: float
    mae: float
    per_attribute_rci: tuple[float, ...]
    per_attribute_top5_overlap: tuple[int, ...]
    aic: float
    sample_count: int

    def to_dict(self) -> dict:
        return {
            "r_sm": self.r_sm,
            "r_a": self.r_a,
            "mae": self.mae,
            "per_attribute_rci": list(self.per_attribute_rci),
            "per_attribute_top5_overlap": list(self.per_attribute_top5_overlap),
            "aic": self.aic,
            "sample_count": self.sample_count,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def evaluate(
    pred_records: Sequence[MaterialRecord],
    gt_records: Sequence[MaterialRecord],
    params: SimilarityParams = SimilarityParams(),
    k_params: int = 0,
    top_k: int = 5,
    rci_first: int = 100,
) -> EvalReport:
    """Full report over the materials common to both databases."""
    pred_by_id = {r.material_id: r for r in pred_records}
    gt_by_id = {r.material_id: r for r in gt_records}
    common = sorted(set(pred_by_id) & set(gt_by_id))
    if len(common) < 2:
        raise InvalidInputError("need at least 2 common materials to evaluate")
    pred = np.array([pred_by_id[m].fingerprint.values for m in common])
    gt = np.array([gt_by_id[m].fingerprint.values for m in common])

    sm_pred = similarity_matrix([pred_by_id[m] for m in common], params)
    sm_gt = similarity_matrix([gt_by_id[m] for m in common], params)

    k = min(top_k, len(common))
    overlaps = tuple(
        topk_overlap(pred[:, j], gt[:, j], k=k, ids=common) for j in range(N_ATTRIBUTES)
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateDataWarning)
        rcis = tuple(
            rci(pred[:, j], gt[:, j], first=rci_first, ids=common) for j in range(N_ATTRIBUTES)
        )
    return EvalReport(
        r_sm=corr_similarity_matrices(sm_pred, sm_gt),
        r_a=corr_ratings(pred, gt),
        mae=mae(pred, gt),
        per_attribute_rci=rcis,
        per_attribute_top5_overlap=overlaps,
        aic=aic((pred - gt).reshape(-1), k_params),
        sample_count=len(common),
    )


def write_per_attribute_csv(report: EvalReport, schema, path) -> None:
    """Per-attribute overlap/RCI table (one row per attribute)."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["attribute_id", "attribute_name", "top5_overlap", "rci"])
        for attr, overlap, r in zip(
            schema.attributes, report.per_attribute_top5_overlap, report.per_attribute_rci
        ):
            writer.writerow([attr.id, attr.name, overlap, repr(r)])
