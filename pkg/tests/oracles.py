"""Independent reference implementations used to verify the engine.

Everything here is deliberately written against the plain definitions
(loops, scipy, two-pass formulas) and never calls into the code paths it
checks.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats


def pearson_two_pass(x, y) -> float:
    """Two-pass sample Pearson correlation, loop-based."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    dx = sum((a - mx) ** 2 for a in x)
    dy = sum((b - my) ** 2 for b in y)
    if dx == 0 or dy == 0:
        return 0.0
    return num / math.sqrt(dx * dy)


def similarity_direct(v1, v2, alpha: float) -> float:
    """Direct evaluation: alpha * R + (1 - alpha) * (1 - L1 / (2n))."""
    n = len(v1)
    r = pearson_two_pass(v1, v2)
    l1 = sum(abs(a - b) for a, b in zip(v1, v2))
    return alpha * r + (1.0 - alpha) * (1.0 - l1 / (2.0 * n))


def retrieve_exhaustive(fingerprints: dict[str, np.ndarray], query_id: str,
                        query_values: np.ndarray, k: int, alpha: float):
    """Score every candidate, sort by (-score, id), take k."""
    scored = [
        (mid, similarity_direct(query_values, values, alpha))
        for mid, values in fingerprints.items()
        if mid != query_id
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


def spearman_scipy(a, b) -> float:
    return float(stats.spearmanr(a, b).statistic)


def fleiss_kappa_definition(counts: np.ndarray) -> float:
    """Fleiss' kappa from the textbook definition, step by step."""
    counts = np.asarray(counts, dtype=float)
    n_subjects, _ = counts.shape
    r = counts[0].sum()
    p_j = counts.sum(axis=0) / (n_subjects * r)
    p_i = [(np.dot(row, row) - r) / (r * (r - 1)) for row in counts]
    p_bar = float(np.mean(p_i))
    p_e = float(np.dot(p_j, p_j))
    return (p_bar - p_e) / (1.0 - p_e)


def knn_inverse_distance(train_x, train_y, query, k):
    """Brute-force scan with inverse-distance weights."""
    dists = [float(np.sqrt(np.sum((row - query) ** 2))) for row in train_x]
    order = sorted(range(len(dists)), key=lambda i: (dists[i], i))
    for i in order:
        if dists[i] < 1e-12:
            return np.array(train_y[i], dtype=float)
    chosen = order[:k]
    weights = np.array([1.0 / dists[i] for i in chosen])
    weights /= weights.sum()
    return np.sum([w * np.asarray(train_y[i], dtype=float) for w, i in zip(weights, chosen)], axis=0)


def fft_band_powers(lum: np.ndarray) -> tuple[np.ndarray, float]:
    """Absolute spectral power in the four octave bands plus total non-DC
    power, computed with shifted-spectrum distances (independent layout)."""
    n = lum.shape[0]
    spectrum = np.fft.fftshift(np.fft.fft2(lum - lum.mean()))
    power = np.abs(spectrum) ** 2
    cy, cx = n // 2, n // 2
    yy, xx = np.indices(power.shape)
    radius = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    power[cy, cx] = 0.0
    total = float(power.sum())
    edges = [0.0, n / 16.0, n / 8.0, n / 4.0, n / 2.0]
    bands = np.array([
        float(power[(radius > edges[b]) & (radius <= edges[b + 1])].sum()) for b in range(4)
    ])
    return bands, total


def grating_predicted_band(period_px: float, n: int) -> int:
    """Which octave band (0..3) a sinusoid of the given period falls in."""
    radius = n / period_px
    edges = [0.0, n / 16.0, n / 8.0, n / 4.0, n / 2.0]
    for b in range(4):
        if edges[b] < radius <= edges[b + 1]:
            return b
    raise ValueError(f"period {period_px} is outside the band range for n={n}")


def classical_mds_distances(coords: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distance matrix of a configuration."""
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def group_moments(values_by_group: dict) -> dict:
    """Mean and ddof=1 std per group, via numpy directly."""
    return {
        key: (float(np.mean(vals)), float(np.std(vals, ddof=1)))
        for key, vals in values_by_group.items()
    }
