"""Hand-crafted image statistics for material frame pairs.

A material is described by two 512x512 RGB frames covering a 26x26 mm patch:
one far from the specular configuration and one close to it.  Each frame
yields 14 statistics (28 per material, non-specular half first):

     1  luminance mean
     2  luminance std (ddof=1)
     3  luminance skewness
     4  chroma mean            (per-pixel max(R,G,B) - min(R,G,B))
     5  chroma std (ddof=1)
     6- 9  relative power in four octave radial frequency bands of the
           luminance spectrum: (0, N/16], (N/16, N/8], (N/8, N/4],
           (N/4, N/2], DC excluded, as fractions of total non-DC power
    10  anisotropy: doubled-angle resultant length of the angular power
        distribution (0 = isotropic, 1 = single orientation)
    11  orientation peak ratio: share of spectral power in the dominant
        of 36 orientation bins
    12  dominant color count: greedy leader clustering of the 32-level
        RGB histogram, merge radius 0.1, clusters holding >= 2% of pixels
    13  stripedness: periodic autocorrelation peak along the dominant
        orientation, discounted by the perpendicular peak
    14  checkeredness: geometric mean of the autocorrelation peaks along
        the two principal orientations

Degenerate inputs fall back to exact zeros (see each helper), so a constant
mid-gray frame maps to (0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0).
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import DegenerateDataWarning, InvalidInputError

CANONICAL_SIZE = 512
SAMPLE_EXTENT_MM = 26.0
FRAME_COUNT = 60
#: Azimuthal sweep covered by one video, traversed in FRAME_COUNT frames.
FRAME_SPAN_DEGREES = 90.0
FRAME_STEP_DEGREES = FRAME_SPAN_DEGREES / (FRAME_COUNT - 1)
NON_SPECULAR_FRAME = 30  # 1-based index into the 60-frame sweep
DEFAULT_SPECULAR_OFFSET_DEGREES = 6.0

STAT_FEATURE_SPEC_ID = "S-v1"
STAT_DIMS = 28

FRAME_FEATURE_NAMES = (
    "luminance_mean",
    "luminance_std",
    "luminance_skewness",
    "chroma_mean",
    "chroma_std",
    "band1_energy",
    "band2_energy",
    "band3_energy",
    "band4_energy",
    "anisotropy",
    "orientation_peak_ratio",
    "dominant_colors",
    "stripedness",
    "checkeredness",
)

STAT_FEATURE_NAMES = tuple(f"ns_{n}" for n in FRAME_FEATURE_NAMES) + tuple(
    f"sp_{n}" for n in FRAME_FEATURE_NAMES
)

_ORIENTATION_BINS = 36
_COLOR_MERGE_RADIUS = 0.1
_COLOR_MIN_MASS = 0.02


def _check_rgb(image: np.ndarray, what: str) -> np.ndarray:
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"{what} must be an HxWx3 RGB array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} contains non-finite pixels")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidInputError(f"{what} values must lie in [0, 1]")
    return arr


@dataclass(frozen=True, eq=False)
class FramePair:
    """Canonical two-frame observation of one material sample."""

    non_specular: np.ndarray
    near_specular: np.ndarray
    source: str = "goniometer_video"
    frame_indices: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        a = _check_rgb(self.non_specular, "non_specular frame")
        b = _check_rgb(self.near_specular, "near_specular frame")
        if a.shape != b.shape:
            raise InvalidInputError(f"frame shapes differ: {a.shape} vs {b.shape}")
        if self.source not in ("goniometer_video", "smartphone"):
            raise InvalidInputError(f"unknown source {self.source!r}")
        object.__setattr__(self, "non_specular", a)
        object.__setattr__(self, "near_specular", b)


@dataclass(frozen=True, eq=False)
class StatFeatureVector:
    """The 28 statistics of one material (non-specular frame first)."""

    values: np.ndarray
    feature_names: tuple[str, ...] = STAT_FEATURE_NAMES
    spec_id: str = STAT_FEATURE_SPEC_ID

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (STAT_DIMS,):
            raise InvalidInputError(f"expected {STAT_DIMS} features, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("features must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


# --- geometry -------------------------------------------------------------


def near_specular_frame_index(offset_degrees: float = DEFAULT_SPECULAR_OFFSET_DEGREES) -> int:
    """1-based frame whose azimuth sits ``offset_degrees`` before the final
    (ideal specular) frame of the sweep."""
    if not 0.0 <= offset_degrees < FRAME_SPAN_DEGREES:
        raise InvalidInputError(f"offset must be in [0, 90), got {offset_degrees}")
    idx = round(FRAME_COUNT - offset_degrees / FRAME_STEP_DEGREES)
    return int(min(FRAME_COUNT, max(1, idx)))


def _resize_bilinear(image: np.ndarray, size: int) -> np.ndarray:
    """Per-channel bilinear resize to size x size via Pillow (float path)."""
    channels = []
    for c in range(3):
        im = Image.fromarray(image[:, :, c].astype(np.float32), mode="F")
        im = im.resize((size, size), Image.BILINEAR)
        channels.append(np.asarray(im, dtype=np.float64))
    return np.clip(np.stack(channels, axis=2), 0.0, 1.0)


def _center_square(image: np.ndarray, side: int | None = None) -> np.ndarray:
    h, w = image.shape[:2]
    side = min(h, w) if side is None else side
    if side > min(h, w):
        raise InvalidInputError(f"crop of {side} px exceeds image size {w}x{h}")
    top = (h - side) // 2
    left = (w - side) // 2
    return image[top : top + side, left : left + side]


def canonicalize_frame(image: np.ndarray) -> np.ndarray:
    """Center square crop + bilinear rescale to the canonical 512x512."""
    arr = _check_rgb(image, "frame")
    return _resize_bilinear(_center_square(arr), CANONICAL_SIZE)


def select_frames(
    frames: Sequence[np.ndarray],
    offset_degrees: float = DEFAULT_SPECULAR_OFFSET_DEGREES,
) -> FramePair:
    """Pick the canonical (non-specular, near-specular) pair from a 60-frame
    sweep and normalize both to 512x512.

    The non-specular frame is #30; the near-specular frame backs off from the
    specular endpoint by ``offset_degrees`` of azimuth (frame #56 for the
    default 6 degrees).  A collision between the two picks is allowed but
    warned about.
    """
    if len(frames) != FRAME_COUNT:
        raise InvalidInputError(f"expected {FRAME_COUNT} frames, got {len(frames)}")
    near = near_specular_frame_index(offset_degrees)
    if near == NON_SPECULAR_FRAME:
        warnings.warn(
            f"near-specular frame {near} collides with the non-specular frame",
            DegenerateDataWarning,
            stacklevel=2,
        )
    return FramePair(
        non_specular=canonicalize_frame(frames[NON_SPECULAR_FRAME - 1]),
        near_specular=canonicalize_frame(frames[near - 1]),
        source="goniometer_video",
        frame_indices=(NON_SPECULAR_FRAME, near),
    )


def normalize_wild_capture(
    image: np.ndarray,
    crop_mm: float = SAMPLE_EXTENT_MM,
    dpi_hint: float | None = None,
) -> np.ndarray:
    """Normalize a smartphone shot to the canonical 512x512 patch.

    With a DPI hint the crop covers ``crop_mm`` of physical extent; without
    one the center square is used.  No perspective, white-balance or color
    correction is applied.
    """
    arr = _check_rgb(image, "capture")
    if dpi_hint is not None:
        if dpi_hint <= 0:
            raise InvalidInputError(f"dpi_hint must be positive, got {dpi_hint}")
        side = int(round(crop_mm / 25.4 * dpi_hint))
        cropped = _center_square(arr, side)
    else:
        cropped = _center_square(arr)
    if min(cropped.shape[:2]) < CANONICAL_SIZE:
        raise InvalidInputError(
            f"capture too small: {cropped.shape[1]}x{cropped.shape[0]} after crop, "
            f"need at least {CANONICAL_SIZE}x{CANONICAL_SIZE}"
        )
    if cropped.shape[0] == CANONICAL_SIZE and cropped.shape[1] == CANONICAL_SIZE:
        return cropped
    return _resize_bilinear(cropped, CANONICAL_SIZE)


# --- per-frame statistics ---------------------------------------------------


def _luminance(rgb: np.ndarray) -> np.ndarray:
    return 0.2126 * rgb[:, :, 0] + 0.7152 * rgb[:, :, 1] + 0.0722 * rgb[:, :, 2]


def _skewness(x: np.ndarray) -> float:
    m = x.mean()
    m2 = float(np.mean((x - m) ** 2))
    if m2 == 0.0:
        return 0.0
    m3 = float(np.mean((x - m) ** 3))
    return m3 / m2**1.5


def _spectral_layout(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Radius (cycles/image) and angle of every FFT bin of an n x n image."""
    freq = np.fft.fftfreq(n, d=1.0 / n)  # signed integer frequencies
    ky, kx = np.meshgrid(freq, freq, indexing="ij")
    radius = np.hypot(kx, ky)
    angle = np.arctan2(ky, kx)
    return radius, angle


def _power_spectrum(lum: np.ndarray) -> np.ndarray:
    f = np.fft.fft2(lum - lum.mean())
    power = np.abs(f) ** 2
    power[0, 0] = 0.0  # DC is excluded everywhere below
    return power


def _band_energies(power: np.ndarray, radius: np.ndarray, n: int) -> np.ndarray:
    total = float(power.sum())
    if total == 0.0:
        return np.zeros(4)
    edges = [0.0, n / 16.0, n / 8.0, n / 4.0, n / 2.0]
    out = np.empty(4)
    for b in range(4):
        mask = (radius > edges[b]) & (radius <= edges[b + 1])
        out[b] = float(power[mask].sum()) / total
    return out


def _angular_profile(power: np.ndarray, radius: np.ndarray, angle: np.ndarray, n: int):
    """(anisotropy, peak ratio, dominant angle) of the in-band spectrum."""
    mask = (radius > 0.0) & (radius <= n / 2.0)
    p = power[mask]
    total = float(p.sum())
    if total == 0.0:
        return 0.0, 0.0, 0.0
    theta = angle[mask]
    # Doubled angles make the two conjugate half-planes add constructively.
    resultant = abs(complex(np.sum(p * np.cos(2 * theta)), np.sum(p * np.sin(2 * theta))))
    anisotropy = resultant / total

    bins = np.floor((theta % np.pi) / (np.pi / _ORIENTATION_BINS)).astype(int)
    bins = np.clip(bins, 0, _ORIENTATION_BINS - 1)
    hist = np.bincount(bins, weights=p, minlength=_ORIENTATION_BINS)
    peak_bin = int(np.argmax(hist))
    peak_ratio = float(hist[peak_bin]) / total
    dominant_angle = (peak_bin + 0.5) * (np.pi / _ORIENTATION_BINS)
    return float(anisotropy), peak_ratio, float(dominant_angle)


def _dominant_colors(rgb: np.ndarray) -> int:
    """Greedy leader clustering on a 32-level-per-channel color histogram.

    Colors are taken in descending pixel-count order; each round seeds a
    cluster with the heaviest unassigned color and absorbs every unassigned
    color within the merge radius.  Clusters holding >= 2% of the pixels
    count as dominant.  The histogram quantization displaces colors by at
    most ~0.027, well inside the 0.1 merge radius.
    """
    colors = np.round(rgb.reshape(-1, 3) * 31.0) / 31.0
    uniq, counts = np.unique(colors, axis=0, return_counts=True)
    # np.unique sorts lexicographically; re-sort by count desc, color asc.
    order = np.lexsort((uniq[:, 2], uniq[:, 1], uniq[:, 0], -counts))
    uniq, counts = uniq[order], counts[order]

    total = float(counts.sum())
    unassigned = np.ones(len(uniq), dtype=bool)
    remaining = total
    dominant = 0
    while remaining / total >= _COLOR_MIN_MASS:
        seed_idx = int(np.argmax(unassigned))  # first unassigned = heaviest
        seed = uniq[seed_idx]
        dist = np.linalg.norm(uniq - seed, axis=1)
        member = unassigned & (dist <= _COLOR_MERGE_RADIUS)
        mass = float(counts[member].sum())
        if mass / total >= _COLOR_MIN_MASS:
            dominant += 1
        unassigned &= ~member
        remaining -= mass
    return dominant


def _autocorrelation(lum: np.ndarray) -> np.ndarray | None:
    centered = lum - lum.mean()
    energy = float(np.sum(centered**2))
    if energy == 0.0:
        return None
    f = np.fft.fft2(centered)
    ac = np.fft.ifft2(np.abs(f) ** 2).real
    return ac / ac[0, 0]


def _profile_along(ac: np.ndarray, angle: float) -> np.ndarray:
    """Nearest-pixel sample of the autocorrelation along one direction."""
    n = ac.shape[0]
    steps = np.arange(n // 2)
    xs = np.round(steps * math.cos(angle)).astype(int) % n
    ys = np.round(steps * math.sin(angle)).astype(int) % n
    return ac[ys, xs]


def _periodic_peak(profile: np.ndarray) -> float:
    """Strongest strict interior local maximum at lag >= 1, clipped to >= 0.

    A flat profile has no peaks, so a direction without genuine repetition
    (e.g. along the stripes of a grating) scores 0.
    """
    if profile.size < 3:
        return 0.0
    left = profile[:-2]
    mid = profile[1:-1]
    right = profile[2:]
    is_peak = (mid > left) & (mid >= right)
    if not np.any(is_peak):
        return 0.0
    return float(max(0.0, mid[is_peak].max()))


def _frame_features(rgb: np.ndarray) -> np.ndarray:
    lum = _luminance(rgb)
    n = lum.shape[0]
    if lum.shape[0] != lum.shape[1]:
        raise InvalidInputError("frame statistics require a square frame")

    chroma = rgb.max(axis=2) - rgb.min(axis=2)
    out = np.empty(14)
    out[0] = lum.mean()
    out[1] = lum.std(ddof=1)
    out[2] = _skewness(lum)
    out[3] = chroma.mean()
    out[4] = chroma.std(ddof=1)

    radius, angle = _spectral_layout(n)
    power = _power_spectrum(lum)
    out[5:9] = _band_energies(power, radius, n)
    anisotropy, peak_ratio, dominant_angle = _angular_profile(power, radius, angle, n)
    out[9] = anisotropy
    out[10] = peak_ratio

    out[11] = _dominant_colors(rgb)

    ac = _autocorrelation(lum)
    if ac is None:
        out[12] = 0.0
        out[13] = 0.0
    else:
        peak_main = _periodic_peak(_profile_along(ac, dominant_angle))
        peak_perp = _periodic_peak(_profile_along(ac, dominant_angle + math.pi / 2.0))
        out[12] = peak_main * (1.0 - peak_perp)
        out[13] = math.sqrt(peak_main * peak_perp)
    return out


def extract_stat_features(pair: FramePair) -> StatFeatureVector:
    """The 28-dim statistical descriptor of a canonical frame pair."""
    values = np.concatenate(
        [_frame_features(pair.non_specular), _frame_features(pair.near_specular)]
    )
    return StatFeatureVector(values=values)


# --- feature conditioning ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class FeatureScaler:
    """Per-dimension affine transform fitted on a training set: subtracts the
    mean and divides by the std; constant dimensions map to 0."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        safe = np.where(self.std == 0.0, 1.0, self.std)
        out = (x - self.mean) / safe
        return np.where(self.std == 0.0, 0.0, out)

    __call__ = apply


def standardize_features(train: Sequence[StatFeatureVector] | np.ndarray) -> FeatureScaler:
    """Fit a zero-mean unit-std transform on training feature vectors.

    Uses the population std so that a two-sample set maps each varying
    dimension onto exactly {-1, +1}.
    """
    if isinstance(train, np.ndarray):
        matrix = np.asarray(train, dtype=np.float64)
    else:
        matrix = np.array([fv.values for fv in train], dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise InvalidInputError("standardize_features requires >= 2 vectors")
    return FeatureScaler(mean=matrix.mean(axis=0), std=matrix.std(axis=0))


# --- frame directory loading ------------------------------------------------

_FRAME_RE = re.compile(r"^frame_(\d{3})\.(png|jpg|jpeg)$", re.IGNORECASE)


def load_image(path) -> np.ndarray:
    """Read an RGB image file as float64 in [0, 1]."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        return np.asarray(rgb, dtype=np.float64) / 255.0


def load_frame_dir(path) -> list[np.ndarray]:
    """Load frame_001..frame_060 image files from one material directory."""
    directory = Path(path)
    found: dict[int, Path] = {}
    for entry in directory.iterdir():
        m = _FRAME_RE.match(entry.name)
        if m:
            found[int(m.group(1))] = entry
    missing = [i for i in range(1, FRAME_COUNT + 1) if i not in found]
    if missing:
        raise InvalidInputError(
            f"{directory}: missing frames {missing[:5]}{'...' if len(missing) > 5 else ''}"
        )
    return [load_image(found[i]) for i in range(1, FRAME_COUNT + 1)]
