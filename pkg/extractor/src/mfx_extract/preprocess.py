"""Frame preprocessing and augmentation-variant materialization.

The encoder input convention: the square center of each frame is treated as
the canonical 26 mm material patch, resized so that extent maps to 256 px,
then center-cropped to 224 px.  Variants re-run the same preprocessing on
transformed source frames; the statistical rotation invariance does not hold
for learned embeddings, so rotations are genuine variants here.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

PATCH_RESIZE = 256  # 26 mm mapped to 256 px
CROP_SIZE = 224

#: azimuthal step between adjacent goniometer frames (90 degrees over 59 steps)
FRAME_STEP_DEGREES = 90.0 / 59.0

_FRAME_FILE_RE = re.compile(r"^(?P<stem>frame_)(?P<num>\d{3})(?P<ext>\.(png|jpg|jpeg))$", re.IGNORECASE)


@dataclass(frozen=True)
class AugmentationPolicy:
    """Mirror of the trainer's augmentation contract."""

    random_crop: bool = False
    rotation: bool = False
    scale_jitter: float = 0.0
    azimuth_jitter_degrees: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.scale_jitter <= 0.05:
            raise ValueError(f"scale_jitter must be in [0, 0.05], got {self.scale_jitter}")
        if not 0.0 <= self.azimuth_jitter_degrees <= 2.5:
            raise ValueError(
                f"azimuth_jitter_degrees must be in [0, 2.5], got {self.azimuth_jitter_degrees}"
            )

    @classmethod
    def from_json(cls, path) -> "AugmentationPolicy":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            random_crop=bool(doc.get("random_crop", False)),
            rotation=bool(doc.get("rotation", False)),
            scale_jitter=float(doc.get("scale_jitter", 0.0)),
            azimuth_jitter_degrees=float(doc.get("azimuth_jitter_degrees", 0.0)),
        )

    def azimuth_jitter_frames(self) -> int:
        if self.azimuth_jitter_degrees == 0.0:
            return 0
        return int(math.ceil(self.azimuth_jitter_degrees / FRAME_STEP_DEGREES))


def load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def _center_square(arr: np.ndarray) -> np.ndarray:
    h, w = arr.shape[:2]
    side = min(h, w)
    top, left = (h - side) // 2, (w - side) // 2
    return arr[top : top + side, left : left + side]


def _resize(arr: np.ndarray, size: int) -> np.ndarray:
    channels = []
    for c in range(3):
        im = Image.fromarray(arr[:, :, c].astype(np.float32), mode="F")
        channels.append(np.asarray(im.resize((size, size), Image.BILINEAR), dtype=np.float64))
    return np.clip(np.stack(channels, axis=2), 0.0, 1.0)


def preprocess_frame(image: np.ndarray) -> np.ndarray:
    """Center square -> 256 px -> 224 px center crop, float in [0, 1]."""
    square = _resize(_center_square(np.asarray(image, dtype=np.float64)), PATCH_RESIZE)
    margin = (PATCH_RESIZE - CROP_SIZE) // 2
    return square[margin : margin + CROP_SIZE, margin : margin + CROP_SIZE]


def _scaled(arr: np.ndarray, factor: float) -> np.ndarray:
    """Zoom in by cropping the central ``factor`` fraction."""
    square = _center_square(arr)
    side = square.shape[0]
    inner = max(CROP_SIZE, int(round(side * factor)))
    inner = min(inner, side)
    top = (side - inner) // 2
    return square[top : top + inner, top : top + inner]


def _corner_crop(arr: np.ndarray, corner: str, fraction: float = 0.9) -> np.ndarray:
    square = _center_square(arr)
    side = square.shape[0]
    inner = max(CROP_SIZE, int(round(side * fraction)))
    if corner == "tl":
        return square[:inner, :inner]
    return square[side - inner :, side - inner :]


def variant_images(image: np.ndarray, policy: AugmentationPolicy) -> list[tuple[str, np.ndarray]]:
    """(tag, source image) list for one frame: canonical first, then each
    enabled augmentation, deterministic order."""
    out: list[tuple[str, np.ndarray]] = [("canonical", image)]
    if policy.rotation:
        out.append(("rot90", np.rot90(image, 1, axes=(0, 1)).copy()))
        out.append(("rot180", np.rot90(image, 2, axes=(0, 1)).copy()))
        out.append(("rot270", np.rot90(image, 3, axes=(0, 1)).copy()))
    if policy.random_crop:
        out.append(("crop_tl", _corner_crop(image, "tl")))
        out.append(("crop_br", _corner_crop(image, "br")))
    if policy.scale_jitter > 0.0:
        out.append((f"scale_-{policy.scale_jitter:.0%}", _scaled(image, 1.0 - policy.scale_jitter)))
    return out


def neighbor_frame_path(path, offset: int) -> Path | None:
    """Path of the frame ``offset`` steps away under the frame_NNN naming
    convention, or None when the name does not follow it or the neighbor
    file does not exist."""
    p = Path(path)
    m = _FRAME_FILE_RE.match(p.name)
    if not m:
        return None
    num = int(m.group("num")) + offset
    if num < 1:
        return None
    candidate = p.with_name(f"{m.group('stem')}{num:03d}{m.group('ext')}")
    return candidate if candidate.exists() else None
