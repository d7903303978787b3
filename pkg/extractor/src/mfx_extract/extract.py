"""Extraction jobs: frame pairs -> augmentation variants -> embedded rows.

Each material row is the concatenation of the non-specular and the
near-specular frame embeddings (1024 dims).  Unreadable inputs are recorded
as per-item failures in the manifest and the job continues.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import EMBED_DIM, EmbeddingBackend
from .mfxio import write_mfx
from .preprocess import (
    AugmentationPolicy,
    load_image,
    neighbor_frame_path,
    preprocess_frame,
    variant_images,
)

EXTRACTOR_ID = "vitb32-concat"
ROW_DIMS = 2 * EMBED_DIM


@dataclass(frozen=True)
class FramePairSpec:
    """One material's input: paths to the two frames plus optional 1-based
    frame indices (used for azimuth-jitter naming and provenance)."""

    material_id: str
    non_specular: Path
    near_specular: Path
    frame_indices: tuple[int, int] | None = None


@dataclass
class ExtractJob:
    pairs: list[FramePairSpec]
    output: Path
    policy: AugmentationPolicy = field(default_factory=AugmentationPolicy)

    @staticmethod
    def read_pairs_csv(path, frames_root=None) -> list[FramePairSpec]:
        """pairs.csv columns: material_id, non_specular, near_specular
        [, frame_non, frame_near]; paths resolve against ``frames_root``."""
        root = Path(frames_root) if frames_root else Path(".")
        out = []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"material_id", "non_specular", "near_specular"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise ValueError(f"pairs CSV needs columns {sorted(required)}")
            for row in reader:
                indices = None
                if row.get("frame_non") and row.get("frame_near"):
                    indices = (int(row["frame_non"]), int(row["frame_near"]))
                out.append(
                    FramePairSpec(
                        material_id=row["material_id"],
                        non_specular=root / row["non_specular"],
                        near_specular=root / row["near_specular"],
                        frame_indices=indices,
                    )
                )
        return out


def _pair_variants(spec: FramePairSpec, policy: AugmentationPolicy):
    """(tag, img_non, img_near, frame_indices) per variant, canonical first.

    Image-space variants transform both frames consistently; azimuth jitter
    replaces the near-specular frame with a neighboring capture when the
    frame_NNN file naming makes that resolvable.
    """
    img_non = load_image(spec.non_specular)
    img_near = load_image(spec.near_specular)
    variants = []
    non_variants = variant_images(img_non, policy)
    near_variants = variant_images(img_near, policy)
    for (tag, v_non), (_, v_near) in zip(non_variants, near_variants):
        variants.append((tag, v_non, v_near, spec.frame_indices))

    jitter = policy.azimuth_jitter_frames()
    for offset in range(-jitter, jitter + 1):
        if offset == 0:
            continue
        neighbor = neighbor_frame_path(spec.near_specular, offset)
        tag = f"jitter{offset:+d}"
        if neighbor is None:
            variants.append((f"{tag}_fallback", img_non, img_near, spec.frame_indices))
            continue
        indices = spec.frame_indices
        if indices is not None:
            indices = (indices[0], indices[1] + offset)
        variants.append((tag, img_non, load_image(neighbor), indices))
    return variants


def run_extract(job: ExtractJob, backend: EmbeddingBackend) -> dict:
    """Embed every pair and write the MFX file.  Returns a summary dict."""
    materials: list[dict] = []
    failures: list[dict] = []
    rows: list[np.ndarray] = []

    for spec in job.pairs:
        try:
            variants = _pair_variants(spec, job.policy)
        except Exception as exc:
            failures.append({"material_id": spec.material_id, "error": str(exc)})
            continue
        images: list[np.ndarray] = []
        for _, v_non, v_near, _ in variants:
            images.append(preprocess_frame(v_non))
            images.append(preprocess_frame(v_near))
        embeds = backend.embed_batch(images)
        entry_variants = []
        for i, (tag, _, _, indices) in enumerate(variants):
            row = np.concatenate([embeds[2 * i], embeds[2 * i + 1]])
            entry_variants.append(
                {
                    "tag": tag,
                    "frame_indices": list(indices) if indices else None,
                    "row_index": len(rows),
                }
            )
            rows.append(row)
        materials.append({"material_id": spec.material_id, "variants": entry_variants})

    blob = np.vstack(rows) if rows else np.zeros((0, ROW_DIMS), dtype=np.float32)
    write_mfx(
        job.output,
        extractor_id=EXTRACTOR_ID,
        dims=ROW_DIMS,
        materials=materials,
        rows=blob,
        failures=failures,
    )
    return {
        "materials": len(materials),
        "rows": int(blob.shape[0]),
        "failures": len(failures),
        "output": str(job.output),
    }
