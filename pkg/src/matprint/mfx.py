"""MFX feature exchange format: a JSON manifest next to a raw little-endian
float32 blob (``<path>`` and ``<path>.bin``).

The manifest indexes each material's feature-vector variants into blob rows;
the blob is row-major [total_variant_rows x dims].  Round-trips are
bit-exact.  Known extractors pin their dimensionality (statistical: 28,
concatenated embedding pairs: 1024)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, InvalidInputError, NotFoundError

MFX_VERSION = "1"
CANONICAL_TAG = "canonical"

#: dims pinned per extractor id
EXTRACTOR_DIMS = {"S-v1": 28, "vitb32-concat": 1024}


@dataclass(frozen=True)
class MfxVariant:
    tag: str
    row_index: int
    frame_indices: tuple[int, int] | None = None


@dataclass(frozen=True)
class MfxMaterial:
    material_id: str
    variants: tuple[MfxVariant, ...]


@dataclass(eq=False)
class FeatureTable:
    """In-memory MFX contents."""

    extractor_id: str
    dims: int
    materials: tuple[MfxMaterial, ...]
    rows: np.ndarray  # (total_rows, dims) float32

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype="<f4")
        if rows.ndim != 2 or rows.shape[1] != self.dims:
            raise InvalidInputError(f"rows must be (n, {self.dims}), got {rows.shape}")
        total = rows.shape[0]
        seen: set[int] = set()
        count = 0
        for mat in self.materials:
            if not mat.variants:
                raise InvalidInputError(f"material {mat.material_id!r} has no variants")
            for var in mat.variants:
                if not 0 <= var.row_index < total:
                    raise InvalidInputError(
                        f"row_index {var.row_index} out of range 0..{total - 1}"
                    )
                if var.row_index in seen:
                    raise InvalidInputError(f"duplicate row_index {var.row_index}")
                seen.add(var.row_index)
                count += 1
        if count != total:
            raise InvalidInputError(f"blob has {total} rows but manifest indexes {count}")
        if self.extractor_id in EXTRACTOR_DIMS and EXTRACTOR_DIMS[self.extractor_id] != self.dims:
            raise InvalidInputError(
                f"extractor {self.extractor_id!r} requires dims "
                f"{EXTRACTOR_DIMS[self.extractor_id]}, got {self.dims}"
            )
        object.__setattr__(self, "rows", rows)

    def material_ids(self) -> list[str]:
        return [m.material_id for m in self.materials]

    def row(self, material_id: str, tag: str = CANONICAL_TAG) -> np.ndarray:
        for mat in self.materials:
            if mat.material_id == material_id:
                for var in mat.variants:
                    if var.tag == tag:
                        return self.rows[var.row_index]
                raise NotFoundError(f"material {material_id!r} has no variant {tag!r}")
        raise NotFoundError(f"unknown material_id {material_id!r}")

    def variant_matrix(self, material_id: str) -> np.ndarray:
        """All variant rows of one material, canonical first."""
        for mat in self.materials:
            if mat.material_id == material_id:
                ordered = sorted(mat.variants, key=lambda v: (v.tag != CANONICAL_TAG, v.tag))
                return self.rows[[v.row_index for v in ordered]]
        raise NotFoundError(f"unknown material_id {material_id!r}")


def table_from_matrix(
    extractor_id: str,
    material_ids: Sequence[str],
    matrix: np.ndarray,
    frame_indices: Sequence[tuple[int, int] | None] | None = None,
) -> FeatureTable:
    """Single-variant table: one canonical row per material."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != len(material_ids):
        raise InvalidInputError(f"matrix shape {matrix.shape} does not match ids")
    materials = []
    for i, mid in enumerate(material_ids):
        fi = frame_indices[i] if frame_indices else None
        materials.append(
            MfxMaterial(material_id=str(mid), variants=(MfxVariant(CANONICAL_TAG, i, fi),))
        )
    return FeatureTable(
        extractor_id=extractor_id,
        dims=matrix.shape[1],
        materials=tuple(materials),
        rows=matrix,
    )


def blob_path(path) -> Path:
    return Path(str(path) + ".bin")


def save_mfx(table: FeatureTable, path) -> None:
    manifest = {
        "version": MFX_VERSION,
        "extractor_id": table.extractor_id,
        "dims": table.dims,
        "materials": [
            {
                "material_id": m.material_id,
                "variants": [
                    {
                        "tag": v.tag,
                        "frame_indices": list(v.frame_indices) if v.frame_indices else None,
                        "row_index": v.row_index,
                    }
                    for v in m.variants
                ],
            }
            for m in table.materials
        ],
        "byte_order": "little-endian",
        "dtype": "f32",
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    with open(blob_path(path), "wb") as fh:
        fh.write(np.ascontiguousarray(table.rows, dtype="<f4").tobytes())


def load_mfx(path) -> FeatureTable:
    try:
        with open(path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON at offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(manifest, dict) or manifest.get("version") != MFX_VERSION:
        raise FormatError(f"{path}: unsupported MFX manifest version")
    if manifest.get("byte_order") != "little-endian" or manifest.get("dtype") != "f32":
        raise FormatError(f"{path}: blob must be little-endian f32")
    try:
        extractor_id = str(manifest["extractor_id"])
        dims = int(manifest["dims"])
        materials = tuple(
            MfxMaterial(
                material_id=str(m["material_id"]),
                variants=tuple(
                    MfxVariant(
                        tag=str(v["tag"]),
                        row_index=int(v["row_index"]),
                        frame_indices=(
                            tuple(v["frame_indices"]) if v.get("frame_indices") else None
                        ),
                    )
                    for v in m["variants"]
                ),
            )
            for m in manifest["materials"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed manifest: {exc}") from exc

    total_rows = sum(len(m.variants) for m in materials)
    expected_bytes = total_rows * dims * 4
    bpath = blob_path(path)
    try:
        raw = bpath.read_bytes()
    except FileNotFoundError as exc:
        raise FormatError(f"{bpath}: missing blob file") from exc
    if len(raw) != expected_bytes:
        raise FormatError(
            f"{bpath}: expected {expected_bytes} bytes ({total_rows} rows x {dims} dims x 4), "
            f"got {len(raw)}"
        )
    rows = np.frombuffer(raw, dtype="<f4").reshape(total_rows, dims)
    try:
        return FeatureTable(extractor_id=extractor_id, dims=dims, materials=materials, rows=rows)
    except InvalidInputError as exc:
        raise FormatError(f"{path}: {exc}") from exc
