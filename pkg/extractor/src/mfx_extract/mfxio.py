"""Minimal MFX writer: JSON manifest at ``<path>``, raw little-endian
float32 blob at ``<path>.bin``.  Both files are written atomically
(temp file + rename).  Extraction failures are recorded in the manifest
under ``failures`` (readers ignore unknown manifest keys)."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

MFX_VERSION = "1"


def write_mfx(
    path,
    extractor_id: str,
    dims: int,
    materials: list[dict],
    rows: np.ndarray,
    failures: list[dict] | None = None,
) -> None:
    rows = np.ascontiguousarray(rows, dtype="<f4")
    if rows.ndim != 2 or rows.shape[1] != dims:
        raise ValueError(f"rows must be (n, {dims}), got {rows.shape}")
    indexed = sum(len(m["variants"]) for m in materials)
    if indexed != rows.shape[0]:
        raise ValueError(f"manifest indexes {indexed} rows, blob has {rows.shape[0]}")

    manifest = {
        "version": MFX_VERSION,
        "extractor_id": extractor_id,
        "dims": dims,
        "materials": materials,
        "byte_order": "little-endian",
        "dtype": "f32",
    }
    if failures:
        manifest["failures"] = failures

    path = Path(path)
    _atomic_write_bytes(Path(str(path) + ".bin"), rows.tobytes())
    _atomic_write_bytes(path, (json.dumps(manifest, indent=1) + "\n").encode("utf-8"))


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
