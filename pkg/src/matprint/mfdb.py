"""MFDB fingerprint database file: one UTF-8 JSON document holding the
attribute schema and all material records.  Unknown fields are preserved on
round-trip; numbers serialize at full double precision."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import FormatError, NotFoundError
from .schema import (
    AttributeSchema,
    DEFAULT_CATEGORIES,
    MaterialRecord,
    default_schema,
    validate_records,
)

MFDB_VERSION = "1"

_KNOWN_DOC_FIELDS = {"version", "schema", "materials"}


@dataclass(frozen=True, eq=False)
class MaterialDatabase:
    """In-memory MFDB document."""

    schema: AttributeSchema
    materials: tuple[MaterialRecord, ...]
    version: str = MFDB_VERSION
    extra: Mapping = field(default_factory=dict)

    def by_id(self, material_id: str) -> MaterialRecord:
        for rec in self.materials:
            if rec.material_id == material_id:
                return rec
        raise NotFoundError(f"unknown material_id {material_id!r}")

    def ids(self) -> list[str]:
        return [rec.material_id for rec in self.materials]

    def to_dict(self) -> dict:
        out = dict(self.extra)
        out["version"] = self.version
        out["schema"] = self.schema.to_dict()
        out["materials"] = [rec.to_dict() for rec in self.materials]
        return out


def build_database(
    records: Sequence[MaterialRecord],
    schema: AttributeSchema | None = None,
    categories: Sequence[str] = DEFAULT_CATEGORIES,
) -> MaterialDatabase:
    schema = schema or default_schema()
    validate_records(records, categories)
    return MaterialDatabase(schema=schema, materials=tuple(records))


def save_mfdb(db: MaterialDatabase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(db.to_dict(), fh, indent=1)
        fh.write("\n")


def load_mfdb(path, categories: Sequence[str] = DEFAULT_CATEGORIES) -> MaterialDatabase:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON at offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: MFDB document must be a JSON object")
    version = doc.get("version")
    if version != MFDB_VERSION:
        raise FormatError(f"{path}: unsupported MFDB version {version!r}")
    if "schema" not in doc or "materials" not in doc:
        raise FormatError(f"{path}: MFDB document missing 'schema' or 'materials'")
    schema = AttributeSchema.from_dict(doc["schema"])
    records = tuple(MaterialRecord.from_dict(m) for m in doc["materials"])
    validate_records(records, categories)
    extra = {k: v for k, v in doc.items() if k not in _KNOWN_DOC_FIELDS}
    return MaterialDatabase(schema=schema, materials=records, version=version, extra=extra)
