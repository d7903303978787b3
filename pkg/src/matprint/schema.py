"""Core data model: attribute schema, fingerprints, material records.

A fingerprint is a vector of 16 perceptual attribute values on a normalized
[-1, 1] scale, one value per attribute of the active schema.  Attribute ids
are 1-based and stable; positions in the value vector are ``id - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError

N_ATTRIBUTES = 16

SCHEMA_VERSION = "1.0"

#: Closed label set accepted for :attr:`MaterialRecord.category`.
DEFAULT_CATEGORIES = (
    "fabric",
    "wood",
    "paper",
    "coating",
    "plastic",
    "leather",
    "metal",
    "carpet",
    "ceramics",
    "glass",
    "sand",
    "soil",
    "other",
)


@dataclass(frozen=True)
class AttributeDef:
    """One perceptual attribute with its slider anchors and rating question."""

    id: int
    name: str
    boundary_low: str
    boundary_high: str
    question: str


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered set of exactly 16 attributes.

    Invariants enforced on construction: 16 entries, ids are 1..16 in order,
    names unique.
    """

    attributes: tuple[AttributeDef, ...]
    version: str = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if len(self.attributes) != N_ATTRIBUTES:
            raise InvalidInputError(
                f"schema must define exactly {N_ATTRIBUTES} attributes, "
                f"got {len(self.attributes)}"
            )
        for pos, attr in enumerate(self.attributes, start=1):
            if attr.id != pos:
                raise InvalidInputError(
                    f"attribute ids must be 1..{N_ATTRIBUTES} in order; "
                    f"position {pos} has id {attr.id}"
                )
        names = [a.name for a in self.attributes]
        if len(set(names)) != N_ATTRIBUTES:
            raise InvalidInputError("attribute names must be unique")

    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def by_id(self, attribute_id: int) -> AttributeDef:
        if not 1 <= attribute_id <= N_ATTRIBUTES:
            raise InvalidInputError(f"attribute_id out of range: {attribute_id}")
        return self.attributes[attribute_id - 1]

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "attributes": [
                {
                    "id": a.id,
                    "name": a.name,
                    "boundary_low": a.boundary_low,
                    "boundary_high": a.boundary_high,
                    "question": a.question,
                }
                for a in self.attributes
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "AttributeSchema":
        try:
            attrs = tuple(
                AttributeDef(
                    id=int(a["id"]),
                    name=str(a["name"]),
                    boundary_low=str(a["boundary_low"]),
                    boundary_high=str(a["boundary_high"]),
                    question=str(a["question"]),
                )
                for a in data["attributes"]
            )
            version = str(data.get("version", SCHEMA_VERSION))
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed attribute schema: {exc}") from exc
        return cls(attributes=attrs, version=version)


_DEFAULT_SCHEMA: AttributeSchema | None = None


def default_schema() -> AttributeSchema:
    """The bundled 16-attribute schema (cached)."""
    global _DEFAULT_SCHEMA
    if _DEFAULT_SCHEMA is None:
        text = resources.files("matprint.data").joinpath("attributes_v1.json").read_text("utf-8")
        _DEFAULT_SCHEMA = AttributeSchema.from_dict(json.loads(text))
    return _DEFAULT_SCHEMA


@dataclass(frozen=True)
class SimilarityParams:
    """Weight between the correlation term and the L1 term of the similarity
    score; ``alpha=1`` scores proportional shape only, ``alpha=0`` scores
    absolute closeness only."""

    alpha: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must be in [0, 1], got {self.alpha}")


def _as_value_vector(values: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (N_ATTRIBUTES,):
        raise InvalidInputError(f"{what} must have length {N_ATTRIBUTES}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{what} must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class Fingerprint:
    """Per-material vector of 16 attribute values in [-1, 1].

    ``stderr`` optionally carries the standard error of each mean rating on
    the same rescaled axis (non-negative).
    """

    material_id: str
    values: np.ndarray
    stderr: np.ndarray | None = None
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self) -> None:
        values = _as_value_vector(self.values, "fingerprint values")
        if np.any(values < -1.0) or np.any(values > 1.0):
            raise InvalidInputError(
                f"fingerprint values for {self.material_id!r} must lie in [-1, 1]"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.stderr is not None:
            stderr = _as_value_vector(self.stderr, "fingerprint stderr")
            if np.any(stderr < 0.0):
                raise InvalidInputError("fingerprint stderr must be non-negative")
            stderr.setflags(write=False)
            object.__setattr__(self, "stderr", stderr)

    def to_dict(self) -> dict:
        out: dict = {
            "material_id": self.material_id,
            "values": [float(v) for v in self.values],
            "schema_version": self.schema_version,
        }
        if self.stderr is not None:
            out["stderr"] = [float(v) for v in self.stderr]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "Fingerprint":
        try:
            return cls(
                material_id=str(data["material_id"]),
                values=data["values"],
                stderr=data.get("stderr"),
                schema_version=str(data.get("schema_version", SCHEMA_VERSION)),
            )
        except KeyError as exc:
            raise InvalidInputError(f"malformed fingerprint: missing {exc}") from exc


def clamp_values(values: np.ndarray) -> np.ndarray:
    """Clip raw predictions into the fingerprint range [-1, 1] (monotone)."""
    return np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class MaterialRecord:
    """A material in the database: id, category label, fingerprint, optional
    media references, optional typicality score.  Unknown document fields are
    carried in ``extra`` so file round-trips preserve them."""

    material_id: str
    category: str
    fingerprint: Fingerprint
    media: Mapping | None = None
    typicality: float | None = None
    extra: Mapping = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = dict(self.extra)
        out["material_id"] = self.material_id
        out["category"] = self.category
        out["fingerprint"] = self.fingerprint.to_dict()
        if self.media is not None:
            out["media"] = dict(self.media)
        if self.typicality is not None:
            out["typicality"] = float(self.typicality)
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "MaterialRecord":
        known = {"material_id", "category", "fingerprint", "media", "typicality"}
        try:
            fingerprint = Fingerprint.from_dict(data["fingerprint"])
            return cls(
                material_id=str(data["material_id"]),
                category=str(data["category"]),
                fingerprint=fingerprint,
                media=data.get("media"),
                typicality=data.get("typicality"),
                extra={k: v for k, v in data.items() if k not in known},
            )
        except KeyError as exc:
            raise InvalidInputError(f"malformed material record: missing {exc}") from exc


def validate_records(
    records: Sequence[MaterialRecord],
    categories: Sequence[str] = DEFAULT_CATEGORIES,
) -> None:
    """Check id uniqueness and category membership for a database."""
    seen: set[str] = set()
    allowed = set(categories)
    for rec in records:
        if rec.material_id in seen:
            raise InvalidInputError(f"duplicate material_id {rec.material_id!r}")
        seen.add(rec.material_id)
        if rec.category not in allowed:
            raise InvalidInputError(
                f"material {rec.material_id!r} has unknown category {rec.category!r}"
            )
