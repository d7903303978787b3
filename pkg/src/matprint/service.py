"""REST service exposing the fingerprint database, prediction and retrieval.

All state is loaded at startup and read-only afterwards; requests never
mutate it, so identical concurrent requests produce identical responses.
Errors map to {code, message} JSON bodies: invalid input is 400, unknown ids
404, missing model dependencies 503.
"""

from __future__ import annotations

import base64
import io
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import (
    DependencyUnavailableError,
    InvalidInputError,
    MatprintError,
    NotFoundError,
)
from .evalmetrics import classical_mds
from .features import (
    FramePair,
    STAT_FEATURE_SPEC_ID,
    extract_stat_features,
    normalize_wild_capture,
)
from .mfdb import MaterialDatabase
from .model import MlpModel, mlp_forward
from .schema import Fingerprint, SimilarityParams, clamp_values
from .similarity import retrieve, similarity_matrix, typicality


@dataclass(frozen=True, eq=False)
class ServiceState:
    """Immutable shared state: database, models keyed by the feature spec
    they consume, similarity defaults, precomputed typicality."""

    db: MaterialDatabase
    models: Mapping[str, MlpModel] = field(default_factory=dict)
    params: SimilarityParams = SimilarityParams()
    typicality_by_id: Mapping[str, float] = field(default_factory=dict)


def build_state(
    db: MaterialDatabase,
    models: Mapping[str, MlpModel] | None = None,
    params: SimilarityParams = SimilarityParams(),
) -> ServiceState:
    models = dict(models or {})
    for key, model in models.items():
        if model.feature_spec_id != key:
            raise InvalidInputError(
                f"model registered under {key!r} consumes {model.feature_spec_id!r}"
            )
        if model.schema_version != db.schema.version:
            raise InvalidInputError(
                f"model schema {model.schema_version!r} != db schema {db.schema.version!r}"
            )
    typ = {}
    if len(db.materials) >= 2:
        typ = {
            rec.material_id: typicality(db.materials, rec.material_id, params=params)
            for rec in db.materials
        }
    return ServiceState(db=db, models=models, params=params, typicality_by_id=typ)


class ImagePairBody(BaseModel):
    non_specular: str  # base64 PNG/JPEG
    near_specular: str


class PredictBody(BaseModel):
    vector: list[float] | None = None
    images: ImagePairBody | None = None
    extractor_id: str | None = None


class RetrieveBody(BaseModel):
    material_id: str | None = None
    fingerprint: dict | None = None
    k: int = 5
    alpha: float | None = None


def _decode_image(data_b64: str) -> np.ndarray:
    from PIL import Image

    try:
        raw = base64.b64decode(data_b64, validate=True)
        with Image.open(io.BytesIO(raw)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except Exception as exc:
        raise InvalidInputError(f"undecodable image payload: {exc}") from exc


def predict_fingerprint(
    state: ServiceState,
    *,
    vector: np.ndarray | None = None,
    frame_pair: FramePair | None = None,
    extractor_id: str | None = None,
) -> tuple[Fingerprint, str, str]:
    """Predict a clamped fingerprint from a feature vector or a frame pair.

    Returns (fingerprint, extractor_id, model schema version).  Image input
    runs the in-process statistical extractor; embedding models require a
    precomputed vector because the embedding extractor runs out of process.
    """
    if (vector is None) == (frame_pair is None):
        raise InvalidInputError("provide exactly one of vector or frame_pair")

    if vector is not None:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.ndim != 1:
            raise InvalidInputError("feature vector must be 1-D")
        if extractor_id is None:
            matches = [k for k, m in state.models.items() if m.spec.input_dim == vec.size]
            if not matches:
                raise DependencyUnavailableError(
                    f"no loaded model accepts {vec.size}-dim features"
                )
            extractor_id = sorted(matches)[0]
        model = state.models.get(extractor_id)
        if model is None:
            raise DependencyUnavailableError(f"model for {extractor_id!r} is not loaded")
        if vec.size != model.spec.input_dim:
            raise InvalidInputError(
                f"vector has {vec.size} dims, model expects {model.spec.input_dim}"
            )
        out = mlp_forward(model, vec)
    else:
        extractor_id = extractor_id or STAT_FEATURE_SPEC_ID
        if extractor_id != STAT_FEATURE_SPEC_ID:
            raise DependencyUnavailableError(
                f"image input for {extractor_id!r} needs the embedding sidecar; "
                "submit a precomputed vector instead"
            )
        model = state.models.get(STAT_FEATURE_SPEC_ID)
        if model is None:
            raise DependencyUnavailableError("statistical model is not loaded")
        out = mlp_forward(model, extract_stat_features(frame_pair).values)

    fp = Fingerprint(
        material_id="query",
        values=clamp_values(out),
        schema_version=model.schema_version,
    )
    return fp, extractor_id, model.schema_version


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="matprint", version="1.0")

    @app.exception_handler(MatprintError)
    async def matprint_error(request: Request, exc: MatprintError):
        if isinstance(exc, NotFoundError):
            status, code = 404, "not-found"
        elif isinstance(exc, DependencyUnavailableError):
            status, code = 503, "dependency-unavailable"
        else:
            status, code = 400, "invalid-input"
        return JSONResponse(status_code=status, content={"code": code, "message": str(exc)})

    @app.get("/v1/attributes")
    def get_attributes():
        return state.db.schema.to_dict()

    @app.get("/v1/materials")
    def get_materials():
        return [_record_json(state, rec) for rec in state.db.materials]

    @app.get("/v1/materials/{material_id}")
    def get_material(material_id: str):
        return _record_json(state, state.db.by_id(material_id))

    @app.post("/v1/predict")
    def post_predict(body: PredictBody):
        if body.images is not None and body.vector is not None:
            raise InvalidInputError("provide either vector or images, not both")
        if body.images is not None:
            pair = FramePair(
                non_specular=normalize_wild_capture(_decode_image(body.images.non_specular)),
                near_specular=normalize_wild_capture(_decode_image(body.images.near_specular)),
                source="smartphone",
            )
            fp, extractor_id, version = predict_fingerprint(
                state, frame_pair=pair, extractor_id=body.extractor_id
            )
        elif body.vector is not None:
            fp, extractor_id, version = predict_fingerprint(
                state, vector=np.asarray(body.vector), extractor_id=body.extractor_id
            )
        else:
            raise InvalidInputError("provide vector or images")
        return {
            "fingerprint": fp.to_dict(),
            "extractor_id": extractor_id,
            "model_version": version,
        }

    @app.post("/v1/retrieve")
    def post_retrieve(body: RetrieveBody):
        params = state.params if body.alpha is None else SimilarityParams(alpha=body.alpha)
        if (body.material_id is None) == (body.fingerprint is None):
            raise InvalidInputError("provide exactly one of material_id or fingerprint")
        if body.material_id is not None:
            query = state.db.by_id(body.material_id).fingerprint
        else:
            query = Fingerprint.from_dict({"material_id": "query", **body.fingerprint})
        ranked = retrieve(state.db.materials, query, k=body.k, params=params)
        return {
            "results": [
                {
                    "material_id": mid,
                    "score": score,
                    "typicality": state.typicality_by_id.get(mid),
                }
                for mid, score in ranked
            ]
        }

    @app.get("/v1/embedding")
    def get_embedding():
        if len(state.db.materials) < 2:
            raise InvalidInputError("embedding requires >= 2 materials")
        sm = similarity_matrix(state.db.materials, state.params)
        coords = classical_mds(sm, dims=2)
        return {
            "materials": state.db.ids(),
            "coordinates": [[float(x), float(y)] for x, y in coords],
        }

    return app


def _record_json(state: ServiceState, rec) -> dict:
    out = rec.to_dict()
    if out.get("typicality") is None:
        typ = state.typicality_by_id.get(rec.material_id)
        if typ is not None:
            out["typicality"] = typ
    return out
