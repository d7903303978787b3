"""Frozen image-encoder backends.

Every backend maps a batch of preprocessed 224x224x3 float images in [0, 1]
to 512-dim float32 embeddings, deterministically (no dropout, fixed
weights).  ``vitb32`` wraps the pretrained joint image-text vision
transformer via torch/transformers and needs its weights available locally;
``hashproj`` is a dependency-free frozen random-projection encoder for
offline runs and tests.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np

EMBED_DIM = 512


class EmbeddingBackend(Protocol):
    name: str

    def embed_batch(self, images: list[np.ndarray]) -> np.ndarray:
        """(n, 512) float32 embeddings for preprocessed 224px frames."""
        ...


class HashProjBackend:
    """Deterministic stand-in encoder: 8x8 box-mean pooling to 28x28x3,
    then a frozen Gaussian projection and tanh squashing.

    Weights derive from a fixed seed, so embeddings are bit-identical
    across runs and machines with the same numpy/BLAS build.
    """

    name = "hashproj"
    _SEED = 0x5EED

    def __init__(self) -> None:
        rng = np.random.default_rng(self._SEED)
        pooled_dim = 28 * 28 * 3
        self._proj = rng.standard_normal((pooled_dim, EMBED_DIM)).astype(np.float32)
        self._proj /= np.sqrt(pooled_dim)

    def embed_batch(self, images: list[np.ndarray]) -> np.ndarray:
        out = np.empty((len(images), EMBED_DIM), dtype=np.float32)
        for i, img in enumerate(images):
            arr = np.asarray(img, dtype=np.float32)
            if arr.shape != (224, 224, 3):
                raise ValueError(f"expected preprocessed 224x224x3 frame, got {arr.shape}")
            pooled = arr.reshape(28, 8, 28, 8, 3).mean(axis=(1, 3)).reshape(-1)
            out[i] = np.tanh(pooled @ self._proj)
        return out


class Vitb32Backend:
    """Pretrained ViT-B/32 image encoder (512-dim projection head), frozen.

    ``model_ref`` may be a local directory with the saved weights or a hub
    id; loading happens lazily so the sidecar can run fully offline with
    other backends.
    """

    name = "vitb32"

    def __init__(self, model_ref: str = "openai/clip-vit-base-patch32") -> None:
        self._model_ref = model_ref
        self._model = None
        self._torch = None

    def _load(self):
        if self._model is not None:
            return
        try:
            import torch
            from transformers import CLIPVisionModelWithProjection
        except ImportError as exc:
            raise RuntimeError(
                "vitb32 backend needs torch and transformers installed "
                "(pip install 'mfx-extract[clip]')"
            ) from exc
        try:
            model = CLIPVisionModelWithProjection.from_pretrained(self._model_ref)
        except Exception as exc:
            raise RuntimeError(
                f"could not load pretrained weights from {self._model_ref!r}; "
                "download them or point --model-ref at a local directory"
            ) from exc
        model.eval()
        for p in model.parameters():
            p.requires_grad_(False)
        self._torch = torch
        self._model = model

    # channel statistics the encoder was trained with
    _MEAN = np.array([0.48145466, 0.4578275, 0.40821073], dtype=np.float32)
    _STD = np.array([0.26862954, 0.26130258, 0.27577711], dtype=np.float32)

    def embed_batch(self, images: list[np.ndarray]) -> np.ndarray:
        self._load()
        torch = self._torch
        batch = np.stack([np.asarray(im, dtype=np.float32) for im in images])
        batch = (batch - self._MEAN) / self._STD
        tensor = torch.from_numpy(batch.transpose(0, 3, 1, 2))
        with torch.no_grad():
            embeds = self._model(pixel_values=tensor).image_embeds
        return embeds.cpu().numpy().astype(np.float32)


_BACKENDS = {
    HashProjBackend.name: HashProjBackend,
    Vitb32Backend.name: Vitb32Backend,
}


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str, **kwargs) -> EmbeddingBackend:
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    return _BACKENDS[name](**kwargs)
