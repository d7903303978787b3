"""Batch embedding extractor for material frame pairs.

Reads (non-specular, near-specular) image pairs, embeds each frame with a
frozen image encoder, concatenates the two 512-dim vectors into one
1024-dim row per variant, and writes MFX feature files consumed by the
fingerprint engine.  Augmentation variants (rotation, crop, scale, azimuth
frame jitter) are materialized here so the trainer stays image-free.
"""

__version__ = "0.1.0"

from .backends import EmbeddingBackend, HashProjBackend, available_backends, get_backend
from .extract import ExtractJob, FramePairSpec, run_extract
from .preprocess import AugmentationPolicy, preprocess_frame, variant_images

__all__ = [
    "AugmentationPolicy",
    "EmbeddingBackend",
    "ExtractJob",
    "FramePairSpec",
    "HashProjBackend",
    "available_backends",
    "get_backend",
    "preprocess_frame",
    "run_extract",
    "variant_images",
]
