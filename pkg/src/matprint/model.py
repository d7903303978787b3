"""Fingerprint predictors: a from-scratch fully connected MLP and a
k-nearest-neighbor interpolator, plus the stratified split and the
deterministic augmentation-variant selector used during training.

The MLP uses rectified-linear hidden layers and an identity output layer,
minimizes mean squared error with adaptive-moment gradient descent, and
early-stops on an internal validation slice.  Everything is seeded and
single-threaded, so runs are bit-reproducible on one platform.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateDataWarning,
    FormatError,
    InvalidInputError,
    TrainingDivergedError,
)
from .features import FRAME_STEP_DEGREES, STAT_FEATURE_SPEC_ID
from .schema import N_ATTRIBUTES

EMBEDDING_SPEC_ID = "vitb32-concat"

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths from input to output; the output is always the 16
    fingerprint attributes."""

    layer_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.layer_dims)
        object.__setattr__(self, "layer_dims", dims)
        if len(dims) < 2:
            raise InvalidInputError("spec needs at least input and output dims")
        if any(d < 1 for d in dims):
            raise InvalidInputError(f"layer dims must be positive: {dims}")
        if dims[-1] != N_ATTRIBUTES:
            raise InvalidInputError(f"output dim must be {N_ATTRIBUTES}, got {dims[-1]}")

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    def parameter_count(self) -> int:
        dims = self.layer_dims
        return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))


STAT_MLP_SPEC = MlpSpec((28, 16, 16, 16))
EMBEDDING_MLP_SPEC = MlpSpec((1024, 512, 512, 16))

_PRESET_SPECS = {
    STAT_FEATURE_SPEC_ID: STAT_MLP_SPEC,
    EMBEDDING_SPEC_ID: EMBEDDING_MLP_SPEC,
}


def preset_spec(feature_spec_id: str) -> MlpSpec:
    if feature_spec_id not in _PRESET_SPECS:
        raise InvalidInputError(f"no preset architecture for {feature_spec_id!r}")
    return _PRESET_SPECS[feature_spec_id]


@dataclass(frozen=True)
class AugmentationPolicy:
    """Which precomputed feature variants a trainer may sample.

    Rotation is meaningless for the rotation-invariant statistical features;
    scale jitter is capped at 5% and azimuthal jitter at 2.5 degrees
    (about +/-2 frames of the capture sweep).
    """

    random_crop: bool = False
    rotation: bool = False
    scale_jitter: float = 0.0
    azimuth_jitter_degrees: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.scale_jitter <= 0.05:
            raise InvalidInputError(f"scale_jitter must be in [0, 0.05], got {self.scale_jitter}")
        if not 0.0 <= self.azimuth_jitter_degrees <= 2.5:
            raise InvalidInputError(
                f"azimuth_jitter_degrees must be in [0, 2.5], got {self.azimuth_jitter_degrees}"
            )


def azimuth_jitter_frames(policy: AugmentationPolicy) -> int:
    """Frame-index radius corresponding to the policy's azimuth jitter
    (degrees divided by the per-frame step, rounded up)."""
    if policy.azimuth_jitter_degrees == 0.0:
        return 0
    return int(math.ceil(policy.azimuth_jitter_degrees / FRAME_STEP_DEGREES))


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for MLP fitting; the loss is mean squared error and
    the optimizer is adaptive-moment gradient descent."""

    learning_rate: float = 1e-3
    batch_size: int = 32
    max_epochs: int = 2000
    patience: int = 100
    val_fraction: float = 0.1
    seed: int = 0
    augmentation: AugmentationPolicy = field(default_factory=AugmentationPolicy)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.batch_size < 1 or self.max_epochs < 1:
            raise InvalidInputError("learning_rate, batch_size, max_epochs must be positive")
        if self.patience < 1 or not 0.0 < self.val_fraction < 1.0:
            raise InvalidInputError("patience must be >= 1 and val_fraction in (0, 1)")


@dataclass(eq=False)
class MlpModel:
    """Trained network: per-layer weight matrices (fan_in x fan_out) and bias
    vectors, bound to the feature spec it consumes.  ``input_mean/std`` carry
    the feature standardization fitted at training time (identity if None).
    Fingerprint outputs live on the trained [-1, 1] range."""

    spec: MlpSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feature_spec_id: str
    schema_version: str = "1.0"
    seed: int | None = None
    input_mean: np.ndarray | None = None
    input_std: np.ndarray | None = None
    train_summary: Mapping | None = None
    train_fingerprint_range: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self) -> None:
        dims = self.spec.layer_dims
        if len(self.weights) != len(dims) - 1 or len(self.biases) != len(dims) - 1:
            raise InvalidInputError("parameter count does not match spec")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (dims[i], dims[i + 1]) or b.shape != (dims[i + 1],):
                raise InvalidInputError(
                    f"layer {i}: expected {(dims[i], dims[i + 1])}/{(dims[i + 1],)}, "
                    f"got {w.shape}/{b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise InvalidInputError(f"layer {i} has non-finite parameters")


def _init_params(spec: MlpSpec, rng: np.random.Generator):
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); zero biases."""
    weights, biases = [], []
    dims = spec.layer_dims
    for i in range(len(dims) - 1):
        limit = math.sqrt(6.0 / (dims[i] + dims[i + 1]))
        weights.append(rng.uniform(-limit, limit, size=(dims[i], dims[i + 1])))
        biases.append(np.zeros(dims[i + 1]))
    return weights, biases


def _forward(weights, biases, x: np.ndarray) -> np.ndarray:
    h = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = h @ w + b
        if i != last:
            h = np.maximum(h, 0.0)
    return h


def mlp_forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Evaluate the network on one feature vector or a batch (rows).

    Applies the stored input standardization, then the affine/rectified
    chain with an identity output layer.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim not in (1, 2) or arr.shape[-1] != model.spec.input_dim:
        raise InvalidInputError(
            f"input dim mismatch: expected {model.spec.input_dim}, got shape {arr.shape}"
        )
    if model.input_mean is not None and model.input_std is not None:
        safe = np.where(model.input_std == 0.0, 1.0, model.input_std)
        arr = np.where(model.input_std == 0.0, 0.0, (arr - model.input_mean) / safe)
    out = _forward(model.weights, model.biases, arr)
    if not np.all(np.isfinite(out)):
        raise InvalidInputError("non-finite network output")
    return out


def _loss_and_grads(weights, biases, x: np.ndarray, y: np.ndarray):
    """MSE over all output elements, with gradients for every parameter."""
    acts = [x]
    pre = []
    h = x
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i != last else z
        acts.append(h)
    diff = acts[-1] - y
    loss = float(np.mean(diff**2))

    n_elems = diff.size
    delta = (2.0 / n_elems) * diff
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    for i in range(last, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (pre[i - 1] > 0.0)
    return loss, grads_w, grads_b


def gradient_check(
    spec: MlpSpec,
    x: np.ndarray,
    y: np.ndarray,
    epsilon: float = 1e-5,
    seed: int = 0,
    corrupt_layer: int | None = None,
) -> float:
    """Max relative error between analytic MSE gradients and central finite
    differences over every parameter of a freshly initialized network.

    ``corrupt_layer`` flips the sign of that layer's analytic weight gradient
    (negative control for the verification itself).  Intended for small specs
    (<= ~1000 parameters).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    rng = np.random.default_rng(seed)
    weights, biases = _init_params(spec, rng)
    _, grads_w, grads_b = _loss_and_grads(weights, biases, x, y)
    if corrupt_layer is not None:
        grads_w[corrupt_layer] = -grads_w[corrupt_layer]

    def loss_only() -> float:
        diff = _forward(weights, biases, x) - y
        return float(np.mean(diff**2))

    max_rel = 0.0
    for params, grads in ((weights, grads_w), (biases, grads_b)):
        for layer, grad in zip(params, grads):
            flat = layer.reshape(-1)
            gflat = grad.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon
                up = loss_only()
                flat[i] = orig - epsilon
                down = loss_only()
                flat[i] = orig
                numeric = (up - down) / (2.0 * epsilon)
                denom = max(abs(gflat[i]) + abs(numeric), 1e-8)
                max_rel = max(max_rel, abs(gflat[i] - numeric) / denom)
    return max_rel


def augment_indices(
    policy: AugmentationPolicy,
    seed: int,
    epoch: int,
    variant_counts: Sequence[int],
) -> np.ndarray:
    """Deterministic per-sample variant pick for one epoch.

    Sample i draws uniformly from its available variants with a generator
    keyed on (seed, epoch, i); with augmentation disabled or a single
    variant, the canonical row (index 0) is always chosen.
    """
    enabled = (
        policy.random_crop
        or policy.rotation
        or policy.scale_jitter > 0.0
        or policy.azimuth_jitter_degrees > 0.0
    )
    out = np.zeros(len(variant_counts), dtype=np.int64)
    if not enabled:
        return out
    for i, count in enumerate(variant_counts):
        if count < 1:
            raise InvalidInputError(f"sample {i} has no variants")
        if count == 1:
            continue
        rng = np.random.default_rng((seed, epoch, i))
        out[i] = int(rng.integers(count))
    return out


def _resolve_epoch_features(features, variant_rows, policy, seed, epoch):
    if variant_rows is None:
        return features
    counts = [len(rows) for rows in variant_rows]
    picks = augment_indices(policy, seed, epoch, counts)
    resolved = features.copy()
    for i, (rows, pick) in enumerate(zip(variant_rows, picks)):
        if pick >= len(rows):
            warnings.warn(
                f"sample {i}: variant {pick} missing, using canonical",
                DegenerateDataWarning,
                stacklevel=3,
            )
            pick = 0
        resolved[i] = rows[pick]
    return resolved


def mlp_train(
    features: np.ndarray,
    fingerprints: np.ndarray,
    config: TrainConfig = TrainConfig(),
    spec: MlpSpec | None = None,
    feature_spec_id: str = "custom",
    variant_rows: Sequence[np.ndarray] | None = None,
    standardize: bool = False,
) -> MlpModel:
    """Fit the MLP on aligned (features, fingerprints) arrays.

    A fraction of the samples is withheld as a validation slice; training
    stops when validation MSE has not improved for ``config.patience``
    epochs (or at ``max_epochs``) and returns the parameters at stopping
    time.  ``variant_rows`` optionally supplies per-sample augmentation
    variants (row 0 canonical) sampled anew each epoch.  With
    ``standardize`` the input features are z-scored and the transform is
    stored on the model.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(fingerprints, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise InvalidInputError(f"misaligned training arrays: {x.shape} vs {y.shape}")
    if y.shape[1] != N_ATTRIBUTES:
        raise InvalidInputError(f"fingerprints must have {N_ATTRIBUTES} columns")
    if x.shape[0] < 10:
        raise InvalidInputError("training requires at least 10 samples")
    if np.any(y < -1.0) or np.any(y > 1.0):
        raise InvalidInputError("fingerprint targets must lie in [-1, 1]")
    if spec is None:
        spec = MlpSpec((x.shape[1], 64, 64, N_ATTRIBUTES))
    if spec.input_dim != x.shape[1]:
        raise InvalidInputError(
            f"spec input dim {spec.input_dim} does not match features {x.shape[1]}"
        )

    input_mean = input_std = None
    if standardize:
        input_mean = x.mean(axis=0)
        input_std = x.std(axis=0)
        safe = np.where(input_std == 0.0, 1.0, input_std)
        x = np.where(input_std == 0.0, 0.0, (x - input_mean) / safe)
        if variant_rows is not None:
            variant_rows = [
                np.where(input_std == 0.0, 0.0, (rows - input_mean) / safe)
                for rows in variant_rows
            ]

    rng = np.random.default_rng(config.seed)
    n = x.shape[0]
    n_val = max(1, int(round(config.val_fraction * n)))
    perm = rng.permutation(n)
    val_idx, train_idx = perm[:n_val], perm[n_val:]

    weights, biases = _init_params(spec, rng)
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    def full_loss(idx) -> float:
        diff = _forward(weights, biases, x[idx]) - y[idx]
        return float(np.mean(diff**2))

    initial_loss = full_loss(train_idx)
    best_val = math.inf
    best_epoch = 0
    since_best = 0
    step = 0
    epochs_run = 0

    for epoch in range(config.max_epochs):
        epochs_run = epoch + 1
        x_epoch = _resolve_epoch_features(x, variant_rows, config.augmentation, config.seed, epoch)
        order = rng.permutation(train_idx)
        for start in range(0, order.size, config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads_w, grads_b = _loss_and_grads(weights, biases, x_epoch[batch], y[batch])
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, step {step} "
                    f"(lr={config.learning_rate}, batch={config.batch_size})"
                )
            step += 1
            b1c = 1.0 - _ADAM_BETA1**step
            b2c = 1.0 - _ADAM_BETA2**step
            for i in range(len(weights)):
                for param, grad, m, v in (
                    (weights[i], grads_w[i], m_w[i], v_w[i]),
                    (biases[i], grads_b[i], m_b[i], v_b[i]),
                ):
                    m *= _ADAM_BETA1
                    m += (1.0 - _ADAM_BETA1) * grad
                    v *= _ADAM_BETA2
                    v += (1.0 - _ADAM_BETA2) * grad**2
                    param -= config.learning_rate * (m / b1c) / (np.sqrt(v / b2c) + _ADAM_EPS)

        val_loss = full_loss(val_idx)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= config.patience:
                break

    final_loss = full_loss(train_idx)
    if final_loss > initial_loss:
        warnings.warn(
            f"training ended above its initial loss ({final_loss:.4g} > {initial_loss:.4g})",
            DegenerateDataWarning,
            stacklevel=2,
        )
    summary = {
        "initial_train_loss": initial_loss,
        "final_train_loss": final_loss,
        "best_val_loss": best_val,
        "best_epoch": best_epoch,
        "epochs_run": epochs_run,
        "train_samples": int(train_idx.size),
        "val_samples": int(n_val),
        "val_indices": sorted(int(i) for i in val_idx),
    }
    return MlpModel(
        spec=spec,
        weights=weights,
        biases=biases,
        feature_spec_id=feature_spec_id,
        seed=config.seed,
        input_mean=input_mean,
        input_std=input_std,
        train_summary=summary,
    )


def knn_predict(
    train_features: np.ndarray,
    train_fingerprints: np.ndarray,
    query: np.ndarray,
    k: int = 2,
) -> np.ndarray:
    """Inverse-distance weighted mean of the k nearest (L2) neighbors'
    fingerprints.  An exact feature match returns that neighbor's
    fingerprint verbatim; k=1 degenerates to nearest-neighbor lookup."""
    x = np.asarray(train_features, dtype=np.float64)
    y = np.asarray(train_fingerprints, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise InvalidInputError("empty training set")
    if y.shape[0] != x.shape[0]:
        raise InvalidInputError("features and fingerprints are misaligned")
    if not 1 <= k <= x.shape[0]:
        raise InvalidInputError(f"k must be in 1..{x.shape[0]}, got {k}")
    if q.shape != (x.shape[1],):
        raise InvalidInputError(f"query shape {q.shape} does not match features {x.shape[1]}")

    dists = np.linalg.norm(x - q, axis=1)
    exact = np.nonzero(dists < 1e-12)[0]
    if exact.size:
        return y[int(exact[0])].copy()
    order = np.lexsort((np.arange(dists.size), dists))[:k]
    if k == 1:
        return y[int(order[0])].copy()
    inv = 1.0 / dists[order]
    wsum = inv.sum()
    return (inv[:, None] * y[order]).sum(axis=0) / wsum


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/test material ids covering the whole database."""

    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    ratio: float
    stratify_by: str = "category"

    def __post_init__(self) -> None:
        if set(self.train_ids) & set(self.test_ids):
            raise InvalidInputError("train and test ids overlap")


def stratified_split(
    db: Sequence,
    ratio: float = 0.2,
    seed: int = 0,
) -> SplitSpec:
    """Per-category random test draw of round(ratio * count) samples.

    Every category of size >= 2 contributes at least one test and one train
    sample; singletons go to train with a warning.  ``db`` items need
    ``material_id`` and ``category`` attributes (or are (id, category)
    pairs).  Deterministic given the seed.
    """
    if not 0.0 < ratio < 1.0:
        raise InvalidInputError(f"ratio must be in (0, 1), got {ratio}")
    pairs = []
    for item in db:
        if hasattr(item, "material_id"):
            pairs.append((item.material_id, item.category))
        else:
            mid, cat = item
            pairs.append((str(mid), str(cat)))
    if not pairs:
        raise InvalidInputError("empty database")

    by_cat: dict[str, list[str]] = {}
    for mid, cat in pairs:
        by_cat.setdefault(cat, []).append(mid)

    rng = np.random.default_rng(seed)
    train: list[str] = []
    test: list[str] = []
    for cat in sorted(by_cat):
        ids = sorted(by_cat[cat])
        if len(ids) == 1:
            warnings.warn(
                f"category {cat!r} has a single material; kept in train",
                DegenerateDataWarning,
                stacklevel=2,
            )
            train.extend(ids)
            continue
        n_test = int(round(ratio * len(ids)))
        n_test = max(1, min(len(ids) - 1, n_test))
        shuffled = list(rng.permutation(ids))
        test.extend(shuffled[:n_test])
        train.extend(shuffled[n_test:])
    return SplitSpec(train_ids=tuple(sorted(train)), test_ids=tuple(sorted(test)), ratio=ratio)


# --- checkpoint format (.mfm): magic, JSON header, little-endian f32 blob ---

_MFM_MAGIC = b"MFM1"


def save_model(model: MlpModel, path) -> None:
    header = {
        "format_version": "1",
        "spec": {"layer_dims": list(model.spec.layer_dims)},
        "feature_spec_id": model.feature_spec_id,
        "schema_version": model.schema_version,
        "seed": model.seed,
        "train_summary": dict(model.train_summary) if model.train_summary else None,
        "train_fingerprint_range": list(model.train_fingerprint_range),
        "input_standardizer": (
            None
            if model.input_mean is None
            else {
                "mean": [float(v) for v in model.input_mean],
                "std": [float(v) for v in model.input_std],
            }
        ),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    blob = bytearray()
    for w, b in zip(model.weights, model.biases):
        blob += np.ascontiguousarray(w, dtype="<f4").tobytes()
        blob += np.ascontiguousarray(b, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MFM_MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(blob)


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MFM_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r} at offset 0")
        (header_len,) = struct.unpack("<I", fh.read(4))
        header_bytes = fh.read(header_len)
        if len(header_bytes) != header_len:
            raise FormatError(
                f"{path}: truncated header, expected {header_len} bytes, got {len(header_bytes)}"
            )
        try:
            header = json.loads(header_bytes.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: malformed header: {exc}") from exc
        blob = fh.read()

    spec = MlpSpec(tuple(header["spec"]["layer_dims"]))
    dims = spec.layer_dims
    expected = sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1)) * 4
    if len(blob) != expected:
        raise FormatError(
            f"{path}: parameter blob has {len(blob)} bytes, expected {expected} "
            f"at offset {8 + header_len}"
        )
    weights, biases = [], []
    offset = 0
    raw = np.frombuffer(blob, dtype="<f4")
    for i in range(len(dims) - 1):
        n_w = dims[i] * dims[i + 1]
        weights.append(raw[offset : offset + n_w].astype(np.float64).reshape(dims[i], dims[i + 1]))
        offset += n_w
        biases.append(raw[offset : offset + dims[i + 1]].astype(np.float64))
        offset += dims[i + 1]

    std = header.get("input_standardizer")
    return MlpModel(
        spec=spec,
        weights=weights,
        biases=biases,
        feature_spec_id=header["feature_spec_id"],
        schema_version=header.get("schema_version", "1.0"),
        seed=header.get("seed"),
        input_mean=None if std is None else np.asarray(std["mean"], dtype=np.float64),
        input_std=None if std is None else np.asarray(std["std"], dtype=np.float64),
        train_summary=header.get("train_summary"),
        train_fingerprint_range=tuple(header.get("train_fingerprint_range", (-1.0, 1.0))),
    )
