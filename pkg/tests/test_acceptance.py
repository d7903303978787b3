"""Acceptance suite: one test per release criterion, each printing a
[PASS] line with its measured result.  Tolerances are pinned here and
nowhere else.  The dataset-scale criterion runs only when the environment
variable MATPRINT_DATASET points at a directory with ratings.csv,
categories.csv and embeddings.mfx (plus optionally stat.mfx).
"""

import hashlib
import json
import os
import threading
import time
from pathlib import Path

import numpy as np
import pytest

import matprint
from matprint import (
    Fingerprint,
    MlpSpec,
    RawRating,
    SimilarityParams,
    TrainConfig,
    build_database,
    build_fingerprints,
    classical_mds,
    corr_ratings,
    corr_similarity_matrices,
    extract_stat_features,
    fleiss_kappa,
    gradient_check,
    knn_predict,
    load_mfdb,
    load_mfx,
    mae,
    mlp_forward,
    mlp_train,
    rci,
    save_mfdb,
    save_mfx,
    similarity,
    stratified_split,
    table_from_matrix,
    topk_overlap,
)
from matprint.features import CANONICAL_SIZE, FRAME_FEATURE_NAMES, FramePair
from matprint.schema import DEFAULT_CATEGORIES
from conftest import random_fingerprint, random_records
from oracles import (
    classical_mds_distances,
    fft_band_powers,
    fleiss_kappa_definition,
    grating_predicted_band,
    knn_inverse_distance,
    pearson_two_pass,
    similarity_direct,
    spearman_scipy,
)

F = {name: i for i, name in enumerate(FRAME_FEATURE_NAMES)}


def _report(name: str, detail: str) -> None:
    print(f"[PASS] {name}: {detail}")


def test_eq1_oracle_equivalence():
    rng = np.random.default_rng(101)
    params = SimilarityParams(0.5)
    start = time.perf_counter()
    max_diff = 0.0
    for _ in range(1000):
        f1 = random_fingerprint(rng, "a")
        f2 = random_fingerprint(rng, "b")
        got = similarity(f1, f2, params)
        want = similarity_direct(f1.values, f2.values, params.alpha)
        max_diff = max(max_diff, abs(got - want))
    elapsed = time.perf_counter() - start
    assert max_diff < 1e-12
    assert elapsed < 1.0
    _report("similarity oracle equivalence", f"max diff {max_diff:.2e} in {elapsed:.2f}s")


def test_similarity_identity_and_symmetry():
    rng = np.random.default_rng(102)
    for _ in range(1000):
        f = random_fingerprint(rng, "a")
        g = random_fingerprint(rng, "b")
        params = SimilarityParams(float(rng.uniform(0, 1)))
        assert similarity(f, f, params) == 1.0
        assert similarity(f, g, params) == similarity(g, f, params)
    _report("similarity identity/symmetry", "1000 random cases exact")


def test_ratings_pipeline_synthetic_panel():
    rng = np.random.default_rng(103)
    start = time.perf_counter()
    n_materials, n_raters, sigma = 50, 20, 0.1
    truth = rng.uniform(0, 1, size=(n_materials, 16))
    adversaries = {"r03", "r11"}
    ratings = []
    for r in range(n_raters):
        rater = f"r{r:02d}"
        sign = -1.0 if rater in adversaries else 1.0
        scale = rng.uniform(20.0, 60.0)
        shift = rng.uniform(10.0, 50.0)
        for m in range(n_materials):
            for a in range(16):
                value = scale * sign * truth[m, a] + shift + rng.normal(0, scale * sigma)
                ratings.append(RawRating(rater, f"mat{m:03d}", a + 1, float(value)))

    normalized = matprint.zscore_per_participant(ratings)
    groups = {}
    for rating in normalized:
        groups.setdefault((rating.participant_id, rating.attribute_id), []).append(rating.value)
    for values in groups.values():
        assert abs(float(np.mean(values))) < 1e-9
        assert abs(float(np.std(values, ddof=1)) - 1.0) < 1e-9

    fingerprints, report = build_fingerprints(ratings)
    excluded = {pid for pid, _, _ in report.excluded}
    assert excluded == adversaries
    assert len(fingerprints) == n_materials

    values = np.array([fp.values for fp in fingerprints])
    worst = min(spearman_scipy(values[:, a], truth[:, a]) for a in range(16))
    elapsed = time.perf_counter() - start
    assert worst >= 0.95
    assert elapsed < 10.0
    _report(
        "ratings pipeline",
        f"planted raters excluded, worst per-attribute Spearman {worst:.3f} in {elapsed:.1f}s",
    )


def test_fleiss_kappa_criteria():
    perfect = np.zeros((12, 5), dtype=int)
    for i in range(12):
        perfect[i, i % 5] = 7
    assert fleiss_kappa(perfect) == 1.0

    rng = np.random.default_rng(104)
    adversarial = rng.multinomial(6, [0.3, 0.25, 0.25, 0.2], size=9)
    diff = abs(fleiss_kappa(adversarial) - fleiss_kappa_definition(adversarial))
    assert diff < 1e-9
    _report("fleiss kappa", f"perfect fixture 1.0 exact, oracle diff {diff:.2e}")


def test_mlp_gradient_check():
    rng = np.random.default_rng(105)
    spec = MlpSpec((28, 16, 16, 16))
    start = time.perf_counter()
    worst = 0.0
    for trial in range(20):
        x = rng.normal(size=(1, 28))
        y = rng.uniform(-1, 1, size=(1, 16))
        worst = max(worst, gradient_check(spec, x, y, seed=trial))
    assert worst < 1e-4
    x = rng.normal(size=(1, 28))
    y = rng.uniform(-1, 1, size=(1, 16))
    corrupted = gradient_check(spec, x, y, seed=0, corrupt_layer=1)
    elapsed = time.perf_counter() - start
    assert corrupted > 0.1
    assert elapsed < 5.0
    _report(
        "mlp gradient check",
        f"max relative error {worst:.2e}, sign-flip control {corrupted:.2f}, {elapsed:.1f}s",
    )


def _synthetic_recovery_data(seed=424242, n=300, latents=3):
    """Fixed smooth nonlinear map from embedding-like features (latent
    directions dominate, mild nuisance) to fingerprints, noise sigma 0.05."""
    gen = np.random.default_rng(seed)
    z = gen.normal(size=(n, latents))
    embed = gen.normal(scale=1.0, size=(latents, 32))
    x = z @ embed + gen.normal(scale=0.15, size=(n, 32))
    mix = gen.normal(scale=0.5, size=(latents, 16))
    curve = gen.normal(scale=0.5, size=(latents, 16))
    y_clean = np.tanh(z @ mix + 0.25 * (z**2 - 1.0) @ curve)
    y = np.clip(y_clean + gen.normal(scale=0.05, size=y_clean.shape), -1, 1)
    return x, y


def test_synthetic_end_to_end_recovery():
    start = time.perf_counter()
    x, y = _synthetic_recovery_data()
    cats = [c for c in DEFAULT_CATEGORIES if c != "other"][:8]
    pairs = [(f"m{i:03d}", cats[i % 8]) for i in range(300)]
    split = stratified_split(pairs, ratio=0.2, seed=7)
    train_i = np.array([int(m[1:]) for m in split.train_ids])
    test_i = np.array([int(m[1:]) for m in split.test_ids])
    assert len(test_i) == 60

    config = TrainConfig(max_epochs=2000, seed=99, patience=300, learning_rate=3e-3)
    model = mlp_train(x[train_i], y[train_i], config, spec=MlpSpec((32, 64, 64, 16)))
    pred = np.clip(mlp_forward(model, x[test_i]), -1, 1)
    r_a = corr_ratings(pred, y[test_i])
    err = mae(pred, y[test_i])
    assert r_a >= 0.90
    assert err <= 0.10

    model2 = mlp_train(x[train_i], y[train_i], config, spec=MlpSpec((32, 64, 64, 16)))
    for w1, w2 in zip(model.weights, model2.weights):
        np.testing.assert_array_equal(w1, w2)
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0
    _report(
        "synthetic end-to-end recovery",
        f"held-out R_A {r_a:.3f}, MAE {err:.3f}, bit-reproducible, {elapsed:.0f}s",
    )


def test_2nn_contracts():
    rng = np.random.default_rng(106)
    x = rng.normal(size=(50, 12))
    y = rng.uniform(-1, 1, size=(50, 16))
    np.testing.assert_allclose(knn_predict(x, y, x[31], k=2), y[31], atol=1e-6)
    worst = 0.0
    for _ in range(100):
        q = rng.normal(size=12)
        got = knn_predict(x, y, q, k=2)
        want = knn_inverse_distance(x, y, q, 2)
        worst = max(worst, float(np.abs(got - want).max()))
    assert worst < 1e-9
    _report("2nn contracts", f"exact match verbatim, oracle max diff {worst:.2e}")


def test_metric_battery():
    rng = np.random.default_rng(107)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(20, 60))
        ids = [f"m{i:03d}" for i in range(n)]
        pred = np.round(rng.uniform(size=n), 2)  # coarse grid plants ties
        gt = np.round(rng.uniform(size=n), 2)

        k = 5
        top = lambda v: {ids[i] for i in sorted(range(n), key=lambda i: (-v[i], ids[i]))[:k]}
        assert topk_overlap(pred, gt, k=k, ids=ids) == len(top(pred) & top(gt))

        first = min(100, n)
        subset = sorted(range(n), key=lambda i: (-gt[i], ids[i]))[:first]
        want = spearman_scipy(gt[subset], pred[subset])
        worst = max(worst, abs(rci(pred, gt, first=first, ids=ids) - want))

        a = rng.uniform(-1, 1, size=(10, 16))
        b = rng.uniform(-1, 1, size=(10, 16))
        worst = max(worst, abs(mae(a, b) - float(np.mean(np.abs(a - b)))))
        worst = max(
            worst, abs(corr_ratings(a, b) - pearson_two_pass(a.reshape(-1), b.reshape(-1)))
        )
        sa = (a @ a.T + (a @ a.T).T) / 2
        sb = (b @ b.T + (b @ b.T).T) / 2
        iu = np.triu_indices(10, k=1)
        worst = max(
            worst,
            abs(corr_similarity_matrices(sa, sb) - pearson_two_pass(sa[iu], sb[iu])),
        )
    assert worst < 1e-12

    for _ in range(20):
        gt = rng.uniform(size=40)
        pred = rng.uniform(size=40)
        base = rci(pred, gt, first=25)
        warped = rci(np.exp(2.0 * pred), gt, first=25)
        assert abs(base - warped) < 1e-12
    _report("metric battery", f"100 oracle instances, max diff {worst:.2e}; rci monotone-invariant")


def test_classical_mds_recovery():
    rng = np.random.default_rng(108)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(5, 20))
        pts = rng.uniform(-0.45, 0.45, size=(n, 2))
        dist = classical_mds_distances(pts)
        coords = classical_mds(1.0 - dist, dims=2)
        worst = max(worst, float(np.abs(classical_mds_distances(coords) - dist).max()))
    # pairwise distances are rigid-motion invariant, so matching them is the
    # same as matching after optimal rigid alignment
    assert worst < 1e-6
    _report("classical mds", f"20 planar configs, max distance error {worst:.2e}")


def test_stat_feature_criteria():
    gray = np.full((CANONICAL_SIZE, CANONICAL_SIZE, 3), 0.5)
    fv = extract_stat_features(FramePair(non_specular=gray, near_specular=gray))
    expected = np.zeros(14)
    expected[F["luminance_mean"]] = 0.5
    expected[F["dominant_colors"]] = 1.0
    np.testing.assert_array_equal(fv.values[:14], expected)
    np.testing.assert_array_equal(fv.values[14:], expected)

    period = 32
    x = np.arange(CANONICAL_SIZE)
    wave = 0.5 + 0.4 * np.sin(2 * np.pi * x / period)
    grating = np.repeat(np.tile(wave, (CANONICAL_SIZE, 1))[:, :, None], 3, axis=2)
    lum = 0.2126 * grating[:, :, 0] + 0.7152 * grating[:, :, 1] + 0.0722 * grating[:, :, 2]
    band = grating_predicted_band(period, CANONICAL_SIZE)
    oracle_bands, oracle_total = fft_band_powers(lum)
    assert oracle_bands[band] / oracle_total > 0.9  # oracle confirms the prediction
    fv = extract_stat_features(FramePair(non_specular=grating, near_specular=grating))
    band_energy = fv.values[F["band1_energy"] + band]
    assert band_energy > 0.9

    mix = 0.5 * (grating + np.transpose(grating, (1, 0, 2)))
    fv_mix = extract_stat_features(FramePair(non_specular=mix, near_specular=mix))
    striped = fv_mix.values[F["stripedness"]]
    checkered = fv_mix.values[F["checkeredness"]]
    assert checkered > striped
    _report(
        "stat features",
        f"constant pattern exact; band {band + 1} holds {band_energy:.1%}; "
        f"checkered {checkered:.2f} > striped {striped:.2f}",
    )


def test_formats_and_service(tmp_path, rng):
    # MFDB round-trip, value-exact
    db = build_database(random_records(rng, 16))
    db_path = tmp_path / "db.mfdb"
    save_mfdb(db, db_path)
    loaded = load_mfdb(db_path)
    for a, b in zip(loaded.materials, db.materials):
        np.testing.assert_array_equal(a.fingerprint.values, b.fingerprint.values)

    # MFX round-trip, bit-exact blob
    matrix = rng.normal(size=(12, 28)).astype(np.float32)
    table = table_from_matrix("S-v1", [f"m{i:02d}" for i in range(12)], matrix)
    mfx_path = tmp_path / "feats.mfx"
    save_mfx(table, mfx_path)
    blob1 = hashlib.sha256((tmp_path / "feats.mfx.bin").read_bytes()).hexdigest()
    save_mfx(load_mfx(mfx_path), tmp_path / "again.mfx")
    blob2 = hashlib.sha256((tmp_path / "again.mfx.bin").read_bytes()).hexdigest()
    assert blob1 == blob2

    # live service: deterministic descending retrieval, identical concurrent bodies
    import httpx
    import uvicorn

    from matprint.service import build_state, create_app

    app = create_app(build_state(loaded))
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        assert time.time() < deadline, "service did not start"
        time.sleep(0.02)
    host, port = server.servers[0].sockets[0].getsockname()[:2]
    url = f"http://{host}:{port}/v1/retrieve"
    try:
        payload = {"material_id": "m005", "k": 5, "alpha": 0.5}
        bodies: list[bytes | None] = [None] * 16
        def hit(i):
            with httpx.Client() as client:
                bodies[i] = client.post(url, json=payload).content
        threads = [threading.Thread(target=hit, args=(i,)) for i in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert all(b == bodies[0] for b in bodies)
        scores = [r["score"] for r in json.loads(bodies[0])["results"]]
        assert scores == sorted(scores, reverse=True)
    finally:
        server.should_exit = True
        thread.join(timeout=5)
    _report("formats and service", "round-trips exact; 16 concurrent bodies identical")


DATASET_DIR = os.environ.get("MATPRINT_DATASET")


@pytest.mark.skipif(
    not DATASET_DIR or not Path(DATASET_DIR).is_dir(),
    reason="MATPRINT_DATASET not set; dataset-scale criterion is conditional",
)
def test_dataset_scale_pipeline():
    """Conditional: reproduce the 279/68-scale pipeline on the public data.

    Expects ratings.csv, categories.csv and embeddings.mfx (1024-dim) under
    MATPRINT_DATASET; stat.mfx (28-dim) additionally enables the statistical
    model check.
    """
    root = Path(DATASET_DIR)
    ratings = matprint.read_ratings_csv(root / "ratings.csv")
    fingerprints, _ = build_fingerprints(ratings)
    categories = {}
    import csv as _csv

    with open(root / "categories.csv", newline="", encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            categories[row["material_id"]] = row["category"]
    records = [
        matprint.MaterialRecord(
            material_id=fp.material_id,
            category=categories.get(fp.material_id, "other"),
            fingerprint=fp,
        )
        for fp in fingerprints
    ]
    table = load_mfx(root / "embeddings.mfx")
    common = sorted(set(r.material_id for r in records) & set(table.material_ids()))
    by_id = {r.material_id: r for r in records}
    split = stratified_split([by_id[m] for m in common], ratio=0.2, seed=1)
    x = np.array([table.row(m) for m in common], dtype=np.float64)
    y = np.array([by_id[m].fingerprint.values for m in common])
    idx = {m: i for i, m in enumerate(common)}
    train_i = np.array([idx[m] for m in split.train_ids])
    test_i = np.array([idx[m] for m in split.test_ids])

    config = TrainConfig(max_epochs=2000, seed=1, patience=200)
    model = mlp_train(
        x[train_i], y[train_i], config,
        spec=MlpSpec((1024, 512, 512, 16)), feature_spec_id="vitb32-concat",
    )
    pred = np.clip(mlp_forward(model, x[test_i]), -1, 1)
    r_a = corr_ratings(pred, y[test_i])
    err = mae(pred, y[test_i])
    assert r_a >= 0.85
    assert err <= 0.30

    detail = f"embedding model R_A {r_a:.3f}, MAE {err:.3f}"
    stat_path = root / "stat.mfx"
    if stat_path.exists():
        stat = load_mfx(stat_path)
        xs = np.array([stat.row(m) for m in common], dtype=np.float64)
        model_s = mlp_train(
            xs[train_i], y[train_i], config,
            spec=MlpSpec((28, 16, 16, 16)), feature_spec_id="S-v1", standardize=True,
        )
        pred_s = np.clip(mlp_forward(model_s, xs[test_i]), -1, 1)
        r_a_s = corr_ratings(pred_s, y[test_i])
        assert r_a_s >= 0.70
        detail += f"; statistical model R_A {r_a_s:.3f}"
    _report("dataset-scale pipeline", detail)
