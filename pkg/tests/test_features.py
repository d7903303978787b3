import numpy as np
import pytest

from matprint import (
    DegenerateDataWarning,
    FramePair,
    InvalidInputError,
    extract_stat_features,
    near_specular_frame_index,
    normalize_wild_capture,
    select_frames,
    standardize_features,
)
from matprint.features import (
    CANONICAL_SIZE,
    FRAME_FEATURE_NAMES,
    STAT_FEATURE_NAMES,
    canonicalize_frame,
)
from oracles import fft_band_powers, grating_predicted_band

F = {name: i for i, name in enumerate(FRAME_FEATURE_NAMES)}


def gray(level=0.5, n=CANONICAL_SIZE):
    return np.full((n, n, 3), level)


def to_rgb(lum):
    return np.repeat(lum[:, :, None], 3, axis=2)


def vertical_grating(period, n=CANONICAL_SIZE, amplitude=0.4):
    x = np.arange(n)
    wave = 0.5 + amplitude * np.sin(2 * np.pi * x / period)
    return to_rgb(np.tile(wave, (n, 1)))


def horizontal_grating(period, n=CANONICAL_SIZE, amplitude=0.4):
    return np.transpose(vertical_grating(period, n, amplitude), (1, 0, 2))


def pair_of(frame):
    return FramePair(non_specular=frame, near_specular=frame)


class TestFrameSelection:
    def test_offset_zero_is_final_frame(self):
        assert near_specular_frame_index(0.0) == 60

    def test_default_offset_is_frame_56(self):
        # 6 degrees / (90/59 degrees per frame) = 3.93 frames back from 60.
        assert near_specular_frame_index(6.0) == 56

    def test_offset_45_collides_with_non_specular(self):
        assert near_specular_frame_index(45.0) == 30
        frames = [gray(0.5, 64)] * 60
        with pytest.warns(DegenerateDataWarning):
            pair = select_frames(frames, offset_degrees=45.0)
        assert pair.frame_indices == (30, 30)

    def test_wrong_frame_count_rejected(self):
        with pytest.raises(InvalidInputError):
            select_frames([gray(0.5, 64)] * 59)

    def test_offset_out_of_range(self):
        for bad in (-1.0, 90.0):
            with pytest.raises(InvalidInputError):
                near_specular_frame_index(bad)

    def test_frames_canonicalized(self):
        frames = [np.full((412, 632, 3), i / 60.0) for i in range(60)]
        pair = select_frames(frames)
        assert pair.non_specular.shape == (512, 512, 3)
        assert pair.frame_indices == (30, 56)
        assert pair.non_specular[0, 0, 0] == pytest.approx(29 / 60.0, abs=1e-6)


class TestWildCapture:
    def test_large_input_downscaled(self):
        out = normalize_wild_capture(gray(0.25, 1024))
        assert out.shape == (512, 512, 3)
        assert np.allclose(out, 0.25, atol=1e-6)

    def test_canonical_input_unchanged(self, rng):
        img = rng.uniform(0, 1, size=(512, 512, 3))
        np.testing.assert_array_equal(normalize_wild_capture(img), img)

    def test_too_small_rejected(self):
        with pytest.raises(InvalidInputError):
            normalize_wild_capture(gray(0.5, 256))

    def test_dpi_hint_crop(self):
        # 26 mm at 1000 dpi = 1024 px crop from a 2048 px shot.
        img = gray(0.5, 2048)
        out = normalize_wild_capture(img, crop_mm=26.0, dpi_hint=1000.0)
        assert out.shape == (512, 512, 3)

    def test_checkerboard_mean_preserved(self):
        n = 1024
        tile = np.kron([[1.0, 0.0], [0.0, 1.0]], np.ones((8, 8)))
        board = np.tile(tile, (n // 16, n // 16))
        out = normalize_wild_capture(to_rgb(board))
        assert abs(out.mean() - 0.5) < 1e-3


class TestStatFeatures:
    def test_constant_gray_pattern(self):
        fv = extract_stat_features(pair_of(gray(0.5)))
        expected_frame = np.zeros(14)
        expected_frame[F["luminance_mean"]] = 0.5
        expected_frame[F["dominant_colors"]] = 1.0
        np.testing.assert_array_equal(fv.values[:14], expected_frame)
        np.testing.assert_array_equal(fv.values[14:], expected_frame)

    def test_names_and_spec(self):
        fv = extract_stat_features(pair_of(gray()))
        assert fv.spec_id == "S-v1"
        assert fv.feature_names == STAT_FEATURE_NAMES
        assert fv.feature_names[0] == "ns_luminance_mean"
        assert fv.feature_names[14] == "sp_luminance_mean"

    def test_moments_match_direct_summation(self, rng):
        img = rng.uniform(0, 1, size=(128, 128, 3))
        fv = extract_stat_features(FramePair(non_specular=img, near_specular=img))
        lum = 0.2126 * img[:, :, 0] + 0.7152 * img[:, :, 1] + 0.0722 * img[:, :, 2]
        chroma = img.max(axis=2) - img.min(axis=2)
        m = lum.mean()
        m2 = np.mean((lum - m) ** 2)
        m3 = np.mean((lum - m) ** 3)
        assert fv.values[F["luminance_mean"]] == pytest.approx(m, abs=1e-9)
        assert fv.values[F["luminance_std"]] == pytest.approx(lum.std(ddof=1), abs=1e-9)
        assert fv.values[F["luminance_skewness"]] == pytest.approx(m3 / m2**1.5, abs=1e-9)
        assert fv.values[F["chroma_mean"]] == pytest.approx(chroma.mean(), abs=1e-9)
        assert fv.values[F["chroma_std"]] == pytest.approx(chroma.std(ddof=1), abs=1e-9)

    def test_grating_band_concentration(self):
        # Which band the grating lands in is derived from the FFT oracle.
        for period in (32, 12, 6):
            frame = vertical_grating(period)
            lum = 0.2126 * frame[:, :, 0] + 0.7152 * frame[:, :, 1] + 0.0722 * frame[:, :, 2]
            band = grating_predicted_band(period, CANONICAL_SIZE)
            oracle_bands, oracle_total = fft_band_powers(lum)
            assert oracle_bands[band] / oracle_total > 0.9
            fv = extract_stat_features(pair_of(frame))
            energies = fv.values[F["band1_energy"] : F["band4_energy"] + 1]
            assert energies[band] > 0.9
            np.testing.assert_allclose(energies, oracle_bands / oracle_total, atol=1e-9)

    def test_band_energies_parseval_consistent(self, rng):
        img = to_rgb(rng.uniform(0, 1, size=(256, 256)))
        fv = extract_stat_features(FramePair(non_specular=img, near_specular=img))
        lum = 0.2126 * img[:, :, 0] + 0.7152 * img[:, :, 1] + 0.0722 * img[:, :, 2]
        oracle_bands, oracle_total = fft_band_powers(lum)
        engine = fv.values[F["band1_energy"] : F["band4_energy"] + 1]
        np.testing.assert_allclose(engine * oracle_total, oracle_bands, rtol=1e-6)
        # Parseval: total spectral power equals centered pixel energy.
        n = lum.shape[0]
        assert oracle_total == pytest.approx(
            np.sum((lum - lum.mean()) ** 2) * n * n, rel=1e-6
        )

    def test_grating_anisotropy_and_patterns(self):
        fv = extract_stat_features(pair_of(vertical_grating(32)))
        frame = fv.values[:14]
        assert frame[F["anisotropy"]] > 0.95
        assert frame[F["orientation_peak_ratio"]] > 0.9
        assert frame[F["stripedness"]] > 0.9
        assert frame[F["checkeredness"]] < 0.1

    def test_grating_sum_checkered(self):
        mix = 0.5 * (vertical_grating(32, amplitude=0.4) + horizontal_grating(32, amplitude=0.4))
        fv = extract_stat_features(pair_of(mix))
        frame = fv.values[:14]
        assert frame[F["checkeredness"]] > frame[F["stripedness"]]
        assert frame[F["checkeredness"]] > 0.5

    def test_noise_has_low_pattern_scores(self, rng):
        img = to_rgb(rng.uniform(0.2, 0.8, size=(256, 256)))
        fv = extract_stat_features(FramePair(non_specular=img, near_specular=img))
        frame = fv.values[:14]
        assert frame[F["anisotropy"]] < 0.2
        assert frame[F["stripedness"]] < 0.3

    def test_deterministic(self, rng):
        img = rng.uniform(0, 1, size=(128, 128, 3))
        pair = FramePair(non_specular=img, near_specular=img)
        a = extract_stat_features(pair).values
        b = extract_stat_features(pair).values
        np.testing.assert_array_equal(a, b)

    def test_rotation_90_leaves_rotation_invariant_features(self, rng):
        img = rng.uniform(0, 1, size=(128, 128, 3))
        img[:, ::16, :] *= 0.3  # add oriented structure
        img = np.clip(img, 0, 1)
        rot = np.rot90(img, axes=(0, 1)).copy()
        a = extract_stat_features(FramePair(non_specular=img, near_specular=img)).values[:14]
        b = extract_stat_features(FramePair(non_specular=rot, near_specular=rot)).values[:14]
        invariant = [0, 1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13]
        np.testing.assert_allclose(a[invariant], b[invariant], atol=1e-9)
        # the orientation-indexed features keep their value too (the
        # dominant orientation itself rotates with the image)
        np.testing.assert_allclose(a[[9, 10]], b[[9, 10]], atol=1e-6)

    def test_dominant_colors_grow_with_clusters(self):
        n = 128
        base = np.zeros((n, n, 3))
        base[:, :, 0] = 0.9  # one pure color
        one = extract_stat_features(pair_of(base)).values[F["dominant_colors"]]
        two_tone = base.copy()
        two_tone[:, n // 2 :] = [0.1, 0.8, 0.1]
        two = extract_stat_features(pair_of(two_tone)).values[F["dominant_colors"]]
        three_tone = two_tone.copy()
        three_tone[: n // 2, : n // 2] = [0.1, 0.1, 0.9]
        three = extract_stat_features(pair_of(three_tone)).values[F["dominant_colors"]]
        assert one == 1.0
        assert two == 2.0
        assert three == 3.0

    def test_tiny_speck_below_mass_threshold_ignored(self):
        n = 128
        img = np.full((n, n, 3), 0.2)
        img[0, 0] = [1.0, 1.0, 1.0]  # single pixel << 2% mass
        fv = extract_stat_features(pair_of(img))
        assert fv.values[F["dominant_colors"]] == 1.0

    def test_non_finite_rejected(self):
        img = gray(0.5, 64)
        img[3, 3, 0] = np.nan
        with pytest.raises(InvalidInputError):
            FramePair(non_specular=img, near_specular=img)


class TestStandardize:
    def test_two_vectors_map_to_unit(self, rng):
        a = rng.uniform(-1, 1, size=28)
        b = a + rng.uniform(0.1, 1.0, size=28)
        b[5] = a[5]  # one constant dimension
        scaler = standardize_features(np.stack([a, b]))
        ta, tb = scaler.apply(a), scaler.apply(b)
        for d in range(28):
            if d == 5:
                assert ta[d] == 0.0 and tb[d] == 0.0
            else:
                assert sorted([ta[d], tb[d]]) == pytest.approx([-1.0, 1.0], abs=1e-12)

    def test_moments_after_transform(self, rng):
        data = rng.normal(3.0, 5.0, size=(40, 28))
        scaler = standardize_features(data)
        mapped = scaler.apply(data)
        assert np.all(np.abs(mapped.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(mapped.std(axis=0) - 1.0) < 1e-9)

    def test_affine_formula(self, rng):
        data = rng.normal(size=(10, 4 * 7))
        scaler = standardize_features(data)
        x = rng.normal(size=28)
        np.testing.assert_allclose(
            scaler.apply(x), (x - scaler.mean) / scaler.std, atol=1e-12
        )

    def test_requires_two_vectors(self, rng):
        with pytest.raises(InvalidInputError):
            standardize_features(rng.normal(size=(1, 28)))


class TestCanonicalize:
    def test_rectangular_frame_center_cropped(self):
        img = np.zeros((412, 632, 3))
        img[:, (632 - 412) // 2 : (632 + 412) // 2] = 1.0  # center square lit
        out = canonicalize_frame(img)
        assert out.shape == (512, 512, 3)
        assert out.mean() == pytest.approx(1.0, abs=1e-6)
