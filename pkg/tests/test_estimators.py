import math

import numpy as np
import pytest
from scipy import integrate

import alloysim as al
from alloysim import AlloyModel, build_single_site, build_volume


@pytest.fixture
def one_site_model(delta_profile, uniform01):
    return AlloyModel(potential=delta_profile, measure=uniform01, lam=1.0)


@pytest.fixture
def free_model(two_tap, uniform01):
    return AlloyModel(potential=two_tap, measure=uniform01, lam=0.0)


class TestFractionalMoment:
    def test_one_site_quadrature_oracle(self, one_site_model):
        # on the single-point volume G(i; 0, 0) = 1/(omega - i), so the
        # moment is the explicit integral of (omega^2 + 1)^(-s/2)
        vol = build_volume(1, radius=0)
        s = 0.5
        est = al.fractional_moment(one_site_model, vol, 1j, 0, 0, s, 20_000, master_seed=40)
        oracle = integrate.quad(lambda w: (w * w + 1) ** (-s / 2), 0.0, 1.0)[0]
        assert abs(est.value - oracle) <= 3 * est.stderr

    def test_small_s_approaches_one(self, one_site_model):
        vol = build_volume(1, radius=0)
        est = al.fractional_moment(one_site_model, vol, 1j, 0, 0, 0.01, 2_000, master_seed=41)
        assert est.value == pytest.approx(1.0, abs=0.02)

    def test_stderr_scales_with_samples(self, anderson_gaussian):
        vol = build_volume(1, radius=4)
        small = al.fractional_moment(anderson_gaussian, vol, 0.5 + 0.1j, 0, 1, 0.5, 2_000, 42)
        large = al.fractional_moment(anderson_gaussian, vol, 0.5 + 0.1j, 0, 1, 0.5, 8_000, 42)
        ratio = large.stderr / small.stderr
        assert 0.37 <= ratio <= 0.68

    def test_bound_metadata(self, anderson_gaussian):
        vol = build_volume(1, radius=3)
        est = al.fractional_moment(anderson_gaussian, vol, 0.1j, 0, 0, 0.5, 100, 43)
        # delta profile has a single-point support: no uniform bound constants
        assert est.metadata["bound"] is None
        assert "single-point" in est.metadata["bound_note"]

    def test_bound_metadata_two_tap(self, two_tap, cosine01):
        model = AlloyModel(potential=two_tap, measure=cosine01, lam=10.0)
        vol = build_volume(1, radius=3)
        est = al.fractional_moment(model, vol, 0.1j, 0, 0, 0.5, 100, 44)
        consts = al.uniform_bound_constants(two_tap, 0.5, cosine01)
        assert est.metadata["bound"] == pytest.approx(consts.bound(10.0))

    def test_invalid_s(self, one_site_model):
        vol = build_volume(1, radius=0)
        with pytest.raises(al.ValidationError):
            al.fractional_moment(one_site_model, vol, 1j, 0, 0, 1.0, 10, 0)

    def test_outside_point_rejected(self, one_site_model):
        vol = build_volume(1, radius=0)
        with pytest.raises(al.ValidationError):
            al.fractional_moment(one_site_model, vol, 1j, 0, 3, 0.5, 10, 0)

    def test_determinism(self, anderson_gaussian):
        vol = build_volume(1, radius=4)
        a = al.fractional_moment(anderson_gaussian, vol, 0.3 + 0.1j, 0, 2, 0.5, 500, 7)
        b = al.fractional_moment(anderson_gaussian, vol, 0.3 + 0.1j, 0, 2, 0.5, 500, 7)
        assert a.value == b.value and a.stderr == b.stderr


class TestDecayProfile:
    def test_distance_zero_matches_fractional_moment(self, anderson_gaussian):
        vol = build_volume(1, radius=5)
        z = 0.2 + 0.1j
        profile = al.green_decay_profile(
            anderson_gaussian, vol, z, 0, [[0], [1], [2], [3]], 0.5, 400, master_seed=50
        )
        direct = al.fractional_moment(anderson_gaussian, vol, z, 0, 0, 0.5, 400, master_seed=50)
        assert profile.estimates[0].value == direct.value
        assert profile.estimates[0].stderr == direct.stderr

    def test_disordered_decay_fit(self, anderson_gaussian):
        vol = build_volume(1, radius=8)
        profile = al.green_decay_profile(
            anderson_gaussian,
            vol,
            0.0 + 0.05j,
            0,
            [[k] for k in range(1, 7)],
            0.3,
            600,
            master_seed=51,
        )
        assert profile.rate > 0
        assert profile.r_squared > 0.9
        assert profile.distances.tolist() == [1, 2, 3, 4, 5, 6]

    def test_free_model_still_profiles(self, free_model):
        # no disorder: draws are all identical, the bound is unavailable but
        # the profile and fit still make sense
        vol = build_volume(1, radius=8)
        profile = al.green_decay_profile(
            free_model, vol, 1j, 0, [[k] for k in range(5)], 0.5, 5, master_seed=52
        )
        assert profile.rate > 0
        assert profile.r_squared > 0.99
        for est in profile.estimates:
            assert est.stderr <= 1e-15

    def test_all_noise_raises(self, anderson_gaussian):
        # distances so deep that every estimate drowns in Monte Carlo noise
        vol = build_volume(1, radius=10)
        with pytest.raises(al.NumericalError):
            al.green_decay_profile(
                anderson_gaussian,
                vol,
                0.0 + 0.01j,
                -10,
                [[17], [18], [19]],
                0.5,
                30,
                master_seed=53,
            )

    def test_csv(self, anderson_gaussian, tmp_path):
        vol = build_volume(1, radius=4)
        profile = al.green_decay_profile(
            anderson_gaussian, vol, 0.1j, 0, [[0], [1], [2]], 0.5, 50, master_seed=54
        )
        path = tmp_path / "decay.csv"
        profile.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "distance,value,stderr"
        assert len(lines) == 4


class TestWegnerCount:
    def test_whole_spectrum_counts_everything(self, anderson_gaussian):
        vol = build_volume(1, radius=3)
        est = al.wegner_count(anderson_gaussian, vol, (-1e4, 1e4), 50, master_seed=60)
        assert est.value == len(vol)
        assert est.stderr == 0.0

    def test_far_interval_counts_nothing(self, anderson_gaussian):
        vol = build_volume(1, radius=3)
        est = al.wegner_count(anderson_gaussian, vol, (1e5, 2e5), 50, master_seed=61)
        assert est.value == 0.0

    def test_implied_constant_metadata(self, flagship_model):
        vol = build_volume(1, radius=4)
        est = al.wegner_count(flagship_model, vol, (1.0, 2.0), 200, master_seed=62)
        meta = est.metadata
        assert meta["volume_exponent_correction"] == 0
        assert meta["rho_total_variation"] == pytest.approx(2.0)
        expected_scale = (1.0 / 1.0) * 2.0 * 1.0 * 9 ** (2 * 1 + 0)
        assert meta["bound_scale"] == pytest.approx(expected_scale)
        assert meta["implied_constant"] == pytest.approx(est.value / expected_scale)

    def test_additive_in_disjoint_intervals(self, anderson_gaussian):
        vol = build_volume(1, radius=4)
        whole = al.wegner_count(anderson_gaussian, vol, (-30.0, 30.0), 100, master_seed=63)
        left = al.wegner_count(anderson_gaussian, vol, (-30.0, 0.0), 100, master_seed=63)
        right = al.wegner_count(anderson_gaussian, vol, (0.0, 30.0), 100, master_seed=63)
        assert left.value + right.value == pytest.approx(whole.value, abs=1e-12)

    def test_degenerate_interval_rejected(self, anderson_gaussian):
        vol = build_volume(1, radius=2)
        with pytest.raises(al.ValidationError):
            al.wegner_count(anderson_gaussian, vol, (1.0, 1.0), 10, 0)


class TestMinamiDeterminant:
    def test_determinants_stay_psd(self, anderson_gaussian):
        vol = build_volume(1, radius=5)
        est = al.minami_determinant(anderson_gaussian, vol, 0.0 + 0.05j, 0, 3, 400, master_seed=70)
        assert est.metadata["min_det"] >= -1e-10
        assert est.value >= 0

    def test_bound_formula(self, anderson_gaussian):
        vol = build_volume(1, radius=4)
        est = al.minami_determinant(anderson_gaussian, vol, 0.1j, 0, 1, 50, master_seed=71)
        cmin = al.minami_bound_constant(anderson_gaussian)
        assert est.metadata["bound"] == pytest.approx((math.pi / 10.0) ** 2 * cmin)
        assert est.value <= est.metadata["bound"] + 3 * est.stderr

    def test_real_energy_rejected(self, anderson_gaussian):
        vol = build_volume(1, radius=3)
        with pytest.raises(al.ValidationError):
            al.minami_determinant(anderson_gaussian, vol, 0.5, 0, 1, 10, 0)

    def test_coincident_points_rejected(self, anderson_gaussian):
        vol = build_volume(1, radius=3)
        with pytest.raises(al.ValidationError):
            al.minami_determinant(anderson_gaussian, vol, 0.1j, 1, 1, 10, 0)

    def test_bound_constant_value(self, anderson_gaussian):
        # delta profile: C_u = 1; gaussian norms in closed form
        norms = al.density_norms(anderson_gaussian.measure)
        expected = 0.25 * max(norms.grad_l1**2, norms.hess_l1)
        assert al.minami_bound_constant(anderson_gaussian) == pytest.approx(expected)

    def test_atomic_measure_has_no_constant(self, delta_profile):
        model = AlloyModel(
            potential=delta_profile, measure=al.CouplingMeasure.bernoulli(0.5), lam=1.0
        )
        with pytest.raises(al.NoDensityError):
            al.minami_bound_constant(model)


class TestTwoLevel:
    def test_whole_band_saturates(self, anderson_gaussian):
        vol = build_volume(1, radius=2)
        out = al.two_level_probability(anderson_gaussian, vol, (-1e4, 1e4), 30, master_seed=80)
        n = len(vol)
        assert out.p_two.value == 1.0
        assert out.half_moment.value == pytest.approx(0.5 * n * (n - 1))

    def test_pointwise_chain_inequality(self, anderson_gaussian):
        vol = build_volume(1, radius=5)
        out = al.two_level_probability(anderson_gaussian, vol, (-0.5, 0.5), 500, master_seed=81)
        assert out.p_two.value <= out.half_moment.value + 1e-15

    def test_bound_present_for_gaussian(self, anderson_gaussian):
        vol = build_volume(1, radius=4)
        out = al.two_level_probability(anderson_gaussian, vol, (-0.1, 0.1), 50, master_seed=82)
        cmin = al.minami_bound_constant(anderson_gaussian)
        expected = 0.5 * (math.pi / 10.0) ** 2 * cmin * 0.2**2 * len(vol) ** 2
        assert out.bound == pytest.approx(expected)

    def test_bound_absent_without_disorder(self, free_model):
        vol = build_volume(1, radius=2)
        out = al.two_level_probability(free_model, vol, (-0.5, 0.5), 5, master_seed=83)
        assert out.bound is None
        assert "disorder" in out.bound_note


class TestRecursionProbe:
    def test_residuals_and_implied_constants(self, anderson_gaussian):
        vol = build_volume(1, radius=5)
        probe = al.recursion_probe(
            anderson_gaussian, vol, 0.3, -3, 2, 0.5, [5.0, 10.0], 300, master_seed=90
        )
        assert probe.max_residual <= 1e-8
        assert len(probe.rows) + len(probe.skipped) == 2
        lo, hi = probe.implied_range
        assert 0 < lo <= hi

    def test_coincident_points_rejected(self, anderson_gaussian):
        vol = build_volume(1, radius=3)
        with pytest.raises(al.ValidationError):
            al.recursion_probe(anderson_gaussian, vol, 0.2, 1, 1, 0.5, [5.0], 10, 0)

    def test_profile_must_cover_origin(self, uniform01):
        shifted = build_single_site(1, [((1,), 1.0)])
        model = AlloyModel(potential=shifted, measure=uniform01, lam=5.0)
        vol = build_volume(1, radius=3)
        with pytest.raises(al.ValidationError):
            al.recursion_probe(model, vol, 0.2, 0, 1, 0.5, [5.0], 10, 0)

    def test_empty_rows_range_raises(self):
        probe = al.RecursionProbe(rows=[], max_residual=0.0, s=0.5, skipped=[5.0])
        with pytest.raises(al.NumericalError):
            probe.implied_range


class TestSmallnessProbability:
    def test_vacuous_volume(self, anderson_gaussian):
        vol = build_volume(1, radius=0)
        est = al.fvc_probability(anderson_gaussian, vol, 0.3, 3.0, 20, master_seed=95)
        assert est.value == 1.0
        assert est.stderr == 0.0
        assert est.metadata["vacuous"] is True

    def test_strong_disorder_localizes(self, two_tap, uniform01):
        model = AlloyModel(potential=two_tap, measure=uniform01, lam=50.0)
        vol = build_volume(1, radius=6)
        est = al.fvc_probability(model, vol, 50.0, 2.5, 200, master_seed=96)
        assert est.value >= 0.8
        assert est.metadata["n_pairs"] > 0

    def test_free_model_fails_event(self, free_model):
        vol = build_volume(1, radius=6)
        est = al.fvc_probability(free_model, vol, 0.1, 2.5, 5, master_seed=97)
        assert est.value == 0.0

    def test_exponent_gate(self, anderson_gaussian):
        vol = build_volume(1, radius=4)
        with pytest.raises(al.ValidationError):
            al.fvc_probability(anderson_gaussian, vol, 0.3, 2.0, 10, 0)

    def test_box_volume_required(self, anderson_gaussian):
        vol = build_volume(1, points=[(0,), (1,), (5,)])
        with pytest.raises(al.ValidationError):
            al.fvc_probability(anderson_gaussian, vol, 0.3, 3.0, 10, 0)
