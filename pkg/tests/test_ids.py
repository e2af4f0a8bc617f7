import math

import numpy as np
import pytest

import alloysim as al
from alloysim import (
    AlloyModel,
    IdsTable,
    RescaledSpectrum,
    build_volume,
    ids_estimate,
    ids_positivity_probe,
    poisson_statistics,
    rescale_eigenvalues,
)


def free_ids_exact(energies):
    """Infinite-volume counting function of the one-dimensional free operator."""
    e = np.clip(np.asarray(energies, dtype=float), -2.0, 2.0)
    return np.arccos(-e / 2.0) / math.pi


@pytest.fixture
def free_chain_model(two_tap, uniform01):
    return AlloyModel(potential=two_tap, measure=uniform01, lam=0.0)


def synthetic_poisson_spectra(rng, n_realizations, span=12.0, volume_points=1000):
    """Unit-intensity Poisson point process on [-span, span] per realization."""
    out = []
    for _ in range(n_realizations):
        k = rng.poisson(2 * span)
        xi = np.sort(rng.uniform(-span, span, size=k))
        out.append(RescaledSpectrum(e0=0.0, xi=xi, volume_points=volume_points))
    return out


class TestIdsEstimate:
    def test_free_chain_converges_to_arccos_law(self, free_chain_model):
        # the finite-volume counting function is floor((n+1) t / pi) / n with
        # t = arccos(-E/2), so the sup error is below 1/n plus grid slack,
        # and doubling the volume roughly halves it
        errors = {}
        grid = np.linspace(-1.95, 1.95, 801)
        for L in (200, 400):
            vol = build_volume(1, radius=L)
            table = ids_estimate(free_chain_model, vol, 1, master_seed=0)
            errors[L] = float(np.max(np.abs(table.evaluate(grid) - free_ids_exact(grid))))
            assert errors[L] <= 1.0 / (2 * L + 1) + 5e-4
        assert errors[400] < 0.7 * errors[200]

    def test_range_and_monotonicity(self, anderson_gaussian):
        vol = build_volume(1, radius=12)
        table = ids_estimate(anderson_gaussian, vol, 20, master_seed=1)
        assert float(table.evaluate(table.energies[0])) == 0.0
        assert float(table.evaluate(table.energies[-1])) == 1.0
        assert np.all(np.diff(table.values) >= 0)
        assert np.all((table.values >= 0) & (table.values <= 1))

    def test_free_median_at_band_center(self, free_chain_model):
        vol = build_volume(1, radius=100)
        table = ids_estimate(free_chain_model, vol, 1, master_seed=0)
        assert table.median_energy() == pytest.approx(0.0, abs=0.02)

    def test_bounded_support_grid_encloses_spectrum(self, flagship_model):
        vol = build_volume(1, radius=10)
        table = ids_estimate(flagship_model, vol, 5, master_seed=2)
        # enclosure: |energy| <= 2d + lam * ||u||_1 * max|support|
        assert table.energies[0] <= -2 - 2 * 1.0
        assert table.energies[-1] >= 2 + 2 * 1.0

    def test_custom_grid_validation(self, flagship_model):
        vol = build_volume(1, radius=3)
        with pytest.raises(al.ValidationError):
            ids_estimate(flagship_model, vol, 2, 0, energy_grid=np.array([0.0, 0.0, 1.0]))
        with pytest.raises(al.ValidationError):
            ids_estimate(flagship_model, vol, 0, 0)

    def test_median_requires_crossing(self):
        table = IdsTable(
            energies=np.array([0.0, 1.0]),
            values=np.array([0.0, 0.2]),
            n_realizations=1,
            volume_points=10,
        )
        with pytest.raises(al.NumericalError):
            table.median_energy()

    def test_csv(self, flagship_model, tmp_path):
        vol = build_volume(1, radius=3)
        table = ids_estimate(flagship_model, vol, 2, 0, energy_grid=np.linspace(-5, 5, 11))
        path = tmp_path / "ids.csv"
        table.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "energy,ids"
        assert len(lines) == 12


class TestPositivityProbe:
    def test_free_band_center_growth(self, free_chain_model):
        vol = build_volume(1, radius=300)
        table = ids_estimate(free_chain_model, vol, 1, master_seed=0)
        probe = ids_positivity_probe(
            table,
            e0=0.0,
            kappa=0.0,
            window_pairs=[(1.0, -1.0), (1.0, 0.5)],
            eps_grid=[0.05, 0.1, 0.2, 0.4],
        )
        assert probe.all_passed
        for row in probe.rows:
            # counting increments scale linearly at the band center
            assert row.loglog_slope == pytest.approx(1.0, abs=0.2)
            assert row.best_fit_c > 1e-3

    def test_energy_outside_spectrum_fails(self, free_chain_model):
        vol = build_volume(1, radius=200)
        table = ids_estimate(free_chain_model, vol, 1, master_seed=0)
        probe = ids_positivity_probe(
            table, e0=3.5, kappa=0.0, window_pairs=[(0.1, -0.1)], eps_grid=[0.05, 0.1]
        )
        assert not probe.all_passed
        assert probe.rows[0].best_fit_c <= 1e-6

    def test_degenerate_pair_has_no_growth(self, free_chain_model):
        vol = build_volume(1, radius=100)
        table = ids_estimate(free_chain_model, vol, 1, master_seed=0)
        probe = ids_positivity_probe(
            table, e0=0.0, kappa=0.0, window_pairs=[(0.3, 0.3)], eps_grid=[0.1, 0.2]
        )
        row = probe.rows[0]
        assert not row.passed and row.loglog_slope is None

    def test_epsilon_below_resolution_rejected(self):
        table = IdsTable(
            energies=np.linspace(0, 1, 11),
            values=np.linspace(0, 1, 11),
            n_realizations=1,
            volume_points=10,
        )
        with pytest.raises(al.ValidationError):
            ids_positivity_probe(table, 0.5, 0.0, [(1.0, -1.0)], eps_grid=[0.01])


class TestRescaling:
    def linear_table(self):
        return IdsTable(
            energies=np.array([0.0, 1.0]),
            values=np.array([0.0, 1.0]),
            n_realizations=1,
            volume_points=100,
        )

    def test_linear_table_rescales_affinely(self):
        table = self.linear_table()
        out = rescale_eigenvalues(np.array([0.2, 0.5, 0.9]), table, e0=0.1, volume_points=100)
        np.testing.assert_allclose(out.xi, [10.0, 40.0, 80.0])

    def test_reference_energy_maps_to_zero(self):
        table = self.linear_table()
        out = rescale_eigenvalues(np.array([0.3]), table, e0=0.3, volume_points=100)
        assert out.xi[0] == pytest.approx(0.0)

    def test_monotone_in_eigenvalues(self, anderson_gaussian):
        vol = build_volume(1, radius=10)
        table = ids_estimate(anderson_gaussian, vol, 10, master_seed=3)
        spectra = al.sample_rescaled_spectra(anderson_gaussian, vol, table, 0.0, 3, master_seed=9)
        for rescaled in spectra:
            assert np.all(np.diff(rescaled.xi) >= 0)

    def test_eigenvalue_outside_grid_rejected(self):
        table = self.linear_table()
        with pytest.raises(al.ValidationError) as err:
            rescale_eigenvalues(np.array([1.5]), table, e0=0.5, volume_points=100)
        assert "1.5" in str(err.value)


class TestPoissonStatistics:
    def test_synthetic_poisson_process_passes(self, rng):
        spectra = synthetic_poisson_spectra(rng, 400)
        report = poisson_statistics(spectra, window=(-5.0, 5.0))
        assert 0.8 <= report.variance_ratio <= 1.2
        assert report.count_mean == pytest.approx(1.0, abs=0.1)
        assert report.ks_statistic < report.ks_critical_1pct
        assert report.poissonian
        assert report.chi_square_pvalue > 1e-3

    def test_rigid_lattice_rejected(self):
        # a deterministic unit lattice has zero count variance and flat gaps
        xi = np.arange(-7.5, 8.0, 1.0)
        spectra = [RescaledSpectrum(0.0, xi, 1000) for _ in range(300)]
        report = poisson_statistics(spectra, window=(-5.0, 5.0))
        assert report.variance_ratio < 0.2
        assert not report.poissonian

    def test_ks_calibration_at_one_percent(self, rng):
        # the 1% critical value should reject a true Poisson sample rarely
        rejections = sum(
            poisson_statistics(synthetic_poisson_spectra(rng, 220)).ks_statistic
            >= poisson_statistics(synthetic_poisson_spectra(rng, 220)).ks_critical_1pct
            for _ in range(12)
        )
        assert rejections <= 2

    def test_empty_window_warning(self):
        spectra = [RescaledSpectrum(0.0, np.empty(0), 100) for _ in range(250)]
        report = poisson_statistics(spectra)
        assert any("empty" in w for w in report.warnings)
        assert not report.poissonian

    def test_min_realizations_gate(self, rng):
        spectra = synthetic_poisson_spectra(rng, 30)
        with pytest.raises(al.ValidationError):
            poisson_statistics(spectra)
        report = poisson_statistics(spectra, min_realizations=30)
        assert report.n_realizations == 30

    def test_report_serialization(self, rng, tmp_path):
        spectra = synthetic_poisson_spectra(rng, 250)
        report = poisson_statistics(spectra)
        data = report.to_dict()
        assert set(data) >= {"variance_ratio", "ks_statistic", "poissonian", "warnings"}
        path = tmp_path / "gaps.csv"
        report.gap_histogram_to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "gap_left,gap_right,density,exp1_reference"
        assert len(lines) > 2
