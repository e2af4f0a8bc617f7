"""Integrated density of states, eigenvalue rescaling, Poisson statistics.

The density of states is approximated by the pooled normalized eigenvalue
counting function over independent realizations.  Rescaled eigenvalues
``xi_j = |volume| * (N(E_j) - N(E_0))`` near a reference energy feed the
point-process statistics: unit-window counts, consecutive-gap distribution
against Exp(1), and a chi-square comparison of the count histogram with the
Poisson law.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from .errors import NumericalError, ValidationError
from .field import sample_field
from .lattice import FiniteVolume, assemble, spectrum
from .model import AlloyModel

__all__ = [
    "IdsTable",
    "ids_estimate",
    "PositivityRow",
    "PositivityProbe",
    "ids_positivity_probe",
    "RescaledSpectrum",
    "rescale_eigenvalues",
    "PoissonReport",
    "poisson_statistics",
    "sample_rescaled_spectra",
]

# 1% critical coefficient for the one-sample Kolmogorov-Smirnov statistic,
# D_crit = 1.62762 / sqrt(n) for large n.
KS_COEFF_1PCT = 1.62762


@dataclass
class IdsTable:
    """Empirical integrated density of states on an energy grid."""

    energies: np.ndarray
    values: np.ndarray
    n_realizations: int
    volume_points: int

    def evaluate(self, energy):
        """Linear interpolation, clamped to the table's end values."""
        return np.interp(energy, self.energies, self.values)

    def median_energy(self) -> float:
        """Smallest energy where the counting function crosses 1/2."""
        idx = int(np.searchsorted(self.values, 0.5, side="left"))
        if idx == 0:
            return float(self.energies[0])
        if idx >= len(self.values):
            raise NumericalError("counting function never reaches 1/2 on the grid")
        v0, v1 = self.values[idx - 1], self.values[idx]
        e0, e1 = self.energies[idx - 1], self.energies[idx]
        if v1 == v0:
            return float(0.5 * (e0 + e1))
        return float(e0 + (0.5 - v0) / (v1 - v0) * (e1 - e0))

    @property
    def resolution(self) -> float:
        return float(np.max(np.diff(self.energies)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["energy", "ids"])
            for e, v in zip(self.energies, self.values):
                writer.writerow([repr(float(e)), repr(float(v))])


def _default_grid(model: AlloyModel, pooled: np.ndarray, n_points: int) -> np.ndarray:
    lo_sup, hi_sup = model.measure.support
    d = model.dimension
    if math.isfinite(lo_sup) and math.isfinite(hi_sup):
        reach = model.lam * model.potential.l1_norm * max(abs(lo_sup), abs(hi_sup))
        lo, hi = -2 * d - reach - 0.1, 2 * d + reach + 0.1
    else:
        lo, hi = float(pooled[0]) - 1.0, float(pooled[-1]) + 1.0
    return np.linspace(lo, hi, n_points)


def ids_estimate(
    model: AlloyModel,
    volume: FiniteVolume,
    n_realizations: int,
    master_seed: int,
    energy_grid: Optional[np.ndarray] = None,
    n_grid: int = 20001,
) -> IdsTable:
    """Pooled normalized eigenvalue counting function.

    The default grid spans the deterministic spectral enclosure when the
    coupling measure has bounded support, so every finite-volume eigenvalue
    at the same disorder strength interpolates inside the table.
    """
    if n_realizations < 1:
        raise ValidationError("need at least one realization")
    if energy_grid is not None:
        energy_grid = np.asarray(energy_grid, dtype=float)
        if energy_grid.ndim != 1 or len(energy_grid) < 2 or np.any(np.diff(energy_grid) <= 0):
            raise ValidationError("energy grid must be one-dimensional and strictly increasing")
    blocks = []
    for r in range(n_realizations):
        real = sample_field(model.potential, model.measure, volume, master_seed, r)
        blocks.append(spectrum(assemble(real, model.lam)))
    pooled = np.sort(np.concatenate(blocks))
    if energy_grid is None:
        energy_grid = _default_grid(model, pooled, n_grid)
    values = np.searchsorted(pooled, energy_grid, side="right") / (
        n_realizations * len(volume)
    )
    return IdsTable(
        energies=energy_grid,
        values=values,
        n_realizations=n_realizations,
        volume_points=len(volume),
    )


@dataclass
class PositivityRow:
    a: float
    b: float
    eps: np.ndarray
    increments: np.ndarray
    best_fit_c: float
    passed: bool
    loglog_slope: Optional[float]


@dataclass
class PositivityProbe:
    rows: list
    kappa: float
    e0: float

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)


def ids_positivity_probe(
    ids: IdsTable,
    e0: float,
    kappa: float,
    window_pairs: Sequence[tuple[float, float]],
    eps_grid: Sequence[float],
    c_floor: float = 1e-6,
) -> PositivityProbe:
    """Check lower growth ``|N(E0 + a*eps) - N(E0 + b*eps)| >= C eps**(1+kappa)``.

    For every window pair the probe reports the increments over the epsilon
    grid and the best admissible constant (the minimum ratio); a row fails
    when no constant above ``c_floor`` works.  The log-log slope against
    epsilon is fitted whenever at least two increments are positive.
    """
    eps = np.asarray(sorted(eps_grid), dtype=float)
    if len(eps) == 0 or eps[0] <= 0:
        raise ValidationError("epsilon grid must be positive")
    if eps[0] < ids.resolution:
        raise ValidationError(
            f"smallest epsilon {eps[0]:g} is below the table resolution {ids.resolution:g}"
        )
    rows = []
    for a, b in window_pairs:
        upper = ids.evaluate(e0 + a * eps)
        lower = ids.evaluate(e0 + b * eps)
        inc = np.abs(upper - lower)
        ratios = inc / eps ** (1.0 + kappa)
        best = float(ratios.min())
        pos = inc > 0
        slope = None
        if pos.sum() >= 2:
            slope = float(np.polyfit(np.log(eps[pos]), np.log(inc[pos]), 1)[0])
        rows.append(
            PositivityRow(
                a=float(a),
                b=float(b),
                eps=eps,
                increments=inc,
                best_fit_c=best,
                passed=best > c_floor,
                loglog_slope=slope,
            )
        )
    return PositivityProbe(rows=rows, kappa=kappa, e0=e0)


@dataclass
class RescaledSpectrum:
    """One realization's eigenvalues pushed through the counting function."""

    e0: float
    xi: np.ndarray
    volume_points: int


def rescale_eigenvalues(
    evals: np.ndarray,
    ids: IdsTable,
    e0: float,
    volume_points: int,
) -> RescaledSpectrum:
    """Map sorted eigenvalues to ``xi_j = |volume| * (N(E_j) - N(E_0))``."""
    evals = np.sort(np.asarray(evals, dtype=float))
    lo, hi = ids.energies[0], ids.energies[-1]
    if len(evals) and (evals[0] < lo or evals[-1] > hi):
        bad = evals[0] if evals[0] < lo else evals[-1]
        raise ValidationError(
            f"eigenvalue {bad!r} falls outside the counting-function grid [{lo!r}, {hi!r}]"
        )
    xi = volume_points * (ids.evaluate(evals) - ids.evaluate(e0))
    return RescaledSpectrum(e0=float(e0), xi=np.asarray(xi), volume_points=volume_points)


def sample_rescaled_spectra(
    model: AlloyModel,
    volume: FiniteVolume,
    ids: IdsTable,
    e0: float,
    n_realizations: int,
    master_seed: int,
) -> list:
    """Draw independent spectra and rescale each around the reference energy."""
    out = []
    for r in range(n_realizations):
        real = sample_field(model.potential, model.measure, volume, master_seed, r)
        evals = spectrum(assemble(real, model.lam))
        out.append(rescale_eigenvalues(evals, ids, e0, len(volume)))
    return out


@dataclass
class PoissonReport:
    """Desk-scale signatures of Poisson behavior for rescaled eigenvalues."""

    window: tuple[float, float]
    n_realizations: int
    n_windows: int
    count_mean: float
    count_variance: float
    variance_ratio: float
    count_histogram: list
    chi_square: float
    chi_square_dof: int
    chi_square_pvalue: float
    n_gaps: int
    ks_statistic: float
    ks_critical_1pct: float
    gap_bin_edges: np.ndarray
    gap_density: np.ndarray
    gap_reference: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def poissonian(self) -> bool:
        return (
            0.8 <= self.variance_ratio <= 1.2 and self.ks_statistic < self.ks_critical_1pct
        )

    def gap_histogram_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["gap_left", "gap_right", "density", "exp1_reference"])
            for j in range(len(self.gap_density)):
                writer.writerow(
                    [
                        repr(float(self.gap_bin_edges[j])),
                        repr(float(self.gap_bin_edges[j + 1])),
                        repr(float(self.gap_density[j])),
                        repr(float(self.gap_reference[j])),
                    ]
                )

    def to_dict(self) -> dict:
        return {
            "window": list(self.window),
            "n_realizations": self.n_realizations,
            "n_windows": self.n_windows,
            "count_mean": self.count_mean,
            "count_variance": self.count_variance,
            "variance_ratio": self.variance_ratio,
            "count_histogram": self.count_histogram,
            "chi_square": self.chi_square,
            "chi_square_dof": self.chi_square_dof,
            "chi_square_pvalue": self.chi_square_pvalue,
            "n_gaps": self.n_gaps,
            "ks_statistic": self.ks_statistic,
            "ks_critical_1pct": self.ks_critical_1pct,
            "poissonian": self.poissonian,
            "warnings": list(self.warnings),
        }


def _ks_exponential(gaps: np.ndarray) -> float:
    """One-sample KS statistic of the gaps against the unit exponential."""
    x = np.sort(gaps)
    n = len(x)
    cdf = 1.0 - np.exp(-x)
    grid = np.arange(1, n + 1) / n
    return float(np.max(np.maximum(grid - cdf, cdf - (grid - 1.0 / n))))


def poisson_statistics(
    spectra: Sequence[RescaledSpectrum],
    window: tuple[float, float] = (-5.0, 5.0),
    bin_width: float = 0.25,
    min_realizations: int = 200,
) -> PoissonReport:
    """Count, gap, and histogram statistics of rescaled eigenvalues.

    A realization contributes the points falling inside ``window``.  Unit
    subwindows give the count mean/variance (both near 1 for a Poisson
    process with unit intensity).  Gap statistics pool every spacing whose
    left endpoint lies in the window, following the right neighbor beyond
    the window edge when needed: dropping edge-straddling spacings would
    length-bias the sample against long gaps by a factor of order one over
    the window length, visibly above the 1% KS band.  The pooled gaps are
    compared against Exp(1) by a Kolmogorov-Smirnov statistic and the
    unit-window count histogram against the Poisson(1) law by chi-square
    with tail bins merged to expected count at least 5.
    """
    if len(spectra) < min_realizations:
        raise ValidationError(
            f"need at least {min_realizations} realizations, got {len(spectra)}"
        )
    lo, hi = float(window[0]), float(window[1])
    n_windows = int(math.floor(hi - lo + 1e-9))
    if n_windows < 1:
        raise ValidationError("window must span at least one unit length")
    if bin_width <= 0:
        raise ValidationError("bin width must be positive")

    counts = np.empty((len(spectra), n_windows), dtype=int)
    gaps = []
    empty = 0
    for i, rescaled in enumerate(spectra):
        xi = np.sort(rescaled.xi)
        inside = xi[(xi >= lo) & (xi < lo + n_windows)]
        if len(inside) == 0:
            empty += 1
        edges = lo + np.arange(n_windows + 1)
        counts[i] = np.histogram(inside, bins=edges)[0]
        if len(xi) >= 2:
            spacings = np.diff(xi)
            left_in = (xi[:-1] >= lo) & (xi[:-1] < lo + n_windows)
            if np.any(left_in):
                gaps.append(spacings[left_in])
    warnings = []
    if empty > 0.5 * len(spectra):
        warnings.append(
            f"window empty in {empty}/{len(spectra)} realizations; statistics are thin"
        )

    pooled = counts.ravel()
    mean = float(pooled.mean())
    var = float(pooled.var(ddof=1))
    ratio = var / mean if mean > 0 else math.inf

    # chi-square of the count histogram against Poisson(1), merging the tail
    kmax = int(pooled.max())
    n_pool = len(pooled)
    expected = [n_pool * sps.poisson.pmf(k, 1.0) for k in range(kmax + 1)]
    tail = n_pool * sps.poisson.sf(kmax, 1.0)
    observed = [int(np.sum(pooled == k)) for k in range(kmax + 1)]
    expected[-1] += tail
    while len(expected) > 2 and expected[-1] < 5.0:
        expected[-2] += expected[-1]
        observed[-2] += observed[-1]
        expected.pop()
        observed.pop()
    chi2 = float(
        sum((o - e) ** 2 / e for o, e in zip(observed, expected) if e > 0)
    )
    dof = max(len(expected) - 1, 1)
    pvalue = float(sps.chi2.sf(chi2, dof))
    histogram = [
        [k, observed[k], expected[k]] for k in range(len(observed))
    ]

    if gaps:
        gaps_arr = np.concatenate(gaps)
    else:
        gaps_arr = np.empty(0)
        warnings.append("no consecutive pairs inside the window; gap statistics empty")
    n_gaps = len(gaps_arr)
    ks = _ks_exponential(gaps_arr) if n_gaps else math.nan
    ks_crit = KS_COEFF_1PCT / math.sqrt(n_gaps) if n_gaps else math.nan

    gmax = float(gaps_arr.max()) if n_gaps else 1.0
    edges = np.arange(0.0, gmax + bin_width, bin_width)
    if len(edges) < 2:
        edges = np.array([0.0, bin_width])
    density = np.histogram(gaps_arr, bins=edges, density=True)[0] if n_gaps else np.zeros(
        len(edges) - 1
    )
    centers = 0.5 * (edges[:-1] + edges[1:])
    reference = np.exp(-centers)

    return PoissonReport(
        window=(lo, hi),
        n_realizations=len(spectra),
        n_windows=n_windows,
        count_mean=mean,
        count_variance=var,
        variance_ratio=ratio,
        count_histogram=histogram,
        chi_square=chi2,
        chi_square_dof=dof,
        chi_square_pvalue=pvalue,
        n_gaps=n_gaps,
        ks_statistic=ks,
        ks_critical_1pct=ks_crit,
        gap_bin_edges=edges,
        gap_density=density,
        gap_reference=reference,
        warnings=warnings,
    )
