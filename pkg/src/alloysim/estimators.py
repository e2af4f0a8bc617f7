"""Monte Carlo estimators for Green-function moments and eigenvalue counts.

Every estimator is a pure function of its arguments including
``(master_seed)``: realization ``r`` draws from stream ``r``, and retries
after a rejected draw (real energy hitting the spectrum) bump only the
attempt counter of that stream, so results are independent of evaluation
order and reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalError, ValidationError
from .field import sample_field
from .lattice import FiniteVolume, assemble, green_column, spectrum
from .measures import density_norms
from .model import AlloyModel
from .potential import convolution_inverse_norm, uniform_bound_constants, vanishing_order
from .results import Estimate

__all__ = [
    "fractional_moment",
    "DecayProfile",
    "green_decay_profile",
    "wegner_count",
    "minami_bound_constant",
    "minami_determinant",
    "TwoLevelResult",
    "two_level_probability",
    "RecursionRow",
    "RecursionProbe",
    "recursion_probe",
    "fvc_probability",
]

_MAX_ATTEMPTS = 8


def _mean_estimate(values: np.ndarray, master_seed: int, metadata: dict) -> Estimate:
    n = len(values)
    std = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return Estimate(
        value=float(np.mean(values)),
        stderr=std / math.sqrt(n),
        n_samples=n,
        master_seed=master_seed,
        metadata=metadata,
    )


def _retry_draws(n_samples: int, draw):
    """Collect draw(r, attempt) for each realization, retrying singular ones."""
    out = []
    redraws = 0
    for r in range(n_samples):
        for attempt in range(_MAX_ATTEMPTS):
            try:
                out.append(draw(r, attempt))
                break
            except NumericalError:
                redraws += 1
        else:
            raise NumericalError(
                f"realization {r} still singular after {_MAX_ATTEMPTS} redraws"
            )
    return out, redraws


def _require_inside(volume: FiniteVolume, *points) -> list[int]:
    idx = []
    for p in points:
        i = volume.index_of(p)
        if i < 0:
            raise ValidationError(f"point {p!r} is outside the volume")
        idx.append(i)
    return idx


def fractional_moment(
    model: AlloyModel,
    volume: FiniteVolume,
    z: complex,
    x,
    y,
    s: float,
    n_samples: int,
    master_seed: int,
) -> Estimate:
    """Monte Carlo estimate of ``E |G(z; x, y)|**s``.

    The metadata carries the closed-form uniform bound when the model
    supports it (``bound`` and its pieces), the number of redraws forced by
    a real energy landing on a finite-volume eigenvalue, and the arguments
    needed to reproduce the run.
    """
    if not 0 < s < 1:
        raise ValidationError("moment order s must lie in (0, 1)")
    ix, iy = _require_inside(volume, x, y)
    z = complex(z)

    def draw(r, attempt):
        real = sample_field(model.potential, model.measure, volume, master_seed, r, attempt)
        op = assemble(real, model.lam)
        col = green_column(op, z, y)
        return abs(col[ix]) ** s

    values, redraws = _retry_draws(n_samples, draw)
    meta: dict = {
        "s": s,
        "z": [z.real, z.imag],
        "x": list(np.atleast_1d(x)),
        "y": list(np.atleast_1d(y)),
        "redraws": redraws,
    }
    try:
        if model.lam <= 0:
            raise ValidationError("no disorder: the uniform bound needs lam > 0")
        consts = uniform_bound_constants(model.potential, s, model.measure)
        meta["bound"] = consts.bound(model.lam)
        meta["bound_constants"] = {
            "rate": consts.rate,
            "product_constant": consts.product_constant,
            "coefficient": consts.coefficient,
        }
    except (ValidationError, NumericalError) as exc:
        meta["bound"] = None
        meta["bound_note"] = str(exc)
    return _mean_estimate(np.asarray(values), master_seed, meta)


@dataclass
class DecayProfile:
    """Fitted exponential decay of fractional Green moments with distance."""

    distances: np.ndarray
    estimates: list
    amplitude: float
    rate: float
    r_squared: float
    dropped: list
    s: float

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["distance", "value", "stderr"])
            for d, est in zip(self.distances, self.estimates):
                writer.writerow([int(d), repr(est.value), repr(est.stderr)])


def green_decay_profile(
    model: AlloyModel,
    volume: FiniteVolume,
    z: complex,
    x,
    offsets: Sequence,
    s: float,
    n_samples: int,
    master_seed: int,
) -> DecayProfile:
    """Moment-versus-distance profile with a log-linear decay fit.

    One resolvent row per realization feeds every offset simultaneously.
    Offsets whose estimate is consistent with zero at the Monte Carlo noise
    level (mean below twice its standard error) are excluded from the fit
    and reported in ``dropped``.
    """
    if not 0 < s < 1:
        raise ValidationError("moment order s must lie in (0, 1)")
    (ix,) = _require_inside(volume, x)
    base = np.atleast_1d(np.asarray(x, dtype=int))
    targets = [base + np.atleast_1d(np.asarray(o, dtype=int)) for o in offsets]
    cols = np.asarray(_require_inside(volume, *targets))
    dists = np.asarray([int(np.abs(t - base).sum()) for t in targets])
    z = complex(z)

    def draw(r, attempt):
        real = sample_field(model.potential, model.measure, volume, master_seed, r, attempt)
        op = assemble(real, model.lam)
        row = green_column(op, z, x)
        return np.abs(row[cols]) ** s

    rows, redraws = _retry_draws(n_samples, draw)
    data = np.asarray(rows)
    estimates = [
        _mean_estimate(data[:, j], master_seed, {"distance": int(dists[j])})
        for j in range(data.shape[1])
    ]
    keep = np.array([est.value > 2 * est.stderr for est in estimates])
    if keep.sum() < 3:
        raise NumericalError("fewer than 3 distances rise above Monte Carlo noise; cannot fit")
    xfit = dists[keep].astype(float)
    yfit = np.log([estimates[j].value for j in np.nonzero(keep)[0]])
    slope, intercept = np.polyfit(xfit, yfit, 1)
    pred = slope * xfit + intercept
    ss_res = float(np.sum((yfit - pred) ** 2))
    ss_tot = float(np.sum((yfit - yfit.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return DecayProfile(
        distances=dists,
        estimates=estimates,
        amplitude=float(math.exp(intercept)),
        rate=float(-slope),
        r_squared=r2,
        dropped=[int(d) for d, k in zip(dists, keep) if not k],
        s=s,
    )


def wegner_count(
    model: AlloyModel,
    volume: FiniteVolume,
    interval: tuple[float, float],
    n_samples: int,
    master_seed: int,
) -> Estimate:
    """Expected number of eigenvalues in an interval.

    Metadata reports the structural pieces of the counting bound: the
    density total variation, the volume exponent ``2d + N`` with ``N`` the
    vanishing order of the profile's generating function at 1, and the
    implied empirical constant (estimate divided by
    ``(1/lam) * ||rho||_Var * |I| * (2L+1)**(2d+N)``).
    """
    a, b = interval
    if not b > a:
        raise ValidationError("interval must be nondegenerate")
    counts = np.empty(n_samples)
    for r in range(n_samples):
        real = sample_field(model.potential, model.measure, volume, master_seed, r)
        evals = spectrum(assemble(real, model.lam))
        counts[r] = np.searchsorted(evals, b, side="right") - np.searchsorted(evals, a, side="left")
    meta: dict = {"interval": [a, b], "volume_points": len(volume)}
    try:
        order = vanishing_order(model.potential).order
        tv = density_norms(model.measure).total_variation
        meta["volume_exponent_correction"] = order
        meta["rho_total_variation"] = tv
        if volume.kind == "box" and model.lam > 0 and math.isfinite(tv):
            scale = (
                (1.0 / model.lam)
                * tv
                * (b - a)
                * (2 * volume.radius + 1) ** (2 * model.dimension + order)
            )
            meta["bound_scale"] = scale
            meta["implied_constant"] = float(np.mean(counts) / scale)
    except (ValidationError, NumericalError) as exc:
        meta["bound_note"] = str(exc)
    return _mean_estimate(counts, master_seed, meta)


def minami_bound_constant(model: AlloyModel, cu_tol: float = 1e-6) -> float:
    """Constant of the two-eigenvalue bound:
    ``(C_u**2 / 4) * max(||rho'||_1**2, ||rho''||_1)``."""
    cu = convolution_inverse_norm(model.potential, tol=cu_tol).value
    norms = density_norms(model.measure)
    if not (math.isfinite(norms.grad_l1) and math.isfinite(norms.hess_l1)):
        raise ValidationError("two-eigenvalue constant needs finite density derivative norms")
    return cu * cu / 4.0 * max(norms.grad_l1**2, norms.hess_l1)


def minami_determinant(
    model: AlloyModel,
    volume: FiniteVolume,
    z: complex,
    x,
    y,
    n_samples: int,
    master_seed: int,
) -> Estimate:
    """Mean determinant of the 2x2 imaginary Green submatrix at (x, y).

    For ``Im z > 0`` the imaginary part of the resolvent is positive
    semidefinite, so each per-draw determinant must be non-negative; a value
    below -1e-10 raises immediately instead of polluting the mean.  Metadata
    carries the closed-form bound ``(pi / lam)**2`` times the two-eigenvalue
    constant when the model provides it.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValidationError("the determinant estimator needs Im z > 0")
    ix, iy = _require_inside(volume, x, y)
    if ix == iy:
        raise ValidationError("need two distinct points")
    vals = np.empty(n_samples)
    rhs = np.zeros((len(volume), 2), dtype=complex)
    rhs[ix, 0] = 1.0
    rhs[iy, 1] = 1.0
    for r in range(n_samples):
        real = sample_field(model.potential, model.measure, volume, master_seed, r)
        op = assemble(real, model.lam)
        shifted = op.matrix.astype(complex)
        np.fill_diagonal(shifted, op.diagonal - z)
        cols = np.linalg.solve(shifted, rhs)
        sub = cols[[ix, iy]][:, [0, 1]]
        im = sub.imag
        det = im[0, 0] * im[1, 1] - im[0, 1] * im[1, 0]
        if det < -1e-10:
            raise NumericalError(
                f"imaginary Green submatrix lost positive semidefiniteness: det = {det!r}"
            )
        vals[r] = det
    meta: dict = {
        "z": [z.real, z.imag],
        "x": list(np.atleast_1d(x)),
        "y": list(np.atleast_1d(y)),
        "min_det": float(vals.min()),
    }
    try:
        if model.lam <= 0:
            raise ValidationError("no disorder: the determinant bound needs lam > 0")
        cmin = minami_bound_constant(model)
        meta["bound"] = (math.pi / model.lam) ** 2 * cmin
        meta["bound_constant"] = cmin
    except (ValidationError, NumericalError) as exc:
        meta["bound"] = None
        meta["bound_note"] = str(exc)
    return _mean_estimate(vals, master_seed, meta)


@dataclass
class TwoLevelResult:
    """Probability of two eigenvalues in an interval and its dominating
    half factorial moment ``E[k(k-1)/2]``; the pointwise inequality
    ``1{k >= 2} <= k(k-1)/2`` holds draw by draw by construction."""

    p_two: Estimate
    half_moment: Estimate
    bound: Optional[float]
    bound_note: Optional[str] = None


def two_level_probability(
    model: AlloyModel,
    volume: FiniteVolume,
    interval: tuple[float, float],
    n_samples: int,
    master_seed: int,
) -> TwoLevelResult:
    """Estimate ``P(at least two eigenvalues in I)`` and ``E[k(k-1)/2]``."""
    a, b = interval
    if not b > a:
        raise ValidationError("interval must be nondegenerate")
    indicator = np.empty(n_samples)
    half = np.empty(n_samples)
    for r in range(n_samples):
        real = sample_field(model.potential, model.measure, volume, master_seed, r)
        evals = spectrum(assemble(real, model.lam))
        k = int(
            np.searchsorted(evals, b, side="right") - np.searchsorted(evals, a, side="left")
        )
        indicator[r] = 1.0 if k >= 2 else 0.0
        half[r] = 0.5 * k * (k - 1)
    meta = {"interval": [a, b], "volume_points": len(volume)}
    bound = None
    note = None
    try:
        if model.lam <= 0:
            raise ValidationError("no disorder: the two-eigenvalue bound needs lam > 0")
        cmin = minami_bound_constant(model)
        bound = 0.5 * (math.pi / model.lam) ** 2 * cmin * (b - a) ** 2 * len(volume) ** 2
    except (ValidationError, NumericalError) as exc:
        note = str(exc)
    return TwoLevelResult(
        p_two=_mean_estimate(indicator, master_seed, dict(meta)),
        half_moment=_mean_estimate(half, master_seed, dict(meta)),
        bound=bound,
        bound_note=note,
    )


@dataclass
class RecursionRow:
    lam: float
    lhs: Estimate
    rhs_sum: Estimate
    implied_constant: float


@dataclass
class RecursionProbe:
    rows: list
    max_residual: float
    s: float
    skipped: list

    @property
    def implied_range(self) -> tuple[float, float]:
        cs = [row.implied_constant for row in self.rows]
        if not cs:
            raise NumericalError("every disorder strength was skipped; nothing to range over")
        return min(cs), max(cs)


def recursion_probe(
    model: AlloyModel,
    volume: FiniteVolume,
    energy: float,
    x,
    y,
    s: float,
    lams: Sequence[float],
    n_samples: int,
    master_seed: int,
    residual_tol: float = 1e-8,
) -> RecursionProbe:
    """Probe the one-step moment recursion across disorder strengths.

    For each ``lam`` the probe estimates ``E|G(E; x, y)|**s`` and the summed
    neighbor moments ``sum_e E|G(E; x, y+e)|**s`` on common realizations and
    reports the implied constant ``lam**s * lhs / rhs``.  Every draw also
    checks the exact off-diagonal resolvent identity
    ``sum_e G(E; x, y+e) = (lam * field(y) - E) G(E; x, y)`` within
    ``residual_tol``; a violation marks the draw singular and redraws it.
    """
    if not 0 < s < 1:
        raise ValidationError("moment order s must lie in (0, 1)")
    if not lams:
        raise ValidationError("need at least one disorder strength")
    if model.potential.value_at(np.zeros(model.dimension, dtype=int)) == 0.0:
        raise ValidationError("the recursion step needs the profile to cover the origin")
    ix, iy = _require_inside(volume, x, y)
    if ix == iy:
        raise ValidationError("the recursion is off-diagonal; need x != y")
    ypt = np.asarray(volume.points[iy])
    neighbor_idx = []
    for axis in range(volume.dimension):
        for step in (-1, 1):
            q = ypt.copy()
            q[axis] += step
            j = volume.index_of(q)
            if j >= 0:
                neighbor_idx.append(j)

    def draw(r, attempt):
        real = sample_field(model.potential, model.measure, volume, master_seed, r, attempt)
        per_lam = []
        for lam in lams:
            op = assemble(real, lam)
            row = green_column(op, complex(energy), x)
            g_y = row[iy]
            neigh = row[neighbor_idx]
            residual = abs(neigh.sum() - (op.diagonal[iy] - energy) * g_y) / (1.0 + abs(g_y))
            if residual > residual_tol:
                raise NumericalError(f"resolvent identity residual {residual:.3e}")
            per_lam.append((abs(g_y) ** s, float(np.sum(np.abs(neigh) ** s)), residual))
        return per_lam

    draws, redraws = _retry_draws(n_samples, draw)
    rows = []
    skipped = []
    max_res = 0.0
    for j, lam in enumerate(lams):
        lhs = np.asarray([d[j][0] for d in draws])
        rhs = np.asarray([d[j][1] for d in draws])
        max_res = max(max_res, max(d[j][2] for d in draws))
        lhs_est = _mean_estimate(lhs, master_seed, {"lam": lam, "redraws": redraws})
        rhs_est = _mean_estimate(rhs, master_seed, {"lam": lam})
        if rhs_est.value <= 2 * rhs_est.stderr:
            skipped.append(lam)
            continue
        implied = lam**s * lhs_est.value / rhs_est.value
        rows.append(RecursionRow(lam=lam, lhs=lhs_est, rhs_sum=rhs_est, implied_constant=implied))
    return RecursionProbe(rows=rows, max_residual=max_res, s=s, skipped=skipped)


def fvc_probability(
    model: AlloyModel,
    volume: FiniteVolume,
    energy: float,
    exponent: float,
    n_samples: int,
    master_seed: int,
) -> Estimate:
    """Probability that every long-distance Green entry is polynomially small.

    The event asks ``|G(E; x, y)| <= L**-exponent`` simultaneously for all
    pairs at sup-distance at least ``L/2`` in a box of radius ``L``; the
    exponent must exceed ``3d - 1``.  Real energies hitting an eigenvalue
    force a redraw (counted in the metadata).
    """
    if volume.kind != "box" or volume.radius is None:
        raise ValidationError("the smallness event is defined on a box volume")
    d = volume.dimension
    if exponent <= 3 * d - 1:
        raise ValidationError(f"exponent must exceed 3d - 1 = {3 * d - 1}")
    L = volume.radius
    pts = volume.points
    supdist = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=2)
    ii, jj = np.nonzero(np.triu(supdist >= L / 2, k=1))
    if len(ii) == 0:
        # no pair is far enough apart; the all-pairs event holds vacuously
        return Estimate(
            value=1.0,
            stderr=0.0,
            n_samples=n_samples,
            master_seed=master_seed,
            metadata={"n_pairs": 0, "vacuous": True, "exponent": exponent, "energy": energy},
        )
    threshold = float(L) ** (-exponent)

    def draw(r, attempt):
        real = sample_field(model.potential, model.measure, volume, master_seed, r, attempt)
        op = assemble(real, model.lam)
        if float(np.min(np.abs(spectrum(op) - energy))) <= 1e-12 * max(1.0, op.norm_bound()):
            raise NumericalError("energy hit the finite-volume spectrum")
        inv = np.linalg.inv(op.matrix - energy * np.eye(op.size))
        return 1.0 if np.all(np.abs(inv[ii, jj]) <= threshold) else 0.0

    values, redraws = _retry_draws(n_samples, draw)
    arr = np.asarray(values)
    p = float(arr.mean())
    return Estimate(
        value=p,
        stderr=float(math.sqrt(max(p * (1 - p), 1e-12) / len(arr))),
        n_samples=len(arr),
        master_seed=master_seed,
        metadata={
            "threshold": threshold,
            "n_pairs": int(len(ii)),
            "redraws": redraws,
            "exponent": exponent,
            "energy": energy,
        },
    )
