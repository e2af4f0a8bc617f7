"""Concentration of the field and conditioning diagnostics.

Three groups of tools live here:

* concentration functions of a single field value: the exact curve for the
  two-tap uniform example and an empirical sup-over-windows estimator;
* conditional Monte Carlo under band or pin events on neighboring field
  values, with exact samplers adapted to the event structure, plus the
  interval-pinning certificate that explains *why* a band event freezes the
  center value;
* Gaussian conditioning: the general linear-constraint formula and the
  closed form for the two-tap moving-average chain, cross-validated against
  each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtr, ndtri

from .errors import NumericalError, ValidationError
from .field import sample_field
from .lattice import build_volume
from .measures import CouplingMeasure
from .model import AlloyModel
from .potential import SingleSitePotential
from .results import Estimate
from .rng import stream_rng

__all__ = [
    "uniform_pair_concentration",
    "concentration_empirical",
    "concentration_curve",
    "ConcentrationCurve",
    "BandEvent",
    "PinEvent",
    "ConditionalMCResult",
    "conditional_concentration_mc",
    "CertificateStep",
    "CertificateReport",
    "pinning_certificate",
    "GaussianConditional",
    "condition_gaussian_linear",
    "Ma1GramIdentities",
    "ma1_gram_identities",
    "condition_ma1_center",
]


# ---------------------------------------------------------------------------
# Concentration functions
# ---------------------------------------------------------------------------


def uniform_pair_concentration(eps):
    """Exact concentration of the sum of two unit uniforms.

    ``sup_a P(sum in [a, a+eps])`` equals ``eps - eps**2/4`` for
    ``eps in (0, 2]`` (window centered at the mode) and 1 beyond.
    """
    e = np.asarray(eps, dtype=float)
    if np.any(e <= 0):
        raise ValidationError("window width must be positive")
    out = np.where(e >= 2.0, 1.0, e - e * e / 4.0)
    return float(out) if np.isscalar(eps) else out


def _site_weight_vector(model: AlloyModel, sites) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coupling points and per-site weight rows for field values at `sites`."""
    vol = build_volume(model.dimension, points=sites)
    coupling_points, gather = vol.coupling_layout(model.potential)
    weights = np.zeros((len(vol), len(coupling_points)))
    vals = np.asarray(model.potential.values)
    for j in range(len(vals)):
        weights[np.arange(len(vol)), gather[j]] += vals[j]
    rows = np.array([vol.index_of(s) for s in sites])
    return coupling_points, weights[rows], vol.points


def _normalize_sites(model: AlloyModel, sites) -> list[tuple[int, ...]]:
    out = []
    for s in sites:
        pt = tuple(int(c) for c in np.atleast_1d(s))
        if len(pt) != model.dimension:
            raise ValidationError(f"site {s!r} does not have dimension {model.dimension}")
        out.append(pt)
    return out


def concentration_empirical(
    model: AlloyModel,
    site,
    eps: float,
    n_samples: int,
    a_step: float,
    master_seed: int,
) -> Estimate:
    """Empirical ``sup_a P(field(site) in [a, a+eps])`` over a window grid.

    The sup is taken over left endpoints spaced ``a_step`` apart spanning the
    sample range (``a_step <= eps / 10`` is required so the grid resolves the
    window).  The standard error is the binomial one at the maximizing
    window.
    """
    if eps <= 0:
        raise ValidationError("window width must be positive")
    if not 0 < a_step <= eps / 10:
        raise ValidationError("need 0 < a_step <= eps/10")
    (site_pt,) = _normalize_sites(model, [site])
    _, weights, _ = _site_weight_vector(model, [site_pt])
    rng = stream_rng(master_seed, 0)
    omegas = model.measure.sample(rng, n_samples * weights.shape[1]).reshape(n_samples, -1)
    values = np.sort(omegas @ weights[0])
    grid = np.arange(values[0] - eps, values[-1] + a_step, a_step)
    counts = np.searchsorted(values, grid + eps, side="right") - np.searchsorted(
        values, grid, side="left"
    )
    best = int(np.argmax(counts))
    p = counts[best] / n_samples
    return Estimate(
        value=float(p),
        stderr=float(math.sqrt(max(p * (1 - p), 1e-12) / n_samples)),
        n_samples=n_samples,
        master_seed=master_seed,
        metadata={"eps": eps, "a_step": a_step, "argmax_a": float(grid[best]), "site": list(site_pt)},
    )


@dataclass
class ConcentrationCurve:
    """Concentration values over a window-width grid."""

    eps: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray]
    mode: str  # "exact" or "empirical"

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eps", "value", "stderr"])
            for i, e in enumerate(self.eps):
                err = "" if self.stderr is None else repr(float(self.stderr[i]))
                writer.writerow([repr(float(e)), repr(float(self.values[i])), err])


def concentration_curve(
    model: AlloyModel,
    site,
    eps_grid: Sequence[float],
    n_samples: int,
    master_seed: int,
    a_step: Optional[float] = None,
) -> ConcentrationCurve:
    """Empirical concentration over a grid of window widths (shared samples)."""
    vals, errs = [], []
    for eps in eps_grid:
        step = min(a_step, eps / 10) if a_step is not None else eps / 10
        est = concentration_empirical(model, site, eps, n_samples, step, master_seed)
        vals.append(est.value)
        errs.append(est.stderr)
    return ConcentrationCurve(
        eps=np.asarray(eps_grid, dtype=float),
        values=np.asarray(vals),
        stderr=np.asarray(errs),
        mode="empirical",
    )


# ---------------------------------------------------------------------------
# Conditioning events and conditional Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandEvent:
    """All listed sites carry a field value inside ``[lo, hi]``."""

    sites: tuple
    lo: float
    hi: float

    def __post_init__(self):
        if not self.sites:
            raise ValidationError("event needs at least one site")
        if not self.hi > self.lo:
            raise ValidationError("band event needs hi > lo")


@dataclass(frozen=True)
class PinEvent:
    """All listed sites carry field values within ``tolerance`` of targets."""

    sites: tuple
    values: tuple
    tolerance: float

    def __post_init__(self):
        if not self.sites:
            raise ValidationError("event needs at least one site")
        if len(self.values) != len(self.sites):
            raise ValidationError("one target value per pinned site")
        if self.tolerance <= 0:
            raise ValidationError("pin tolerance must be positive")


@dataclass
class ConditionalMCResult:
    """Conditional window frequency plus the accepted-sample summary."""

    frequency: Estimate
    acceptance_rate: float
    n_accepted: int
    n_draws: int
    sampler: str
    eta_values: np.ndarray
    eta_mean: float
    eta_var: float
    coupling_points: np.ndarray
    couplings: Optional[np.ndarray] = None

    def law_report(self) -> dict:
        """JSON-ready summary of the accepted conditional law."""
        return {
            "mean": self.eta_mean,
            "variance": self.eta_var,
            "n_accepted": self.n_accepted,
            "acceptance_rate": self.acceptance_rate,
            "sampler": self.sampler,
        }


def _event_bounds(event: Union[BandEvent, PinEvent]) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(event, BandEvent):
        k = len(event.sites)
        return np.full(k, event.lo), np.full(k, event.hi)
    v = np.asarray(event.values, dtype=float)
    return v - event.tolerance, v + event.tolerance


def conditional_concentration_mc(
    model: AlloyModel,
    site,
    interval: tuple[float, float],
    event: Union[BandEvent, PinEvent],
    n_target: int,
    master_seed: int,
    sampler: str = "auto",
    max_draws: int = 20_000_000,
    batch: int = 65536,
    chains: int = 256,
    burn_in: int = 300,
    thin: int = 3,
    keep_couplings: bool = False,
) -> ConditionalMCResult:
    """Estimate ``P(field(site) in interval | event)`` by conditional sampling.

    Samplers
    --------
    ``rejection``
        Draw all couplings jointly, keep draws satisfying the event.  Exact
        for every event but the acceptance rate decays like the product of
        the per-site band masses.
    ``stratified``
        For band events whose sites have pairwise-disjoint coupling groups:
        rejection-sample each group against its own one-site band, which is
        the exact conditional law by independence, at a per-group acceptance
        cost.
    ``gibbs``
        For pin events under a gaussian measure: single-coordinate Gibbs
        updates, each a one-dimensional truncated normal.  Exact in
        distribution at stationarity; ``chains``/``burn_in``/``thin`` control
        mixing.
    ``auto`` picks stratified for factorizable band events, gibbs for
    gaussian pin events, rejection otherwise.

    Raises
    ------
    NumericalError
        When rejection exhausts ``max_draws`` before ``n_target`` acceptances
        (the message suggests widening the event or switching sampler).
    """
    if n_target <= 0:
        raise ValidationError("n_target must be positive")
    lo_t, hi_t = interval
    if not hi_t > lo_t:
        raise ValidationError("target interval must be nondegenerate")
    (site_pt,) = _normalize_sites(model, [site])
    event_sites = _normalize_sites(model, event.sites)
    if site_pt in event_sites:
        raise ValidationError("the target site cannot be part of the conditioning event")

    all_sites = event_sites + [site_pt]
    coupling_points, weights, _ = _site_weight_vector(model, all_sites)
    w_event, w_target = weights[:-1], weights[-1]
    ev_lo, ev_hi = _event_bounds(event)

    if sampler == "auto":
        if isinstance(event, BandEvent) and _disjoint_groups(w_event) is not None:
            sampler = "stratified"
        elif isinstance(event, PinEvent) and model.measure.kind == "gaussian":
            sampler = "gibbs"
        else:
            sampler = "rejection"

    if sampler == "rejection":
        couplings, n_draws = _rejection_sample_event(
            model.measure, w_event, ev_lo, ev_hi, n_target, master_seed, max_draws, batch
        )
        acceptance = n_target / n_draws
    elif sampler == "stratified":
        if not isinstance(event, BandEvent):
            raise ValidationError("the stratified sampler handles band events only")
        groups = _disjoint_groups(w_event)
        if groups is None:
            raise ValidationError(
                "band event does not factorize over disjoint coupling groups; "
                "use the rejection sampler"
            )
        couplings, n_draws = _stratified_sample_event(
            model.measure, w_event, groups, ev_lo, ev_hi, n_target, master_seed, max_draws, batch
        )
        acceptance = n_target * len(groups) / max(n_draws, 1)
    elif sampler == "gibbs":
        if model.measure.kind != "gaussian":
            raise ValidationError("the gibbs sampler requires a gaussian measure")
        couplings = _gibbs_sample_event(
            model.measure, w_event, ev_lo, ev_hi, n_target, master_seed, chains, burn_in, thin
        )
        n_draws = n_target
        acceptance = float("nan")
    else:
        raise ValidationError(f"unknown sampler {sampler!r}")

    eta = couplings @ w_target
    inside = (eta >= lo_t) & (eta <= hi_t)
    p = float(np.mean(inside))
    freq = Estimate(
        value=p,
        stderr=float(math.sqrt(max(p * (1 - p), 1e-12) / len(eta))),
        n_samples=len(eta),
        master_seed=master_seed,
        metadata={
            "interval": [lo_t, hi_t],
            "sampler": sampler,
            "acceptance_rate": acceptance,
            "event_sites": [list(s) for s in event_sites],
        },
    )
    return ConditionalMCResult(
        frequency=freq,
        acceptance_rate=acceptance,
        n_accepted=len(eta),
        n_draws=n_draws,
        sampler=sampler,
        eta_values=eta,
        eta_mean=float(np.mean(eta)),
        eta_var=float(np.var(eta)),
        coupling_points=coupling_points,
        couplings=couplings if keep_couplings else None,
    )


def _disjoint_groups(w_event: np.ndarray) -> Optional[list[np.ndarray]]:
    groups = [np.nonzero(row)[0] for row in w_event]
    seen: set[int] = set()
    for g in groups:
        if seen & set(g.tolist()):
            return None
        seen.update(g.tolist())
    return groups


def _rejection_sample_event(measure, w_event, ev_lo, ev_hi, n_target, seed, max_draws, batch):
    m = w_event.shape[1]
    kept, total, stream = [], 0, 0
    n_kept = 0
    while n_kept < n_target:
        if total >= max_draws:
            raise NumericalError(
                f"rejection sampler accepted {n_kept}/{n_target} after {total} draws "
                "(acceptance too small: widen the event band or use the "
                "stratified/gibbs sampler)"
            )
        rng = stream_rng(seed, stream)
        stream += 1
        omega = measure.sample(rng, batch * m).reshape(batch, m)
        eta = omega @ w_event.T
        ok = np.all((eta >= ev_lo) & (eta <= ev_hi), axis=1)
        total += batch
        if np.any(ok):
            kept.append(omega[ok])
            n_kept += int(ok.sum())
    return np.concatenate(kept)[:n_target], total


def _stratified_sample_event(measure, w_event, groups, ev_lo, ev_hi, n_target, seed, max_draws, batch):
    m = w_event.shape[1]
    out = np.empty((n_target, m))
    free = np.setdiff1d(np.arange(m), np.concatenate(groups) if groups else [])
    total = 0
    for gi, g in enumerate(groups):
        w_g = w_event[gi, g]
        kept, n_kept, attempt = [], 0, 0
        while n_kept < n_target:
            if total >= max_draws:
                raise NumericalError(
                    f"stratified sampler stalled on conditioned site {gi} after {total} draws"
                )
            rng = stream_rng(seed, gi, attempt)
            attempt += 1
            omega = measure.sample(rng, batch * len(g)).reshape(batch, len(g))
            eta = omega @ w_g
            ok = (eta >= ev_lo[gi]) & (eta <= ev_hi[gi])
            total += batch
            if np.any(ok):
                kept.append(omega[ok])
                n_kept += int(ok.sum())
        out[:, g] = np.concatenate(kept)[:n_target]
    if len(free):
        rng = stream_rng(seed, len(groups))
        out[:, free] = measure.sample(rng, n_target * len(free)).reshape(n_target, len(free))
    return out, total


def _gibbs_sample_event(measure, w_event, ev_lo, ev_hi, n_target, seed, chains, burn_in, thin):
    """Two-stage conditional sampler for Gaussian couplings.

    Stage 1 runs Gibbs over the constrained field values themselves: a
    Gaussian vector of dimension equal to the number of conditioned sites,
    truncated to the event box.  Each coordinate conditional is a
    one-dimensional truncated normal whose scale is set by the field Gram
    matrix, far wider than a tight event box, so sweeps decorrelate in O(1)
    rather than in O(1/width**2) as coupling-space updates would.  Stage 2
    lifts each kept field vector to couplings exactly: a prior draw plus the
    Gram-solved correction realizes the conditional Gaussian law.
    """
    center = measure.params["mean"]
    sigma = math.sqrt(measure.params["variance"])
    n_con, m = w_event.shape
    gram = sigma * sigma * (w_event @ w_event.T)
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 1e-12 * max(1.0, eigs[-1]):
        raise NumericalError(
            "pin constraints are linearly dependent; drop the redundant sites"
        )
    precision = np.linalg.inv(gram)
    cond_sd = 1.0 / np.sqrt(np.diag(precision))
    y_mean = center * (w_event @ np.ones(m))
    rng = stream_rng(seed, 0)

    y = np.tile(0.5 * (ev_lo + ev_hi), (chains, 1))
    kept_per_chain = -(-n_target // chains)
    kept_y = np.empty((kept_per_chain, chains, n_con))
    kept = 0
    sweep = 0
    tiny = 1e-15
    while kept < kept_per_chain:
        for i in range(n_con):
            cross = (y - y_mean) @ precision[i] - precision[i, i] * (y[:, i] - y_mean[i])
            mu = y_mean[i] - cross / precision[i, i]
            za = ndtr((ev_lo[i] - mu) / cond_sd[i])
            zb = ndtr((ev_hi[i] - mu) / cond_sd[i])
            q = np.clip(za + rng.random(chains) * (zb - za), tiny, 1 - tiny)
            new = mu + cond_sd[i] * ndtri(q)
            y[:, i] = np.clip(new, ev_lo[i], ev_hi[i])  # CDF round-off guard
        sweep += 1
        if sweep > burn_in and (sweep - burn_in) % thin == 0:
            kept_y[kept] = y
            kept += 1
    ys = kept_y.reshape(-1, n_con)[:n_target]

    draws = center + sigma * rng.standard_normal((len(ys), m))
    resid = ys - draws @ w_event.T
    return draws + resid @ np.linalg.solve(gram, sigma * sigma * w_event)


# ---------------------------------------------------------------------------
# Interval-pinning certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CertificateStep:
    """One membership layer: (coupling index, value, lo, hi, ok) tuples."""

    name: str
    checks: tuple


@dataclass(frozen=True)
class CertificateReport:
    passed: bool
    center: float
    slope: float
    target: tuple[float, float]
    center_value: float
    steps: tuple[CertificateStep, ...]

    @property
    def violations(self) -> list:
        return [c for s in self.steps for c in s.checks if not c[-1]]


def pinning_certificate(
    u: SingleSitePotential,
    delta: float,
    delta_prime: float,
    couplings: Union[Mapping[int, float], "object"],
) -> CertificateReport:
    """Verify the interval chain a two-sided band event forces on couplings.

    Setting: d = 1, support {0, ..., n-1}, couplings valued in [0, 1], and a
    realization satisfying the band event (field values at -1 and n-1 within
    ``delta_prime`` below the positive coefficient sum).  The report checks,
    coupling by coupling:

    1. the left band pins ``omega(-1-k)`` near 1 for positive coefficients
       and near 0 for negative ones;
    2. the right band does the same for ``omega(n-1-k)``;
    3. consequently the couplings feeding the center site are pinned, near 1
       on the top-pinned set and near 0 on its complement;
    4. the center field value lands in ``[m - c*delta', m + c*delta']`` with
       ``m`` the top-pinned coefficient mass and ``c = n max|u| / min|u|``.

    All interval memberships use a 1e-12 slack for float round-off.
    """
    if not u.contiguous_from_zero:
        raise ValidationError("certificate needs a d = 1 profile supported on {0..n-1}")
    if not 0 < delta_prime <= delta:
        raise ValidationError("need 0 < delta_prime <= delta")

    get = couplings.coupling_at if hasattr(couplings, "coupling_at") else (
        lambda k: float(couplings[k])
    )
    n = u.n_points
    lookup = u.as_dict()
    u_min, u_max = u.min_abs, u.max_abs
    s_plus = u.positive_sum
    center = u.certificate_center
    slope = u.certificate_slope
    width = delta_prime / u_min
    near_one = (1.0 - width, 1.0)
    near_zero = (0.0, width)
    slack = 1e-12

    def member(x, lohi):
        return lohi[0] - slack <= x <= lohi[1] + slack

    def layer(name, items):
        checks = []
        for idx, lohi in items:
            val = get(idx)
            checks.append((idx, val, lohi[0], lohi[1], member(val, lohi)))
        return CertificateStep(name, tuple(checks))

    pos, neg = set(u.support_pos), set(u.support_neg)
    band = (s_plus - delta_prime, s_plus)
    eta_left = sum(lookup[(k,)] * get(-1 - k) for k in range(n))
    eta_right = sum(lookup[(k,)] * get(n - 1 - k) for k in range(n))
    event_step = CertificateStep(
        "event",
        (
            (-1, eta_left, band[0], band[1], member(eta_left, band)),
            (n - 1, eta_right, band[0], band[1], member(eta_right, band)),
        ),
    )

    step1 = layer("left-band", [(-1 - k, near_one if k in pos else near_zero) for k in sorted(pos | neg)])
    step2 = layer("right-band", [(n - 1 - k, near_one if k in pos else near_zero) for k in sorted(pos | neg)])
    top, bottom = u.pinned_top, u.pinned_bottom
    step3 = layer(
        "center-couplings",
        [(-k, near_one) for k in top] + [(-k, near_zero) for k in bottom],
    )

    eta_center = sum(lookup[(k,)] * get(-k) for k in range(n))
    target = (center - slope * delta_prime, center + slope * delta_prime)
    final = CertificateStep(
        "center-interval",
        ((0, eta_center, target[0], target[1], member(eta_center, target)),),
    )

    steps = (event_step, step1, step2, step3, final)
    passed = all(c[-1] for s in steps for c in s.checks)
    return CertificateReport(
        passed=passed,
        center=center,
        slope=slope,
        target=target,
        center_value=eta_center,
        steps=steps,
    )


# ---------------------------------------------------------------------------
# Gaussian conditioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianConditional:
    """Conditional law of a linear functional: normal with these moments."""

    mean: float
    variance: float
    provenance: str = ""

    def __post_init__(self):
        if self.variance < -1e-10:
            raise NumericalError(f"conditional variance {self.variance!r} is negative")
        if self.variance < 0:
            object.__setattr__(self, "variance", 0.0)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "provenance": self.provenance}


def condition_gaussian_linear(
    mean: Sequence[float],
    cov: np.ndarray,
    weights: Sequence[float],
    constraints: np.ndarray,
    observed: Sequence[float],
) -> GaussianConditional:
    """Law of ``weights . X`` given ``constraints @ X = observed``.

    ``X`` is Gaussian with the given mean and covariance.  Uses a Cholesky
    solve of the constraint Gram matrix; an ill-conditioned Gram matrix
    (condition number above 1e12, or a non-positive eigenvalue) raises with
    the offending eigenvalue in the message.  An empty constraint block
    returns the unconditioned law.
    """
    mu = np.asarray(mean, dtype=float)
    sig = np.asarray(cov, dtype=float)
    a = np.asarray(weights, dtype=float)
    b = np.asarray(constraints, dtype=float).reshape(-1, mu.size)
    v = np.asarray(observed, dtype=float)
    if sig.shape != (mu.size, mu.size):
        raise ValidationError("covariance shape does not match the mean vector")
    if b.shape[0] != v.size:
        raise ValidationError("one observed value per constraint row is required")
    base_var = float(a @ sig @ a)
    if b.shape[0] == 0:
        return GaussianConditional(float(a @ mu), base_var, provenance="unconditioned")
    gram = b @ sig @ b.T
    eigs = np.linalg.eigvalsh(gram)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > 1e12:
        raise NumericalError(
            f"constraint Gram matrix is numerically singular (smallest eigenvalue {eigs[0]:.3e})"
        )
    cross = b @ sig @ a
    solve = cho_solve(cho_factor(gram), cross)
    variance = base_var - float(cross @ solve)
    mean_out = float(a @ mu + solve @ (v - b @ mu))
    return GaussianConditional(mean_out, variance, provenance="linear-constraint")


@dataclass(frozen=True)
class Ma1GramIdentities:
    """Determinant and corner-inverse identities of the two-tap Gram matrix.

    The Gram matrix of ``n`` consecutive values of the two-tap chain is
    tridiagonal with ``1 + coeff**2`` on the diagonal and ``coeff`` off it
    (times the coupling variance).  Its determinant satisfies
    ``D_n = (1 + coeff**2) D_{n-1} - coeff**2 D_{n-2}``, ``D_0 = 1``, and the
    (1,1) and (n,n) entries of the inverse both equal ``D_{n-1} / D_n``.
    """

    size: int
    coeff: float
    det_numeric: float
    det_recurrence: float
    corner_first: float
    corner_last: float
    determinants: tuple


def _gram_determinants(coeff: float, n: int) -> np.ndarray:
    d = np.empty(n + 1)
    d[0] = 1.0
    if n >= 1:
        d[1] = 1.0 + coeff * coeff
    for k in range(2, n + 1):
        d[k] = (1.0 + coeff * coeff) * d[k - 1] - coeff * coeff * d[k - 2]
    return d


def _gram_matrix(coeff: float, n: int) -> np.ndarray:
    t = np.diag(np.full(n, 1.0 + coeff * coeff))
    idx = np.arange(n - 1)
    t[idx, idx + 1] = coeff
    t[idx + 1, idx] = coeff
    return t


def ma1_gram_identities(n: int, coeff: float) -> Ma1GramIdentities:
    """Numerically check the determinant recurrence and corner entries."""
    if n < 1:
        raise ValidationError("need at least one chain value")
    dets = _gram_determinants(coeff, n)
    t = _gram_matrix(coeff, n)
    det_num = float(np.linalg.det(t))
    e_first = np.zeros(n)
    e_first[0] = 1.0
    e_last = np.zeros(n)
    e_last[-1] = 1.0
    corner_first = float(np.linalg.solve(t, e_first)[0])
    corner_last = float(np.linalg.solve(t, e_last)[-1])
    return Ma1GramIdentities(
        size=n,
        coeff=coeff,
        det_numeric=det_num,
        det_recurrence=float(dets[n]),
        corner_first=corner_first,
        corner_last=corner_last,
        determinants=tuple(dets),
    )


def condition_ma1_center_direct(
    coeff: float,
    sigma: float,
    right: Sequence[float] = (),
    left: Sequence[float] = (),
) -> GaussianConditional:
    """Same conditional law as :func:`condition_ma1_center`, no closed form.

    Builds the explicit coupling vector ``(omega_{-m}, ..., omega_{l+1})``
    with its bidiagonal constraint rows and delegates to
    :func:`condition_gaussian_linear`.  Serves as the independent route the
    closed form is checked against.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    v_right = np.asarray(right, dtype=float)
    v_left = np.asarray(left, dtype=float)
    l, m = v_right.size, v_left.size
    size = l + m + 2
    a = np.zeros(size)
    a[m] = 1.0
    a[m + 1] = coeff
    b = np.zeros((l + m, size))
    for k in range(m):
        b[k, k] = 1.0
        b[k, k + 1] = coeff
    for k in range(l):
        b[m + k, m + 1 + k] = 1.0
        b[m + k, m + 2 + k] = coeff
    observed = np.concatenate([v_left, v_right])
    out = condition_gaussian_linear(
        np.zeros(size), sigma * sigma * np.eye(size), a, b, observed
    )
    return GaussianConditional(out.mean, out.variance, provenance="direct-conditioning")


def condition_ma1_center(
    coeff: float,
    sigma: float,
    right: Sequence[float] = (),
    left: Sequence[float] = (),
) -> GaussianConditional:
    """Conditional law of the center value of a two-tap Gaussian chain.

    The chain is ``field(k) = omega_k + coeff * omega_{k+1}`` with i.i.d.
    centered normal couplings of standard deviation ``sigma``.  Conditioning
    is on the ``len(right)`` field values immediately to the right of the
    center and the ``len(left)`` values immediately to the left (``left`` is
    ordered left to right, so its last entry is the nearest neighbor).

    Closed form: with ``D_k`` the Gram determinants, the variance is
    ``sigma**2 (coeff**2 - 1 + 1/D_m + 1/D_l)`` and the mean contracts the
    observed values against the corner rows of the inverse Gram matrices.
    The literal geometric-sum reading of the determinants (starting the sum
    at index 1 instead of 0) fails the cross-check below for every l >= 1;
    the recurrence value is the one consistent with direct conditioning.

    The result is always cross-checked against
    :func:`condition_gaussian_linear` on the same data; disagreement beyond
    1e-8 raises :class:`NumericalError`.
    """
    if sigma <= 0:
        raise ValidationError("sigma must be positive")
    v_right = np.asarray(right, dtype=float)
    v_left = np.asarray(left, dtype=float)
    l, m = v_right.size, v_left.size
    dets = _gram_determinants(coeff, max(l, m))
    var = sigma * sigma * (coeff * coeff - 1.0 + 1.0 / dets[m] + 1.0 / dets[l])
    mean = 0.0
    if m:
        t_m = _gram_matrix(coeff, m)
        e_last = np.zeros(m)
        e_last[-1] = 1.0
        mean += coeff * float(np.linalg.solve(t_m, e_last) @ v_left)
    if l:
        t_l = _gram_matrix(coeff, l)
        e_first = np.zeros(l)
        e_first[0] = 1.0
        mean += coeff * float(np.linalg.solve(t_l, e_first) @ v_right)

    ref = condition_ma1_center_direct(coeff, sigma, right, left)
    if abs(ref.mean - mean) > 1e-8 * max(1.0, abs(mean)) or abs(ref.variance - var) > 1e-8 * max(
        1.0, var
    ):
        raise NumericalError(
            f"chain closed form ({mean!r}, {var!r}) disagrees with direct conditioning "
            f"({ref.mean!r}, {ref.variance!r})"
        )
    if abs(abs(coeff) - 1.0) > 1e-12:
        floor = sigma * sigma * abs(coeff * coeff - 1.0)
        if var < floor - 1e-10 * max(1.0, floor):
            raise NumericalError("conditional variance fell below its structural floor")
    return GaussianConditional(mean, var, provenance="ma1-closed-form")
