"""Configuration-driven experiment runner.

A run ingests a single JSON config, dispatches to the library operation it
names, and persists artifacts in an output directory: ``results.json`` with
the result record, optional CSV series, a copy of the config, and a
``manifest.json`` written last as the completion marker.  Runs are pure
functions of (config, seed) up to the manifest timestamps, so re-running a
config reproduces ``results.json`` byte for byte.

Suites run a list of configs (concurrently up to ``ALLOYSIM_WORKERS``) and
aggregate per-member outcomes into a pass/fail table.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace as dc_replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import NonintegrableError, NumericalError, ValidationError
from .estimators import (
    fractional_moment,
    fvc_probability,
    green_decay_profile,
    minami_determinant,
    recursion_probe,
    two_level_probability,
    wegner_count,
)
from .ids import (
    RescaledSpectrum,
    ids_estimate,
    poisson_statistics,
    sample_rescaled_spectra,
)
from .lattice import build_volume
from .measures import CouplingMeasure
from .model import AlloyModel, constants_report
from .moments import inverse_moment_check, reverse_holder_ratio
from .regularity import (
    BandEvent,
    PinEvent,
    concentration_curve,
    condition_ma1_center,
    condition_ma1_center_direct,
    conditional_concentration_mc,
    pinning_certificate,
    uniform_pair_concentration,
)
from .rng import stream_rng

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "load_config",
    "run",
    "suite",
    "emit_plot_data",
    "experiment_kinds",
]

try:
    from importlib.metadata import version as _dist_version

    _VERSION = _dist_version("alloysim")
except Exception:  # pragma: no cover - source tree without installed metadata
    _VERSION = "0.1.0"

_TOP_KEYS = {"schema_version", "kind", "seed", "model", "params", "out"}


def _jsonable(obj):
    """Recursively coerce results into JSON-safe structures (no NaN/inf)."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description with its canonical hash."""

    kind: str
    seed: int
    model: Optional[AlloyModel]
    params: dict
    out: Optional[str]
    config_hash: str


@dataclass
class RunManifest:
    """Completion marker: hash, seed, version, timestamps, emitted files."""

    config_hash: str
    kind: str
    seed: int
    version: str
    started: str
    finished: str
    files: list

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "kind": self.kind,
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "files": list(self.files),
        }


def _canonical_hash(semantic: dict) -> str:
    blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_config(
    path,
    seed_override: Optional[int] = None,
    out_override: Optional[str] = None,
) -> ExperimentConfig:
    """Parse and validate a config file; unknown keys are rejected.

    The hash covers the semantic content (kind, seed, model, params) with
    keys sorted, so it is stable under reordering and independent of where
    the artifacts land.
    """
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    if data.get("schema_version") != 1:
        raise ValidationError("schema_version must be 1")
    kind = data.get("kind")
    if kind not in _KINDS:
        raise ValidationError(f"unknown experiment kind {kind!r}; known: {sorted(_KINDS)}")
    entry = _KINDS[kind]
    seed = data.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    if not isinstance(seed, int) or seed < 0:
        raise ValidationError("seed must be a non-negative integer")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ValidationError("params must be an object")
    missing = entry.required - set(params)
    if missing:
        raise ValidationError(f"missing params for {kind}: {sorted(missing)}")
    extra = set(params) - entry.required - entry.optional
    if extra:
        raise ValidationError(f"unknown params for {kind}: {sorted(extra)}")
    model = None
    if entry.needs_model:
        if "model" not in data:
            raise ValidationError(f"experiment kind {kind} needs a model block")
        model = AlloyModel.from_dict(data["model"])
    elif "model" in data:
        raise ValidationError(f"experiment kind {kind} does not take a model block")
    semantic = {
        "schema_version": 1,
        "kind": kind,
        "seed": seed,
        "model": data.get("model"),
        "params": params,
    }
    out = out_override if out_override is not None else data.get("out")
    return ExperimentConfig(
        kind=kind,
        seed=seed,
        model=model,
        params=params,
        out=out,
        config_hash=_canonical_hash(semantic),
    )


# ---------------------------------------------------------------------------
# Experiment kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Kind:
    needs_model: bool
    required: frozenset
    optional: frozenset
    runner: Callable


def _volume(cfg: ExperimentConfig, key: str = "radius"):
    return build_volume(cfg.model.dimension, int(cfg.params[key]))


def _run_concentration(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    curve = concentration_curve(
        cfg.model, p["site"], p["eps_values"], int(p["n_samples"]), cfg.seed,
        a_step=p.get("a_step"),
    )
    rows = []
    max_err = None
    for eps, val, err in zip(curve.eps, curve.values, curve.stderr):
        row = {"eps": eps, "value": val, "stderr": err}
        if p.get("exact") == "uniform-pair":
            row["exact"] = float(uniform_pair_concentration(eps))
            gap = abs(val - row["exact"])
            max_err = gap if max_err is None else max(max_err, gap)
        rows.append(row)
    curve.to_csv(outdir / "concentration.csv")
    results = {"rows": rows, "n_samples": int(p["n_samples"])}
    if max_err is not None:
        results["max_abs_error"] = max_err
        results["passed"] = bool(max_err <= p.get("tolerance", 0.01))
    return results, ["concentration.csv"]


def _run_certificate(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    u = cfg.model.potential
    m = u.certificate_center
    c = u.certificate_slope
    if m is None or c is None:
        raise ValidationError("the profile does not admit the pinning certificate")
    delta = float(p["delta"])
    delta_prime = float(p["delta_prime"])
    s_plus = u.positive_sum
    event = BandEvent(
        sites=[-1, u.n_points - 1], lo=s_plus - delta_prime, hi=s_plus
    )
    res = conditional_concentration_mc(
        cfg.model,
        0,
        (m - c * delta, m + c * delta),
        event,
        int(p["n_target"]),
        cfg.seed,
        sampler=p.get("sampler", "auto"),
        keep_couplings=True,
    )
    keys = [int(pt[0]) for pt in res.coupling_points]
    n_pass = 0
    first_violation = None
    for row in res.couplings:
        report = pinning_certificate(u, delta, delta_prime, dict(zip(keys, row)))
        if report.passed:
            n_pass += 1
        elif first_violation is None:
            first_violation = report.violations
    frac = n_pass / len(res.couplings)
    results = {
        "frequency": res.frequency.to_record("conditional_concentration", cfg.config_hash),
        "acceptance_rate": res.acceptance_rate,
        "sampler": res.sampler,
        "certificate_pass_fraction": frac,
        "center": m,
        "slope": c,
        "target_interval": [m - c * delta, m + c * delta],
        "passed": bool(res.frequency.value == 1.0 and frac == 1.0),
    }
    if first_violation:
        results["first_violation"] = first_violation
    return results, []


def _run_gaussian_conditioning(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    sigma = float(p.get("sigma", 1.0))
    tol = float(p.get("tolerance", 1e-10))
    rng = stream_rng(cfg.seed, 0)
    max_diff = 0.0
    cases = 0
    for coeff in p["coeffs"]:
        for l in range(int(p["l_max"]) + 1):
            for m in range(int(p["m_max"]) + 1):
                v_right = rng.normal(size=l)
                v_left = rng.normal(size=m)
                closed = condition_ma1_center(coeff, sigma, v_right, v_left)
                direct = condition_ma1_center_direct(coeff, sigma, v_right, v_left)
                max_diff = max(
                    max_diff,
                    abs(closed.mean - direct.mean),
                    abs(closed.variance - direct.variance),
                )
                cases += 1
    results = {
        "cases": cases,
        "max_abs_difference": max_diff,
        "tolerance": tol,
        "passed": bool(max_diff <= tol),
    }
    if "tau_mc" in p:
        tp = p["tau_mc"]
        coeff = float(tp.get("coeff", 1.0))
        l, m = int(tp.get("l", 5)), int(tp.get("m", 5))
        closed = condition_ma1_center(coeff, sigma, np.zeros(l), np.zeros(m))
        entries = [[[0], 1.0], [[-1], coeff]]
        model = AlloyModel.from_dict(
            {
                "dimension": 1,
                "lambda": 1.0,
                "single_site": entries,
                "measure": {"kind": "gaussian", "mean": 0.0, "variance": sigma * sigma},
            }
        )
        sites = [[k] for k in range(-m, l + 1) if k != 0]
        tau_rows = []
        for j, tau in enumerate(tp["tau_values"]):
            event = PinEvent(sites=sites, values=[0.0] * len(sites), tolerance=float(tau))
            mc = conditional_concentration_mc(
                model,
                [0],
                (-1.0, 1.0),
                event,
                int(tp.get("n_target", 20000)),
                cfg.seed + 1 + j,
                sampler="gibbs",
                chains=int(tp.get("chains", 256)),
                burn_in=int(tp.get("burn_in", 300)),
                thin=int(tp.get("thin", 3)),
            )
            rel = abs(mc.eta_var - closed.variance) / closed.variance
            tau_rows.append(
                {
                    "tau": float(tau),
                    "mc_variance": mc.eta_var,
                    "closed_variance": closed.variance,
                    "relative_error": rel,
                }
            )
        results["tau_table"] = tau_rows
        results["tau_converged"] = bool(tau_rows[-1]["relative_error"] <= 0.05)
        results["passed"] = bool(results["passed"] and results["tau_converged"])
    return results, []


def _run_fractional_moment(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    est = fractional_moment(
        cfg.model, vol, complex(p["z"][0], p["z"][1]), p["x"], p["y"],
        float(p["s"]), int(p["n_samples"]), cfg.seed,
    )
    rec = est.to_record("fractional_moment", cfg.config_hash)
    bound = est.metadata.get("bound")
    if bound is not None:
        rec["passed"] = bool(est.value <= bound + 3 * est.stderr)
    return rec, []


def _run_decay_profile(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    d = cfg.model.dimension
    x = p.get("x", [0] * d)
    offsets = p.get("offsets")
    if offsets is None:
        if d != 1:
            raise ValidationError("explicit offsets are required above one dimension")
        offsets = [[k] for k in range(1, int(p.get("max_distance", p["radius"])) + 1)]
    prof = green_decay_profile(
        cfg.model, vol, complex(p["z"][0], p["z"][1]), x, offsets,
        float(p["s"]), int(p["n_samples"]), cfg.seed,
    )
    prof.to_csv(outdir / "profile.csv")
    results = {
        "rate": prof.rate,
        "amplitude": prof.amplitude,
        "r_squared": prof.r_squared,
        "dropped_distances": prof.dropped,
        "n_samples": int(p["n_samples"]),
        "s": prof.s,
    }
    if "r2_min" in p:
        results["passed"] = bool(prof.rate > 0 and prof.r_squared >= p["r2_min"])
    return results, ["profile.csv"]


def _run_wegner(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    center = float(p["center"])
    rows = []
    for width in p["widths"]:
        est = wegner_count(
            cfg.model, vol, (center - width / 2, center + width / 2),
            int(p["n_samples"]), cfg.seed,
        )
        rows.append(
            {
                "width": float(width),
                "value": est.value,
                "stderr": est.stderr,
                "per_unit_width": est.value / width,
                "implied_constant": est.metadata.get("implied_constant"),
            }
        )
    per_width = [r["per_unit_width"] for r in rows]
    # stability is judged per halving step: each consecutive width change
    # may move the normalized count by at most the tolerance
    steps = [
        abs(b / a - 1.0) if a > 0 else math.inf
        for a, b in zip(per_width, per_width[1:])
    ]
    drift = max(steps) if steps else 0.0
    with open(outdir / "wegner.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["width", "value", "stderr", "per_unit_width"])
        for r in rows:
            writer.writerow([repr(r["width"]), repr(r["value"]), repr(r["stderr"]), repr(r["per_unit_width"])])
    results = {"rows": rows, "ratio_drift": drift}
    if "ratio_tolerance" in p:
        results["passed"] = bool(drift <= p["ratio_tolerance"])
    return results, ["wegner.csv"]


def _run_minami(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    z = complex(p["z"][0], p["z"][1])
    est = minami_determinant(
        cfg.model, vol, z, p["x"], p["y"], int(p["n_samples"]), cfg.seed
    )
    rec = est.to_record("minami_determinant", cfg.config_hash)
    bound = est.metadata.get("bound")
    ok = est.value <= bound + 3 * est.stderr if bound is not None else None
    if "lams" in p:
        lam_rows = []
        for lam in p["lams"]:
            scaled = minami_determinant(
                dc_replace(cfg.model, lam=float(lam)), vol, z, p["x"], p["y"],
                int(p.get("scaling_samples", p["n_samples"])), cfg.seed,
            )
            lam_rows.append({"lam": float(lam), "value": scaled.value, "stderr": scaled.stderr})
        slope = float(
            np.polyfit(
                np.log([r["lam"] for r in lam_rows]),
                np.log([r["value"] for r in lam_rows]),
                1,
            )[0]
        )
        rec["scaling"] = {"rows": lam_rows, "loglog_slope": slope}
        if ok is not None:
            ok = bool(ok and -2.2 <= slope <= -1.8)
    if ok is not None:
        rec["passed"] = bool(ok)
    return rec, []


def _run_two_level(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    res = two_level_probability(
        cfg.model, vol, tuple(p["interval"]), int(p["n_samples"]), cfg.seed
    )
    pointwise = res.p_two.value <= res.half_moment.value + 1e-15
    results = {
        "p_two": res.p_two.to_record("two_level_probability", cfg.config_hash),
        "half_factorial_moment": res.half_moment.to_record(
            "half_factorial_moment", cfg.config_hash
        ),
        "bound": res.bound,
        "chain_pointwise_ok": bool(pointwise),
    }
    if res.bound_note:
        results["bound_note"] = res.bound_note
    if res.bound is not None:
        results["chain_bound_ok"] = bool(
            res.half_moment.value <= res.bound + 3 * res.half_moment.stderr
        )
        results["passed"] = bool(pointwise and results["chain_bound_ok"])
    return results, []


def _run_recursion(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    probe = recursion_probe(
        cfg.model, vol, float(p["energy"]), p["x"], p["y"], float(p["s"]),
        [float(v) for v in p["lams"]], int(p["n_samples"]), cfg.seed,
        residual_tol=p.get("residual_tol", 1e-8),
    )
    rows = [
        {
            "lam": r.lam,
            "lhs": r.lhs.value,
            "lhs_stderr": r.lhs.stderr,
            "rhs_sum": r.rhs_sum.value,
            "rhs_stderr": r.rhs_sum.stderr,
            "implied_constant": r.implied_constant,
        }
        for r in probe.rows
    ]
    lo, hi = probe.implied_range
    results = {
        "rows": rows,
        "skipped_lams": probe.skipped,
        "max_residual": probe.max_residual,
        "implied_constant_range": [lo, hi],
        "implied_constant_spread": hi / lo if lo > 0 else None,
    }
    ok = probe.max_residual <= p.get("residual_tol", 1e-8)
    if "spread_max" in p:
        ok = ok and results["implied_constant_spread"] is not None
        ok = ok and results["implied_constant_spread"] <= p["spread_max"]
    results["passed"] = bool(ok)
    return results, []


def _run_fvc(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    est = fvc_probability(
        cfg.model, vol, float(p["energy"]), float(p["exponent"]),
        int(p["n_samples"]), cfg.seed,
    )
    rec = est.to_record("fvc_probability", cfg.config_hash)
    if "min_probability" in p:
        rec["passed"] = bool(est.value >= p["min_probability"])
    return rec, []


def _run_ids(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    vol = _volume(cfg)
    table = ids_estimate(
        cfg.model, vol, int(p["n_realizations"]), cfg.seed,
        n_grid=int(p.get("n_grid", 20001)),
    )
    table.to_csv(outdir / "ids.csv")
    results = {
        "median_energy": table.median_energy(),
        "resolution": table.resolution,
        "volume_points": table.volume_points,
        "n_realizations": table.n_realizations,
    }
    return results, ["ids.csv"]


def _run_poisson(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    d = cfg.model.dimension
    ids_vol = build_volume(d, int(p["ids_radius"]))
    stats_vol = build_volume(d, int(p["stats_radius"]))
    table = ids_estimate(
        cfg.model, ids_vol, int(p["ids_realizations"]),
        int(p.get("ids_seed", cfg.seed + 1)),
        n_grid=int(p.get("n_grid", 20001)),
    )
    e0 = p.get("e0", "median")
    e0 = table.median_energy() if e0 == "median" else float(e0)
    spectra = sample_rescaled_spectra(
        cfg.model, stats_vol, table, e0, int(p["n_realizations"]), cfg.seed
    )
    window = tuple(p.get("window", (-5.0, 5.0)))
    report = poisson_statistics(
        spectra, window=window, bin_width=float(p.get("bin_width", 0.25))
    )
    table.to_csv(outdir / "ids.csv")
    report.gap_histogram_to_csv(outdir / "gaps.csv")

    # negative control: a rigid (deterministic, unit-spaced) spectrum must be
    # rejected by the same statistics
    rigid = [
        RescaledSpectrum(
            e0=0.0,
            xi=np.arange(window[0], window[1] + 1.0) + 0.5,
            volume_points=len(stats_vol),
        )
        for _ in range(len(spectra))
    ]
    rigid_report = poisson_statistics(rigid, window=window)
    rigid_rejected = not rigid_report.poissonian

    results = {
        "e0": e0,
        "report": report.to_dict(),
        "rigid_control": {
            "variance_ratio": rigid_report.variance_ratio,
            "ks_statistic": rigid_report.ks_statistic,
            "rejected": bool(rigid_rejected),
        },
        "passed": bool(report.poissonian and rigid_rejected),
    }
    return results, ["ids.csv", "gaps.csv"]


def _run_inverse_moment(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    measure = CouplingMeasure.from_dict(p["measure"])
    chk = inverse_moment_check(
        measure, float(p["s"]), float(p["b"]),
        alpha=p.get("alpha"), c1=p.get("c1"),
    )
    results = {
        "integral": chk.integral,
        "bound": chk.bound,
        "margin": chk.margin,
        "holds": bool(chk.holds),
        "abs_error": chk.abs_error,
    }
    expect = p.get("expect")
    tol = p.get("tolerance", 1e-6)
    if expect == "equality":
        results["passed"] = bool(abs(chk.margin) <= tol)
    elif expect == "strict":
        results["passed"] = bool(chk.margin > tol)
    elif expect is not None:
        raise ValidationError("expect must be 'equality' or 'strict'")
    return results, []


def _run_reverse_holder(cfg: ExperimentConfig, outdir: Path):
    p = cfg.params
    measure = CouplingMeasure.from_dict(p["measure"])
    s = float(p["s"])
    results: dict = {"s": s}
    if "q1" in p or "q2" in p:
        out = reverse_holder_ratio(p["q1"], p["q2"], measure, s)
        results.update(
            ratio=out.ratio,
            moment_2s=out.moment_2s,
            moment_s=out.moment_s,
            singular_points=out.singular_points,
        )
    if "batch" in p:
        b = p["batch"]
        rng = stream_rng(cfg.seed, 0)
        deg = int(b.get("max_degree", 2))
        worst = 0.0
        worst_pair = None
        for _ in range(int(b["n"])):
            q1 = rng.standard_normal(deg + 1)
            q2 = rng.standard_normal(deg + 1)
            out = reverse_holder_ratio(q1, q2, measure, s)
            if out.ratio > worst:
                worst = out.ratio
                worst_pair = [q1.tolist(), q2.tolist()]
        results["batch_max_ratio"] = worst
        results["batch_n"] = int(b["n"])
        results["batch_worst_pair"] = worst_pair
    return results, []


def _run_constants(cfg: ExperimentConfig, outdir: Path):
    return constants_report(cfg.model, s=float(cfg.params.get("s", 0.5))), []


_KINDS = {
    "concentration": _Kind(
        True,
        frozenset({"site", "eps_values", "n_samples"}),
        frozenset({"a_step", "exact", "tolerance"}),
        _run_concentration,
    ),
    "certificate": _Kind(
        True,
        frozenset({"delta", "delta_prime", "n_target"}),
        frozenset({"sampler"}),
        _run_certificate,
    ),
    "gaussian-conditioning": _Kind(
        False,
        frozenset({"coeffs", "l_max", "m_max"}),
        frozenset({"sigma", "tolerance", "tau_mc"}),
        _run_gaussian_conditioning,
    ),
    "fractional-moment": _Kind(
        True,
        frozenset({"radius", "z", "x", "y", "s", "n_samples"}),
        frozenset(),
        _run_fractional_moment,
    ),
    "decay-profile": _Kind(
        True,
        frozenset({"radius", "z", "s", "n_samples"}),
        frozenset({"x", "offsets", "max_distance", "r2_min"}),
        _run_decay_profile,
    ),
    "wegner": _Kind(
        True,
        frozenset({"radius", "center", "widths", "n_samples"}),
        frozenset({"ratio_tolerance"}),
        _run_wegner,
    ),
    "minami": _Kind(
        True,
        frozenset({"radius", "z", "x", "y", "n_samples"}),
        frozenset({"lams", "scaling_samples"}),
        _run_minami,
    ),
    "two-level": _Kind(
        True,
        frozenset({"radius", "interval", "n_samples"}),
        frozenset(),
        _run_two_level,
    ),
    "recursion": _Kind(
        True,
        frozenset({"radius", "energy", "x", "y", "s", "lams", "n_samples"}),
        frozenset({"residual_tol", "spread_max"}),
        _run_recursion,
    ),
    "fvc": _Kind(
        True,
        frozenset({"radius", "energy", "exponent", "n_samples"}),
        frozenset({"min_probability"}),
        _run_fvc,
    ),
    "ids": _Kind(
        True,
        frozenset({"radius", "n_realizations"}),
        frozenset({"n_grid"}),
        _run_ids,
    ),
    "poisson": _Kind(
        True,
        frozenset({"stats_radius", "ids_radius", "ids_realizations", "n_realizations"}),
        frozenset({"window", "bin_width", "e0", "ids_seed", "n_grid"}),
        _run_poisson,
    ),
    "inverse-moment": _Kind(
        False,
        frozenset({"measure", "s", "b"}),
        frozenset({"alpha", "c1", "expect", "tolerance"}),
        _run_inverse_moment,
    ),
    "reverse-holder": _Kind(
        False,
        frozenset({"measure", "s"}),
        frozenset({"q1", "q2", "batch"}),
        _run_reverse_holder,
    ),
    "constants": _Kind(True, frozenset(), frozenset({"s"}), _run_constants),
}


def experiment_kinds() -> list:
    """Names of the available experiment kinds."""
    return sorted(_KINDS)


# ---------------------------------------------------------------------------
# run / suite / emit-plot-data
# ---------------------------------------------------------------------------


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def run(
    config_path,
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> int:
    """Execute one experiment config.

    Exit codes: 0 success, 2 validation error (no artifacts), 3 numerical
    failure (the operation's error is printed verbatim; no manifest is
    written, so the run reads as incomplete).
    """
    try:
        cfg = load_config(config_path, seed_override=seed, out_override=out)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    outdir = Path(cfg.out) if cfg.out else Path(f"runs/{cfg.kind}-{cfg.config_hash[:12]}")
    started = _utcnow()
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        results, files = _KINDS[cfg.kind].runner(cfg, outdir)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, NonintegrableError) as exc:
        print(str(exc), file=sys.stderr)
        return 3
    record = {
        "operation": cfg.kind,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        **_jsonable(results),
    }
    with open(outdir / "results.json", "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    shutil.copyfile(config_path, outdir / "config.json")
    emitted = ["results.json", "config.json"] + list(files) + ["manifest.json"]
    manifest = RunManifest(
        config_hash=cfg.config_hash,
        kind=cfg.kind,
        seed=cfg.seed,
        version=_VERSION,
        started=started,
        finished=_utcnow(),
        files=emitted,
    )
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{cfg.kind}: ok ({outdir})")
    return 0


def _suite_member(args) -> dict:
    config_path, out_dir = args
    code = run(config_path, out=out_dir)
    passed = None
    results_file = Path(out_dir) / "results.json"
    if results_file.exists():
        try:
            with open(results_file) as fh:
                passed = json.load(fh).get("passed")
        except (OSError, json.JSONDecodeError):
            passed = None
    return {
        "name": Path(config_path).stem,
        "config": str(config_path),
        "out_dir": str(out_dir),
        "exit_code": code,
        "ok": code == 0,
        "passed": passed,
    }


def suite(manifest_path) -> int:
    """Run every config in a suite manifest and aggregate outcomes.

    The manifest is ``{"schema_version": 1, "name": ..., "configs": [...],
    "out": ...}`` with config paths relative to the manifest file.  Members
    run concurrently up to ``ALLOYSIM_WORKERS`` (default 1), each owning its
    own output subdirectory.  Any member that fails to complete or reports
    ``passed: false`` makes the suite exit nonzero; the other members'
    artifacts are still written.
    """
    manifest_path = Path(manifest_path)
    try:
        with open(manifest_path) as fh:
            data = json.load(fh)
        if data.get("schema_version") != 1:
            raise ValidationError("suite schema_version must be 1")
        unknown = set(data) - {"schema_version", "name", "configs", "out"}
        if unknown:
            raise ValidationError(f"unknown suite keys: {sorted(unknown)}")
        configs = data["configs"]
    except (OSError, json.JSONDecodeError, KeyError, ValidationError) as exc:
        print(f"suite manifest error: {exc}", file=sys.stderr)
        return 2
    base = manifest_path.parent
    out_root = Path(data.get("out", base / f"{manifest_path.stem}_results"))
    if not out_root.is_absolute():
        out_root = base / out_root
    jobs = [
        (str(base / c), str(out_root / Path(c).stem)) for c in configs
    ]
    workers = int(os.environ.get("ALLOYSIM_WORKERS", "1") or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            members = list(pool.map(_suite_member, jobs))
    else:
        members = [_suite_member(j) for j in jobs]
    all_ok = all(m["ok"] and m["passed"] is not False for m in members)
    report = {
        "name": data.get("name", manifest_path.stem),
        "n_members": len(members),
        "all_ok": all_ok,
        "members": members,
    }
    out_root.mkdir(parents=True, exist_ok=True)
    with open(out_root / "suite_report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    lines = [f"suite {report['name']}: {'PASS' if all_ok else 'FAIL'}"]
    for m in members:
        status = "ok" if m["ok"] else f"exit {m['exit_code']}"
        if m["passed"] is True:
            status += ", passed"
        elif m["passed"] is False:
            status += ", FAILED CHECK"
        lines.append(f"  {m['name']:<28} {status}")
    text = "\n".join(lines) + "\n"
    with open(out_root / "suite_report.txt", "w") as fh:
        fh.write(text)
    print(text, end="")
    return 0 if all_ok else 1


def emit_plot_data(results_dir) -> int:
    """Collect plot-ready series from completed runs under a directory.

    Decay profiles become (distance, log value) tables, Poisson runs
    contribute their gap histograms, IDS runs their curves.  Runs without a
    manifest are skipped (incomplete); runs whose series files are missing
    are listed but not fatal.
    """
    root = Path(results_dir)
    plot_dir = root / "plot_data"
    missing = []
    emitted = []
    for manifest_file in sorted(root.rglob("manifest.json")):
        run_dir = manifest_file.parent
        if run_dir == plot_dir:
            continue
        try:
            with open(manifest_file) as fh:
                kind = json.load(fh).get("kind")
        except (OSError, json.JSONDecodeError):
            continue
        name = run_dir.name
        wanted: list[tuple[str, str]] = []
        if kind == "decay-profile":
            wanted = [("profile.csv", f"{name}_decay.csv")]
        elif kind == "poisson":
            wanted = [("gaps.csv", f"{name}_gaps.csv"), ("ids.csv", f"{name}_ids.csv")]
        elif kind == "ids":
            wanted = [("ids.csv", f"{name}_ids.csv")]
        elif kind == "concentration":
            wanted = [("concentration.csv", f"{name}_concentration.csv")]
        elif kind == "wegner":
            wanted = [("wegner.csv", f"{name}_wegner.csv")]
        for src_name, dst_name in wanted:
            src = run_dir / src_name
            if not src.exists():
                missing.append(str(src))
                continue
            plot_dir.mkdir(parents=True, exist_ok=True)
            dst = plot_dir / dst_name
            if kind == "decay-profile":
                with open(src) as fh:
                    rows = list(csv.reader(fh))[1:]
                with open(dst, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["distance", "log_value"])
                    for dist, value, _ in rows:
                        v = float(value)
                        if v > 0:
                            writer.writerow([dist, repr(math.log(v))])
            else:
                shutil.copyfile(src, dst)
            emitted.append(str(dst))
    for path in emitted:
        print(f"wrote {path}")
    if missing:
        print("missing series (skipped):", file=sys.stderr)
        for path in missing:
            print(f"  {path}", file=sys.stderr)
    if not emitted and not missing:
        print("no completed runs with plottable series found")
    return 0
