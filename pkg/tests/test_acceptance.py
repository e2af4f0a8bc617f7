"""End-to-end checks of the twelve shipped guarantees.

Each test exercises the library at the stated parameters, registers one
pass/fail line for the summary table, and then asserts, so a red test and a
FAIL table row always agree.  Seeds are fixed; every computation here is
deterministic given them.
"""

import json
import shutil
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

import alloysim as al
from alloysim import experiments

from conftest import record_criterion

SUITE_DIR = Path(__file__).resolve().parent.parent / "suites" / "acceptance_checks"


def check(number: int, passed: bool, detail: str) -> None:
    record_criterion(number, passed, detail)
    assert passed, f"criterion {number}: {detail}"


def test_criterion_01_uniform_sum_concentration(flagship_model):
    start = time.perf_counter()
    gaps = {}
    for eps in (0.5, 1.0, 1.5):
        est = al.concentration_empirical(flagship_model, [0], eps, 100_000, 0.005, 2101)
        gaps[eps] = abs(est.value - al.uniform_pair_concentration(eps))
    elapsed = time.perf_counter() - start
    worst = max(gaps.values())
    check(
        1,
        worst <= 0.01 and elapsed < 10.0,
        f"sup window probability off by at most {worst:.4f} (tol 0.01), {elapsed:.1f}s",
    )


def test_criterion_02_pinning_certificate(flagship_model):
    u = flagship_model.potential
    m, c = u.certificate_center, u.certificate_slope
    assert (m, c) == (2.0, 2.0)
    delta = delta_prime = 0.05
    event = al.BandEvent(sites=[-1, 1], lo=u.positive_sum - delta_prime, hi=u.positive_sum)
    res = al.conditional_concentration_mc(
        flagship_model,
        0,
        (m - c * delta, m + c * delta),
        event,
        1000,
        2102,
        sampler="auto",
        keep_couplings=True,
    )
    keys = [int(pt[0]) for pt in res.coupling_points]
    n_cert = sum(
        al.pinning_certificate(u, delta, delta_prime, dict(zip(keys, row))).passed
        for row in res.couplings
    )
    passed = (
        res.frequency.value == 1.0
        and res.n_accepted >= 1000
        and n_cert == res.n_accepted
    )
    check(
        2,
        passed,
        f"{res.n_accepted} accepted samples, window frequency {res.frequency.value}, "
        f"certificate passed on {n_cert}",
    )


def test_criterion_03_gaussian_conditioning():
    rng = np.random.default_rng(2103)
    max_diff = 0.0
    for coeff in (0.5, 1.0, 2.0):
        for n_right in range(7):
            for n_left in range(7):
                right = rng.normal(size=n_right)
                left = rng.normal(size=n_left)
                closed = al.condition_ma1_center(coeff, 1.0, right, left)
                direct = al.condition_ma1_center_direct(coeff, 1.0, right, left)
                max_diff = max(
                    max_diff,
                    abs(closed.mean - direct.mean),
                    abs(closed.variance - direct.variance),
                )
    agree = max_diff <= 1e-10

    closed = al.condition_ma1_center(1.0, 1.0, np.zeros(5), np.zeros(5))
    chain = al.build_single_site(1, {(0,): 1.0, (-1,): 1.0})
    model = al.AlloyModel(chain, al.CouplingMeasure.gaussian(0.0, 1.0), 1.0)
    sites = [k for k in range(-5, 6) if k != 0]
    rel_errors = []
    for j, tau in enumerate((0.32, 0.16, 0.08)):
        event = al.PinEvent(sites=sites, values=[0.0] * len(sites), tolerance=tau)
        mc = al.conditional_concentration_mc(
            model, 0, (-1.0, 1.0), event, 20_000, 2103 + j, sampler="gibbs"
        )
        rel_errors.append(abs(mc.eta_var - closed.variance) / closed.variance)
    converged = rel_errors[-1] <= 0.05 and rel_errors[-1] < rel_errors[0]

    # the determinant-index resolution lives in the closed form's docstring
    documented = "direct conditioning" in al.condition_ma1_center.__doc__
    check(
        3,
        agree and converged and documented,
        f"closed vs direct max diff {max_diff:.2e} over 147 cases; band MC variance "
        f"rel err {rel_errors[0]:.3f}/{rel_errors[1]:.3f}/{rel_errors[2]:.3f}",
    )


def test_criterion_04_apriori_bound(two_tap, cosine01):
    start = time.perf_counter()
    margins = {}
    ok = True
    for lam in (10.0, 50.0):
        model = al.AlloyModel(two_tap, cosine01, lam)
        z = complex(model.center_energy(), 0.01)
        est = al.fractional_moment(
            model, al.build_volume(1, 8), z, [0], [0], 0.5, 10_000, 2104
        )
        bound = est.metadata["bound"]
        ok = ok and est.value <= bound + 3 * est.stderr
        margins[lam] = (est.value, bound)
    elapsed = time.perf_counter() - start
    detail = ", ".join(
        f"lam={lam:g}: {v:.4f} <= {b:.4f}" for lam, (v, b) in margins.items()
    )
    check(4, ok and elapsed < 300.0, f"{detail} ({elapsed:.0f}s)")


def test_criterion_05_recursion_identity(flagship_model):
    vol = al.build_volume(1, 8)
    pts = vol.points
    rng = np.random.default_rng(2105)
    worst = 0.0
    for r in range(10_000):
        real = al.sample_field(
            flagship_model.potential, flagship_model.measure, vol, 2105, r
        )
        op = al.assemble(real, flagship_model.lam)
        energy = float(rng.uniform(-4.0, 6.0))
        i, j = rng.choice(len(vol), size=2, replace=False)
        resid = al.resolvent_identity_residual(op, energy, pts[i], pts[j])
        worst = max(worst, resid)
    check(5, worst <= 1e-8, f"max residual {worst:.2e} over 10000 draws (tol 1e-08)")


def test_criterion_06_minami(anderson_gaussian):
    vol = al.build_volume(1, 10)
    z = complex(0.0, 0.05)
    est = al.minami_determinant(anderson_gaussian, vol, z, [0], [1], 10_000, 2106)
    bound = est.metadata["bound"]
    bound_ok = est.value <= bound + 3 * est.stderr
    psd_ok = est.metadata["min_det"] >= -1e-10

    lams = (5.0, 10.0, 20.0, 40.0)
    values = []
    for lam in lams:
        scaled = al.minami_determinant(
            replace(anderson_gaussian, lam=lam), vol, z, [0], [1], 100_000, 2106
        )
        values.append(scaled.value)
    slope = float(np.polyfit(np.log(lams), np.log(values), 1)[0])
    check(
        6,
        bound_ok and psd_ok and -2.2 <= slope <= -1.8,
        f"mean det {est.value:.2e} <= {bound:.2e}, min det {est.metadata['min_det']:.1e}, "
        f"disorder scaling slope {slope:.2f}",
    )


def test_criterion_07_counting_chain(anderson_gaussian):
    ks = np.arange(0, 200)
    pointwise = bool(np.all((ks >= 2).astype(float) <= ks * (ks - 1) / 2.0))

    res = al.two_level_probability(
        anderson_gaussian, al.build_volume(1, 8), (-0.025, 0.025), 10_000, 2107
    )
    chain_mc = res.p_two.value <= res.half_moment.value + 1e-15
    chain_bound = res.half_moment.value <= res.bound + 3 * res.half_moment.stderr
    check(
        7,
        pointwise and chain_mc and chain_bound,
        f"P(two levels) {res.p_two.value:.2e} <= half moment {res.half_moment.value:.2e} "
        f"<= bound {res.bound:.2e}",
    )


def test_criterion_08_wegner_stability(anderson_gaussian):
    vol = al.build_volume(1, 16)
    per_width = []
    implied = None
    for width in (0.1, 0.05, 0.025):
        est = al.wegner_count(
            anderson_gaussian, vol, (-width / 2, width / 2), 2000, 4
        )
        per_width.append(est.value / width)
        implied = est.metadata["implied_constant"]
    steps = [abs(b / a - 1.0) for a, b in zip(per_width, per_width[1:])]
    check(
        8,
        max(steps) <= 0.10,
        f"normalized count {per_width[0]:.3f}/{per_width[1]:.3f}/{per_width[2]:.3f} "
        f"per halving drift {max(steps):.3f} (tol 0.10); implied constant {implied:.4f}",
    )


def test_criterion_09_inverse_moment_sharpness(uniform01):
    eq = al.inverse_moment_check(uniform01, s=0.5, b=0.5)
    strict = al.inverse_moment_check(uniform01, s=0.5, b=2.0)
    sharp = abs(eq.integral - eq.bound) <= 1e-6 and eq.integral == pytest.approx(
        2.0 * np.sqrt(2.0), abs=1e-6
    )
    check(
        9,
        sharp and strict.integral < strict.bound - 1e-6,
        f"equality case margin {eq.margin:.2e}; off-support margin {strict.margin:.4f} > 0",
    )


def test_criterion_10_poisson_statistics(delta_profile, uniform01):
    start = time.perf_counter()
    model = al.AlloyModel(delta_profile, uniform01, 15.0)
    ids_table = al.ids_estimate(model, al.build_volume(1, 400), 30, 2110)
    e0 = ids_table.median_energy()
    spectra = al.sample_rescaled_spectra(
        model, al.build_volume(1, 250), ids_table, e0, 500, 2111
    )
    report = al.poisson_statistics(spectra)

    rigid = [
        al.RescaledSpectrum(e0=0.0, xi=np.arange(-8.0, 9.0) + 0.5, volume_points=501)
        for _ in range(500)
    ]
    rigid_rejected = not al.poisson_statistics(rigid).poissonian
    elapsed = time.perf_counter() - start
    passed = (
        0.8 <= report.variance_ratio <= 1.2
        and report.ks_statistic < report.ks_critical_1pct
        and rigid_rejected
        and elapsed < 1800.0
    )
    check(
        10,
        passed,
        f"count var/mean {report.variance_ratio:.3f}, KS {report.ks_statistic:.4f} < "
        f"{report.ks_critical_1pct:.4f}, rigid control rejected: {rigid_rejected} "
        f"({elapsed:.0f}s)",
    )


def test_criterion_11_exponential_decay(two_tap, uniform01):
    model = al.AlloyModel(two_tap, uniform01, 20.0)
    z = complex(model.center_energy(), 0.01)
    prof = al.green_decay_profile(
        model,
        al.build_volume(1, 12),
        z,
        [0],
        [[k] for k in range(1, 11)],
        0.1,
        4000,
        2113,
    )
    check(
        11,
        prof.rate > 0 and prof.r_squared > 0.95,
        f"fitted rate {prof.rate:.3f} > 0, R^2 {prof.r_squared:.4f} > 0.95",
    )


def test_criterion_12_suite_determinism(tmp_path):
    work = tmp_path / "suite"
    shutil.copytree(SUITE_DIR, work)
    suite_ok = experiments.suite(work / "manifest.json") == 0

    manifest = json.loads((work / "manifest.json").read_text())
    mismatched = []
    for config_name in manifest["configs"]:
        stem = Path(config_name).stem
        first = work / "results" / stem / "results.json"
        rerun_dir = tmp_path / "rerun" / stem
        code = experiments.run(work / config_name, out=str(rerun_dir))
        same = (
            code == 0
            and first.exists()
            and (rerun_dir / "results.json").read_bytes() == first.read_bytes()
        )
        if not same:
            mismatched.append(stem)
    check(
        12,
        suite_ok and not mismatched,
        f"suite of {len(manifest['configs'])} members passed and re-ran "
        f"byte-identical" if not mismatched else f"mismatched members: {mismatched}",
    )
