"""End-to-end acceptance gate.

Each criterion is one test printing a single PASS/FAIL line with the measured
quantity.  Criteria are asserted at their stated tolerances; nothing is
weakened to force a pass, so a criterion the built-in benchmark model cannot
meet fails here honestly.
"""

import copy
import inspect
import json
import time

import numpy as np
import pytest

from pencilid import (
    building_surrogate,
    build_hankel,
    build_loewner,
    estimate_frf_spectral,
    estimate_markov_ls,
    estimate_markov_smm,
    estimate_noise_variance,
    fit_percentage,
    frequency_response,
    generate_experiment,
    hankel_reduce,
    impulse_response,
    loewner_reduce,
    markov_to_frequency,
    partition,
    run_benchmark,
    select_L0,
    select_N,
    svd_order,
)
from pencilid.estimation import cross_correlation, n_max_bound
from pencilid.metrics import eval_grid_logspace, h2_freq_error, h2_impulse_error
from pencilid.pipeline import PipelineConfig, report_json
from conftest import exact_markov, noise_free_dataset, random_stable_model

# Benchmark protocol: 48th-order model, 1000 samples at 15 ms, output-noise
# variance 1e-7, threshold margin 0.4, 50 noise realizations.
NS = 1000
TS = 0.015
SIGMA2 = 1e-7
ALPHA = 0.4
REALIZATIONS = 50
SWEEP_ORDERS = (10, 20, 30, 40, 48)


def verdict(name, ok, detail):
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# Criterion 1: exact realization on noise-free data
# ---------------------------------------------------------------------------

def test_criterion_1_exact_realization():
    t0 = time.monotonic()
    rng = np.random.default_rng(2024)
    worst_hf, worst_lf = 0.0, 0.0
    for trial in range(50):
        n = int(rng.integers(2, 9))
        model = random_stable_model(rng, n, rho=0.85, with_d=True)
        N = 2 * n + 4
        h = exact_markov(model, N)
        red = hankel_reduce(build_hankel(h), n)
        worst_hf = max(worst_hf, h2_impulse_error(impulse_response(red, N), h))

        omega = 0.05 + np.linspace(0.0, 2.8, 2 * n)
        z = np.exp(1j * omega)
        values = frequency_response(model, z)
        from pencilid.spectral import FrequencySamples
        samples = FrequencySamples(points=z, values=values, omega=omega)
        pencil = build_loewner(*partition(samples, "alternate"))
        lred = loewner_reduce(pencil, n)
        got = frequency_response(lred, z)
        worst_lf = max(worst_lf,
                       np.max(np.abs(got - values)) / np.abs(values).max())
    elapsed = time.monotonic() - t0
    ok = worst_hf <= 1e-8 and worst_lf <= 1e-8 and elapsed < 10
    verdict("1 exact realization",
            ok,
            f"max W_h={worst_hf:.2e} (<=1e-8), max interp residual="
            f"{worst_lf:.2e} (<=1e-8), {elapsed:.1f}s (<10s)")


# ---------------------------------------------------------------------------
# Criterion 2: noise-free consistency of the signal-matrix estimator
# ---------------------------------------------------------------------------

def test_criterion_2_smm_noise_free():
    t0 = time.monotonic()
    rng = np.random.default_rng(10)
    model = random_stable_model(rng, 5, rho=0.8)
    ds = noise_free_dataset(model, 400, seed=0)
    h = estimate_markov_smm(ds, L0=8, N=60, sigma2=0.0)
    W = fit_percentage(h, exact_markov(model, 60))
    elapsed = time.monotonic() - t0
    ok = W >= 99.9 and elapsed < 5
    verdict("2 noise-free consistency", ok,
            f"W={W:.4f} (>=99.9), {elapsed:.1f}s (<5s)")


# ---------------------------------------------------------------------------
# Shared 50-realization campaign for criteria 3-5
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def campaign():
    t0 = time.monotonic()
    model = building_surrogate(ts=TS)
    datasets = [generate_experiment(model, NS, SIGMA2, seed=i)
                for i in range(REALIZATIONS)]
    corr = np.mean([cross_correlation(d) for d in datasets], axis=0)
    L0 = select_L0(corr, ALPHA)

    grid_omega, grid_z = eval_grid_logspace(1.0, 100.0, 200, TS)
    H_true = frequency_response(model, grid_z)

    rows = []
    sweep = {("smm-hf", r): [] for r in SWEEP_ORDERS}
    sweep.update({("ls-hf", r): [] for r in SWEEP_ORDERS})
    sweep.update({("smm-lf", r): [] for r in SWEEP_ORDERS})
    sweep.update({("noisy-lf", r): [] for r in SWEEP_ORDERS})
    pencils_first = None

    for ds in datasets:
        N = select_N(ds, L0)
        h_ls = estimate_markov_ls(ds, N)
        sigma2_hat = estimate_noise_variance(ds, h_ls, N)
        h_smm = estimate_markov_smm(ds, L0, N, sigma2_hat)
        h_true = exact_markov(model, N)
        rows.append({
            "N": N,
            "sigma2_hat": sigma2_hat,
            "W_ls": fit_percentage(h_ls, h_true),
            "W_smm": fit_percentage(h_smm, h_true),
        })

        # Hankel order sweep on both impulse estimates.
        for name, h in (("smm-hf", h_smm), ("ls-hf", h_ls)):
            pencil = build_hankel(h)
            for r in SWEEP_ORDERS:
                red = hankel_reduce(pencil, r)
                sweep[(name, r)].append(
                    h2_impulse_error(impulse_response(red, N), h_true))

        # Loewner order sweep: FFT-bridged estimate vs the spectral ratio,
        # order fixed, model built on the alternate partition.
        samples_smm = markov_to_frequency(h_smm)
        samples_spec = estimate_frf_spectral(ds, N)
        for name, samples in (("smm-lf", samples_smm),
                              ("noisy-lf", samples_spec)):
            alt = build_loewner(*partition(samples, "alternate"),
                                scheme="alternate", ts=TS)
            for r in SWEEP_ORDERS:
                red = loewner_reduce(alt, r)
                sweep[(name, r)].append(
                    h2_freq_error(frequency_response(red, grid_z), H_true))

        if pencils_first is None:
            hh = build_loewner(*partition(samples_smm, "half-half"),
                               scheme="half-half", ts=TS)
            alt = build_loewner(*partition(samples_smm, "alternate"),
                                scheme="alternate", ts=TS)
            pencils_first = (hh, alt)

    return {
        "model": model,
        "L0": L0,
        "rows": rows,
        "sweep": sweep,
        "pencils_first": pencils_first,
        "elapsed": time.monotonic() - t0,
    }


# ---------------------------------------------------------------------------
# Criterion 3: hyper-parameter pipeline
# ---------------------------------------------------------------------------

def test_criterion_3_horizon_rule(campaign):
    L0 = campaign["L0"]
    n_max = n_max_bound(NS, 1, L0)
    expected = n_max // 2
    ns_seen = sorted({row["N"] for row in campaign["rows"]})
    ok = ns_seen == [expected] and campaign["elapsed"] < 300
    verdict("3a horizon rule", ok,
            f"L0={L0}, N_max={n_max}, N={ns_seen} (expected [{expected}]), "
            f"campaign {campaign['elapsed']:.0f}s (<300s)")


def test_criterion_3_noise_variance(campaign):
    med = float(np.median([row["sigma2_hat"] for row in campaign["rows"]]))
    ok = SIGMA2 / 2.5 <= med <= SIGMA2 * 2.5
    verdict("3b noise-variance estimate", ok,
            f"median sigma2_hat={med:.3e}, required within factor 2.5 of "
            f"{SIGMA2:.0e} i.e. [{SIGMA2 / 2.5:.1e}, {SIGMA2 * 2.5:.1e}]")


# ---------------------------------------------------------------------------
# Criterion 4: noise-robustness ordering
# ---------------------------------------------------------------------------

def test_criterion_4_fit_margin(campaign):
    w_smm = float(np.median([r["W_smm"] for r in campaign["rows"]]))
    w_ls = float(np.median([r["W_ls"] for r in campaign["rows"]]))
    margin = w_smm - w_ls
    ok = margin >= 2.0
    verdict("4a fit margin", ok,
            f"median W: signal-matrix {w_smm:.2f} vs least-squares "
            f"{w_ls:.2f}, margin {margin:+.2f} (>= +2 required)")


def test_criterion_4_hankel_order_sweep(campaign):
    sweep = campaign["sweep"]
    lines, ok = [], True
    for r in SWEEP_ORDERS:
        a = float(np.mean(sweep[("smm-hf", r)]))
        b = float(np.mean(sweep[("ls-hf", r)]))
        ok &= a <= b
        lines.append(f"r={r}: {a:.3f} vs {b:.3f}")
    verdict("4b impulse-error sweep (smm-hf <= ls-hf)", ok, "; ".join(lines))


def test_criterion_4_loewner_order_sweep(campaign):
    sweep = campaign["sweep"]
    lines, ok = [], True
    for r in SWEEP_ORDERS:
        a = float(np.mean(sweep[("smm-lf", r)]))
        b = float(np.mean(sweep[("noisy-lf", r)]))
        ok &= a <= b
        lines.append(f"r={r}: {a:.3f} vs {b:.3f}")
    verdict("4c frequency-error sweep (smm-lf <= noisy-lf)", ok,
            "; ".join(lines))


# ---------------------------------------------------------------------------
# Criterion 5: order revelation in the half-half Loewner decay
# ---------------------------------------------------------------------------

def test_criterion_5_order_revelation(campaign):
    t0 = time.monotonic()
    hh, alt = campaign["pencils_first"]
    s_hh = svd_order(hh).normalized
    s_alt = svd_order(alt).normalized
    # Drop measured across the index window 40..56 (1-based).
    drop_hh = float(np.log10(s_hh[39] / s_hh[55]))
    drop_alt = float(np.log10(s_alt[39] / s_alt[55]))
    elapsed = time.monotonic() - t0
    ok = drop_hh >= 2.0 and drop_alt < 2.0 and elapsed < 120
    verdict("5 order revelation", ok,
            f"half-half drop {drop_hh:.2f} decades (>=2), alternate "
            f"{drop_alt:.2f} (<2), {elapsed:.1f}s (<120s)")


# ---------------------------------------------------------------------------
# Criterion 6: invariant property suites
# ---------------------------------------------------------------------------

def test_criterion_6_property_suites():
    import test_dataio, test_estimation, test_lti, test_metrics  # noqa: F401
    import test_pencils, test_pipeline, test_spectral  # noqa: F401

    modules = [test_lti, test_dataio, test_estimation, test_spectral,
               test_pencils, test_metrics, test_pipeline]
    randomized = 0
    ok = True
    for mod in modules:
        for name, fn in inspect.getmembers(mod, inspect.isfunction):
            if not name.startswith("test_"):
                continue
            if hasattr(fn, "hypothesis"):
                randomized += 1
                ok &= fn._hypothesis_internal_use_settings.max_examples >= 100
    ok &= randomized >= 15
    verdict("6 invariant suites", ok,
            f"{randomized} randomized property tests at >=100 cases each, "
            "executed in this pytest session")


# ---------------------------------------------------------------------------
# Criterion 7: determinism of the benchmark artifacts
# ---------------------------------------------------------------------------

def _strip_timing(path):
    doc = json.loads(path.read_text())
    doc.pop("wall_time_s", None)
    return report_json(doc)


def test_criterion_7_determinism(tmp_path):
    model = building_surrogate(ts=TS)
    cfg = PipelineConfig(
        methods=("smm-hf", "noisy-lf"), realizations=3, base_seed=11,
        ns=400, sigma2=SIGMA2, order="auto", order_sweep=(2, 4),
        grid_wmin=1.0, grid_wmax=100.0, grid_count=60,
    )
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    run_benchmark(model, cfg, out_dir=out_a)
    run_benchmark(model, cfg, out_dir=out_b)
    same_json = _strip_timing(out_a / "report.json") == _strip_timing(
        out_b / "report.json")
    csvs = ("model.json", "singular_values.csv", "impulse.csv", "frf.csv",
            "boxplot.csv", "order_sweep.csv")
    same_files = all(
        (out_a / n).read_bytes() == (out_b / n).read_bytes() for n in csvs
    )
    verdict("7 determinism", same_json and same_files,
            f"report.json identical modulo timing: {same_json}; "
            f"artifacts byte-identical: {same_files}")
