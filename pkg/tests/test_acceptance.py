"""Acceptance criteria 1-8, each at its stated tolerance.

Every criterion records one PASS/FAIL line; the lines are printed in the
terminal summary (see conftest.py) and when the file is run as a script.
Criteria 4-7 are statistical and take several minutes each.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from lacsmri.bench import brain_like, harness_config, run_case, sweep_p_c
from lacsmri.grayscale import ScaleEstimate, gsc_update
from lacsmri.model import ExperimentConfig, LinePdf, SamplingMask
from lacsmri.phantom import PhantomSpec, default_tumor, shepp_logan
from lacsmri.recon import WeightedObjective, Weights, solve_weighted
from lacsmri.sampling import SamplerState, draw_lines, mix_pdf, pdf_nd, pdf_r, pdf_vd, pdf_vds
from lacsmri.transforms import (
    GradientPair,
    data_consistency,
    fft2_centered,
    gradient_adjoint,
    gradient_fwd,
    ifft2_centered,
    make_sparsifier,
    measure,
    wavelet_fwd,
    wavelet_inv,
)

from oracles import gradient_dense, gradient_operator_dense

RESULTS = {}


def record(num, ok, detail, seconds, limit):
    timed = seconds < limit
    status = "PASS" if ok and timed else "FAIL"
    line = f"criterion {num}: {status}  {detail}  [{seconds:.1f}s / limit {limit:.0f}s]"
    RESULTS[num] = line
    print(line)
    return ok and timed


def phantom32():
    return shepp_logan(PhantomSpec(32, default_tumor(32)))


def case_means(case_ids, eta, images, trials, **cfg_kw):
    n = images[0].shape[0]
    out = {}
    for case_id in case_ids:
        cfg = harness_config(ExperimentConfig(case_id=case_id, eta=eta, trials=trials,
                                              **cfg_kw), n)
        out[case_id] = run_case(case_id, images, cfg).mean_rsnr_db
    return out


# ---- 1: operators -----------------------------------------------------------

def test_criterion_1_operators():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        x, z = rng.standard_normal((2, 8, 8))
        k = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        g = GradientPair(*rng.standard_normal((2, 8, 8)))
        fx = fft2_centered(x)
        wx = wavelet_fwd(x)
        worst = max(
            worst,
            abs(np.linalg.norm(fx) - np.linalg.norm(x)) / np.linalg.norm(x),
            abs(np.linalg.norm(wx) - np.linalg.norm(x)) / np.linalg.norm(x),
            # <Fx, k> = <x, F* k>
            abs(np.vdot(fx, k) - np.vdot(x, ifft2_centered(k))) / (np.linalg.norm(x) * np.linalg.norm(k)),
            abs(np.vdot(wx, z) - np.vdot(x, wavelet_inv(z))) / (np.linalg.norm(x) * np.linalg.norm(z)),
            abs(np.vdot(gradient_fwd(x).stacked(), g.stacked()) - np.vdot(x, gradient_adjoint(g)))
            / (np.linalg.norm(x) * np.linalg.norm(g.stacked())),
        )
    exact = True
    for n in (2, 4, 8):
        x = rng.standard_normal((n, n))
        d1, d2 = gradient_dense(x)
        gp = gradient_fwd(x)
        stacked = (gradient_operator_dense(n) @ x.ravel()).reshape(2, n, n)
        exact &= np.array_equal(gp.dx, d1) and np.array_equal(gp.dy, d2)
        exact &= np.allclose(gp.stacked(), stacked, rtol=0, atol=1e-14)
    ok = worst <= 1e-9 and exact
    assert record(1, ok, f"max relative error {worst:.1e}, dense gradient exact={exact}",
                  time.perf_counter() - t0, 10)


# ---- 2: densities -----------------------------------------------------------

def test_criterion_2_densities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    ref, follow = phantom32()
    kr, kf = fft2_centered(ref), fft2_centered(follow)
    pdfs = [pdf_vd(n, p) for n in (4, 16, 32) for p in (0.0, 0.5, 1.0, 2.0)]
    pdfs += [pdf_vds(n, p, c) for n in (8, 32) for p in (0.1, 1.5) for c in (1, 0.001)]
    pdfs += [pdf_r(32, kr), pdf_nd(32, kr, kf), LinePdf.uniform(16)]
    pdfs += [mix_pdf(pdfs[0], pdfs[1], g) for g in rng.random(5)]
    sums = max(abs(p.prob.sum() - 1) for p in pdfs)
    hand = np.abs(pdf_vd(4, 1.0).prob - [0, 0.25, 0.5, 0.25]).max()

    n, draws = 16, 100_000
    pdf = pdf_vd(n, 1.0)
    state = SamplerState.fresh(n, 7)
    empty = SamplingMask(n)
    counts = np.zeros(n)
    for _ in range(draws):
        state.acquired = empty
        (ky,) = draw_lines(pdf, 1, state)
        counts[ky + n // 2] += 1
    freq = np.abs(counts / draws - pdf.prob).max()
    ok = sums <= 1e-9 and hand <= 1e-12 and freq <= 0.01
    assert record(2, ok, f"sum error {sums:.1e}, n=4 hand error {hand:.1e}, "
                  f"max frequency gap {freq:.4f}", time.perf_counter() - t0, 30)


# ---- 3: weighted solver ---------------------------------------------------------

def test_criterion_3_solver():
    t0 = time.perf_counter()
    ok, worst_rise = True, -np.inf
    s = make_sparsifier("wavelet")
    for seed in range(10):
        rng = np.random.default_rng(seed)
        truth = rng.standard_normal((8, 8))
        x0 = truth + 0.3 * rng.standard_normal((8, 8))
        mask = SamplingMask(8, tuple(rng.choice(np.arange(-4, 4), 3, replace=False)))
        y = measure(truth, mask)
        w = Weights(rng.uniform(0.1, 1, (8, 8)), rng.uniform(0.1, 1, (8, 8)))
        x, info = solve_weighted(y, mask, x0, w, lam=1.0, full_output=True)
        obj = WeightedObjective(y, mask, x0, w, 1.0, s, info.threshold)
        zf = data_consistency(np.zeros((8, 8)), y, mask)
        worst_rise = max(worst_rise, np.diff(info.objective).max(initial=0.0))
        ok &= obj(x) <= obj(x0) and obj(x) <= obj(zf)
    ok &= worst_rise <= 1e-9
    assert record(3, ok, f"final <= both starts on 10 instances={ok}, "
                  f"largest per-iteration rise {worst_rise:.1e}", time.perf_counter() - t0, 60)


# ---- 4: case ordering on the phantom ------------------------------------------

LACS_CASES = (1, 2, 5, 17, 18, 19)
L1W_CASES = (11, 12)


@pytest.mark.slow
def test_criterion_4_case_ordering():
    t0 = time.perf_counter()
    images = phantom32()
    ok, parts = True, []
    for eta in (0.06, 0.12, 0.18):
        means = case_means(LACS_CASES + L1W_CASES, eta, images, 50)
        low = min(means[c] for c in LACS_CASES)
        high = max(means[c] for c in L1W_CASES)
        ok &= low > high
        if eta == 0.12:
            ok &= low - high >= 3.0
        parts.append(f"eta={eta}: worst LACS {low:.2f} vs best L1-W {high:.2f} dB")
    assert record(4, ok, "; ".join(parts), time.perf_counter() - t0, 600)


# ---- 5: gradient vs wavelet ---------------------------------------------------

@pytest.mark.slow
def test_criterion_5_gradient_vs_wavelet():
    t0 = time.perf_counter()
    images = phantom32()
    grad = case_means([17], 0.06, images, 30, sparsifier="gradient")[17]
    wav = case_means([17], 0.21, images, 30, sparsifier="wavelet")[17]
    ok = grad >= wav
    assert record(5, ok, f"gradient@0.06 {grad:.2f} dB vs wavelet@0.21 {wav:.2f} dB",
                  time.perf_counter() - t0, 300)


# ---- 6: p/C sweep shape ---------------------------------------------------------

P_RANGE = [round(0.1 * i, 1) for i in range(1, 16)]
C_LIST = [1.0, 0.1, 0.01, 0.001]


@pytest.mark.slow
def test_criterion_6_p_c_sweep():
    t0 = time.perf_counter()
    images = brain_like(64)
    rows = sweep_p_c(P_RANGE, C_LIST, images, ExperimentConfig(eta=0.06, trials=20))
    table = {(p, c): m for p, c, m, _, _ in rows}
    gap = table[(0.1, 1.0)] - table[(0.1, 0.001)]
    high = [table[(1.5, c)] for c in C_LIST]
    spread = max(high) - min(high)
    best_p = max(P_RANGE, key=lambda p: np.mean([table[(p, c)] for c in C_LIST]))
    checks = (gap >= 2.0, spread <= 1.0, 0.5 <= best_p <= 1.5)
    assert record(6, all(checks),
                  f"p=0.1 gap C=1 vs C=0.001 {gap:.2f} dB (need >= 2); "
                  f"p=1.5 spread {spread:.2f} dB (need <= 1); argmax p {best_p}",
                  time.perf_counter() - t0, 900)


# ---- 7: grayscale correction ---------------------------------------------------

ETAS_7 = [round(0.03 * i, 2) for i in range(1, 11)]


def sc_vs_nsc(images, c_val, eta, trials):
    n = images[0].shape[0]
    cfg = harness_config(ExperimentConfig(eta=eta, trials=trials, grayscale_c=c_val), n)
    sc = run_case(1, images, cfg, scale_correction=True).mean_rsnr_db
    nsc = run_case(1, images, cfg, scale_correction=False).mean_rsnr_db
    return sc, nsc


@pytest.mark.slow
def test_criterion_7_grayscale():
    t0 = time.perf_counter()
    images = phantom32()
    ok, gaps = True, []
    for eta in ETAS_7:
        sc, nsc = sc_vs_nsc(images, 0.5, eta, 50)
        gaps.append(sc - nsc)
        ok &= sc >= nsc
    unit = max(abs(np.subtract(*sc_vs_nsc(images, 1.0, eta, 50))) for eta in (0.06, 0.15, 0.30))
    ok &= unit <= 1.0

    rng = np.random.default_rng(0)
    y0 = measure(rng.random((32, 32)) + 0.1, SamplingMask(32, (0, 3, -5)))
    one_round = max(abs(gsc_update(c * y0, y0, ScaleEstimate()).c - c) for c in (0.25, 0.5, 2.5))
    ok &= one_round <= 1e-6
    assert record(7, ok, f"c=0.5 SC-NSC from {min(gaps):.2f} to {max(gaps):.2f} dB over {len(ETAS_7)} etas; "
                  f"c=1 max |SC-NSC| {unit:.2f} dB; one-round error {one_round:.1e}",
                  time.perf_counter() - t0, 600)


# ---- 8: CLI determinism ------------------------------------------------------------

def test_criterion_8_cli_determinism():
    t0 = time.perf_counter()
    cmd = [sys.executable, "-m", "lacsmri", "run-case", "--seed", "7"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    ok = a == b and len(a.splitlines()) > 1
    assert record(8, ok, f"two runs byte-identical={a == b} ({len(a)} bytes)",
                  time.perf_counter() - t0, 60)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
