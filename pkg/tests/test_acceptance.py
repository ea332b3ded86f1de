"""Acceptance criteria, each at its stated tolerance and trial count.

Every test prints one ``CRITERION n: PASS|FAIL`` line straight to the
terminal (output capture is bypassed) before asserting.
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from fhca.adversary import AttackConfig, AttackKind
from fhca.analysis import (
    ExperimentSpec,
    closed_form_pcross,
    has_error_floor,
    lln_check,
    mutual_information_sweep,
    run_ber,
    solve_alpha_half,
    surrogate_pcross,
)
from fhca.calibration import approximate_threshold_analytic
from fhca.channel import HopKey, build_frequency_plan, draw_tone_pair, sample_channels, tone_pair_from_draws
from fhca.cli import run_preset
from fhca.modem import LinkConfig, Scheme, ook_receive
from fhca.numeric import RandomStream, ks_distance
from fhca.presets import PRESETS

THREADS = 4
MILLION = 10**6


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        line = f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        with capsys.disabled():
            print("\n" + line)

    return emit


def ber_table(scheme, kind, *, n_carriers=1024, n_rx=2, alpha=1.0, theta=9.0, grid=(10.0,), threshold="empirical", seed=0, **attack):
    link = LinkConfig(scheme, n_carriers=n_carriers, n_rx=n_rx)
    spec = ExperimentSpec(link, AttackConfig(kind, alpha=alpha, theta=theta, **attack), grid, MILLION, seed, threshold)
    return run_ber(spec, THREADS)


def rayleigh_mrc_bpsk(snr: float, branches: int) -> float:
    mu = math.sqrt(snr / (1.0 + snr))
    return ((1 - mu) / 2) ** branches * sum(
        math.comb(branches - 1 + k, k) * ((1 + mu) / 2) ** k for k in range(branches)
    )


def test_criterion_01_closed_form_transition_probability(report):
    worst = 0.0
    for alpha in (0.0, 0.25, 0.5, 1.0):
        for theta in (5.0, 9.0, 15.0):
            p, _ = surrogate_pcross(alpha, theta, MILLION, seed=1, threads=THREADS)
            worst = max(worst, abs(p - closed_form_pcross(alpha, theta)))
    ok = worst <= 0.005
    report(1, ok, f"max |MC - closed form| = {worst:.5f} (tol 0.005) over 12 (alpha, theta) pairs")
    assert ok


def test_criterion_02_alpha_solver(report):
    sol = solve_alpha_half(9.0)
    p, se = surrogate_pcross(sol.alpha, 9.0, MILLION, seed=2, threads=THREADS)
    exact = abs(sol.alpha - 7 / 27) <= 1e-12
    ok = exact and abs(p - 0.5) <= 0.005
    report(
        2,
        ok,
        f"alpha = {sol.alpha:.15f} (7/27 = {7 / 27:.15f}), surrogate p_cross = {p:.4f}; "
        f"stated alpha (theta-2)/(2 theta) = {sol.stated_alpha:.6f} gives closed-form p_cross = {sol.stated_pcross:.4f}",
    )
    assert sol.stated_alpha == pytest.approx(7 / 18, abs=1e-12)
    assert sol.stated_pcross == pytest.approx(closed_form_pcross(7 / 18, 9.0), abs=1e-12)
    assert ok


def test_criterion_03_mutual_information_argmin(report):
    alphas = [k / 20 for k in range(1, 11)]
    curves = mutual_information_sweep([5.0, 9.0, 15.0], alphas, MILLION, seed=0, threads=THREADS)
    targets = {5.0: 0.10, 9.0: 0.15, 15.0: 0.20}
    found = {c.theta: c.argmin_alpha for c in curves}
    ok = all(abs(found[t] - targets[t]) <= 0.05 + 1e-9 for t in targets)
    report(3, ok, "argmin alpha " + ", ".join(f"theta={t:g}: {found[t]:.2f} (target {targets[t]:.2f})" for t in targets))
    assert ok


def test_criterion_04_chi_square_energy_law(report):
    n, n_rx = 10**5, 4
    link = LinkConfig(Scheme.OOK, n_rx=n_rx, sigma2_bob=0.0)
    ch = sample_channels(RandomStream(4, ("ch",)), n, n_rx)
    r = ook_receive(ch, None, link, np.ones(n, dtype=int), RandomStream(4, ("rx",)), 1.0)
    d = ks_distance(r.energy[:, 0], stats.gamma(n_rx, scale=1.0).cdf)
    ok = d <= 0.01
    report(4, ok, f"KS distance to Gamma(4, 1) = {d:.5f} (tol 0.01)")
    assert ok


def test_criterion_05_large_antenna_limit(report):
    n_list = [1, 4, 16, 64, 256]
    rep = lln_check(n_list, 0.1, 10**4, e_alice=1.0, e_eve=1.0, seed=5, threads=THREADS)
    probs = [rep.probability(n) for n in n_list]
    monotone = all(b >= a - 0.02 for a, b in zip(probs, probs[1:]))
    ok = probs[-1] >= 0.9 and monotone
    report(5, ok, "P(R/N_r > -0.1) = " + ", ".join(f"{n}: {p:.4f}" for n, p in zip(n_list, probs)))
    assert ok


def test_criterion_06_coherent_bpsk_oracle(report):
    worst = 0.0
    for n_rx in (1, 2):
        table = ber_table(Scheme.BPSK, AttackKind.NONE, n_rx=n_rx, grid=(0.0, 5.0, 10.0), seed=6)
        for row in table.rows:
            snr = 2.0 * 10 ** (row.x / 10)  # E / sigma^2 with E_b/N0 = E / (2 sigma^2)
            expected = rayleigh_mrc_bpsk(snr, n_rx)
            se = math.sqrt(expected * (1 - expected) / row.trials)
            worst = max(worst, abs(row.estimate - expected) / se)
    ok = worst <= 3.0
    report(6, ok, f"max deviation from Rayleigh MRC BPSK = {worst:.2f} standard errors (tol 3)")
    assert ok


def test_criterion_07_jamming_versus_convolution_attack(report):
    ber = {kind: ber_table(Scheme.BPSK, kind, grid=(20.0,), seed=7).at(20.0).estimate for kind in ("none", "nj", "wj", "ca")}
    ok_nj = ber["nj"] <= 2 * ber["none"]
    ok_wj = ber["wj"] <= 2 * ber["none"]
    ok_ca = ber["ca"] >= 0.05
    ok = ok_nj and ok_wj and ok_ca
    report(
        7,
        ok,
        f"BER at 20 dB: none {ber['none']:.2e}, NJ {ber['nj']:.2e} ({'ok' if ok_nj else '> 2x none'}), "
        f"WJ {ber['wj']:.2e} ({'ok' if ok_wj else '> 2x none'}), CA {ber['ca']:.3f} ({'ok' if ok_ca else '< 0.05'})",
    )
    assert ok


def test_criterion_08_threshold_agreement(report):
    e = LinkConfig(Scheme.OOK).e_alice(10.0)
    worst = 0.0
    for n_rx in (1, 2, 4, 10):
        for theta in (5.0, 9.0, 15.0):
            for alpha in (0.1, 0.5, 1.0):
                d = approximate_threshold_analytic(n_rx, e, alpha, theta, 0.01, 1.0)
                worst = max(worst, abs(d.value - d.inputs["numeric"]) / d.value)
    emp = ber_table(Scheme.OOK, AttackKind.CA, n_carriers=128, threshold="empirical", seed=8).at(10.0).estimate
    ana = ber_table(Scheme.OOK, AttackKind.CA, n_carriers=128, threshold="analytic", seed=8).at(10.0).estimate
    ok = worst <= 1e-6 and ana <= 1.5 * emp
    report(8, ok, f"max relative closed-form/minimizer gap {worst:.1e} (tol 1e-6); BER analytic {ana:.5f} vs empirical {emp:.5f} (ratio {ana / emp:.3f}, tol 1.5)")
    assert ok


def test_criterion_09_tone_pair_geometry(report):
    plan = build_frequency_plan(64, 1.0, 0.2, 0.5)
    t = plan.n_tones
    first, raw = np.meshgrid(np.arange(t), np.arange(t - 1), indexing="ij")
    one, zero = tone_pair_from_draws(first.ravel(), raw.ravel(), t)
    adjacent = int(np.count_nonzero(plan.side_offset(one, zero)))
    exact = Fraction(adjacent, t * (t - 1))

    big = build_frequency_plan(1024, 1.0, 0.2, 0.5)
    key = HopKey.from_seed(9, "tone-pair")
    n, hits = 10**7, 0
    for start in range(0, n, MILLION):
        a, b = draw_tone_pair(key, np.arange(start, start + MILLION), big)
        hits += int(np.count_nonzero(big.side_offset(a, b)))
    p0 = 1 / 2047
    z = abs(hits / n - p0) / math.sqrt(p0 * (1 - p0) / n)
    ok = exact == Fraction(1, 127) and z <= 4
    report(9, ok, f"N=64 exact side-adjacency {exact} (target 1/127); N=1024 MC {hits / n:.3e} vs 1/2047, {z:.2f} standard errors (tol 4)")
    assert ok


def test_criterion_10_tone_randomization(report):
    ebfsk = ber_table(Scheme.EBFSK, AttackKind.CA_BFSK, n_rx=1, alpha=0.25, seed=10).at(10.0).estimate
    clean = ber_table(Scheme.BFSK, AttackKind.NONE, n_rx=1, seed=10).at(10.0).estimate
    grid = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trad = ber_table(Scheme.BFSK, AttackKind.CA_BFSK, n_rx=1, alpha=0.15, grid=grid, seed=10)
    worst = float(trad.estimates.min())
    ok = ebfsk <= 1.2 * clean and worst >= 0.3
    report(10, ok, f"EBFSK under CA {ebfsk:.4f} vs 1.2 x clean BFSK {1.2 * clean:.4f}; traditional BFSK under CA min BER {worst:.3f} (tol 0.3)")
    assert ok


def test_criterion_11_wideband_jamming_floors(report):
    grid = (20.0, 30.0)
    ook = ber_table(Scheme.OOK, AttackKind.WJ, n_carriers=128, n_rx=2, grid=grid, threshold="empirical", seed=11)
    fsk = ber_table(Scheme.EBFSK, AttackKind.WJ, n_carriers=64, n_rx=1, grid=grid, seed=11)
    ok = has_error_floor(ook) and has_error_floor(fsk)
    report(
        11,
        ok,
        f"attack-aware OOK N=128: {ook.at(20).estimate:.4f} -> {ook.at(30).estimate:.4f}; "
        f"EBFSK N=64: {fsk.at(20).estimate:.4f} -> {fsk.at(30).estimate:.4f} (need 30 dB >= 0.8 x 20 dB)",
    )
    assert ok


def test_criterion_12_pilot_selective_attack(report):
    def row(scheme, kind, alpha, pilots):
        return ber_table(scheme, kind, alpha=alpha, seed=12, attacks_pilots=pilots).at(10.0)

    matched, mismatched = row(Scheme.OOK, AttackKind.CA, 1.0, True), row(Scheme.OOK, AttackKind.CA, 1.0, False)
    gap = (mismatched.estimate - matched.estimate) / math.hypot(matched.stderr, mismatched.stderr)
    f_on, f_off = row(Scheme.BFSK, AttackKind.CA_BFSK, 0.15, True), row(Scheme.BFSK, AttackKind.CA_BFSK, 0.15, False)
    f_gap = abs(f_on.estimate - f_off.estimate) / math.hypot(f_on.stderr, f_off.stderr)
    ok = gap >= 3 and f_gap <= 2
    report(12, ok, f"OOK {mismatched.estimate:.4f} mismatched vs {matched.estimate:.4f} matched ({gap:.1f} se, need >= 3); BFSK change {f_gap:.2f} se (tol 2)")
    assert ok


def test_criterion_13_thread_count_determinism(report, tmp_path):
    differing = []
    for name in PRESETS:
        a = run_preset(name, seed=13, out_dir=tmp_path / "t1" / name, threads=1, trials_scale=0.15)
        b = run_preset(name, seed=13, out_dir=tmp_path / "t4" / name, threads=4, trials_scale=0.15)
        csv_a = [p for p in a.outputs if p.endswith(".csv")]
        csv_b = [p for p in b.outputs if p.endswith(".csv")]
        assert len(csv_a) == len(csv_b) > 0
        for pa, pb in zip(csv_a, csv_b):
            if open(pa, "rb").read() != open(pb, "rb").read():
                differing.append(pa)
    ok = not differing
    report(13, ok, f"{len(PRESETS)} presets run with threads 1 and 4: {len(differing)} differing CSV files")
    assert ok
