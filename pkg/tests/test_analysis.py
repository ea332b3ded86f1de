from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from fhca.adversary import AttackConfig, AttackKind
from fhca.analysis import (
    ExperimentSpec,
    ResultRow,
    ResultTable,
    check_combination,
    closed_form_pcross,
    has_error_floor,
    lln_check,
    multi_eve_product_cdf,
    product_channel_samples,
    mutual_information_sweep,
    received_energy_samples,
    run_ber,
    solve_alpha_half,
    surrogate_pcross,
)
from fhca.modem import LinkConfig, Scheme
from fhca.numeric import RandomStream, ks_distance


def _spec(scheme, kind, **kw):
    link = LinkConfig(scheme, n_rx=kw.pop("n_rx", 1), n_carriers=kw.pop("n_carriers", 64))
    return ExperimentSpec(link, AttackConfig(kind, alpha=kw.pop("alpha", 1.0)), **kw)


def test_result_table_sorted_and_lookup():
    t = ResultTable("ber", [ResultRow(10, 0.1, 0.0, 5), ResultRow(0, 0.3, 0.0, 5)])
    assert list(t.xs) == [0, 10]
    assert t.at(10).estimate == 0.1
    with pytest.raises(KeyError):
        t.at(5)


def test_error_floor_predicate():
    flat = ResultTable("ber", [ResultRow(20, 0.1, 0, 1), ResultRow(30, 0.09, 0, 1)])
    falling = ResultTable("ber", [ResultRow(20, 0.1, 0, 1), ResultRow(30, 0.01, 0, 1)])
    assert has_error_floor(flat) and not has_error_floor(falling)


def test_scheme_attack_pairing():
    check_combination(Scheme.OOK, AttackKind.CA)
    check_combination(Scheme.EBFSK, AttackKind.CA_BFSK)
    with pytest.raises(ValueError):
        check_combination(Scheme.OOK, AttackKind.CA_BFSK)
    with pytest.raises(ValueError):
        check_combination(Scheme.BFSK, AttackKind.CA)


def test_spec_validation():
    with pytest.raises(ValueError):
        _spec(Scheme.OOK, AttackKind.CA, trials=0)
    with pytest.raises(ValueError):
        _spec(Scheme.OOK, AttackKind.CA, threshold="guess")
    with pytest.raises(ValueError):
        _spec(Scheme.OOK, AttackKind.CA, eta=120)
    with pytest.raises(ValueError):
        _spec(Scheme.OOK, AttackKind.CA, ebn0_db=())


@pytest.mark.parametrize(
    "scheme, kind, threshold",
    [
        (Scheme.OOK, AttackKind.CA, "empirical"),
        (Scheme.OOK, AttackKind.WJ, "analytic"),
        (Scheme.BPSK, AttackKind.NJ, "empirical"),
        (Scheme.EBFSK, AttackKind.CA_BFSK, "empirical"),
    ],
)
def test_run_ber_thread_invariant(scheme, kind, threshold):
    spec = _spec(scheme, kind, n_rx=2, ebn0_db=(0, 10), trials=150_000, pilot_symbols=5000, threshold=threshold, alpha=0.25 if kind is AttackKind.CA_BFSK else 1.0)
    one, four = run_ber(spec, threads=1), run_ber(spec, threads=4)
    assert one.rows == four.rows
    assert one.provenance == four.provenance
    assert one.at(0).estimate >= one.at(10).estimate


def test_run_ber_seed_changes_output():
    a = run_ber(_spec(Scheme.BPSK, AttackKind.NONE, ebn0_db=(0,), trials=20_000, seed=1))
    b = run_ber(_spec(Scheme.BPSK, AttackKind.NONE, ebn0_db=(0,), trials=20_000, seed=2))
    assert a.rows != b.rows


def test_clean_received_energy_is_scaled_gamma():
    n_rx = 4
    x = received_energy_samples(RandomStream(3), 50_000, 0.0, n_rx)
    assert ks_distance(x, stats.gamma(n_rx, scale=1 / n_rx).cdf) < 0.015


def test_received_energy_mean_is_one():
    x = received_energy_samples(RandomStream(3), 100_000, 90.0, 2, 4, "randomized")
    assert np.mean(x) == pytest.approx(1.0, rel=0.03)


def test_product_cdf_tends_to_exponential():
    tables = multi_eve_product_cdf([1, 8], trials=100_000, seed=1)
    grid = tables[8].xs
    expo = 1 - np.exp(-grid)
    gap1 = np.max(np.abs(tables[1].estimates - expo))
    gap8 = np.max(np.abs(tables[8].estimates - expo))
    assert gap8 < gap1
    # a single product channel has more mass near zero
    assert tables[1].at(0.1).estimate > tables[8].at(0.1).estimate


@pytest.mark.parametrize("n_eve", [1, 4])
def test_product_channel_mean_is_one(n_eve):
    x = product_channel_samples(RandomStream(8, ("p", n_eve)), 10**6, n_eve)
    assert np.mean(x) == pytest.approx(1.0, rel=0.01)


def test_single_eve_product_has_heavier_low_tail():
    one = product_channel_samples(RandomStream(9, ("p", 1)), 10**6, 1)
    four = product_channel_samples(RandomStream(9, ("p", 4)), 10**6, 4)
    assert np.mean(one <= 0.01) >= np.mean(four <= 0.01)


def test_lln_probability_grows():
    report = lln_check([1, 16, 256], 0.1, 5000, seed=2)
    p = [report.probability(n) for n in (1, 16, 256)]
    assert p[0] < p[1] <= p[2] + 0.02
    assert report.implied_n_rx is not None


def test_closed_form_pcross_values():
    assert closed_form_pcross(0.0, 9.0) == pytest.approx(2 / 11)
    assert closed_form_pcross(1.0, 9.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        closed_form_pcross(1.5, 9.0)


@pytest.mark.parametrize("theta", [3, 5, 9, 15, 40])
def test_alpha_root_is_exact(theta):
    sol = solve_alpha_half(theta)
    assert Fraction(sol.alpha).limit_denominator(1000) == Fraction(theta - 2, 3 * theta)
    assert sol.pcross == pytest.approx(0.5, abs=1e-12)
    assert sol.stated_alpha == pytest.approx((theta - 2) / (2 * theta))


def test_alpha_root_needs_theta_above_two():
    with pytest.raises(ValueError):
        solve_alpha_half(2.0)


def test_surrogate_mc_agrees_with_closed_form():
    p, se = surrogate_pcross(0.3, 9.0, 200_000, seed=4)
    assert abs(p - closed_form_pcross(0.3, 9.0)) < 4 * se


def test_mi_sweep_shapes_and_guard():
    curves = mutual_information_sweep([9.0], [0.1, 0.5], 10_000, seed=0)
    c = curves[0]
    assert list(c.mutual_information.xs) == [0.1, 0.5]
    assert all(0 <= r.estimate <= 1 for r in c.mutual_information.rows)
    assert c.argmin_alpha in (0.1, 0.5)
    with pytest.raises(ValueError):
        mutual_information_sweep([9.0], [0.1], 100)
