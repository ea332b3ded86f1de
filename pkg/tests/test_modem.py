import math

import numpy as np
import pytest
from scipy import stats

from fhca.adversary import AttackConfig, AttackKind, EveContribution, ca_bfsk_contribution
from fhca.channel import HopKey, build_frequency_plan, sample_channels
from fhca.modem import (
    LinkConfig,
    ReceivedSymbol,
    Scheme,
    bfsk_detect,
    bfsk_encode,
    bfsk_receive,
    bpsk_coherent_link,
    bpsk_encode,
    ook_detect,
    ook_receive,
)
from fhca.numeric import RandomStream, ks_distance


def rayleigh_mrc_bpsk(snr: float, branches: int) -> float:
    """Closed-form BER of coherent BPSK with L-branch MRC in Rayleigh fading."""
    mu = math.sqrt(snr / (1.0 + snr))
    return ((1 - mu) / 2) ** branches * sum(
        math.comb(branches - 1 + k, k) * ((1 + mu) / 2) ** k for k in range(branches)
    )


def test_link_config_energy_conventions():
    assert LinkConfig(Scheme.BPSK).e_alice(10) == pytest.approx(20.0)
    assert LinkConfig(Scheme.OOK).e_alice(0) == pytest.approx(2.0)
    assert LinkConfig(Scheme.BFSK).e_alice(10) == pytest.approx(10.0)
    assert LinkConfig(Scheme.OOK, equal_energy_per_bit=True).e_alice(10) == pytest.approx(20.0)
    assert LinkConfig(Scheme.EBFSK, equal_energy_per_bit=True).e_alice(10) == pytest.approx(10.0)


def test_link_config_validation():
    with pytest.raises(ValueError):
        LinkConfig(n_rx=0)
    with pytest.raises(ValueError):
        LinkConfig(sigma2_bob=-1)
    with pytest.raises(ValueError):
        LinkConfig(spacing=0.4, bandwidth=0.5)


@pytest.mark.parametrize("n_rx", [1, 3])
def test_bpsk_matches_mrc_oracle(n_rx):
    n = 400_000
    cfg = LinkConfig(Scheme.BPSK, n_rx=n_rx)
    e = cfg.e_alice(5.0)
    bits = RandomStream(1, ("bits",)).generator().integers(0, 2, n)
    ch = sample_channels(RandomStream(1, ("ch",)), n, n_rx)
    decided = bpsk_coherent_link(ch, None, cfg, bits, RandomStream(1, ("rx",)), e)
    ber = np.mean(decided != bits)
    expected = rayleigh_mrc_bpsk(e / cfg.sigma2_bob, n_rx)
    assert abs(ber - expected) < 4 * math.sqrt(expected * (1 - expected) / n)


def test_bpsk_mapping():
    assert np.array_equal(bpsk_encode([1, 0]), [1.0, -1.0])


def test_ook_clean_energy_is_gamma():
    n, n_rx = 100_000, 4
    cfg = LinkConfig(Scheme.OOK, n_rx=n_rx, sigma2_bob=0.0)
    ch = sample_channels(RandomStream(2), n, n_rx)
    r = ook_receive(ch, None, cfg, np.ones(n, dtype=int), RandomStream(3), 1.0)
    assert ks_distance(r.energy[:, 0], stats.gamma(n_rx, scale=1.0).cdf) < 0.01


def test_ook_detect_strict_threshold():
    r = ReceivedSymbol(np.array([[[1.0]], [[2.0]]]), np.array([0, 1]))
    assert ook_detect(r, 1.0).tolist() == [0, 1]
    with pytest.raises(ValueError):
        ook_detect(r, -1.0)


def test_ook_receive_adds_attack():
    n = 1000
    cfg = LinkConfig(Scheme.OOK, n_rx=1, sigma2_bob=0.0)
    ch = sample_channels(RandomStream(2), n, 1)
    extra = EveContribution(np.full((n, 1), 2.0 + 0j), np.zeros((n, 1), dtype=complex))
    base = ook_receive(ch, None, cfg, np.zeros(n, dtype=int), RandomStream(3), 1.0)
    hit = ook_receive(ch, extra, cfg, np.zeros(n, dtype=int), RandomStream(3), 1.0)
    assert np.allclose(base.energy, 0.0)
    assert np.allclose(hit.energy, 4.0)


def test_bfsk_traditional_encoding():
    plan = build_frequency_plan(16, 1.0, 0.2, 0.5)
    key = HopKey.from_seed(0, "carrier-hop")
    tx, comp = bfsk_encode(np.array([1, 0]), "traditional", plan, key, np.array([5, 5]))
    assert tx[0] % 2 == 1 and comp[0] == tx[0] - 1
    assert tx[1] % 2 == 0 and comp[1] == tx[1] + 1
    assert tx[0] // 2 == tx[1] // 2
    with pytest.raises(ValueError):
        bfsk_encode(np.array([1]), "other", plan, key, np.array([0]))


def test_bfsk_detect_tie_goes_to_zero():
    r = ReceivedSymbol(np.ones((1, 2, 1), dtype=complex), np.array([1]))
    assert bfsk_detect(r).tolist() == [0]


def test_bfsk_clean_ber_matches_noncoherent_oracle():
    # single-antenna noncoherent BFSK in Rayleigh fading: 1 / (2 + snr)
    n = 200_000
    cfg = LinkConfig(Scheme.BFSK, n_rx=1, n_carriers=64)
    plan = cfg.plan()
    e = cfg.e_alice(10.0)
    bits = RandomStream(5, ("bits",)).generator().integers(0, 2, n)
    tx, comp = bfsk_encode(bits, "traditional", plan, HopKey.from_seed(5, "carrier-hop"), np.arange(n))
    ch = sample_channels(RandomStream(5, ("ch",)), n, 1, 1, n_bands=2)
    ch = ch.with_band_copied(0, 1, np.ones(n, dtype=bool))
    r = bfsk_receive(ch, cfg, bits, RandomStream(5, ("rx",)), e, tx, comp)
    ber = np.mean(bfsk_detect(r) != bits)
    expected = 1.0 / (2.0 + e)
    assert abs(ber - expected) < 4 * math.sqrt(expected * (1 - expected) / n)


def test_bfsk_side_term_only_on_adjacent_tone():
    n = 4
    cfg = LinkConfig(Scheme.BFSK, n_rx=1, n_carriers=8, sigma2_bob=0.0)
    ch = sample_channels(RandomStream(0), n, 1, 1, n_bands=2)
    attack = AttackConfig(AttackKind.CA_BFSK, alpha=0.0, theta=9.0)
    ca = ca_bfsk_contribution(RandomStream(1), ch, attack, 1.0, 0.0, 0, 1)
    # tx tone 1 (f0 + beta): complementary tone 0 sits at -2 beta, tone 4 is far away
    tx = np.array([1, 1, 0, 0])
    comp = np.array([0, 4, 1, 6])
    bits = np.array([1, 1, 0, 0])
    r = bfsk_receive(ch, cfg, bits, RandomStream(2), 0.0, tx, comp, ca=ca)
    comp_energy = np.where(bits == 1, r.energy[:, 1], r.energy[:, 0])
    assert comp_energy[0] > 0 and comp_energy[2] > 0
    assert comp_energy[1] == 0 and comp_energy[3] == 0
