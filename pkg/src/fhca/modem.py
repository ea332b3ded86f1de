"""Modulation, reception and detection for BPSK, OOK and (E)BFSK."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Union

import numpy as np

from .adversary import EveContribution
from .channel import ChannelSet, FrequencyPlan, HopKey, draw_tone_pair, next_hop
from .numeric import RandomStream, sample_circular_gaussian


class Scheme(str, Enum):
    BPSK = "bpsk"
    OOK = "ook"
    BFSK = "bfsk"
    EBFSK = "ebfsk"


@dataclass(frozen=True)
class LinkConfig:
    """Link parameters shared by every scheme.

    E_b/N0 follows the convention of each experiment family: ``E/(2 sigma^2)``
    for BPSK and OOK, ``E/sigma^2`` for BFSK and EBFSK. With
    ``equal_energy_per_bit`` the axis is energy per bit over ``sigma^2`` for
    every scheme and OOK's ON symbol carries twice the bit energy.
    """

    scheme: Scheme = Scheme.OOK
    sigma2_bob: float = 1.0
    sigma2_eve: float = 0.01
    n_carriers: int = 1024
    n_rx: int = 2
    hop_length: int = 1
    equal_energy_per_bit: bool = False
    spacing: float = 1.0
    tone_offset: float = 0.2
    bandwidth: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.sigma2_bob < 0 or self.sigma2_eve < 0:
            raise ValueError("noise variances must be non-negative")
        if self.n_carriers < 1:
            raise ValueError("n_carriers must be >= 1")
        if self.n_rx < 1:
            raise ValueError("n_rx must be >= 1")
        if self.hop_length < 1:
            raise ValueError("hop_length must be >= 1")
        self.plan()  # validates the frequency geometry

    def plan(self) -> FrequencyPlan:
        return FrequencyPlan(self.n_carriers, self.spacing, self.tone_offset, self.bandwidth)

    def e_alice(self, ebn0_db: float) -> float:
        """Alice's symbol energy (per ON symbol for OOK) at a given E_b/N0."""
        ratio = 10.0 ** (ebn0_db / 10.0)
        if self.equal_energy_per_bit:
            e_bit = ratio * self.sigma2_bob
            return 2.0 * e_bit if self.scheme is Scheme.OOK else e_bit
        if self.scheme in (Scheme.BPSK, Scheme.OOK):
            return 2.0 * self.sigma2_bob * ratio
        return self.sigma2_bob * ratio


@dataclass(frozen=True)
class ReceivedSymbol:
    """Bob's samples, shape (symbols, tones, n_rx), with the true bits.

    OOK and BPSK observe one tone. For BFSK the tone axis is ordered
    (bit-1 tone, bit-0 tone).
    """

    samples: np.ndarray
    bits: np.ndarray

    @property
    def energy(self) -> np.ndarray:
        """Energy summed over antennas, shape (symbols, tones)."""
        return np.sum(np.abs(self.samples) ** 2, axis=-1)


Attack = Union[EveContribution, Iterable[EveContribution], None]


def _attack_total(attack: Attack) -> Union[np.ndarray, float]:
    if attack is None:
        return 0.0
    if isinstance(attack, EveContribution):
        return attack.total
    return sum((a.total for a in attack), 0.0)


def ook_encode(bits):
    return np.asarray(bits, dtype=float) * 1.0


def ook_receive(
    channels: ChannelSet,
    attack: Attack,
    cfg: LinkConfig,
    bits,
    stream: RandomStream,
    e_alice: float,
    band: int = 0,
) -> ReceivedSymbol:
    """Per-antenna OOK samples ``sqrt(E) h x + Eve terms + n_B``.

    Convolution-attack terms must already carry the factor ``x`` (see
    :func:`fhca.adversary.ca_contribution`), so the OFF row only sees
    relayed noise.
    """
    bits = np.asarray(bits)
    x = ook_encode(bits)
    h = channels.h_ab[:, band, :]
    noise = sample_circular_gaussian(stream.child("noise_B"), cfg.sigma2_bob, h.shape)
    y = math.sqrt(e_alice) * h * x[:, None] + _attack_total(attack) + noise
    return ReceivedSymbol(y[:, None, :], bits)


def ook_detect(r: ReceivedSymbol, threshold: float) -> np.ndarray:
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return (r.energy[:, 0] > threshold).astype(np.int8)


def bpsk_encode(bits) -> np.ndarray:
    return 2.0 * np.asarray(bits, dtype=float) - 1.0


def bpsk_coherent_link(
    channels: ChannelSet,
    attack: Attack,
    cfg: LinkConfig,
    bits,
    stream: RandomStream,
    e_alice: float,
    band: int = 0,
) -> np.ndarray:
    """Coherent BPSK with genie CSI on h_AB only (attack-ignorant MRC).

    Bit 1 is sent as ``+sqrt(E)``; any attack term must already include
    the transmitted sign.
    """
    x = bpsk_encode(bits)
    h = channels.h_ab[:, band, :]
    noise = sample_circular_gaussian(stream.child("noise_B"), cfg.sigma2_bob, h.shape)
    y = math.sqrt(e_alice) * h * x[:, None] + _attack_total(attack) + noise
    metric = np.real(np.sum(np.conj(h) * y, axis=-1))
    return (metric > 0).astype(np.int8)


def bfsk_encode(bits, mode: str, plan: FrequencyPlan, key: HopKey, slots):
    """Tone indices ``(transmitted, complementary)`` for each bit.

    Traditional mode hops the carrier and puts bit 1 on ``f_c + beta``;
    enhanced mode draws the whole ordered tone pair from the tone-pair key.
    """
    bits = np.asarray(bits)
    if mode == "traditional":
        carrier = np.asarray(next_hop(key, slots, plan.n_carriers))
        one, zero = 2 * carrier + 1, 2 * carrier
    elif mode == "enhanced":
        one, zero = (np.asarray(t) for t in draw_tone_pair(key, slots, plan))
    else:
        raise ValueError(f"unknown BFSK mode {mode!r}")
    tx = np.where(bits == 1, one, zero)
    comp = np.where(bits == 1, zero, one)
    return tx, comp


def bfsk_receive(
    channels: ChannelSet,
    cfg: LinkConfig,
    bits,
    stream: RandomStream,
    e_alice: float,
    tone_tx,
    tone_comp,
    ca: Optional[EveContribution] = None,
    jamming: Attack = None,
) -> ReceivedSymbol:
    """Samples on the transmitted and complementary tones.

    ``channels`` band 0 is the transmitted tone's carrier, band 1 the
    complementary tone's. ``ca`` is a three-tone CA-BFSK contribution; its
    side term lands on the complementary tone only when that tone sits at
    ``f_k +/- 2 beta``. ``jamming`` terms have shape (symbols, 2, n_rx) in
    (transmitted, complementary) order.
    """
    bits = np.asarray(bits)
    plan = cfg.plan()
    n, n_rx = channels.n_slots, channels.n_rx
    noise = sample_circular_gaussian(stream.child("noise_B"), cfg.sigma2_bob, (n, 2, n_rx))
    y = noise.copy()
    y[:, 0] += math.sqrt(e_alice) * channels.h_ab[:, 0, :]
    if ca is not None:
        y[:, 0] += ca.total[:, 0]
        side = plan.side_offset(tone_tx, tone_comp)
        plus, minus = (side == 1), (side == -1)
        y[plus, 1] += ca.total[plus, 1]
        y[minus, 1] += ca.total[minus, 2]
    y = y + _attack_total(jamming)
    # reorder to (bit-1 tone, bit-0 tone)
    ordered = np.where((bits == 1)[:, None, None], y, y[:, ::-1])
    return ReceivedSymbol(ordered, bits)


def bfsk_detect(r: ReceivedSymbol) -> np.ndarray:
    e = r.energy
    return (e[:, 0] > e[:, 1]).astype(np.int8)
