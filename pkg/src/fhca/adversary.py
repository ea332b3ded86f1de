"""Attacker models: jamming, the convolution attack, and its timing constraint."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .channel import ChannelSet
from .numeric import RandomStream, sample_circular_gaussian


class AttackKind(str, Enum):
    NONE = "none"
    NJ = "nj"
    WJ = "wj"
    CA = "ca"
    CA_BFSK = "ca-bfsk"


class SpatialMode(str, Enum):
    SINGLE = "single"
    RANDOMIZED = "randomized"
    FIXED = "fixed"


@dataclass(frozen=True)
class AttackConfig:
    """Eve's strategy and energy budget.

    ``theta`` scales Eve's total energy against Alice's; ``alpha`` is the
    fraction spent on the convolution (or, for CA-BFSK, on the main tone).
    """

    kind: AttackKind = AttackKind.NONE
    alpha: float = 1.0
    theta: float = 9.0
    n_eve: int = 1
    spatial_mode: SpatialMode = SpatialMode.SINGLE
    attacks_pilots: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", AttackKind(self.kind))
        object.__setattr__(self, "spatial_mode", SpatialMode(self.spatial_mode))
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.theta >= 0.0 or math.isinf(self.theta):
            raise ValueError(f"theta must be a finite non-negative energy ratio, got {self.theta}")
        if self.n_eve < 1:
            raise ValueError(f"n_eve must be >= 1, got {self.n_eve}")
        if self.spatial_mode is SpatialMode.SINGLE and self.n_eve != 1:
            raise ValueError("spatial_mode 'single' requires n_eve = 1")
        if self.kind is AttackKind.CA_BFSK and self.n_eve != 1:
            raise ValueError("CA-BFSK is modelled with a single Eve antenna")

    def eve_energy(self, e_alice: float) -> float:
        return self.theta * e_alice

    def ca_energy(self, e_alice: float) -> float:
        return self.alpha * self.theta * e_alice

    def main_energy(self, e_alice: float) -> float:
        return self.alpha * self.theta * e_alice

    def side_energy(self, e_alice: float) -> float:
        return 0.5 * (1.0 - self.alpha) * self.theta * e_alice

    def for_pilots(self) -> "AttackConfig":
        """The attack pilots actually see."""
        if self.attacks_pilots:
            return self
        return AttackConfig(AttackKind.NONE, self.alpha, self.theta, self.n_eve, self.spatial_mode, False)


@dataclass(frozen=True)
class TimingGeometry:
    tau_ab: float
    tau_ae: float
    tau_eb: float
    t_proc: float
    symbol_period: float

    def __post_init__(self) -> None:
        if min(self.tau_ab, self.tau_ae, self.tau_eb, self.t_proc) < 0:
            raise ValueError("delays must be non-negative")
        if not self.symbol_period > 0:
            raise ValueError("symbol period must be positive")


def check_timing_feasibility(g: TimingGeometry) -> bool:
    """True iff the relayed copy lands strictly inside the current symbol."""
    relayed = g.tau_ae + g.t_proc + g.tau_eb
    return g.tau_ab < relayed < g.tau_ab + g.symbol_period


@dataclass(frozen=True)
class EveContribution:
    """Additive terms Eve induces at Bob.

    ``signal`` and ``noise`` share a shape; the trailing axis is Bob's
    antenna. ``hit`` records, for jamming, whether the active band was hit.
    """

    signal: np.ndarray
    noise: np.ndarray
    hit: Optional[np.ndarray] = None

    @property
    def total(self) -> np.ndarray:
        return self.signal + self.noise


def _eve_waveforms(stream: RandomStream, n: int, cfg: AttackConfig, tag: str) -> np.ndarray:
    if cfg.spatial_mode is SpatialMode.FIXED:
        w = sample_circular_gaussian(stream.child(tag), 1.0, (n, 1))
        return np.broadcast_to(w, (n, cfg.n_eve))
    return sample_circular_gaussian(stream.child(tag), 1.0, (n, cfg.n_eve))


def ca_contribution(
    stream: RandomStream,
    channels: ChannelSet,
    cfg: AttackConfig,
    x: np.ndarray,
    e_alice: float,
    sigma2_eve: float,
    band: int = 0,
) -> EveContribution:
    """Convolution attack on an amplitude-keyed symbol, shape (symbols, n_rx).

    Antenna j receives ``sum_l sqrt(a*theta*E/Ne) h_eb[l,j] h_ae[l] w[l] x``
    plus the relayed Eve noise ``sum_l sqrt(a*theta/Ne) h_eb[l,j] w[l] nE[l]``,
    with fresh ``w`` every symbol.
    """
    if cfg.kind is not AttackKind.CA:
        raise ValueError(f"ca_contribution needs kind CA, got {cfg.kind.value}")
    if channels.n_eve != cfg.n_eve:
        raise ValueError("channel set and attack config disagree on n_eve")
    n = channels.n_slots
    x = np.asarray(x)
    h_ae = channels.h_ae[:, band, :]
    h_eb = channels.h_eb[:, band, :, :]
    w = _eve_waveforms(stream, n, cfg, "w_k")
    n_eve_noise = sample_circular_gaussian(stream.child("noise_E"), sigma2_eve, (n, cfg.n_eve))
    gain = math.sqrt(cfg.alpha * cfg.theta / cfg.n_eve)
    relay = h_eb * w[:, :, None]
    signal = gain * math.sqrt(e_alice) * np.einsum("nlj,nl->nj", relay, h_ae) * x[:, None]
    noise = gain * np.einsum("nlj,nl->nj", relay, n_eve_noise)
    return EveContribution(signal, noise)


def ca_bfsk_contribution(
    stream: RandomStream,
    channels: ChannelSet,
    cfg: AttackConfig,
    e_alice: float,
    sigma2_eve: float,
    band: int = 0,
    side_band: int = 0,
) -> EveContribution:
    """BFSK convolution attack on tones ``(f_k, f_k + 2 beta, f_k - 2 beta)``.

    Returns arrays of shape (symbols, 3, n_rx). Alice's tone is received on
    ``band``; the side tones are relayed through ``h_eb`` of ``side_band``.
    Each side tone uses its own waveform scalar, independent of ``w``.
    """
    if cfg.kind is not AttackKind.CA_BFSK:
        raise ValueError(f"ca_bfsk_contribution needs kind CA-BFSK, got {cfg.kind.value}")
    n = channels.n_slots
    h_ae = channels.h_ae[:, band, 0]
    h_eb_main = channels.h_eb[:, band, 0, :]
    h_eb_side = channels.h_eb[:, side_band, 0, :]
    w = sample_circular_gaussian(stream.child("w_k"), 1.0, n)
    u = sample_circular_gaussian(stream.child("u_k"), 1.0, (n, 2))
    n_e = sample_circular_gaussian(stream.child("noise_E"), sigma2_eve, n)

    main_gain = math.sqrt(cfg.alpha * cfg.theta)
    side_gain = math.sqrt(0.5 * (1.0 - cfg.alpha) * cfg.theta)
    root_e = math.sqrt(e_alice)

    signal = np.empty((n, 3, channels.n_rx), dtype=complex)
    noise = np.empty_like(signal)
    signal[:, 0] = main_gain * root_e * (h_ae * w)[:, None] * h_eb_main
    noise[:, 0] = main_gain * (w * n_e)[:, None] * h_eb_main
    for s in (0, 1):
        signal[:, s + 1] = side_gain * root_e * (h_ae * u[:, s])[:, None] * h_eb_side
        noise[:, s + 1] = side_gain * (u[:, s] * n_e)[:, None] * h_eb_side
    return EveContribution(signal, noise)


def nj_contribution(
    stream: RandomStream,
    shape: tuple[int, ...],
    n_bands: int,
    theta: float,
    e_alice: float,
    active_band,
) -> EveContribution:
    """Narrowband jamming: one uniformly chosen band per symbol gets CN(0, theta*E).

    ``shape`` is (symbols, ..., n_rx); ``active_band`` broadcasts against the
    leading axes and may be an array of observed-band indices.
    """
    n = shape[0]
    target = stream.child("nj_band").generator().integers(0, n_bands, size=n)
    target = target.reshape((n,) + (1,) * (len(shape) - 2))
    hit = np.asarray(active_band) == target
    jam = sample_circular_gaussian(stream.child("nj_noise"), theta * e_alice, shape)
    noise = np.where(hit[..., None], jam, 0.0)
    return EveContribution(np.zeros(shape, dtype=complex), noise, hit)


def wj_contribution(
    stream: RandomStream,
    shape: tuple[int, ...],
    n_bands: int,
    theta: float,
    e_alice: float,
) -> EveContribution:
    """Wideband jamming: every band gets independent CN(0, theta*E/N)."""
    jam = sample_circular_gaussian(stream.child("wj_noise"), theta * e_alice / n_bands, shape)
    return EveContribution(np.zeros(shape, dtype=complex), jam)
