"""Frequency plan, keyed hopping, tone-pair randomization and channel draws."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .numeric import RandomStream, sample_circular_gaussian

Purpose = Literal["carrier-hop", "tone-pair"]

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_LANE = _U64(0xD1B54A32D192ED03)


@dataclass(frozen=True)
class FrequencyPlan:
    """N equally spaced carriers plus the 2N BFSK tones ``f_i -/+ beta``.

    Tone ``t`` sits on carrier ``t // 2``; even tones are ``f - beta``
    (bit-0 in traditional BFSK) and odd tones ``f + beta`` (bit-1).
    """

    n_carriers: int
    spacing: float
    tone_offset: float
    bandwidth: float
    base: float = 0.0

    def __post_init__(self) -> None:
        if self.n_carriers < 1:
            raise ValueError("need at least one carrier (N >= 1)")
        if not self.bandwidth > 0 or not self.spacing > 0 or not self.tone_offset > 0:
            raise ValueError("spacing, tone offset and bandwidth must be positive")
        if not self.spacing > self.bandwidth:
            raise ValueError(
                f"guard band violated: need |f_i - f_(i+1)| > W, got spacing {self.spacing} <= W {self.bandwidth}"
            )
        if not self.tone_offset < self.spacing / 2:
            raise ValueError(
                f"tone offset violated: need 0 < beta < spacing/2, got beta {self.tone_offset} >= {self.spacing / 2}"
            )

    @property
    def carriers(self) -> np.ndarray:
        return self.base + self.spacing * np.arange(self.n_carriers)

    @property
    def n_tones(self) -> int:
        return 2 * self.n_carriers

    @property
    def tones(self) -> np.ndarray:
        return self.tone_frequency(np.arange(self.n_tones))

    def tone_frequency(self, tone):
        tone = np.asarray(tone)
        sign = np.where(tone % 2 == 1, 1.0, -1.0)
        return self.base + self.spacing * (tone // 2) + sign * self.tone_offset

    @staticmethod
    def tone_carrier(tone):
        return np.asarray(tone) // 2

    def side_offset(self, main_tone, other_tone) -> np.ndarray:
        """+1 / -1 where ``other`` sits at ``main +/- 2 beta``, else 0."""
        diff = self.tone_frequency(other_tone) - self.tone_frequency(main_tone)
        tol = 1e-9 * max(self.spacing, 1.0)
        two_beta = 2.0 * self.tone_offset
        return np.where(np.abs(diff - two_beta) < tol, 1, np.where(np.abs(diff + two_beta) < tol, -1, 0))


def build_frequency_plan(n: int, spacing: float, tone_offset: float, bandwidth: float) -> FrequencyPlan:
    return FrequencyPlan(n, spacing, tone_offset, bandwidth)


@dataclass(frozen=True)
class HopKey:
    """Shared secret plus a purpose tag; each purpose gets its own PRF key."""

    secret: bytes
    purpose: Purpose

    def __post_init__(self) -> None:
        if self.purpose not in ("carrier-hop", "tone-pair"):
            raise ValueError(f"unknown key purpose {self.purpose!r}")

    @classmethod
    def from_seed(cls, seed: int, purpose: Purpose) -> "HopKey":
        return cls(seed.to_bytes(8, "little"), purpose)

    def word(self) -> np.uint64:
        digest = hashlib.blake2b(self.secret, digest_size=8, person=self.purpose.encode()[:16]).digest()
        return _U64(int.from_bytes(digest, "little"))


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


def _prf(key: HopKey, counter: np.ndarray, lane: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = key.word() ^ (counter.astype(_U64) * _GOLDEN)
        z = _mix64(z)
        z = _mix64(z + lane.astype(_U64) * _LANE + _GOLDEN)
    return z


def _uniform_index(key: HopKey, counter: np.ndarray, n: int, lane0: int) -> np.ndarray:
    """Unbiased integers in [0, n) by rejection; retries use fresh lanes."""
    counter = np.asarray(counter, dtype=np.int64)
    if n == 1:
        return np.zeros(counter.shape, dtype=np.int64)
    limit = (2**64 // n) * n
    out = np.empty(counter.shape, dtype=np.int64)
    pending = np.ones(counter.shape, dtype=bool)
    attempt = 0
    while pending.any():
        lanes = np.full(counter.shape, lane0 + 2 * attempt, dtype=np.int64)
        draw = _prf(key, counter, lanes)
        ok = pending & (draw < _U64(limit) if limit < 2**64 else pending)
        out[ok] = (draw[ok] % _U64(n)).astype(np.int64)
        pending &= ~ok
        attempt += 1
    return out


def next_hop(key: HopKey, slot_index, n: int):
    """Carrier index in ``[0, n)`` for a hop slot (scalar or array of slots)."""
    if key.purpose != "carrier-hop":
        raise ValueError("next_hop needs a carrier-hop key")
    scalar = np.ndim(slot_index) == 0
    out = _uniform_index(key, np.atleast_1d(slot_index), n, lane0=0)
    return int(out[0]) if scalar else out


def tone_pair_from_draws(first, second_raw, n_tones: int):
    """Map ``first`` in [0, T) and ``second_raw`` in [0, T-1) to a distinct ordered pair.

    This bijection defines the support of :func:`draw_tone_pair`.
    """
    first = np.asarray(first)
    second_raw = np.asarray(second_raw)
    second = second_raw + (second_raw >= first)
    return first, second


def draw_tone_pair(key: HopKey, slot_index, plan: FrequencyPlan):
    """Ordered pair ``(bit-1 tone, bit-0 tone)`` of distinct tones, uniform over all pairs."""
    if key.purpose != "tone-pair":
        raise ValueError("draw_tone_pair needs a tone-pair key")
    if plan.n_tones < 2:
        raise ValueError("need at least two tones")
    scalar = np.ndim(slot_index) == 0
    slots = np.atleast_1d(slot_index)
    first = _uniform_index(key, slots, plan.n_tones, lane0=0)
    second_raw = _uniform_index(key, slots, plan.n_tones - 1, lane0=1)
    one, zero = tone_pair_from_draws(first, second_raw, plan.n_tones)
    if scalar:
        return int(one[0]), int(zero[0])
    return one, zero


@dataclass(frozen=True)
class ChannelSet:
    """Per-slot channel draws on the materialized bands.

    Shapes: ``h_ab`` (slots, bands, n_rx), ``h_ae`` (slots, bands, n_eve),
    ``h_eb`` (slots, bands, n_eve, n_rx). All entries are i.i.d. CN(0, 1)
    and constant over the ``hop_length`` symbols of a slot.
    """

    h_ab: np.ndarray
    h_ae: np.ndarray
    h_eb: np.ndarray
    hop_length: int = 1

    @property
    def n_slots(self) -> int:
        return self.h_ab.shape[0]

    @property
    def n_bands(self) -> int:
        return self.h_ab.shape[1]

    @property
    def n_rx(self) -> int:
        return self.h_ab.shape[2]

    @property
    def n_eve(self) -> int:
        return self.h_ae.shape[2]

    def per_symbol(self, n_symbols: int | None = None) -> "ChannelSet":
        """Repeat each slot ``hop_length`` times, optionally truncated."""
        m = self.hop_length
        if m == 1 and n_symbols in (None, self.n_slots):
            return self
        rep = [np.repeat(h, m, axis=0)[:n_symbols] for h in (self.h_ab, self.h_ae, self.h_eb)]
        return ChannelSet(*rep, hop_length=1)

    def with_band_copied(self, src: int, dst: int, mask: np.ndarray) -> "ChannelSet":
        """Copy band ``src`` onto band ``dst`` where ``mask`` holds (same carrier)."""
        arrays = []
        for h in (self.h_ab, self.h_ae, self.h_eb):
            h = h.copy()
            h[mask, dst] = h[mask, src]
            arrays.append(h)
        return ChannelSet(*arrays, hop_length=self.hop_length)


def sample_channels(
    stream: RandomStream,
    n_slots: int,
    n_rx: int = 1,
    n_eve: int = 1,
    n_bands: int = 1,
    hop_length: int = 1,
) -> ChannelSet:
    """Fresh CN(0, 1) channels for every (slot, band, antenna) coordinate.

    Only the bands a simulation observes need to be materialized; bands are
    i.i.d., so unobserved ones carry no information.
    """
    if n_rx < 1 or n_eve < 1 or n_bands < 1 or hop_length < 1:
        raise ValueError("n_rx, n_eve, n_bands and hop_length must all be >= 1")
    h_ab = sample_circular_gaussian(stream.child("h_AB"), 1.0, (n_slots, n_bands, n_rx))
    h_ae = sample_circular_gaussian(stream.child("h_AE"), 1.0, (n_slots, n_bands, n_eve))
    h_eb = sample_circular_gaussian(stream.child("h_EB"), 1.0, (n_slots, n_bands, n_eve, n_rx))
    return ChannelSet(h_ab, h_ae, h_eb, hop_length)
