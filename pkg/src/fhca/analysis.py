"""Monte Carlo experiments: BER curves, energy CDFs, LLN checks, BFSK attack analysis."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .adversary import (
    AttackConfig,
    AttackKind,
    SpatialMode,
    ca_bfsk_contribution,
    ca_contribution,
    nj_contribution,
    wj_contribution,
)
from .calibration import (
    ThresholdDesign,
    approximate_threshold_analytic,
    attack_ignorant_threshold,
    calibrate_from_pilots,
    optimal_threshold_empirical,
)
from .channel import FrequencyPlan, HopKey, next_hop, sample_channels
from .modem import (
    LinkConfig,
    ReceivedSymbol,
    Scheme,
    bfsk_detect,
    bfsk_encode,
    bfsk_receive,
    bpsk_coherent_link,
    bpsk_encode,
    ook_detect,
    ook_encode,
    ook_receive,
)
from .numeric import EmpiricalCDF, RandomStream, binary_entropy, run_blocks, sample_circular_gaussian

BLOCK_SIZE = 1 << 16
THRESHOLD_METHODS = ("empirical", "analytic", "attack-ignorant")


def plain(obj):
    """JSON-ready view of configs (enums to values, tuples to lists)."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(frozen=True)
class ResultRow:
    x: float
    estimate: float
    stderr: float
    trials: int


@dataclass
class ResultTable:
    """Curve points with Monte Carlo standard errors, kept sorted by x."""

    kind: str
    rows: list[ResultRow] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.rows = sorted(self.rows, key=lambda r: r.x)

    def at(self, x: float) -> ResultRow:
        for row in self.rows:
            if math.isclose(row.x, x, rel_tol=0, abs_tol=1e-9):
                return row
        raise KeyError(x)

    @property
    def xs(self) -> np.ndarray:
        return np.array([r.x for r in self.rows])

    @property
    def estimates(self) -> np.ndarray:
        return np.array([r.estimate for r in self.rows])


def _tag(value: float) -> str:
    """Stream label for a real parameter."""
    return f"{float(value):.12g}"


def proportion_row(x: float, count: int, n: int) -> ResultRow:
    p = count / n
    return ResultRow(float(x), p, math.sqrt(p * (1.0 - p) / n), int(n))


def has_error_floor(table: ResultTable, high_db: float = 30.0, low_db: float = 20.0) -> bool:
    return table.at(high_db).estimate >= 0.8 * table.at(low_db).estimate


@dataclass(frozen=True)
class ExperimentSpec:
    link: LinkConfig
    attack: AttackConfig
    ebn0_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 10**6
    seed: int = 0
    threshold: str = "empirical"
    pilot_symbols: int = 100_000
    eta: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ebn0_db", tuple(float(v) for v in self.ebn0_db))
        if not self.ebn0_db:
            raise ValueError("ebn0_db grid must not be empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.threshold not in THRESHOLD_METHODS:
            raise ValueError(f"threshold must be one of {THRESHOLD_METHODS}, got {self.threshold!r}")
        if self.pilot_symbols < 4:
            raise ValueError("pilot_symbols must be >= 4")
        if self.eta is not None and not 0.0 <= self.eta <= 100.0:
            raise ValueError(f"eta must lie in [0, 100], got {self.eta}")
        check_combination(self.link.scheme, self.attack.kind)


def check_combination(scheme: Scheme, kind: AttackKind) -> None:
    scheme, kind = Scheme(scheme), AttackKind(kind)
    bfsk = scheme in (Scheme.BFSK, Scheme.EBFSK)
    if kind is AttackKind.CA_BFSK and not bfsk:
        raise ValueError(f"attack ca-bfsk targets BFSK/EBFSK, not {scheme.value}")
    if kind is AttackKind.CA and bfsk:
        raise ValueError(f"attack ca targets amplitude keying; use ca-bfsk with {scheme.value}")


# ---------------------------------------------------------------- link blocks


@dataclass(frozen=True)
class _Keys:
    hop: HopKey
    tone: HopKey

    @classmethod
    def from_seed(cls, seed: int) -> "_Keys":
        return cls(HopKey.from_seed(seed, "carrier-hop"), HopKey.from_seed(seed, "tone-pair"))


def _block_channels(link: LinkConfig, attack: AttackConfig, stream: RandomStream, start: int, n: int, n_bands: int):
    m = link.hop_length
    n_slots = -(-n // m)
    channels = sample_channels(stream.child("channels"), n_slots, link.n_rx, attack.n_eve, n_bands, m)
    slots = (start + np.arange(n)) // m
    return channels.per_symbol(n), slots


def _amplitude_attack(link, attack, stream, channels, x, e_alice, active_carrier):
    shape = (x.size, link.n_rx)
    if attack.kind is AttackKind.CA:
        return ca_contribution(stream, channels, attack, x, e_alice, link.sigma2_eve)
    if attack.kind is AttackKind.NJ:
        return nj_contribution(stream, shape, link.n_carriers, attack.theta, e_alice, active_carrier)
    if attack.kind is AttackKind.WJ:
        return wj_contribution(stream, shape, link.n_carriers, attack.theta, e_alice)
    return None


def ook_block(link: LinkConfig, attack: AttackConfig, e_alice: float, keys: _Keys, stream: RandomStream, start: int, n: int) -> ReceivedSymbol:
    """Simulate ``n`` OOK symbols starting at global symbol index ``start``."""
    channels, slots = _block_channels(link, attack, stream, start, n, 1)
    bits = stream.child("bits").generator().integers(0, 2, n)
    carrier = next_hop(keys.hop, slots, link.n_carriers) if attack.kind is AttackKind.NJ else None
    contribution = _amplitude_attack(link, attack, stream.child("attack"), channels, ook_encode(bits), e_alice, carrier)
    return ook_receive(channels, contribution, link, bits, stream.child("rx"), e_alice)


def bpsk_block(link, attack, e_alice, keys, stream, start, n) -> int:
    channels, slots = _block_channels(link, attack, stream, start, n, 1)
    bits = stream.child("bits").generator().integers(0, 2, n)
    carrier = next_hop(keys.hop, slots, link.n_carriers) if attack.kind is AttackKind.NJ else None
    contribution = _amplitude_attack(link, attack, stream.child("attack"), channels, bpsk_encode(bits), e_alice, carrier)
    decided = bpsk_coherent_link(channels, contribution, link, bits, stream.child("rx"), e_alice)
    return int(np.count_nonzero(decided != bits))


def bfsk_block(link, attack, e_alice, keys, stream, start, n) -> int:
    plan = link.plan()
    channels, slots = _block_channels(link, attack, stream, start, n, 2)
    bits = stream.child("bits").generator().integers(0, 2, n)
    if link.scheme is Scheme.BFSK:
        tx, comp = bfsk_encode(bits, "traditional", plan, keys.hop, slots)
    else:
        tx, comp = bfsk_encode(bits, "enhanced", plan, keys.tone, slots)
    carriers = np.stack([FrequencyPlan.tone_carrier(tx), FrequencyPlan.tone_carrier(comp)], axis=1)
    channels = channels.with_band_copied(0, 1, carriers[:, 0] == carriers[:, 1])

    astream = stream.child("attack")
    ca = jamming = None
    shape = (n, 2, link.n_rx)
    if attack.kind is AttackKind.CA_BFSK:
        ca = ca_bfsk_contribution(astream, channels, attack, e_alice, link.sigma2_eve, band=0, side_band=1)
    elif attack.kind is AttackKind.NJ:
        jamming = nj_contribution(astream, shape, link.n_carriers, attack.theta, e_alice, carriers)
    elif attack.kind is AttackKind.WJ:
        jamming = wj_contribution(astream, shape, link.n_carriers, attack.theta, e_alice)
    r = bfsk_receive(channels, link, bits, stream.child("rx"), e_alice, tx, comp, ca=ca, jamming=jamming)
    return int(np.count_nonzero(bfsk_detect(r) != bits))


def _block_size(link: LinkConfig) -> int:
    return link.hop_length * max(1, BLOCK_SIZE // link.hop_length)


def ook_threshold(spec: ExperimentSpec, e_alice: float, stream: RandomStream, keys: _Keys, threads: int = 1) -> ThresholdDesign:
    """OOK threshold for one operating point, per ``spec.threshold``."""
    link, attack = spec.link, spec.attack
    if spec.threshold == "attack-ignorant":
        return attack_ignorant_threshold(link.n_rx, e_alice, link.sigma2_bob)
    if spec.threshold == "analytic":
        kind = attack.kind
        if kind is AttackKind.CA:
            return approximate_threshold_analytic(link.n_rx, e_alice, attack.alpha, attack.theta, link.sigma2_eve, link.sigma2_bob)
        sigma2 = link.sigma2_bob
        if kind is AttackKind.WJ:
            sigma2 += attack.theta * e_alice / link.n_carriers
        return approximate_threshold_analytic(link.n_rx, e_alice, 0.0, 0.0, 0.0, sigma2)
    pilot_attack = attack.for_pilots()
    parts = run_blocks(
        stream,
        spec.pilot_symbols,
        _block_size(link),
        lambda s, start, n: ook_block(link, pilot_attack, e_alice, keys, s, start, n),
        threads,
    )
    pilots = ReceivedSymbol(np.concatenate([p.samples for p in parts]), np.concatenate([p.bits for p in parts]))
    return optimal_threshold_empirical(calibrate_from_pilots(pilots, attacked=pilot_attack.kind is not AttackKind.NONE))


def run_ber(spec: ExperimentSpec, threads: int = 1) -> ResultTable:
    """BER versus E_b/N0; bit-exact for a given spec whatever ``threads`` is."""
    link, attack = spec.link, spec.attack
    root = RandomStream(spec.seed, ("ber",))
    keys = _Keys.from_seed(spec.seed)
    rows, thresholds = [], []
    for i, db in enumerate(spec.ebn0_db):
        e = link.e_alice(db)
        point = root.child("point", i)
        if link.scheme is Scheme.OOK:
            design = ook_threshold(spec, e, point.child("pilots"), keys, threads)
            thresholds.append(plain(design))

            def work(s, start, n, e=e, t=design.value):
                r = ook_block(link, attack, e, keys, s, start, n)
                return int(np.count_nonzero(ook_detect(r, t) != r.bits))

        elif link.scheme is Scheme.BPSK:

            def work(s, start, n, e=e):
                return bpsk_block(link, attack, e, keys, s, start, n)

        else:

            def work(s, start, n, e=e):
                return bfsk_block(link, attack, e, keys, s, start, n)

        errors = sum(run_blocks(point.child("data"), spec.trials, _block_size(link), work, threads))
        rows.append(proportion_row(db, errors, spec.trials))
    provenance = {
        "seed": spec.seed,
        "link": plain(link),
        "attack": plain(attack),
        "threshold_method": spec.threshold if link.scheme is Scheme.OOK else None,
        "thresholds": thresholds,
        "trials": spec.trials,
    }
    return ResultTable("ber", rows, provenance)


# ------------------------------------------------------- energy distributions

DEFAULT_CDF_GRID = tuple(np.round(np.arange(0.0, 4.0001, 0.05), 10))


def _cdf_table(kind: str, samples: np.ndarray, grid: Sequence[float], provenance: dict) -> ResultTable:
    cdf = EmpiricalCDF(samples)
    n = len(cdf)
    rows = []
    for x in grid:
        f = cdf(float(x))
        rows.append(ResultRow(float(x), f, math.sqrt(f * (1.0 - f) / n), n))
    provenance = dict(provenance, mean=float(np.mean(samples)), q05=cdf.quantile(0.05), q50=cdf.quantile(0.5))
    return ResultTable(kind, rows, provenance)


def received_energy_samples(
    stream: RandomStream,
    trials: int,
    eta: float,
    n_rx: int,
    n_eve: int = 1,
    spatial_mode: str = "single",
    e_total: float = 1.0,
    threads: int = 1,
) -> np.ndarray:
    """Noiseless ON-state energy averaged over Bob's antennas.

    ``eta`` is Eve's percentage of the mean received energy ``e_total``.
    """
    if not 0.0 <= eta <= 100.0:
        raise ValueError(f"eta must lie in [0, 100], got {eta}")
    mode = SpatialMode(spatial_mode)
    if mode is SpatialMode.SINGLE and n_eve != 1:
        raise ValueError("spatial_mode 'single' requires n_eve = 1")
    e_eve = e_total * eta / 100.0
    e_alice = e_total - e_eve

    def work(s: RandomStream, start: int, n: int) -> np.ndarray:
        ch = sample_channels(s, n, n_rx, n_eve)
        if mode is SpatialMode.FIXED:
            w = np.broadcast_to(sample_circular_gaussian(s.child("w_k"), 1.0, (n, 1)), (n, n_eve))
        else:
            w = sample_circular_gaussian(s.child("w_k"), 1.0, (n, n_eve))
        eve = np.einsum("nlj,nl->nj", ch.h_eb[:, 0], ch.h_ae[:, 0] * w) * math.sqrt(e_eve / n_eve)
        y = math.sqrt(e_alice) * ch.h_ab[:, 0] + eve
        return np.mean(np.abs(y) ** 2, axis=1)

    return np.concatenate(run_blocks(stream, trials, BLOCK_SIZE, work, threads))


def cdf_received_energy(
    eta: float,
    n_rx: int,
    n_eve: int = 1,
    spatial_mode: str = "single",
    trials: int = 10**5,
    seed: int = 0,
    grid: Sequence[float] = DEFAULT_CDF_GRID,
    threads: int = 1,
) -> ResultTable:
    stream = RandomStream(seed, ("cdf", _tag(eta), n_rx, n_eve, str(SpatialMode(spatial_mode).value)))
    samples = received_energy_samples(stream, trials, eta, n_rx, n_eve, spatial_mode, threads=threads)
    prov = {"seed": seed, "eta": eta, "n_rx": n_rx, "n_eve": n_eve, "spatial_mode": SpatialMode(spatial_mode).value}
    return _cdf_table("cdf-received-energy", samples, grid, prov)


def product_channel_samples(stream: RandomStream, trials: int, n_eve: int, threads: int = 1) -> np.ndarray:
    """Samples of ``|sum_l h_eb[l] w[l] h_ae[l] / sqrt(Ne)|^2``."""

    def work(s: RandomStream, start: int, n: int) -> np.ndarray:
        parts = [sample_circular_gaussian(s.child(tag), 1.0, (n, n_eve)) for tag in ("h_EB", "w_k", "h_AE")]
        total = np.sum(parts[0] * parts[1] * parts[2], axis=1) / math.sqrt(n_eve)
        return np.abs(total) ** 2

    return np.concatenate(run_blocks(stream, trials, BLOCK_SIZE, work, threads))


def multi_eve_product_cdf(
    n_eve_list: Iterable[int],
    trials: int = 10**6,
    seed: int = 0,
    grid: Sequence[float] = DEFAULT_CDF_GRID,
    threads: int = 1,
) -> dict[int, ResultTable]:
    out = {}
    for ne in n_eve_list:
        samples = product_channel_samples(RandomStream(seed, ("product", ne)), trials, ne, threads)
        out[ne] = _cdf_table("cdf-product-channel", samples, grid, {"seed": seed, "n_eve": ne})
    return out


# ------------------------------------------------------ large-antenna check


@dataclass(frozen=True)
class LlnReport:
    eps: float
    trials: int
    rows: tuple[ResultRow, ...]
    implied_n_rx: Optional[int]

    def probability(self, n_rx: int) -> float:
        return next(r.estimate for r in self.rows if r.x == n_rx)


def lln_check(
    n_rx_list: Sequence[int],
    eps: float,
    trials: int,
    e_alice: float = 1.0,
    e_eve: float = 1.0,
    seed: int = 0,
    threads: int = 1,
) -> LlnReport:
    """Estimate ``P(R_delta / N_r > -eps)`` for each antenna count.

    ``R_delta`` is the attacked minus clean noiseless ON energy; it is
    sampled as the Eve energy term plus the zero-mean cross term.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    rows = []
    for n_rx in n_rx_list:

        def work(s: RandomStream, start: int, n: int, n_rx=n_rx) -> int:
            ch = sample_channels(s, n, n_rx, 1)
            w = sample_circular_gaussian(s.child("w_k"), 1.0, n)
            eve = math.sqrt(e_eve) * (ch.h_ae[:, 0, 0] * w)[:, None] * ch.h_eb[:, 0, 0, :]
            cross = 2.0 * math.sqrt(e_alice) * np.real(np.conj(ch.h_ab[:, 0]) * eve)
            r_delta = np.sum(np.abs(eve) ** 2 + cross, axis=1)
            return int(np.count_nonzero(r_delta / n_rx > -eps))

        hits = sum(run_blocks(RandomStream(seed, ("lln", n_rx)), trials, BLOCK_SIZE, work, threads))
        rows.append(proportion_row(n_rx, hits, trials))
    implied = next((int(r.x) for r in sorted(rows, key=lambda r: r.x) if r.estimate >= 1.0 - eps), None)
    return LlnReport(eps, trials, tuple(rows), implied)


# ----------------------------------------------------------- BFSK analysis


def closed_form_pcross(alpha: float, theta: float) -> float:
    """P(E_main > E_side) when the relayed channels are treated as Gaussian."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not theta > 0:
        raise ValueError("theta must be positive")
    return (2.0 + 2.0 * alpha * theta) / (2.0 + alpha * theta + theta)


@dataclass(frozen=True)
class AlphaSolution:
    theta: float
    alpha: float
    pcross: float
    stated_alpha: float
    stated_pcross: float


def solve_alpha_half(theta: float) -> AlphaSolution:
    """Root of ``closed_form_pcross(alpha, theta) = 1/2``.

    The stated optimum ``(theta - 2) / (2 theta)`` is reported next to the
    root with the crossover probability it actually yields.
    """
    if not theta > 2:
        raise ValueError(f"no alpha in [0, 1] gives p_cross = 1/2 for theta = {theta} (need theta > 2)")
    alpha = (theta - 2.0) / (3.0 * theta)
    stated = (theta - 2.0) / (2.0 * theta)
    return AlphaSolution(theta, alpha, closed_form_pcross(alpha, theta), stated, closed_form_pcross(stated, theta))


def _pcross_mc(stream, trials, threads, draw) -> tuple[float, float]:
    def work(s: RandomStream, start: int, n: int) -> int:
        main, side = draw(s, n)
        return int(np.count_nonzero(main > side))

    hits = sum(run_blocks(stream, trials, BLOCK_SIZE, work, threads))
    row = proportion_row(0.0, hits, trials)
    return row.estimate, row.stderr


def surrogate_pcross(alpha: float, theta: float, trials: int, seed: int = 0, threads: int = 1) -> tuple[float, float]:
    """Monte Carlo p_cross with the relayed channels drawn as independent CN(0, 1)."""

    def draw(s, n):
        g = [sample_circular_gaussian(s.child(t), 1.0, n) for t in ("h_AB", "g_main", "g_side")]
        main = np.abs(g[0] + math.sqrt(alpha * theta) * g[1]) ** 2
        side = 0.5 * (1.0 - alpha) * theta * np.abs(g[2]) ** 2
        return main, side

    return _pcross_mc(RandomStream(seed, ("surrogate", _tag(alpha), _tag(theta))), trials, threads, draw)


def full_model_pcross(alpha: float, theta: float, trials: int, seed: int = 0, threads: int = 1) -> tuple[float, float]:
    """Monte Carlo p_cross with triple-product relayed channels, no noise.

    Main and side tones share ``h_AE`` and ``h_EB``; they differ only in
    the independent waveform scalars ``w`` and ``u``.
    """

    def draw(s, n):
        h_ab, h_ae, h_eb, w, u = (sample_circular_gaussian(s.child(t), 1.0, n) for t in ("h_AB", "h_AE", "h_EB", "w_k", "u_k"))
        main = np.abs(h_ab + math.sqrt(alpha * theta) * h_ae * w * h_eb) ** 2
        side = 0.5 * (1.0 - alpha) * theta * np.abs(h_ae * u * h_eb) ** 2
        return main, side

    return _pcross_mc(RandomStream(seed, ("full", _tag(alpha), _tag(theta))), trials, threads, draw)


@dataclass(frozen=True)
class SweepCurve:
    theta: float
    mutual_information: ResultTable
    pcross: ResultTable

    @property
    def argmin_alpha(self) -> float:
        rows = self.mutual_information.rows
        return min(rows, key=lambda r: r.estimate).x


def mutual_information_sweep(
    thetas: Sequence[float],
    alphas: Sequence[float],
    trials: int,
    seed: int = 0,
    threads: int = 1,
) -> list[SweepCurve]:
    """``I = 1 - H(p_cross)`` against alpha under the full product-channel model."""
    if trials < 10_000:
        raise ValueError("trials must be >= 10^4 so the p_cross standard error stays below 0.005")
    curves = []
    for theta in thetas:
        mi_rows, p_rows = [], []
        for alpha in alphas:
            p, se = full_model_pcross(alpha, theta, trials, seed, threads)
            mi = 1.0 - binary_entropy(p)
            slope = abs(math.log2(p / (1.0 - p))) if 0.0 < p < 1.0 else 0.0
            mi_rows.append(ResultRow(float(alpha), mi, slope * se, trials))
            p_rows.append(ResultRow(float(alpha), p, se, trials))
        prov = {"seed": seed, "theta": theta, "model": "full-product-channel", "noise": 0.0}
        curves.append(SweepCurve(theta, ResultTable("mutual-information", mi_rows, prov), ResultTable("pcross", p_rows, prov)))
    return curves
