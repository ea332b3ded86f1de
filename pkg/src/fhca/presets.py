"""Figure presets: default configurations and the experiments behind each figure.

Every runner takes the parsed configuration plus a :class:`RunContext` and
returns ``(curve_name, ResultTable)`` pairs. Runtimes quoted in
``Preset.runtime`` are single-threaded at ``trials_scale = 1``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

from .adversary import AttackKind, SpatialMode, TimingGeometry, check_timing_feasibility
from .analysis import (
    ResultRow,
    ResultTable,
    cdf_received_energy,
    lln_check,
    multi_eve_product_cdf,
    mutual_information_sweep,
    run_ber,
    solve_alpha_half,
)
from .config import ConfigError, ParsedConfig
from .modem import Scheme

MIN_SWEEP_TRIALS = 10_000


@dataclass(frozen=True)
class RunContext:
    threads: int = 1
    trials_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not self.trials_scale > 0:
            raise ValueError("trials_scale must be positive")

    def scaled(self, trials: int, floor: int = 1) -> int:
        return max(floor, int(round(trials * self.trials_scale)))


Curves = list[tuple[str, ResultTable]]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    config: str
    runner: Callable[[ParsedConfig, RunContext], Curves]
    runtime: str


def _sweep(cfg: ParsedConfig, key: str) -> tuple[float, ...]:
    try:
        return cfg.sweep[key]
    except KeyError:
        raise ConfigError(f"sweep.{key}", "required by this preset") from None


def _ints(values) -> list[int]:
    return [int(v) for v in values]


def _ber(cfg: ParsedConfig, ctx: RunContext, link=None, attack=None, **exp) -> ResultTable:
    link = dataclasses.replace(cfg.link, **(link or {}))
    attack = dataclasses.replace(cfg.attack, **(attack or {}))
    spec = dataclasses.replace(cfg.experiment, link=link, attack=attack, **exp)
    spec = dataclasses.replace(spec, trials=ctx.scaled(spec.trials), pilot_symbols=ctx.scaled(spec.pilot_symbols, 4))
    return run_ber(spec, ctx.threads)


def _label(value: float) -> str:
    return f"{value:g}".replace(".", "p")


# ----------------------------------------------------------------- runners


def _fig2(cfg, ctx):
    out = []
    for n_rx in _ints(_sweep(cfg, "n_rx")):
        for kind in ("none", "nj", "wj", "ca"):
            out.append((f"{kind}_nr{n_rx}", _ber(cfg, ctx, {"n_rx": n_rx}, {"kind": kind})))
    return out


def _fig3(cfg, ctx):
    out = []
    trials = ctx.scaled(cfg.experiment.trials)
    for eta in _sweep(cfg, "eta"):
        for n_rx in _ints(_sweep(cfg, "n_rx")):
            table = cdf_received_energy(eta, n_rx, trials=trials, seed=cfg.experiment.seed, threads=ctx.threads)
            out.append((f"eta{_label(eta)}_nr{n_rx}", table))
    return out


def _fig4(cfg, ctx):
    trials = ctx.scaled(cfg.experiment.trials)
    tables = multi_eve_product_cdf(_ints(_sweep(cfg, "n_eve")), trials, cfg.experiment.seed, threads=ctx.threads)
    return [(f"ne{ne}", t) for ne, t in tables.items()]


def _fig5(cfg, ctx):
    eta = cfg.experiment.eta if cfg.experiment.eta is not None else 90.0
    n_rx = cfg.link.n_rx
    trials = ctx.scaled(cfg.experiment.trials)
    seed = cfg.experiment.seed
    out = [("single", cdf_received_energy(eta, n_rx, 1, "single", trials, seed, threads=ctx.threads))]
    for mode in ("randomized", "fixed"):
        for ne in _ints(_sweep(cfg, "n_eve")):
            out.append((f"{mode}_ne{ne}", cdf_received_energy(eta, n_rx, ne, mode, trials, seed, threads=ctx.threads)))
    return out


def _ook_ca(cfg, ctx):
    out = []
    for n_rx in _ints(_sweep(cfg, "n_rx")):
        for method in ("empirical", "analytic"):
            out.append((f"ook_ca_{method}_nr{n_rx}", _ber(cfg, ctx, {"n_rx": n_rx}, threshold=method)))
        bpsk = _ber(cfg, ctx, {"n_rx": n_rx, "scheme": Scheme.BPSK})
        out.append((f"bpsk_ca_nr{n_rx}", bpsk))
    return out


def _fig8(cfg, ctx):
    trials = ctx.scaled(cfg.experiment.trials, MIN_SWEEP_TRIALS)
    curves = mutual_information_sweep(_sweep(cfg, "theta"), _sweep(cfg, "alpha"), trials, cfg.experiment.seed, ctx.threads)
    out = []
    for c in curves:
        out.append((f"mi_theta{_label(c.theta)}", c.mutual_information))
        out.append((f"pcross_theta{_label(c.theta)}", c.pcross))
    return out


def _fig9(cfg, ctx):
    out = [("single_ne1", _ber(cfg, ctx, attack={"n_eve": 1, "spatial_mode": SpatialMode.SINGLE}))]
    for mode in (SpatialMode.RANDOMIZED, SpatialMode.FIXED):
        for ne in _ints(_sweep(cfg, "n_eve")):
            out.append((f"{mode.value}_ne{ne}", _ber(cfg, ctx, attack={"n_eve": ne, "spatial_mode": mode})))
    return out


def _fig10(cfg, ctx):
    out = [("no_attack", _ber(cfg, ctx, attack={"kind": AttackKind.NONE}))]
    for alpha in _sweep(cfg, "alpha"):
        out.append((f"ca_alpha{_label(alpha)}", _ber(cfg, ctx, attack={"alpha": alpha})))
    return out


def _fig11(cfg, ctx):
    sol = solve_alpha_half(cfg.attack.theta)
    return [
        ("no_attack", _ber(cfg, ctx, attack={"kind": AttackKind.NONE})),
        ("ca_alpha_stated", _ber(cfg, ctx, attack={"alpha": sol.stated_alpha})),
        ("ca_alpha_root", _ber(cfg, ctx, attack={"alpha": sol.alpha})),
    ]


def _fig12(cfg, ctx):
    out = []
    for n in _ints(_sweep(cfg, "n_carriers")):
        for label, method in (("ignorant", "attack-ignorant"), ("aware", "empirical")):
            out.append((f"wj_{label}_n{n}", _ber(cfg, ctx, {"n_carriers": n}, threshold=method)))
    return out


def _fig13(cfg, ctx):
    out = []
    for n in _ints(_sweep(cfg, "n_carriers")):
        out.append((f"ebfsk_ca_n{n}", _ber(cfg, ctx, {"n_carriers": n, "scheme": Scheme.EBFSK})))
        out.append((f"bfsk_ca_n{n}", _ber(cfg, ctx, {"n_carriers": n, "scheme": Scheme.BFSK})))
        wj = _ber(cfg, ctx, {"n_carriers": n, "scheme": Scheme.EBFSK}, {"kind": AttackKind.WJ})
        out.append((f"ebfsk_wj_n{n}", wj))
    out.append(("bfsk_no_attack", _ber(cfg, ctx, {"scheme": Scheme.BFSK}, {"kind": AttackKind.NONE})))
    return out


def _fig14(cfg, ctx):
    out = []
    alpha_fsk = _sweep(cfg, "alpha_bfsk")[0]
    for n_rx in _ints(_sweep(cfg, "n_rx")):
        ook = _ber(cfg, ctx, {"n_rx": n_rx, "scheme": Scheme.OOK}, {"kind": AttackKind.CA})
        fsk = _ber(cfg, ctx, {"n_rx": n_rx, "scheme": Scheme.EBFSK}, {"kind": AttackKind.CA_BFSK, "alpha": alpha_fsk})
        out += [(f"ook_ca_nr{n_rx}", ook), (f"ebfsk_ca_nr{n_rx}", fsk)]
    return out


def _lln(cfg, ctx):
    eps = _sweep(cfg, "eps")[0]
    trials = ctx.scaled(cfg.experiment.trials)
    report = lln_check(_ints(_sweep(cfg, "n_rx")), eps, trials, seed=cfg.experiment.seed, threads=ctx.threads)
    prov = {"seed": cfg.experiment.seed, "eps": eps, "implied_n_rx": report.implied_n_rx}
    return [("probability", ResultTable("lln", list(report.rows), prov))]


def _timing(cfg, ctx):
    fixed = {k: _sweep(cfg, k)[0] for k in ("tau_ab", "tau_ae", "tau_eb", "symbol_period")}
    rows = []
    for t_proc in _sweep(cfg, "t_proc"):
        g = TimingGeometry(fixed["tau_ab"], fixed["tau_ae"], fixed["tau_eb"], t_proc, fixed["symbol_period"])
        rows.append(ResultRow(float(t_proc), float(check_timing_feasibility(g)), 0.0, 1))
    prov = dict(fixed)
    return [("feasibility", ResultTable("timing-feasibility", rows, prov))]


# ----------------------------------------------------------------- registry

_GRID = "ebn0_db = 0:30:5"

PRESETS: dict[str, Preset] = {
    p.name: p
    for p in [
        Preset(
            "fig2",
            "Coherent BPSK under no attack, NJ, WJ and CA; N = 1024.",
            f"[link]\nscheme = bpsk\nn_carriers = 1024\n[attack]\nkind = ca\nalpha = 1\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n[sweep]\nn_rx = 2, 10\n",
            _fig2,
            "about 95 s",
        ),
        Preset(
            "fig3",
            "CDF of per-antenna received ON energy for several eta and N_r.",
            "[experiment]\ntrials = 100000\n[sweep]\neta = 10, 50, 90\nn_rx = 1, 2, 10\n",
            _fig3,
            "about 3 s",
        ),
        Preset(
            "fig4",
            "CDF of the normalized Eve product channel for N_e = 1, 2, 4, 8.",
            "[experiment]\ntrials = 1000000\n[sweep]\nn_eve = 1, 2, 4, 8\n",
            _fig4,
            "about 5 s",
        ),
        Preset(
            "fig5",
            "Received-energy CDF at N_r = 10, eta = 90 for single, randomized and fixed Eve arrays.",
            "[link]\nn_rx = 10\n[experiment]\ntrials = 100000\neta = 90\n[sweep]\nn_eve = 10, 20\n",
            _fig5,
            "about 6 s",
        ),
        Preset(
            "fig6",
            "OOK under CA with empirical and gamma-approximation thresholds, BPSK reference; N = 128.",
            f"[link]\nscheme = ook\nn_carriers = 128\n[attack]\nkind = ca\nalpha = 1\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\npilot_symbols = 100000\n[sweep]\nn_rx = 2, 10\n",
            _ook_ca,
            "about 80 s",
        ),
        Preset(
            "fig7",
            "OOK under CA with empirical and gamma-approximation thresholds, BPSK reference; N = 1024.",
            f"[link]\nscheme = ook\nn_carriers = 1024\n[attack]\nkind = ca\nalpha = 1\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\npilot_symbols = 100000\n[sweep]\nn_rx = 2, 10\n",
            _ook_ca,
            "about 100 s",
        ),
        Preset(
            "fig8",
            "Mutual information and p_cross against alpha under the full product-channel model.",
            "[experiment]\ntrials = 1000000\n[sweep]\ntheta = 5, 9, 15\nalpha = 0.05:0.95:0.05\n",
            _fig8,
            "about 35 s",
        ),
        Preset(
            "fig9",
            "OOK under CA with single, randomized and fixed multi-antenna Eve; N = 1024.",
            f"[link]\nscheme = ook\nn_carriers = 1024\nn_rx = 2\n[attack]\nkind = ca\nalpha = 1\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n[sweep]\nn_eve = 2, 4\n",
            _fig9,
            "about 90 s",
        ),
        Preset(
            "fig10",
            "Traditional BFSK under CA for several alpha, plus the clean link.",
            f"[link]\nscheme = bfsk\nn_carriers = 1024\nn_rx = 1\n[attack]\nkind = ca-bfsk\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n[sweep]\nalpha = 0.15, 0.25, 0.5, 1\n",
            _fig10,
            "about 90 s",
        ),
        Preset(
            "fig11",
            "Traditional BFSK under CA at the stated optimum alpha and at the p_cross = 1/2 root.",
            f"[link]\nscheme = bfsk\nn_carriers = 1024\nn_rx = 1\n[attack]\nkind = ca-bfsk\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n",
            _fig11,
            "about 50 s",
        ),
        Preset(
            "fig12",
            "OOK under wideband jamming with attack-ignorant and attack-aware thresholds; N = 128, 1024.",
            f"[link]\nscheme = ook\nn_rx = 2\n[attack]\nkind = wj\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n[sweep]\nn_carriers = 128, 1024\n",
            _fig12,
            "about 40 s",
        ),
        Preset(
            "fig13",
            "EBFSK against traditional BFSK under CA (alpha = 0.25) and EBFSK under WJ; N = 64, 1024.",
            f"[link]\nscheme = ebfsk\nn_rx = 1\n[attack]\nkind = ca-bfsk\nalpha = 0.25\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n[sweep]\nn_carriers = 64, 1024\n",
            _fig13,
            "about 70 s",
        ),
        Preset(
            "fig14",
            "OOK under CA against EBFSK under CA at equal energy per bit; N = 1024.",
            f"[link]\nscheme = ook\nn_carriers = 1024\nequal_energy_per_bit = true\n[attack]\nkind = ca\nalpha = 1\ntheta = 9\n"
            f"[experiment]\n{_GRID}\ntrials = 1000000\n[sweep]\nn_rx = 1, 2\nalpha_bfsk = 0.15\n",
            _fig14,
            "about 25 s",
        ),
        Preset(
            "lln",
            "Probability that the per-antenna energy change exceeds -eps, against N_r.",
            "[experiment]\ntrials = 10000\n[sweep]\nn_rx = 1, 4, 16, 64, 256\neps = 0.1\n",
            _lln,
            "about 1 s",
        ),
        Preset(
            "timing",
            "Relay timing feasibility against Eve's processing delay.",
            "[sweep]\ntau_ab = 1.0\ntau_ae = 0.5\ntau_eb = 0.5\nsymbol_period = 1.0\nt_proc = 0:1.5:0.1\n",
            _timing,
            "instant",
        ),
    ]
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def preset_names() -> list[str]:
    return list(PRESETS)


__all__ = ["PRESETS", "Preset", "RunContext", "get_preset", "preset_names"]
