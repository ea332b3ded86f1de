"""OOK detection thresholds: empirical optimum and gamma-approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .modem import ReceivedSymbol
from .numeric import regularized_lower_incomplete_gamma, regularized_upper_incomplete_gamma


@dataclass(frozen=True)
class EnergyDistributions:
    on: np.ndarray
    off: np.ndarray
    attacked: bool = True

    def __post_init__(self) -> None:
        on = np.asarray(self.on, dtype=float).ravel()
        off = np.asarray(self.off, dtype=float).ravel()
        if on.size == 0 or off.size == 0:
            raise ValueError("both ON and OFF energy samples are required")
        if (on < 0).any() or (off < 0).any():
            raise ValueError("energies must be non-negative")
        object.__setattr__(self, "on", on)
        object.__setattr__(self, "off", off)


@dataclass(frozen=True)
class ThresholdDesign:
    value: float
    method: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.value >= 0:
            raise ValueError("threshold must be non-negative")


def empirical_objective(d: EnergyDistributions, threshold) -> np.ndarray:
    """P(E_on <= t) + P(E_off > t) estimated from the samples."""
    on = np.sort(d.on)
    off = np.sort(d.off)
    t = np.asarray(threshold, dtype=float)
    miss = np.searchsorted(on, t, side="right") / on.size
    false_alarm = 1.0 - np.searchsorted(off, t, side="right") / off.size
    return miss + false_alarm


def threshold_candidates(d: EnergyDistributions) -> np.ndarray:
    """Midpoints of consecutive pooled order statistics plus both extremes.

    The empirical objective is constant between order statistics, so these
    points attain its minimum.
    """
    pooled = np.unique(np.concatenate([d.on, d.off]))
    mids = 0.5 * (pooled[1:] + pooled[:-1])
    return np.concatenate([[0.0], mids, [pooled[-1] + 1.0]])


def optimal_threshold_empirical(d: EnergyDistributions) -> ThresholdDesign:
    cands = threshold_candidates(d)
    obj = empirical_objective(d, cands)
    best = int(np.argmin(obj))  # first minimum = smallest threshold
    return ThresholdDesign(
        float(cands[best]),
        "empirical-optimal",
        {"objective": float(obj[best]), "n_on": d.on.size, "n_off": d.off.size, "attacked": d.attacked},
    )


def gamma_scales(e_alice: float, alpha: float, theta: float, sigma2_eve: float, sigma2_bob: float) -> tuple[float, float]:
    """Per-antenna mean ON and OFF energies under the Gaussian approximation."""
    off = alpha * theta * sigma2_eve + sigma2_bob
    on = e_alice * (1.0 + alpha * theta) + off
    return on, off


def gamma_crossing(n_rx: int, s_on: float, s_off: float) -> float:
    """Where the Gamma(n_rx, s_on) and Gamma(n_rx, s_off) densities cross."""
    return n_rx * s_off * s_on * math.log(s_on / s_off) / (s_on - s_off)


def analytic_objective(threshold: float, n_rx: int, s_on: float, s_off: float) -> float:
    return regularized_lower_incomplete_gamma(n_rx, threshold / s_on) + regularized_upper_incomplete_gamma(
        n_rx, threshold / s_off
    )


def minimize_analytic_objective(n_rx: int, s_on: float, s_off: float) -> float:
    """Numeric argmin of the gamma-approximation error objective."""
    guess = gamma_crossing(n_rx, s_on, s_off)
    lo, hi = 0.0, 4.0 * guess
    res = minimize_scalar(
        analytic_objective,
        bounds=(lo, hi),
        args=(n_rx, s_on, s_off),
        method="bounded",
        options={"xatol": 1e-12 * guess, "maxiter": 2000},
    )
    return float(res.x)


def approximate_threshold_analytic(
    n_rx: int,
    e_alice: float,
    alpha: float,
    theta: float,
    sigma2_eve: float,
    sigma2_bob: float,
    method: str = "analytic-approximate",
) -> ThresholdDesign:
    """Threshold treating the relayed terms as independent Gaussians.

    ON and OFF energies become Gamma(n_rx, S1) and Gamma(n_rx, S0) with
    ``S1 = E(1 + a*theta) + a*theta*sigma_E^2 + sigma_B^2`` and
    ``S0 = a*theta*sigma_E^2 + sigma_B^2``. The optimum is the density
    crossing; the numeric minimizer result is kept alongside for checking.
    """
    if min(n_rx, e_alice, alpha, theta, sigma2_eve, sigma2_bob) < 0:
        raise ValueError("threshold inputs must be non-negative")
    s_on, s_off = gamma_scales(e_alice, alpha, theta, sigma2_eve, sigma2_bob)
    if not s_on > s_off or s_off <= 0:
        raise ValueError("ON and OFF scales coincide (or OFF is noiseless); no separating threshold")
    closed = gamma_crossing(n_rx, s_on, s_off)
    numeric = minimize_analytic_objective(n_rx, s_on, s_off)
    return ThresholdDesign(
        closed,
        method,
        {
            "n_rx": n_rx,
            "e_alice": e_alice,
            "alpha": alpha,
            "theta": theta,
            "sigma2_eve": sigma2_eve,
            "sigma2_bob": sigma2_bob,
            "s_on": s_on,
            "s_off": s_off,
            "numeric": numeric,
        },
    )


def attack_ignorant_threshold(n_rx: int, e_alice: float, sigma2_bob: float) -> ThresholdDesign:
    """Threshold tuned for the clean link only."""
    return approximate_threshold_analytic(n_rx, e_alice, 0.0, 0.0, 0.0, sigma2_bob, method="attack-ignorant")


def calibrate_from_pilots(pilots: ReceivedSymbol, attacked: bool) -> EnergyDistributions:
    """Split pilot energies by the known transmitted bit."""
    energy = pilots.energy[:, 0]
    bits = np.asarray(pilots.bits)
    on, off = energy[bits == 1], energy[bits == 0]
    if on.size < 2 or off.size < 2:
        raise ValueError("need at least two pilot symbols of each bit value")
    return EnergyDistributions(on, off, attacked)
