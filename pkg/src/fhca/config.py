"""Line-oriented ``key = value`` experiment configuration.

Four sections are recognised, all optional::

    [link]        scheme, n_carriers, n_rx, sigma2_bob, sigma2_eve, hop_length,
                  equal_energy_per_bit, spacing, tone_offset, bandwidth
    [attack]      kind, alpha, theta, n_eve, spatial_mode, attacks_pilots
    [experiment]  ebn0_db, trials, seed, threshold, pilot_symbols, eta
    [sweep]       free-form numeric lists used by figure presets

Lists are comma separated; ``start:stop:step`` expands to an inclusive range.
"""

from __future__ import annotations

import configparser
import dataclasses
from typing import NamedTuple

import numpy as np

from .adversary import AttackConfig, AttackKind, SpatialMode
from .analysis import THRESHOLD_METHODS, ExperimentSpec, check_combination
from .modem import LinkConfig, Scheme


class ConfigError(ValueError):
    """A configuration value failed validation; ``field`` names it."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def parse_list(text: str) -> tuple[float, ...]:
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            start, stop, step = (float(p) for p in part.split(":"))
            if step <= 0:
                raise ValueError("range step must be positive")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values.extend(float(np.round(start + k * step, 10)) for k in range(count))
        else:
            values.append(float(part))
    return tuple(values)


def _int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _choice(options):
    def conv(text: str) -> str:
        value = text.strip().lower()
        if value not in options:
            raise ValueError(f"expected one of {sorted(options)}, got {text!r}")
        return value

    return conv


LINK_KEYS = {
    "scheme": _choice({s.value for s in Scheme}),
    "n_carriers": _int,
    "n_rx": _int,
    "sigma2_bob": float,
    "sigma2_eve": float,
    "hop_length": _int,
    "equal_energy_per_bit": _bool,
    "spacing": float,
    "tone_offset": float,
    "bandwidth": float,
}
ATTACK_KEYS = {
    "kind": _choice({k.value for k in AttackKind}),
    "alpha": float,
    "theta": float,
    "n_eve": _int,
    "spatial_mode": _choice({m.value for m in SpatialMode}),
    "attacks_pilots": _bool,
}
EXPERIMENT_KEYS = {
    "ebn0_db": parse_list,
    "trials": _int,
    "seed": _int,
    "threshold": _choice(set(THRESHOLD_METHODS)),
    "pilot_symbols": _int,
    "eta": float,
}
SECTIONS = {"link": LINK_KEYS, "attack": ATTACK_KEYS, "experiment": EXPERIMENT_KEYS, "sweep": None}


class ParsedConfig(NamedTuple):
    link: LinkConfig
    attack: AttackConfig
    experiment: ExperimentSpec
    sweep: dict


def _read(texts: list[str], overrides: dict | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    for text in texts:
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", str(exc).splitlines()[0]) from exc
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if not key:
            raise ConfigError(dotted, "overrides must look like section.key")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, str(value))
    return parser


def _convert(section: str, raw: dict, schema: dict) -> dict:
    out = {}
    for key, text in raw.items():
        field = f"{section}.{key}"
        if key not in schema:
            raise ConfigError(field, "unknown key")
        try:
            out[key] = schema[key](text)
        except ValueError as exc:
            raise ConfigError(field, str(exc)) from exc
    return out


def _build(cls, section: str, values: dict, base=None):
    try:
        return dataclasses.replace(base, **values) if base is not None else cls(**values)
    except ValueError as exc:
        message = str(exc)
        guess = next((k for k in values if k in message or k.split("_")[0] in message), None)
        if guess is None:
            guess = next((f.name for f in dataclasses.fields(cls) if f.name in message), "")
        raise ConfigError(f"{section}.{guess}" if guess else section, message) from exc


def parse_config(text: str, overrides: dict | None = None, base: str = "") -> ParsedConfig:
    """Parse and validate a configuration; missing keys take documented defaults.

    Defaults: OOK over N = 1024 carriers with N_r = 2, sigma2_bob = 1,
    sigma2_eve = 0.01, theta = 9, alpha = 1, no attack.

    Args:
        text: Configuration text.
        overrides: ``{"section.key": value}`` pairs applied last.
        base: Text read before ``text``, whose keys ``text`` may replace.
    """
    parser = _read([base, text], overrides)
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(section, "unknown section")
    raw = {s: dict(parser.items(s)) if parser.has_section(s) else {} for s in SECTIONS}

    link = _build(LinkConfig, "link", _convert("link", raw["link"], LINK_KEYS))
    attack = _build(AttackConfig, "attack", _convert("attack", raw["attack"], ATTACK_KEYS))
    try:
        check_combination(link.scheme, attack.kind)
    except ValueError as exc:
        raise ConfigError("attack.kind", str(exc)) from exc
    exp_values = _convert("experiment", raw["experiment"], EXPERIMENT_KEYS)
    experiment = _build(ExperimentSpec, "experiment", dict(exp_values, link=link, attack=attack))

    sweep = {}
    for key, text in raw["sweep"].items():
        try:
            sweep[key] = parse_list(text)
        except ValueError as exc:
            raise ConfigError(f"sweep.{key}", str(exc)) from exc
    return ParsedConfig(link, attack, experiment, sweep)
