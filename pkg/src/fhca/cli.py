"""Command-line front end: run figure presets and write CSV tables plus a manifest.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 I/O failure,
4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .analysis import ResultTable, plain
from .config import ConfigError, parse_config
from .presets import PRESETS, RunContext, get_preset

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

CSV_HEADER = "x_db_or_alpha,estimate,stderr,trials"


class OutputError(OSError):
    """Writing a result file failed; the message names the path."""


def format_csv(table: ResultTable) -> str:
    lines = [CSV_HEADER]
    for row in sorted(table.rows, key=lambda r: r.x):
        lines.append(f"{row.x:.12g},{row.estimate:.12g},{row.stderr:.12g},{int(row.trials)}")
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(table: ResultTable, path) -> Path:
    """Write ``table`` as CSV; identical tables give identical bytes."""
    return _write(Path(path), format_csv(table))


@dataclass(frozen=True)
class RunManifest:
    config_digest: str
    seed: int
    version: str
    outputs: list[str]
    trials: int
    wall_seconds: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"


def config_digest(preset: str, cfg, trials_scale: float) -> str:
    canonical = json.dumps(
        {"preset": preset, "config": plain(cfg._asdict()), "trials_scale": trials_scale},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def run_preset(
    name: str,
    seed: Optional[int] = None,
    overrides: Optional[dict] = None,
    out_dir=".",
    threads: int = 1,
    trials_scale: float = 1.0,
    config_text: str = "",
) -> RunManifest:
    """Run one preset and write ``<name>_<curve>.csv`` files plus a manifest.

    The preset's own configuration is read first, then ``config_text``,
    then ``overrides``; ``seed`` (when given) replaces ``experiment.seed``.
    """
    preset = get_preset(name)
    overrides = dict(overrides or {})
    if seed is not None:
        overrides["experiment.seed"] = seed
    cfg = parse_config(config_text, overrides, base=preset.config)
    ctx = RunContext(threads, trials_scale)
    out = Path(out_dir)

    start = time.perf_counter()
    curves = preset.runner(cfg, ctx)
    wall = time.perf_counter() - start

    outputs = [str(emit_csv(table, out / f"{name}_{curve}.csv")) for curve, table in curves]
    provenance = {curve: {"kind": table.kind, **plain(table.provenance)} for curve, table in curves}
    outputs.append(str(_write(out / f"{name}_provenance.json", json.dumps(provenance, indent=2, sort_keys=True) + "\n")))
    manifest = RunManifest(
        config_digest=config_digest(name, cfg, trials_scale),
        seed=cfg.experiment.seed,
        version=__version__,
        outputs=outputs,
        trials=sum(row.trials for _, table in curves for row in table.rows),
        wall_seconds=round(wall, 3),
    )
    _write(out / f"{name}_manifest.json", manifest.to_json())
    return manifest


def _overrides(pairs: Sequence[str]) -> dict:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(pair, "expected section.key=value")
        out[key.strip()] = value.strip()
    return out


def _read_text(path: Optional[str]) -> str:
    if path is None:
        return ""
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fhca", description="Frequency-hopping convolution-attack simulator.")
    parser.add_argument("--version", action="version", version=f"fhca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a figure preset and write CSV output")
    run.add_argument("preset", help="preset name, see 'fhca list'")
    run.add_argument("--seed", type=int, default=None, help="master seed (default: the config's, 0)")
    run.add_argument("--threads", type=int, default=1, help="worker threads; never changes output")
    run.add_argument("--out-dir", default=".", help="directory for CSV and manifest files")
    run.add_argument("--trials-scale", type=float, default=1.0, help="multiplier on trial counts for quick runs")
    run.add_argument("--config", default=None, help="config file layered over the preset defaults")
    run.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override one config key")

    sub.add_parser("list", help="list presets with their desk-scale runtimes")

    show = sub.add_parser("show-config", help="print a preset's default configuration")
    show.add_argument("preset")

    check = sub.add_parser("check-config", help="validate a config file")
    check.add_argument("path")
    return parser


def _dispatch(args) -> int:
    if args.command == "list":
        for p in PRESETS.values():
            print(f"{p.name:8s} {p.runtime:12s} {p.description}")
        return EXIT_OK
    if args.command == "show-config":
        print(get_preset(args.preset).config, end="")
        return EXIT_OK
    if args.command == "check-config":
        cfg = parse_config(_read_text(args.path))
        print(json.dumps(plain(cfg._asdict()), indent=2, sort_keys=True))
        return EXIT_OK
    manifest = run_preset(
        args.preset,
        seed=args.seed,
        overrides=_overrides(args.set),
        out_dir=args.out_dir,
        threads=args.threads,
        trials_scale=args.trials_scale,
        config_text=_read_text(args.config),
    )
    print(manifest.to_json(), end="")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ValueError as exc:  # includes ConfigError
        print(f"fhca: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"fhca: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        print(f"fhca: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
