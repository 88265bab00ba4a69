"""Command line entry point: ``mcwave {psd,ser,analytic-psd}``.

Settings come from an optional flat ``key = value`` file (``#`` starts a
comment) and are overridden by flags of the same name, e.g. ``mc_runs`` in
the file and ``--mc-runs`` on the command line.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import ConfigError, Experiment, ExperimentSpec, run

log = logging.getLogger("mcwave")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in _list(text))
    except ValueError:
        raise ConfigError(f"not a list of numbers: {text!r}") from None


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


# config key -> (parser, ExperimentSpec field)
KEYS = {
    "schemes": (_list, "schemes"),
    "variants": (_list, "variants"),
    "equal_se": (_bool, "equal_se"),
    "mc_runs": (_int, "mc_runs"),
    "seed": (_int, "seed"),
    "cfo_sweep": (_floats, "cfo_sweep"),
    "snr_grid_db": (_floats, "snr_grid_db"),
    "out": (str, "output_path"),
    "channel": (str, "channel"),
    "dsic_iters": (_int, "dsic_iters"),
    "window_ramp": (_int, "window_ramp"),
    "window_zero_ends": (_bool, "window_zero_ends"),
    "analytic_points": (_int, "analytic_points"),
}


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a ``key = value`` file into raw strings."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_spec(experiment: str, raw: dict[str, str]) -> ExperimentSpec:
    kwargs = {}
    for key, text in raw.items():
        parse, name = KEYS[key]
        kwargs[name] = parse(text)
    return ExperimentSpec(Experiment(experiment), **kwargs)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcwave", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (e.value for e in Experiment):
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value settings file")
        for key in KEYS:
            flag = "--" + key.replace("_", "-")
            if key == "equal_se":
                p.add_argument(flag, dest=key, nargs="?", const="true", default=None)
            else:
                p.add_argument(flag, dest=key, default=None)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        raw = read_config(args.config) if args.config else {}
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_CONFIG
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    raw.update({k: v for k in KEYS if (v := getattr(args, k)) is not None})
    try:
        spec = build_spec(args.command, raw)
    except (ConfigError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG

    log.info("running %s", spec)
    text = run(spec)
    try:
        if spec.output_path:
            Path(spec.output_path).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
