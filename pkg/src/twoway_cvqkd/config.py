"""Sectioned key-value configuration with a closed schema.

Files are INI-style (configparser, no interpolation).  Precedence:
built-in defaults < file < --set overrides.  Every key is validated against
the schema; unknown sections or keys are errors, as are out-of-range values,
each naming the offending key and the constraint.
"""
from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .analysis import SWEEP_VARIABLES, AmplifierVariant
from .protocol import (
    AMPLIFIER_KINDS,
    DETECTOR_KINDS,
    AmplifierSpec,
    ChannelModel,
    DetectorModel,
    ProtocolParams,
)


class ConfigError(ValueError):
    """Bad configuration: unknown key, type mismatch, or out-of-range value."""


_LABEL_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def _float_field(
    lo: float | None = None,
    hi: float | None = None,
    lo_open: bool = False,
    hi_open: bool = False,
) -> Callable[[str, str], float]:
    left = "(" if lo_open or lo is None else "["
    right = ")" if hi_open or hi is None else "]"
    lo_txt = "-inf" if lo is None else f"{lo:g}"
    hi_txt = "inf" if hi is None else f"{hi:g}"
    bounds = f"{left}{lo_txt}, {hi_txt}{right}"

    def convert(key: str, raw: str) -> float:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from None
        low_ok = lo is None or (value > lo if lo_open else value >= lo)
        high_ok = hi is None or (value < hi if hi_open else value <= hi)
        if not (low_ok and high_ok):
            raise ConfigError(f"{key} must lie in {bounds}, got {value:g}")
        return value

    return convert


def _int_field(lo: int | None = None) -> Callable[[str, str], int]:
    def convert(key: str, raw: str) -> int:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
        if lo is not None and value < lo:
            raise ConfigError(f"{key} must be >= {lo}, got {value}")
        return value

    return convert


def _choice_field(choices: Sequence[str]) -> Callable[[str, str], str]:
    def convert(key: str, raw: str) -> str:
        value = raw.strip()
        if value not in choices:
            raise ConfigError(f"{key} must be one of {', '.join(choices)}; got {raw!r}")
        return value

    return convert


SCHEMA: dict[str, dict[str, Callable[[str, str], object]]] = {
    "source": {
        "v_a": _float_field(lo=1.0),
        "v_b": _float_field(lo=1.0),
        "t_a": _float_field(lo=0.0, hi=1.0, lo_open=True),
    },
    "reconciliation": {
        "beta": _float_field(lo=0.0, hi=1.0),
    },
    "channel": {
        "distance_km": _float_field(lo=0.0),
        "excess_noise": _float_field(lo=0.0),
        "loss_db_per_km": _float_field(lo=0.0),
    },
    "detector": {
        "kind": _choice_field(DETECTOR_KINDS),
        "eta": _float_field(lo=0.0, hi=1.0, lo_open=True),
        "v_el": _float_field(lo=0.0),
    },
    "amplifier": {
        "kind": _choice_field(AMPLIFIER_KINDS),
        "gain": _float_field(lo=1.0),
        "inherent_noise": _float_field(lo=1.0),
    },
    "sweep": {
        "variable": _choice_field(SWEEP_VARIABLES),
        "start": _float_field(),
        "stop": _float_field(),
        "step": _float_field(lo=0.0, lo_open=True),
    },
    "surface": {
        "gain_start": _float_field(lo=1.0, lo_open=True),
        "gain_stop": _float_field(lo=1.0, lo_open=True),
        "gain_step": _float_field(lo=0.0, lo_open=True),
        "distance_start": _float_field(lo=0.0, lo_open=True),
        "distance_stop": _float_field(lo=0.0, lo_open=True),
        "distance_step": _float_field(lo=0.0, lo_open=True),
    },
    "run": {
        "seed": _int_field(lo=0),
        "samples": _int_field(lo=1),
    },
}

DEFAULTS: dict[tuple[str, str], object] = {
    ("source", "v_a"): 40.0,
    ("source", "v_b"): 40.0,
    ("source", "t_a"): 0.4,
    ("reconciliation", "beta"): 0.948,
    ("channel", "distance_km"): 20.0,
    ("channel", "excess_noise"): 0.02,
    ("channel", "loss_db_per_km"): 0.2,
    ("detector", "kind"): "homodyne",
    ("detector", "eta"): 0.552,
    ("detector", "v_el"): 0.015,
    ("amplifier", "kind"): "none",
    ("amplifier", "gain"): 1.0,
    ("amplifier", "inherent_noise"): 1.0,
    ("sweep", "variable"): "distance",
    ("sweep", "start"): 1.0,
    ("sweep", "stop"): 80.0,
    ("sweep", "step"): 1.0,
    ("surface", "gain_start"): 2.0,
    ("surface", "gain_stop"): 20.0,
    ("surface", "gain_step"): 2.0,
    ("surface", "distance_start"): 5.0,
    ("surface", "distance_stop"): 70.0,
    ("surface", "distance_step"): 5.0,
    ("run", "seed"): 12345,
    ("run", "samples"): 1_000_000,
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration for one CLI invocation."""

    params: ProtocolParams
    sweep_variable: str
    sweep_range: tuple[float, float, float]
    surface_gains: tuple[float, float, float]
    surface_distances: tuple[float, float, float]
    seed: int
    samples: int
    variants: tuple[AmplifierVariant, ...] | None


def parse_variant(label: str, text: str) -> AmplifierVariant:
    """Parse a comparison-set entry.

    Grammar: "none" | "perfect" | "psa g=<gain>" | "pia g=<gain> [n=<noise>]".
    """
    key = f"configs.{label}"
    if not _LABEL_RE.match(label):
        raise ConfigError(
            f"config label {label!r} must match {_LABEL_RE.pattern} "
            "(it becomes a CSV column prefix)"
        )
    tokens = text.split()
    if not tokens:
        raise ConfigError(f"{key} is empty; expected e.g. 'psa g=2' or 'none'")
    kind, rest = tokens[0], tokens[1:]
    options: dict[str, float] = {}
    for token in rest:
        name, sep, raw = token.partition("=")
        if not sep or name not in ("g", "n"):
            raise ConfigError(f"{key}: cannot parse {token!r}; expected g=<num> or n=<num>")
        try:
            options[name] = float(raw)
        except ValueError:
            raise ConfigError(f"{key}: {token!r} is not a number") from None
    try:
        if kind == "none":
            if options:
                raise ConfigError(f"{key}: 'none' takes no options")
            return AmplifierVariant(label, AmplifierSpec())
        if kind == "perfect":
            if options:
                raise ConfigError(f"{key}: 'perfect' takes no options")
            return AmplifierVariant(label, AmplifierSpec(), perfect_detector=True)
        if kind == "psa":
            if "n" in options:
                raise ConfigError(f"{key}: the phase-sensitive amplifier has no n parameter")
            return AmplifierVariant(label, AmplifierSpec("psa", options.get("g", 1.0)))
        if kind == "pia":
            return AmplifierVariant(
                label, AmplifierSpec("pia", options.get("g", 1.0), options.get("n", 1.0))
            )
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    raise ConfigError(f"{key}: unknown variant kind {kind!r}; expected none, perfect, psa, or pia")


def _validate_pair(section: str, key: str, raw: str) -> object:
    if section not in SCHEMA:
        known = ", ".join(sorted(SCHEMA) + ["configs"])
        raise ConfigError(f"unknown config section [{section}]; known sections: {known}")
    fields = SCHEMA[section]
    if key not in fields:
        raise ConfigError(
            f"unknown key {section}.{key}; known keys in [{section}]: {', '.join(sorted(fields))}"
        )
    return fields[key](f"{section}.{key}", raw)


def parse_config(path: str | None, overrides: Sequence[str] = ()) -> RunConfig:
    """Resolve defaults, an optional file, and --set overrides into a RunConfig."""
    values = dict(DEFAULTS)
    variant_specs: dict[str, str] = {}

    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as handle:
                parser.read_file(handle)
        except (configparser.Error, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in parser.sections():
            for key, raw in parser.items(section):
                if section == "configs":
                    variant_specs[key] = raw
                else:
                    values[(section, key)] = _validate_pair(section, key, raw)

    for override in overrides:
        dotted, sep, raw = override.partition("=")
        if not sep:
            raise ConfigError(f"--set needs KEY=VALUE, got {override!r}")
        section, dot, key = dotted.strip().partition(".")
        if not dot or not section or not key:
            raise ConfigError(f"--set key must look like section.key, got {dotted!r}")
        if section == "configs":
            variant_specs[key] = raw
        else:
            values[(section, key)] = _validate_pair(section, key, raw)

    def get(section: str, key: str):
        return values[(section, key)]

    try:
        channel = ChannelModel(
            distance_km=get("channel", "distance_km"),
            excess_noise=get("channel", "excess_noise"),
            loss_db_per_km=get("channel", "loss_db_per_km"),
        )
        detector = DetectorModel(
            kind=get("detector", "kind"),
            efficiency=get("detector", "eta"),
            electronic_noise=get("detector", "v_el"),
        )
        amplifier = AmplifierSpec(
            kind=get("amplifier", "kind"),
            gain=get("amplifier", "gain"),
            inherent_noise=get("amplifier", "inherent_noise"),
        )
        params = ProtocolParams(
            channel=channel,
            detector=detector,
            amplifier=amplifier,
            v_a=get("source", "v_a"),
            v_b=get("source", "v_b"),
            t_a=get("source", "t_a"),
            beta=get("reconciliation", "beta"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    variants = None
    if variant_specs:
        variants = tuple(parse_variant(label, text) for label, text in variant_specs.items())

    sweep_range = (get("sweep", "start"), get("sweep", "stop"), get("sweep", "step"))
    if not sweep_range[0] < sweep_range[1]:
        raise ConfigError(
            f"sweep.start must be below sweep.stop, got [{sweep_range[0]:g}, {sweep_range[1]:g}]"
        )
    return RunConfig(
        params=params,
        sweep_variable=get("sweep", "variable"),
        sweep_range=sweep_range,
        surface_gains=(get("surface", "gain_start"), get("surface", "gain_stop"), get("surface", "gain_step")),
        surface_distances=(
            get("surface", "distance_start"),
            get("surface", "distance_stop"),
            get("surface", "distance_step"),
        ),
        seed=get("run", "seed"),
        samples=get("run", "samples"),
        variants=variants,
    )
