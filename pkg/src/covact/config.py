"""Experiment configuration: a flat dataclass with an INI text form.

The text form uses one ``key = value`` section per concern and round-trips
losslessly (floats are written with repr precision).  Unknown sections or
keys are rejected so that typos fail loudly instead of silently running a
default.
"""

import configparser
import io
from dataclasses import dataclass, fields

from .errors import ParameterError

KINDS = ("phase-diagram", "roc", "lemma3", "detect")


@dataclass
class ExperimentConfig:
    # experiment
    kind: str = "phase-diagram"
    seed: int = 1
    trials: int = 50
    out_dir: str = "results"
    threads: int = 1
    resample_geometry: bool = True
    ambiguous_limit: float = 0.05
    # geometry
    num_cells: tuple = (1, 3, 7)
    radius_m: float = 500.0
    devices_per_cell: int = 50
    min_distance_m: float = 5.0
    # channel
    pl_db_at_1km: float = 128.1
    slope_db_per_decade: float = 37.6
    tx_power_dbm: float = 23.0
    noise_psd_dbm_hz: float = -169.0
    bandwidth_hz: float = 1e7
    # sweep
    sequence_lengths: tuple = (8, 10, 12, 14, 16)
    active_min: int = 1
    active_max: int = 50
    active_step: int = 1
    antennas: tuple = (64, 128)
    thresholds: tuple = ()
    sequence_length: int = 16
    active_count: int = 8
    theory_samples: int = 2000
    # solver
    max_sweeps: int = 200
    tol: float = 1e-6
    refresh_period: int = 10
    permutation: str = "random"
    # detect
    detect_threshold: float = 0.5
    detect_mode: str = "sample"  # "sample" | "asymptotic"

    def validate(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ParameterError("trials must be at least 1")
        if self.threads < 1:
            raise ParameterError("threads must be at least 1")
        if not self.num_cells or any(b < 1 for b in self.num_cells):
            raise ParameterError("num_cells sweep must be non-empty and positive")
        if not self.sequence_lengths or any(L < 1 for L in self.sequence_lengths):
            raise ParameterError("sequence_lengths sweep must be non-empty")
        if not self.antennas or any(m < 1 for m in self.antennas):
            raise ParameterError("antennas sweep must be non-empty")
        if self.kind == "phase-diagram":
            if not (0 <= self.active_min <= self.active_max
                    <= self.devices_per_cell):
                raise ParameterError("active range must satisfy "
                                     "0 <= min <= max <= devices_per_cell")
            if self.active_step < 1:
                raise ParameterError("active_step must be at least 1")
        if self.kind in ("roc", "detect"):
            if not 0 <= self.active_count <= self.devices_per_cell:
                raise ParameterError(
                    "active_count must be in [0, devices_per_cell]"
                )
            if self.sequence_length < 1:
                raise ParameterError("sequence_length must be at least 1")
            if self.theory_samples < 1:
                raise ParameterError("theory_samples must be at least 1")
        if not 0.0 <= self.ambiguous_limit <= 1.0:
            raise ParameterError("ambiguous_limit must be in [0, 1]")
        if self.detect_mode not in ("sample", "asymptotic"):
            raise ParameterError("detect_mode must be 'sample' or 'asymptotic'")
        if self.permutation not in ("random", "cyclic"):
            raise ParameterError("permutation must be 'random' or 'cyclic'")
        return self


_SECTIONS = {
    "experiment": ("kind", "seed", "trials", "out_dir", "threads",
                   "resample_geometry", "ambiguous_limit"),
    "geometry": ("num_cells", "radius_m", "devices_per_cell",
                 "min_distance_m"),
    "channel": ("pl_db_at_1km", "slope_db_per_decade", "tx_power_dbm",
                "noise_psd_dbm_hz", "bandwidth_hz"),
    "sweep": ("sequence_lengths", "active_min", "active_max", "active_step",
              "antennas", "thresholds", "sequence_length", "active_count",
              "theory_samples"),
    "solver": ("max_sweeps", "tol", "refresh_period", "permutation"),
    "detect": ("detect_threshold", "detect_mode"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _format_value(value):
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(name, text):
    kind = _FIELD_TYPES[name]
    text = text.strip()
    if kind is bool:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ParameterError(f"cannot parse boolean {name} = {text!r}")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind is tuple:
        if not text:
            return ()
        parts = [p.strip() for p in text.split(",") if p.strip()]
        numbers = []
        for p in parts:
            value = float(p)
            numbers.append(int(value) if value == int(value) and
                           "." not in p and "e" not in p.lower() else value)
        return tuple(numbers)
    return text


def config_to_text(config):
    """Serialize to INI text; the inverse of :func:`config_from_text`."""
    parser = configparser.ConfigParser()
    for section, names in _SECTIONS.items():
        parser[section] = {
            name: _format_value(getattr(config, name)) for name in names
        }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def config_from_text(text):
    """Parse INI text produced by hand or by :func:`config_to_text`."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParameterError(f"malformed config: {exc}") from exc
    values = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ParameterError(f"unknown config section [{section}]")
        for name, raw in parser[section].items():
            if name not in _SECTIONS[section]:
                raise ParameterError(
                    f"unknown key {name!r} in section [{section}]"
                )
            values[name] = _parse_value(name, raw)
    return ExperimentConfig(**values).validate()


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_text(fh.read())


def save_config(config, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_to_text(config))


def desk_config(kind):
    """Default desk-scale presets, sized to finish in minutes."""
    base = dict(kind=kind)
    if kind == "phase-diagram":
        return ExperimentConfig(**base).validate()
    if kind == "roc":
        return ExperimentConfig(
            kind=kind, num_cells=(3,), devices_per_cell=50, trials=500,
            sequence_length=16, active_count=8, antennas=(64, 128),
            active_max=50,
        ).validate()
    if kind == "lemma3":
        return ExperimentConfig(
            kind=kind, num_cells=(7, 19, 37), devices_per_cell=200,
        ).validate()
    if kind == "detect":
        return ExperimentConfig(
            kind=kind, num_cells=(3,), devices_per_cell=50,
            sequence_length=16, active_count=8, antennas=(128,),
        ).validate()
    raise ParameterError(f"unknown experiment kind {kind!r}")


def full_scale_config(kind):
    """Full-scale presets behind the --full flag.

    Sequence lengths for the phase diagram cover the regime where the
    transition exists (the consistency condition is satisfiable for every
    K once L^2 exceeds about half the per-cell device count, so larger L
    only pads the always-identifiable region).
    """
    if kind == "phase-diagram":
        return ExperimentConfig(
            kind=kind, trials=100, devices_per_cell=200,
            sequence_lengths=(4, 5, 6, 7, 8, 9, 10, 12),
            active_max=120, num_cells=(1, 3, 7),
        ).validate()
    if kind == "roc":
        return ExperimentConfig(
            kind=kind, num_cells=(7,), devices_per_cell=200, trials=100,
            sequence_length=20, active_count=20, antennas=(64, 128),
            active_max=200, theory_samples=5000,
        ).validate()
    if kind == "lemma3":
        return ExperimentConfig(
            kind=kind, num_cells=(7, 19, 37, 61), devices_per_cell=200,
        ).validate()
    if kind == "detect":
        return ExperimentConfig(
            kind=kind, num_cells=(7,), devices_per_cell=200,
            sequence_length=20, active_count=20, antennas=(128,),
        ).validate()
    raise ParameterError(f"unknown experiment kind {kind!r}")
