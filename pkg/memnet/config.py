"""
Experiment configuration

YAML experiment files with nested sections:

    experiment: fig2            # fig2 | fig3a | fig3b | fig4 | fig5
    grid: {rows: 11, cols: 11}
    device: {r_on: 10.0, r_off: 200.0, gamma: 1.0e6, i_threshold: 0.01}
    source: [5, 0]
    sink: [5, 10]
    pulse: {amplitude: 6.0, dt: 1.0e-5, max_time: 1.0, record_every: 10, drive: differential}
    damage: [[3, 5], [4, 5], [5, 5]]
    entropy_cut: 5
    watch: [[[5, 0], [5, 1]], ...]
    sweep: [{r_on: 10.0, amplitude: 6.0}, ...]
    outputs: results/fig2

Missing keys take the reference device and pulse values; unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from memnet.analysis import SweepPoint
from memnet.engine import Drive, PulseSpec
from memnet.errors import ConfigError, OutputError
from memnet.lattice import Node, UnitId, default_terminals
from memnet.memdevice import DeviceParams

EXPERIMENTS = ('fig2', 'fig3a', 'fig3b', 'fig4', 'fig5')
PRESETS_DIR = Path(__file__).resolve().parent.parent / 'presets'

# (R_on, V) pairs for memory contents 20, 10, 4 and 1.25 at R_off = 200 ohm
DEFAULT_SWEEP = (
    SweepPoint(10.0, 6.0),
    SweepPoint(20.0, 6.75),
    SweepPoint(50.0, 10.0),
    SweepPoint(160.0, 15.25),
)

SECTION_KEYS = {
    'grid': ('rows', 'cols'),
    'device': ('r_on', 'r_off', 'gamma', 'i_threshold'),
    'pulse': ('amplitude', 'dt', 'max_time', 'record_every', 'drive'),
}
TOP_KEYS = ('experiment', 'grid', 'device', 'source', 'sink', 'pulse', 'damage',
            'entropy_cut', 'watch', 'sweep', 'outputs')


@dataclass(frozen=True)
class PulseConfig:
    amplitude: float = 6.0
    dt: float = 1e-5
    max_time: float = 1.0
    record_every: int = 10
    drive: str = Drive.DIFFERENTIAL.value


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one experiment"""

    experiment: str = 'fig2'
    rows: int = 11
    cols: int = 11
    device: DeviceParams = field(default_factory=DeviceParams)
    source: Node = (5, 0)
    sink: Node = (5, 10)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    damage: tuple[Node, ...] = ()
    entropy_cut: int | None = None
    watch: tuple[UnitId, ...] | None = None
    sweep: tuple[SweepPoint, ...] = ()
    outputs: str | None = None

    def pulse_spec(self) -> PulseSpec:
        p = self.pulse
        return PulseSpec(p.amplitude, p.dt, p.max_time, p.record_every, Drive(p.drive))

    def to_dict(self) -> dict:
        return {
            'experiment': self.experiment,
            'grid': {'rows': self.rows, 'cols': self.cols},
            'device': {
                'r_on': self.device.r_on,
                'r_off': self.device.r_off,
                'gamma': self.device.gamma,
                'i_threshold': self.device.i_threshold,
            },
            'source': list(self.source),
            'sink': list(self.sink),
            'pulse': {
                'amplitude': self.pulse.amplitude,
                'dt': self.pulse.dt,
                'max_time': self.pulse.max_time,
                'record_every': self.pulse.record_every,
                'drive': self.pulse.drive,
            },
            'damage': [list(n) for n in self.damage],
            'entropy_cut': self.entropy_cut,
            'watch': None if self.watch is None else [[list(a), list(b)] for a, b in self.watch],
            'sweep': [{'r_on': s.r_on, 'amplitude': s.amplitude} for s in self.sweep],
            'outputs': self.outputs,
        }

    def with_overrides(self, overrides: dict[str, Any]) -> ExperimentConfig:
        """New config with dotted-key values replaced (e.g. {'pulse.amplitude': 12})"""
        data = self.to_dict()
        for key, value in overrides.items():
            _set_dotted(data, key, value)
        return config_from_dict(data)

    def with_outputs(self, outputs: str | Path | None) -> ExperimentConfig:
        return replace(self, outputs=None if outputs is None else str(outputs))


# ----------------------------------------------------------------------------
# Parsing
# ----------------------------------------------------------------------------

def _set_dotted(data: dict, key: str, value: Any) -> None:
    parts = key.split('.')
    if parts[0] not in TOP_KEYS:
        raise ConfigError(key, 'unknown key')
    node = data
    for part in parts[:-1]:
        if not isinstance(node.get(part), dict):
            raise ConfigError(key, f"'{part}' is not a section")
        node = node[part]
    node[parts[-1]] = value


def _number(value: Any, name: str, kind=float):
    if isinstance(value, bool):
        raise ConfigError(name, f"expected a number, got {value!r}")
    try:
        number = kind(value)
    except (TypeError, ValueError, OverflowError):
        raise ConfigError(name, f"expected a finite number, got {value!r}") from None
    if not math.isfinite(number):
        raise ConfigError(name, f"expected a finite number, got {value!r}")
    if kind is int and number != float(value):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    return number


def _node(value: Any, name: str, rows: int, cols: int) -> Node:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(name, f"expected [row, col], got {value!r}")
    node = (_number(value[0], name, int), _number(value[1], name, int))
    if not (0 <= node[0] < rows and 0 <= node[1] < cols):
        raise ConfigError(name, f"{node} outside {rows}x{cols} grid")
    return node


def _section(data: dict, name: str) -> dict:
    section = data.get(name) or {}
    if not isinstance(section, dict):
        raise ConfigError(name, 'expected a mapping')
    for key in section:
        if key not in SECTION_KEYS[name]:
            raise ConfigError(f"{name}.{key}", 'unknown key')
    return section


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a nested mapping and fill defaults"""
    if not isinstance(data, dict):
        raise ConfigError('config', 'top level must be a mapping')
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError(str(key), 'unknown key')
    defaults = ExperimentConfig()

    experiment = data.get('experiment') or defaults.experiment
    if experiment not in EXPERIMENTS:
        raise ConfigError('experiment', f"must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}")

    grid = _section(data, 'grid')
    rows = _number(grid.get('rows', defaults.rows), 'grid.rows', int)
    cols = _number(grid.get('cols', defaults.cols), 'grid.cols', int)
    if rows < 2:
        raise ConfigError('grid.rows', f"must be >= 2, got {rows}")
    if cols < 2:
        raise ConfigError('grid.cols', f"must be >= 2, got {cols}")

    dev = _section(data, 'device')
    base = defaults.device
    r_on = _number(dev.get('r_on', base.r_on), 'device.r_on')
    r_off = _number(dev.get('r_off', base.r_off), 'device.r_off')
    gamma = _number(dev.get('gamma', base.gamma), 'device.gamma')
    i_threshold = _number(dev.get('i_threshold', base.i_threshold), 'device.i_threshold')
    if not r_on > 0:
        raise ConfigError('device.r_on', f"must be positive, got {r_on}")
    if not r_on < r_off:
        raise ConfigError('device.r_on', f"must be below r_off ({r_off}), got {r_on}")
    if not gamma > 0:
        raise ConfigError('device.gamma', f"must be positive, got {gamma}")
    if not i_threshold >= 0:
        raise ConfigError('device.i_threshold', f"must be non-negative, got {i_threshold}")
    device = DeviceParams(r_on, r_off, gamma, i_threshold)

    default_source, default_sink = default_terminals(rows, cols)
    source = _node(data['source'], 'source', rows, cols) if data.get('source') is not None else default_source
    sink = _node(data['sink'], 'sink', rows, cols) if data.get('sink') is not None else default_sink
    if source == sink:
        raise ConfigError('sink', f"must differ from source {source}")

    pul = _section(data, 'pulse')
    pd = defaults.pulse
    pulse = PulseConfig(
        amplitude=_number(pul.get('amplitude', pd.amplitude), 'pulse.amplitude'),
        dt=_number(pul.get('dt', pd.dt), 'pulse.dt'),
        max_time=_number(pul.get('max_time', pd.max_time), 'pulse.max_time'),
        record_every=_number(pul.get('record_every', pd.record_every), 'pulse.record_every', int),
        drive=str(pul.get('drive', pd.drive)),
    )
    if pulse.amplitude == 0:
        raise ConfigError('pulse.amplitude', 'must be non-zero')
    if not pulse.dt > 0:
        raise ConfigError('pulse.dt', f"must be positive, got {pulse.dt}")
    if not pulse.max_time >= pulse.dt:
        raise ConfigError('pulse.max_time', f"must be >= dt ({pulse.dt}), got {pulse.max_time}")
    if pulse.record_every < 1:
        raise ConfigError('pulse.record_every', f"must be >= 1, got {pulse.record_every}")
    if pulse.drive not in {d.value for d in Drive}:
        raise ConfigError('pulse.drive', f"must be 'single' or 'differential', got {pulse.drive!r}")

    damage_raw = data.get('damage') or []
    if not isinstance(damage_raw, list):
        raise ConfigError('damage', 'expected a list of [row, col]')
    damage = tuple(_node(n, f"damage[{i}]", rows, cols) for i, n in enumerate(damage_raw))
    for i, node in enumerate(damage):
        if node in (source, sink):
            raise ConfigError(f"damage[{i}]", f"cannot remove terminal node {node}")

    entropy_cut = data.get('entropy_cut')
    if entropy_cut is not None:
        entropy_cut = _number(entropy_cut, 'entropy_cut', int)
        if not (0 <= entropy_cut < cols - 1):
            raise ConfigError('entropy_cut', f"must lie in [0, {cols - 2}], got {entropy_cut}")

    watch = data.get('watch')
    if watch is not None:
        if not isinstance(watch, list):
            raise ConfigError('watch', 'expected a list of [[row, col], [row, col]] units')
        units = []
        for i, pair in enumerate(watch):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"watch[{i}]", f"expected [[row, col], [row, col]], got {pair!r}")
            a, b = sorted((_node(pair[0], f"watch[{i}]", rows, cols), _node(pair[1], f"watch[{i}]", rows, cols)))
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                raise ConfigError(f"watch[{i}]", f"{a} and {b} are not adjacent")
            units.append((a, b))
        watch = tuple(units)

    sweep_raw = data.get('sweep') or []
    if not isinstance(sweep_raw, list):
        raise ConfigError('sweep', 'expected a list of {r_on, amplitude}')
    sweep = []
    for i, entry in enumerate(sweep_raw):
        if not isinstance(entry, dict) or set(entry) != {'r_on', 'amplitude'}:
            raise ConfigError(f"sweep[{i}]", f"expected {{r_on, amplitude}}, got {entry!r}")
        point = SweepPoint(_number(entry['r_on'], f"sweep[{i}].r_on"), _number(entry['amplitude'], f"sweep[{i}].amplitude"))
        if not (0 < point.r_on < r_off):
            raise ConfigError(f"sweep[{i}].r_on", f"must lie in (0, {r_off}), got {point.r_on}")
        if point.amplitude == 0:
            raise ConfigError(f"sweep[{i}].amplitude", 'must be non-zero')
        sweep.append(point)

    outputs = data.get('outputs')
    return ExperimentConfig(
        experiment=experiment, rows=rows, cols=cols, device=device, source=source, sink=sink,
        pulse=pulse, damage=damage, entropy_cut=entropy_cut, watch=watch, sweep=tuple(sweep),
        outputs=None if outputs is None else str(outputs),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read, validate and default-fill a YAML experiment file"""
    path = Path(path)
    if not path.exists():
        raise ConfigError('config', f"file not found: {path}")
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError('config', f"cannot parse {path}: {e}") from None
    return config_from_dict(data or {})


def parse_overrides(items: list[str] | None) -> dict[str, Any]:
    """Turn ['pulse.amplitude=12', ...] into {'pulse.amplitude': 12.0, ...}"""
    out = {}
    for item in items or []:
        key, sep, raw = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError(item, 'override must look like key.path=value')
        try:
            out[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(key.strip(), f"cannot parse value {raw!r}: {e}") from None
    return out


def preset_path(name: str) -> Path:
    return PRESETS_DIR / name / 'experiment.yaml'


def load_preset(name: str) -> ExperimentConfig:
    if name not in EXPERIMENTS:
        raise ConfigError('experiment', f"no preset named {name!r}")
    return load_config(preset_path(name))


def dump_config(config: ExperimentConfig, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            yaml.safe_dump(config.to_dict(), f, sort_keys=False)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    return path


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()
