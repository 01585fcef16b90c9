"""
Output files, run log and stage tracker

Per run directory:
    resistance_initial.txt / resistance_final.txt   interleaved unit maps (ohm)
    current_initial.txt / current_final.txt         interleaved |unit current| maps (A)
    entropy.csv                                     t_seconds,t_normalized,entropy,total_current
    switching_rate.csv                              t_seconds,t_normalized,<one column per watched unit>
    MANIFEST.txt                                    '# key: value' header, one line per artifact

Maps are (2*rows-1) x (2*cols-1): even matrix rows are grid rows with the
horizontal units at odd columns, odd matrix rows hold the vertical units at
even columns. Node cells, removed units and open units are 0.
"""

from __future__ import annotations

import json
import os
from datetime import datetime
from pathlib import Path

import numpy as np

from memnet.config import ExperimentConfig, config_hash
from memnet.errors import OutputError
from memnet.experiments import RunArtifacts, SweepArtifacts
from memnet.lattice import Lattice

SCHEMA_VERSION = 1
MAP_FORMAT = '%.10g'
SERIES_FORMAT = '%.10g'
MAP_FILES = ('resistance_initial.txt', 'resistance_final.txt', 'current_initial.txt', 'current_final.txt')


def _local_namespace() -> str | None:
    """
    Optional namespace for local run logs, so separate .env files keep
    separate .logs/ trees.
    """
    ns = (os.getenv("LOCAL_NAMESPACE") or "").strip()
    return ns or None


def local_log_dir() -> Path:
    base = Path.cwd() / ".logs"
    ns = _local_namespace()
    return (base / ns) if ns else base


def default_output_root() -> Path:
    return Path(os.getenv("MEMNET_OUTPUT_DIR") or "results")


class StageTracker:
    """Record the last completed stage of a run in progress.json (no resume)"""

    STAGES = [
        'init',
        'configured',
        'calculated',
        'read',
        'emitted',
        'completed',
    ]

    def __init__(self, log_dir=None):
        self.log_dir = Path(log_dir) if log_dir else local_log_dir()
        self.progress_file = self.log_dir / 'progress.json'
        self.data = {}

    def _save(self):
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            with open(self.progress_file, 'w') as f:
                json.dump(self.data, f, indent=2, default=str)
        except OSError as e:
            raise OutputError(self.progress_file, e.strerror or str(e)) from e

    def get_last_stage(self):
        return self.data.get('last_stage')

    def complete_stage(self, stage, **kwargs):
        """Mark a stage as completed and store any associated data"""
        if stage not in self.STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self.data['last_stage'] = stage
        self.data['last_updated'] = datetime.now().isoformat()
        self.data.update(kwargs)
        self._save()

    def clear(self):
        self.data = {}
        if self.progress_file.exists():
            self.progress_file.unlink()


class RunLog:
    """Timestamped plain-text event log under .logs/"""

    def __init__(self, log_dir=None, name='memnet.log'):
        self.path = (Path(log_dir) if log_dir else local_log_dir()) / name

    def write(self, message: str) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, 'a') as f:
                f.write(f"{datetime.now().isoformat()} {message}\n")
        except OSError as e:
            raise OutputError(self.path, e.strerror or str(e)) from e


# ----------------------------------------------------------------------------
# Matrices and series
# ----------------------------------------------------------------------------

def unit_map(l: Lattice, values: np.ndarray) -> np.ndarray:
    """Lay one value per unit out on the interleaved (2*rows-1, 2*cols-1) grid"""
    grid = np.zeros((2 * l.rows - 1, 2 * l.cols - 1))
    values = np.nan_to_num(np.asarray(values, dtype=float), nan=0.0, posinf=0.0, neginf=0.0)
    for ((r0, c0), (r1, c1)), value in zip(l.unit_ids, values):
        grid[r0 + r1, c0 + c1] = value
    return grid


def _time_columns(times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    times = np.asarray(times, dtype=float)
    end = times[-1] if len(times) and times[-1] > 0 else 1.0
    return times, times / end


def _unit_label(uid) -> str:
    (r0, c0), (r1, c1) = uid
    return f"u_{r0}_{c0}_{r1}_{c1}"


def _savetxt(path: Path, array: np.ndarray, **kwargs) -> None:
    try:
        np.savetxt(path, array, **kwargs)
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e


def _prepare_dir(directory: Path) -> Path:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(directory, e.strerror or str(e)) from e
    if not os.access(directory, os.W_OK):
        raise OutputError(directory, 'directory is not writable')
    return directory


def _write_manifest(directory: Path, header: dict, lines: list[str]) -> Path:
    path = directory / 'MANIFEST.txt'
    body = [f"# {key}: {value}" for key, value in header.items()] + lines
    try:
        path.write_text('\n'.join(body) + '\n')
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    return path


def _header(config: ExperimentConfig, name: str) -> dict:
    return {
        'schema_version': SCHEMA_VERSION,
        'config_hash': config_hash(config),
        'experiment': name,
    }


def emit_outputs(artifacts: RunArtifacts, directory: str | Path) -> Path:
    """
    Write the maps, series and manifest of one run.

    Args:
        artifacts: completed run
        directory: target directory (created if missing)

    Returns:
        Path of MANIFEST.txt

    Raises:
        OutputError: naming the directory or file that could not be written
    """
    directory = _prepare_dir(directory)
    a = artifacts
    maps = {
        'resistance_initial.txt': unit_map(a.initial, a.initial.unit_resistances()),
        'resistance_final.txt': unit_map(a.final, a.final.unit_resistances()),
        'current_initial.txt': unit_map(a.initial, np.abs(a.initial_solve.unit_currents)),
        'current_final.txt': unit_map(a.final, np.abs(a.final_solve.unit_currents)),
    }
    lines = []
    for name, matrix in maps.items():
        _savetxt(directory / name, matrix, fmt=MAP_FORMAT)
        lines.append(f"{name} {matrix.shape[0]} {matrix.shape[1]}")

    t, t_norm = _time_columns([rec.t for rec in a.trace])
    entropy_table = np.column_stack([t, t_norm, [rec.entropy for rec in a.trace],
                                     [rec.total_current for rec in a.trace]])
    _savetxt(directory / 'entropy.csv', entropy_table, fmt=SERIES_FORMAT, delimiter=',',
             header='t_seconds,t_normalized,entropy,total_current', comments='')
    lines.append(f"entropy.csv {len(entropy_table)}")

    if a.switching is not None:
        t, t_norm = _time_columns(a.switching.times)
        rate_table = np.column_stack([t, t_norm, a.switching.rates])
        labels = [_unit_label(uid) for uid in a.switching.units]
    else:
        rate_table = np.zeros((0, 2))
        labels = []
    _savetxt(directory / 'switching_rate.csv', rate_table, fmt=SERIES_FORMAT, delimiter=',',
             header=','.join(['t_seconds', 't_normalized'] + labels), comments='')
    lines.append(f"switching_rate.csv {len(rate_table)}")

    path = a.path.path
    header = _header(a.config, a.name) | {
        'steady': a.steady,
        'steps': a.steps,
        'path': ' '.join(f"{r},{c}" for r, c in path) if path else 'none',
        'path_length': a.path.path_length,
        'extra_on_count': a.path.extra_on_count,
        'entropy_undefined': a.undefined_entropy,
    }
    if a.emergence is not None:
        header['emerges_from_both_ends'] = a.emergence
    return _write_manifest(directory, header, lines)


def _ratio_label(ratio: float) -> str:
    return f"{ratio:g}".replace('.', 'p')


def emit_sweep(artifacts: SweepArtifacts, directory: str | Path) -> Path:
    """One entropy_ratio_<ratio>.csv per sweep entry plus MANIFEST.txt"""
    directory = _prepare_dir(directory)
    lines = []
    for series in artifacts.result:
        name = f"entropy_ratio_{_ratio_label(series.ratio)}.csv"
        if series.error is not None:
            lines.append(f"{name} 0 error={series.error}")
            continue
        t, t_norm = _time_columns([s[0] for s in series.samples])
        table = np.column_stack([t, t_norm, [s[1] for s in series.samples]])
        _savetxt(directory / name, table, fmt=SERIES_FORMAT, delimiter=',',
                 header='t_seconds,t_normalized,entropy', comments='')
        lines.append(f"{name} {len(table)}")
    header = _header(artifacts.config, artifacts.name) | {
        'ratios': ' '.join(f"{s.ratio:g}" for s in artifacts.result),
        'steady': ' '.join(str(s.steady) for s in artifacts.result),
        'entropy_undefined': ' '.join(str(s.undefined_samples) for s in artifacts.result),
    }
    return _write_manifest(directory, header, lines)


def emit_result(result, directory: str | Path) -> list[Path]:
    """Write whatever run_experiment returned; fig5 gets damaged/ and healed/ subdirectories"""
    directory = Path(directory)
    if isinstance(result, SweepArtifacts):
        return [emit_sweep(result, directory)]
    if isinstance(result, tuple):
        return [emit_outputs(part, directory / part.name) for part in result]
    return [emit_outputs(result, directory)]
