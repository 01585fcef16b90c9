"""Shared fixtures for the simulator tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

SCRIPTS_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(SCRIPTS_DIR))

from memnet.config import config_from_dict, load_preset  # noqa: E402
from memnet.experiments import run_fig2  # noqa: E402
from memnet.lattice import build_grid  # noqa: E402
from memnet.memdevice import DeviceParams  # noqa: E402


def make_config(rows=3, cols=3, **sections):
    """Small-grid config; keyword sections are merged into the nested mapping"""
    data = {
        'experiment': 'fig2',
        'grid': {'rows': rows, 'cols': cols},
        'pulse': {'amplitude': 6.0, 'dt': 1e-5, 'max_time': 0.05, 'record_every': 10},
    }
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return config_from_dict(data)


def random_states(l, seed=0):
    """Lattice copy with every device at a random memristance in [r_on, r_off]"""
    rng = np.random.default_rng(seed)
    return l.with_states(rng.uniform(l.params.r_on, l.params.r_off, size=l.x.shape))


@pytest.fixture
def params():
    return DeviceParams()


@pytest.fixture
def grid11(params):
    return build_grid(11, 11, params, params.r_off)


@pytest.fixture(scope='session')
def fig2_config():
    return load_preset('fig2')


@pytest.fixture(scope='session')
def fig2_run(fig2_config):
    """The full 11x11 shortest-path run, computed once per session"""
    return run_fig2(fig2_config)
