"""Experiment YAML loading, validation, overrides and presets."""

import pytest
import yaml

from memnet.analysis import SweepPoint
from memnet.config import (
    EXPERIMENTS,
    DEFAULT_SWEEP,
    ExperimentConfig,
    config_from_dict,
    config_hash,
    dump_config,
    load_config,
    load_preset,
    parse_overrides,
)
from memnet.engine import Drive
from memnet.errors import ConfigError, OutputError
from memnet.memdevice import DeviceParams


def write_yaml(tmp_path, data, name='experiment.yaml'):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data) if not isinstance(data, str) else data)
    return path


class TestLoadConfig:
    def test_minimal_config_gets_reference_defaults(self, tmp_path):
        config = load_config(write_yaml(tmp_path, {'grid': {'rows': 11, 'cols': 11}, 'pulse': {'amplitude': 6}}))
        assert config.device == DeviceParams(10.0, 200.0, 1e6, 0.01)
        assert (config.source, config.sink) == ((5, 0), (5, 10))
        assert config.pulse.amplitude == 6.0
        assert config.pulse.drive == 'differential'
        assert config.pulse.dt == 1e-5
        assert config.experiment == 'fig2'

    def test_empty_file(self, tmp_path):
        assert load_config(write_yaml(tmp_path, '')) == ExperimentConfig()

    def test_exponent_without_dot(self, tmp_path):
        # YAML 1.1 reads 1e-5 as a string
        config = load_config(write_yaml(tmp_path, 'pulse:\n  dt: 1e-5\n'))
        assert config.pulse.dt == 1e-5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as e:
            load_config(tmp_path / 'nope.yaml')
        assert e.value.field == 'config'

    def test_parse_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_yaml(tmp_path, 'grid: [rows: 1\n'))

    def test_default_terminals_follow_grid(self):
        config = config_from_dict({'grid': {'rows': 4, 'cols': 6}})
        assert (config.source, config.sink) == ((2, 0), (2, 5))


class TestValidation:
    @pytest.mark.parametrize('data, field', [
        ({'device': {'r_on': 300.0}}, 'device.r_on'),
        ({'device': {'gamma': -1}}, 'device.gamma'),
        ({'source': [5, 5], 'sink': [5, 5]}, 'sink'),
        ({'source': [11, 0]}, 'source'),
        ({'grid': {'rows': 1}}, 'grid.rows'),
        ({'pulse': {'dt': 0}}, 'pulse.dt'),
        ({'pulse': {'amplitude': 0}}, 'pulse.amplitude'),
        ({'pulse': {'drive': 'bipolar'}}, 'pulse.drive'),
        ({'pulse': {'record_every': 2.5}}, 'pulse.record_every'),
        ({'damage': [[5, 0]]}, 'damage[0]'),
        ({'damage': [[1, 1], [20, 1]]}, 'damage[1]'),
        ({'entropy_cut': 10}, 'entropy_cut'),
        ({'watch': [[[0, 0], [1, 1]]]}, 'watch[0]'),
        ({'sweep': [{'r_on': 250.0, 'amplitude': 6}]}, 'sweep[0].r_on'),
        ({'experiment': 'fig9'}, 'experiment'),
        ({'pulse': {'amplitude': float('inf')}}, 'pulse.amplitude'),
        ({'pulse': {'max_time': float('inf')}}, 'pulse.max_time'),
        ({'pulse': {'dt': float('nan')}}, 'pulse.dt'),
        ({'device': {'gamma': float('inf')}}, 'device.gamma'),
        ({'grid': {'rows': float('inf')}}, 'grid.rows'),
        ({'sweep': [{'r_on': 20.0, 'amplitude': float('-inf')}]}, 'sweep[0].amplitude'),
    ])
    def test_names_offending_field(self, data, field):
        with pytest.raises(ConfigError) as e:
            config_from_dict(data)
        assert e.value.field == field
        assert str(e.value).startswith(field)

    @pytest.mark.parametrize('data, field', [
        ({'colour': 'red'}, 'colour'),
        ({'pulse': {'width': 1}}, 'pulse.width'),
        ({'device': {'r_of': 200}}, 'device.r_of'),
    ])
    def test_rejects_unknown_keys(self, data, field):
        with pytest.raises(ConfigError) as e:
            config_from_dict(data)
        assert e.value.field == field

    def test_config_error_is_value_error(self):
        with pytest.raises(ValueError):
            config_from_dict({'grid': {'rows': 0}})

    def test_watch_is_normalised(self):
        config = config_from_dict({'watch': [[[5, 1], [5, 0]]]})
        assert config.watch == (((5, 0), (5, 1)),)


class TestRoundTrip:
    def test_dump_and_reload(self, tmp_path):
        config = config_from_dict({
            'experiment': 'fig5',
            'damage': [[3, 5], [4, 5]],
            'watch': [[[5, 0], [5, 1]]],
            'pulse': {'amplitude': 6.75, 'dt': 5e-6},
            'entropy_cut': 3,
            'outputs': 'results/x',
        })
        assert load_config(dump_config(config, tmp_path / 'effective.yaml')) == config

    def test_sweep_round_trip(self, tmp_path):
        config = config_from_dict({'experiment': 'fig3b', 'sweep': [{'r_on': 20.0, 'amplitude': 6.75}]})
        reloaded = load_config(dump_config(config, tmp_path / 'effective.yaml'))
        assert reloaded.sweep == (SweepPoint(20.0, 6.75),)

    def test_dump_failure_names_path(self, tmp_path):
        target = tmp_path / 'effective.yaml'
        target.mkdir()
        with pytest.raises(OutputError) as e:
            dump_config(ExperimentConfig(), target)
        assert 'effective.yaml' in str(e.value)

    def test_hash_is_stable(self):
        assert config_hash(ExperimentConfig()) == config_hash(config_from_dict({}))
        assert len(config_hash(ExperimentConfig())) == 64

    def test_hash_changes(self):
        assert config_hash(ExperimentConfig()) != config_hash(config_from_dict({'pulse': {'amplitude': 7}}))


class TestOverrides:
    def test_parse_yaml_scalars(self):
        values = parse_overrides(['pulse.amplitude=12', 'pulse.drive=single', 'damage=[[1,1]]', 'entropy_cut=null'])
        assert values == {'pulse.amplitude': 12, 'pulse.drive': 'single', 'damage': [[1, 1]], 'entropy_cut': None}

    def test_rejects_malformed(self):
        with pytest.raises(ConfigError):
            parse_overrides(['pulse.amplitude'])

    def test_with_overrides(self):
        config = ExperimentConfig().with_overrides({'pulse.amplitude': 12, 'device.r_on': 20.0})
        assert config.pulse.amplitude == 12.0
        assert config.device.r_on == 20.0
        assert ExperimentConfig().pulse.amplitude == 6.0

    def test_override_is_validated(self):
        with pytest.raises(ConfigError) as e:
            ExperimentConfig().with_overrides({'device.r_on': 500.0})
        assert e.value.field == 'device.r_on'

    @pytest.mark.parametrize('key', ['pulse.width', 'nothing', 'grid.rows.deep'])
    def test_unknown_override_key(self, key):
        with pytest.raises(ConfigError):
            ExperimentConfig().with_overrides({key: 1})

    def test_pulse_spec(self):
        pulse = ExperimentConfig().with_overrides({'pulse.drive': 'single'}).pulse_spec()
        assert pulse.drive is Drive.SINGLE
        assert pulse.terminal_potentials == (6.0, 0.0)


class TestPresets:
    @pytest.mark.parametrize('name', EXPERIMENTS)
    def test_loads(self, name):
        config = load_preset(name)
        assert config.experiment == name
        assert (config.rows, config.cols) == (11, 11)
        assert (config.source, config.sink) == ((5, 0), (5, 10))
        assert config.pulse.drive == 'differential'

    @pytest.mark.parametrize('name', ['fig2', 'fig3a', 'fig3b', 'fig5'])
    def test_reference_values(self, name):
        config = load_preset(name)
        assert config.device == DeviceParams()
        assert config.pulse.amplitude == 6.0

    def test_low_memory_content(self):
        config = load_preset('fig4')
        assert config.device.r_on == 160.0
        assert config.pulse.amplitude == 15.25

    def test_sweep_pairs(self):
        assert load_preset('fig3b').sweep == DEFAULT_SWEEP

    def test_healing_damage(self):
        assert load_preset('fig5').damage == ((3, 5), (4, 5), (5, 5))

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            load_preset('fig9')
