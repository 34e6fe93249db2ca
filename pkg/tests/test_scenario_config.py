import json
import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from modules.scenario_config import ConfigError, ScenarioConfig, load_scenario

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ROOT / 'data' / 'scenario_default.json'


def base(**overrides):
    data = {
        'rates': {'gamma': 1.0, 'gamma0': 0.0},
        'n_max': 2,
        'initial_state': {'kind': 'fock', 'N': 1, 'k': 1},
    }
    data.update(overrides)
    return data


def test_default_scenario_loads():
    config = load_scenario(DEFAULT)

    assert config.n_max == 4
    assert config.rates.gamma0 == 0.5
    assert len(config.times()) == 6
    assert config.sphere_band_limit() == 4
    assert config.atoms[0].nbar == 20.0
    assert config.initial().trace() == pytest.approx(1.0)


def test_json_string_and_dict_sources_agree():
    text = DEFAULT.read_text(encoding='utf-8')
    assert load_scenario(text).to_dict() == load_scenario(json.loads(text)).to_dict()


def test_syntax_error_reports_line_and_column(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{\n  "n_max": 2,\n  "rates": {"gamma": 1.0,,}\n}\n', encoding='utf-8')

    with pytest.raises(ConfigError) as info:
        load_scenario(path)
    assert info.value.line == 3
    assert info.value.column is not None
    assert info.value.to_dict()['line'] == 3


def test_mixture_weights_must_sum_to_one():
    state = {'kind': 'mixed', 'components': [
        {'weight': 0.5, 'state': {'kind': 'fock', 'N': 1, 'k': 0}},
        {'weight': 0.4, 'state': {'kind': 'fock', 'N': 1, 'k': 1}},
    ]}
    with pytest.raises(ConfigError) as info:
        load_scenario(base(initial_state=state))
    assert info.value.path == 'initial_state.components'


def test_mixture_builds_a_unit_trace_state():
    state = {'kind': 'mixed', 'components': [
        {'weight': 0.25, 'state': {'kind': 'fock', 'N': 2, 'k': 1}},
        {'weight': 0.75, 'state': {'kind': 'su2_coherent', 'N': 1, 'theta': 0.4}},
    ]}
    built = load_scenario(base(initial_state=state)).initial()

    assert built.trace() == pytest.approx(1.0)
    assert built.block_weights()[2] == pytest.approx(0.25)


@pytest.mark.parametrize('overrides, field', [
    ({'initial_state': {'kind': 'su2_coherent', 'N': 1, 'theta': 4.0}}, 'initial_state.theta'),
    ({'initial_state': {'kind': 'fock', 'N': 3, 'k': 0}}, 'initial_state.N'),
    ({'initial_state': {'kind': 'fock', 'N': 1, 'k': 2}}, 'initial_state.k'),
    ({'initial_state': {'kind': 'squeezed'}}, 'initial_state.kind'),
    ({'rates': {'gamma0': 1.0}}, 'rates.gamma'),
    ({'rates': {'gamma': -1.0}}, 'rates'),
    ({'time_grid': {'kind': 'log', 't_min': 0.0, 't_max': 1.0, 'points': 5}}, 'time_grid'),
    ({'time_grid': {'kind': 'linear', 't_min': 0.0, 't_max': 1.0}}, 'time_grid.points'),
    ({'method': 'euler'}, 'method'),
    ({'atoms': [{'g_abs': 0.1, 'detuning': 1.0, 'gamma_a': -1.0, 'nbar': 1.0}]}, 'atoms[0]'),
])
def test_invalid_fields_name_their_path(overrides, field):
    with pytest.raises(ConfigError) as info:
        load_scenario(base(**overrides))
    assert info.value.path == field


def test_missing_top_level_field():
    data = base()
    del data['n_max']
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict(data)
    assert info.value.path == 'n_max'


def test_two_mode_coherent_amplitudes_are_pairs():
    state = {'kind': 'two_mode_coherent', 'alpha_plus': [0.3, 0.0], 'alpha_minus': [0.0, 0.2]}
    built = load_scenario(base(n_max=4, initial_state=state)).initial()
    assert built.trace() == pytest.approx(1.0)

    state['alpha_minus'] = [0.2]
    with pytest.raises(ConfigError):
        load_scenario(base(initial_state=state))


def test_outputs_are_merged_over_defaults():
    config = load_scenario(base(outputs={'sphere': {'s_max': 3, 'group': True}}))
    assert config.outputs['trajectory'] is True
    assert config.sphere_band_limit() == 3
    assert load_scenario(base()).sphere_band_limit() == 2


def test_round_trip_through_dict():
    config = load_scenario(DEFAULT)
    again = ScenarioConfig.from_dict(config.to_dict())
    assert again.to_dict() == config.to_dict()
    assert math.isclose(again.initial_state['theta'], math.pi / 3)
