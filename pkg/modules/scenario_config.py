#!/usr/bin/env python3
"""
Depol Module H: Scenario Config
Single-document JSON scenarios for the depol command line

Features:
- Tagged initial states: fock | su2_coherent | two_mode_coherent | mixed
- Linear / log time grids
- Output switches (trajectory, sphere, measure, spectrum)
- Atom lists for the microscopic check
- Errors carry the JSON field path (and line/column for syntax errors)
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .fock_algebra import TwoModeState, fock_state, su2_coherent_state, two_mode_coherent_state
from .lindblad_depolarizer import METHODS, DepolarizerRates
from .micro_reservoir import AtomConfig
from .polarization_metrics import time_grid

STATE_KINDS = ('fock', 'su2_coherent', 'two_mode_coherent', 'mixed')
WEIGHT_TOL = 1e-12


class ConfigError(ValueError):
    """Scenario document problem at a given field path"""

    def __init__(self, path: str, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        where = path or '<document>'
        if line is not None:
            where = f"{where} (line {line}, column {column})"
        super().__init__(f"{where}: {message}")

    def to_dict(self) -> Dict[str, Any]:
        return {'error': str(self), 'field': self.path, 'line': self.line, 'column': self.column}


def _require(data: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    if key not in data:
        raise ConfigError(f"{path}.{key}" if path else key, "missing field")
    return data[key]


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _complex_pair(value: Any, path: str) -> complex:
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(path, f"expected [re, im], got {value!r}")
    return complex(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def check_initial_state(spec: Dict[str, Any], n_max: int, path: str = 'initial_state') -> None:
    """Validate one tagged initial-state object (recursing into mixtures)"""
    kind = _require(spec, 'kind', path)
    if kind not in STATE_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}, expected one of {STATE_KINDS}")

    if kind in ('fock', 'su2_coherent'):
        N = _integer(_require(spec, 'N', path), f"{path}.N")
        if not 0 <= N <= n_max:
            raise ConfigError(f"{path}.N", f"block {N} outside [0, n_max={n_max}]")
        if kind == 'fock':
            k = _integer(_require(spec, 'k', path), f"{path}.k")
            if not 0 <= k <= N:
                raise ConfigError(f"{path}.k", f"k must lie in [0, {N}]")
        else:
            theta = _number(_require(spec, 'theta', path), f"{path}.theta")
            if not 0.0 <= theta <= math.pi:
                raise ConfigError(f"{path}.theta", "theta must lie in [0, pi]")
            _number(spec.get('phi', 0.0), f"{path}.phi")
            _number(spec.get('psi', 0.0), f"{path}.psi")
    elif kind == 'two_mode_coherent':
        _complex_pair(_require(spec, 'alpha_plus', path), f"{path}.alpha_plus")
        _complex_pair(_require(spec, 'alpha_minus', path), f"{path}.alpha_minus")
    else:
        components = _require(spec, 'components', path)
        if not isinstance(components, list) or not components:
            raise ConfigError(f"{path}.components", "expected a non-empty list")
        total = 0.0
        for i, item in enumerate(components):
            item_path = f"{path}.components[{i}]"
            weight = _number(_require(item, 'weight', item_path), f"{item_path}.weight")
            if weight < 0:
                raise ConfigError(f"{item_path}.weight", "weights must be non-negative")
            total += weight
            check_initial_state(_require(item, 'state', item_path), n_max, f"{item_path}.state")
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ConfigError(f"{path}.components", f"weights sum to {total!r}, expected 1")


def build_initial_state(spec: Dict[str, Any], n_max: int) -> TwoModeState:
    """TwoModeState for a validated initial-state object"""
    kind = spec['kind']
    if kind == 'fock':
        return fock_state(spec['N'], spec['k'], n_max=n_max)
    if kind == 'su2_coherent':
        return su2_coherent_state(spec['N'], spec['theta'], spec.get('phi', 0.0),
                                  spec.get('psi', 0.0), n_max=n_max)
    if kind == 'two_mode_coherent':
        return two_mode_coherent_state(_complex_pair(spec['alpha_plus'], 'alpha_plus'),
                                       _complex_pair(spec['alpha_minus'], 'alpha_minus'), n_max)
    state = TwoModeState.mixture(
        (item['weight'], build_initial_state(item['state'], n_max)) for item in spec['components'])
    return TwoModeState(n_max=n_max, blocks=state.blocks, metadata={'kind': 'mixed'})


@dataclass
class ScenarioConfig:
    """Everything one depol run needs"""
    rates: DepolarizerRates
    n_max: int
    initial_state: Dict[str, Any]
    time_grid: Dict[str, Any] = field(default_factory=lambda: {
        'kind': 'linear', 't_min': 0.0, 't_max': 1.0, 'points': 11})
    outputs: Dict[str, Any] = field(default_factory=lambda: {
        'trajectory': True, 'sphere': {'s_max': None, 'group': False}, 'measure': True, 'spectrum': True})
    seed: Optional[int] = None
    method: str = 'exact-expm'
    atoms: List[AtomConfig] = field(default_factory=list)
    micro: Dict[str, Any] = field(default_factory=lambda: {'n_max': 2, 'sim_times': None})

    def times(self) -> np.ndarray:
        grid = self.time_grid
        try:
            return time_grid(grid['kind'], grid['t_min'], grid['t_max'], grid['points'])
        except (KeyError, ValueError) as exc:
            raise ConfigError('time_grid', str(exc)) from exc

    def initial(self) -> TwoModeState:
        return build_initial_state(self.initial_state, self.n_max)

    def sphere_band_limit(self) -> int:
        sphere = self.outputs.get('sphere') or {}
        s_max = sphere.get('s_max')
        return self.n_max if s_max is None else int(s_max)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'rates': self.rates.to_dict(),
            'n_max': self.n_max,
            'initial_state': self.initial_state,
            'time_grid': self.time_grid,
            'outputs': self.outputs,
            'seed': self.seed,
            'method': self.method,
            'atoms': [atom.to_dict() for atom in self.atoms],
            'micro': self.micro,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ScenarioConfig':
        if not isinstance(data, dict):
            raise ConfigError('', "scenario must be a JSON object")

        rates_data = _require(data, 'rates', '')
        gamma = _number(_require(rates_data, 'gamma', 'rates'), 'rates.gamma')
        gamma0 = _number(rates_data.get('gamma0', 0.0), 'rates.gamma0')
        try:
            rates = DepolarizerRates(gamma=gamma, gamma0=gamma0)
        except ValueError as exc:
            raise ConfigError('rates', str(exc)) from exc

        n_max = _integer(_require(data, 'n_max', ''), 'n_max')
        if n_max < 0:
            raise ConfigError('n_max', "must be non-negative")
        initial_state = _require(data, 'initial_state', '')
        check_initial_state(initial_state, n_max)

        config = cls(rates=rates, n_max=n_max, initial_state=initial_state)
        if 'time_grid' in data:
            grid = data['time_grid']
            for key in ('kind', 't_min', 't_max', 'points'):
                _require(grid, key, 'time_grid')
            config.time_grid = {
                'kind': grid['kind'],
                't_min': _number(grid['t_min'], 'time_grid.t_min'),
                't_max': _number(grid['t_max'], 'time_grid.t_max'),
                'points': _integer(grid['points'], 'time_grid.points'),
            }
        config.times()

        if 'outputs' in data:
            if not isinstance(data['outputs'], dict):
                raise ConfigError('outputs', "expected an object")
            config.outputs = {**config.outputs, **data['outputs']}
        s_max = (config.outputs.get('sphere') or {}).get('s_max')
        if s_max is not None and (_integer(s_max, 'outputs.sphere.s_max') < 0):
            raise ConfigError('outputs.sphere.s_max', "must be non-negative")

        seed = data.get('seed')
        if seed is not None:
            config.seed = _integer(seed, 'seed')
        method = data.get('method', 'exact-expm')
        if method not in METHODS:
            raise ConfigError('method', f"unknown method {method!r}, expected one of {METHODS}")
        config.method = method

        atoms = data.get('atoms', [])
        if not isinstance(atoms, list):
            raise ConfigError('atoms', "expected a list")
        for i, atom in enumerate(atoms):
            try:
                config.atoms.append(AtomConfig.from_dict(atom))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"atoms[{i}]", str(exc)) from exc
        if 'micro' in data:
            config.micro = {**config.micro, **data['micro']}
        return config


def load_scenario(source: Union[str, Path, Dict[str, Any]]) -> ScenarioConfig:
    """ScenarioConfig from a path, a JSON string or an already parsed object"""
    if isinstance(source, dict):
        return ScenarioConfig.from_dict(source)
    if isinstance(source, str) and source.lstrip().startswith('{'):
        text = source
    else:
        text = Path(source).read_text(encoding='utf-8')
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError('', exc.msg, line=exc.lineno, column=exc.colno) from exc
    return ScenarioConfig.from_dict(data)
