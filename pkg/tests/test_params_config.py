import json
import logging
import math

import numpy as np
import pytest

from shp import base, config, env, utils
from shp.params import SHPParams, kernel_mass, validate_support


def test_params_validation():
    with pytest.raises(base.ValidationError, match='shape'):
        SHPParams(np.zeros((2, 2)), np.zeros(3), 1.0, 1.0)
    with pytest.raises(base.ValidationError, match='non-negative'):
        SHPParams(np.array([[0.0, -0.1], [0.0, 0.0]]), np.zeros(2), 1.0, 1.0)
    with pytest.raises(base.ValidationError, match='finite'):
        SHPParams(np.zeros((1, 1)), np.array([math.nan]), 1.0, 1.0)
    with pytest.raises(base.ValidationError, match='beta'):
        SHPParams(np.zeros((1, 1)), np.zeros(1), 0.0, 1.0)
    with pytest.raises(base.ValidationError, match='delta'):
        SHPParams(np.zeros((1, 1)), np.zeros(1), 1.0, math.inf)


def test_params_are_frozen_copies():
    A = np.zeros((2, 2))
    params = SHPParams(A, [0.1, 0.2], math.inf, 1.0)
    A[0, 1] = 1.0
    assert params.A[0, 1] == 0.0
    assert params.decay == 0.0
    with pytest.raises(ValueError):
        params.mu[0] = 1.0


def test_kernel_mass_geometric_sum():
    decay = math.exp(-0.5)
    assert kernel_mass(0.5, 1.0) == pytest.approx(1.0 / (1.0 - decay))
    assert kernel_mass(0.5, 1.0, include_zero=False) == pytest.approx(
        decay / (1.0 - decay)
    )


def test_branching_matrix_and_stability():
    A = np.array([[0.2, 0.5], [0.0, 0.0]])
    params = SHPParams(A, [0.1, 0.1], beta=1.0, delta=1.0)
    np.testing.assert_array_equal(params.branching_matrix(continuous=True), A)

    discrete = params.branching_matrix()
    decay = math.exp(-1.0)
    assert discrete[0, 1] == pytest.approx(0.5 / (1 - decay))
    assert discrete[0, 0] == pytest.approx(0.2 * decay / (1 - decay))
    assert params.spectral_radius() == pytest.approx(discrete[0, 0])
    assert params.is_stable()

    explosive = params.replace(A=np.array([[2.0, 0.0], [0.0, 0.0]]))
    assert not explosive.is_stable()


def test_validate_support(chain_graph):
    A = np.zeros((3, 3))
    A[0, 1] = A[2, 2] = 0.3
    validate_support(SHPParams(A, np.ones(3), 1.0, 1.0), chain_graph)

    A[0, 2] = 0.1
    with pytest.raises(base.ValidationError, match="'a' -> 'c'"):
        validate_support(SHPParams(A, np.ones(3), 1.0, 1.0), chain_graph)
    with pytest.raises(base.ValidationError):
        validate_support(
            SHPParams(np.zeros((2, 2)), np.ones(2), 1.0, 1.0), chain_graph
        )


def test_params_dict_round_trip():
    params = SHPParams(np.eye(2) * 0.1, [0.5, 0.25], math.inf, 2.0)
    data = params.to_dict(['a', 'b'])
    assert data['beta'] == 'inf'
    assert data['nodes'] == ['a', 'b']
    restored = SHPParams.from_dict(json.loads(json.dumps(data)))
    np.testing.assert_array_equal(restored.A, params.A)
    assert restored.beta == math.inf


def test_sim_config_defaults():
    cfg = config.SimConfig()
    assert cfg.n_nodes == 20
    assert cfg.avg_indegree == 1.5
    assert cfg.alpha_range == (0.3, 0.5)
    assert cfg.delta == 5.0
    assert cfg.n_bins == 20000
    assert cfg.horizon == 100000.0
    assert cfg.generator is config.Generator.CONTINUOUS


def test_sim_config_normalizes():
    cfg = config.SimConfig(
        n_nodes='3',
        alpha_range=[0.5, 0.3],
        avg_indegree=1,
        generator='discrete',
    )
    assert cfg.n_nodes == 3
    assert cfg.alpha_range == (0.3, 0.5)
    assert cfg.generator is config.Generator.DISCRETE


@pytest.mark.parametrize(
    'changes',
    [
        {'n_nodes': 0},
        {'n_nodes': 4, 'avg_indegree': 2.0},
        {'delta': 0.0},
        {'n_bins': -1},
        {'beta': -1.0},
        {'generator': 'quantum'},
        {'mu_range': [-1.0, 1.0]},
        {'seed': -1},
        {'seed': 2**64},
    ],
)
def test_sim_config_rejects(changes):
    with pytest.raises(base.ValidationError):
        config.SimConfig(**changes)


def test_single_node_accepts_any_indegree():
    assert config.SimConfig(n_nodes=1, avg_indegree=3.0).n_nodes == 1


def test_fit_config():
    cfg = config.FitConfig(beta='inf', mu_init='pooled')
    assert cfg.beta == math.inf
    assert cfg.mu_init is config.MuInit.POOLED
    assert cfg.to_dict()['beta'] == 'inf'
    for changes in ({'max_iters': 0}, {'rel_tol': 0.0}, {'mu_init': 'x'}):
        with pytest.raises(base.ValidationError):
            config.FitConfig(**changes)


def test_search_config_from_flat_mapping():
    cfg = config.SearchConfig.from_mapping(
        {'alpha_s': 2, 'max_iters': 5, 'beta': 2.0, 'n_nodes': 4}
    )
    assert cfg.alpha_s == 2.0
    assert cfg.fit_cfg.max_iters == 5
    assert cfg.fit_cfg.beta == 2.0
    assert cfg.resolve_alpha_s(100) == 2.0
    assert config.SearchConfig().resolve_alpha_s(100) == pytest.approx(
        0.5 * math.log(100)
    )
    assert config.SearchConfig(parallel=False, threads=4).workers == 1
    assert config.SearchConfig(parallel=True, threads=4).workers == 4
    with pytest.raises(base.ValidationError):
        config.SearchConfig(alpha_s=-1.0)


def test_search_config_dict_nests_fit():
    data = config.SearchConfig().to_dict()
    assert data['fit_cfg']['max_iters'] == 100
    assert config.SearchConfig(fit_cfg=data['fit_cfg']).fit_cfg == (
        config.FitConfig()
    )


def test_sweep_spec_from_mapping():
    spec = config.SweepSpec.from_mapping(
        {
            'swept_parameter': 'delta',
            'values': [2.5, 10],
            'n_bins': 400,
            'delta': 5.0,
            'n_repeats': 2,
            'max_iters': 7,
        }
    )
    assert spec.swept_parameter is config.SweptParameter.DELTA
    assert spec.base.n_bins == 400
    assert spec.search_cfg.fit_cfg.max_iters == 7
    # The observation window stays fixed
    assert spec.cell_config(2.5, 1).n_bins == 800
    assert spec.cell_config(10, 1).n_bins == 200
    assert spec.cell_config(10, 1).seed == 1


def test_sweeps_default_to_the_discrete_generator():
    spec = config.SweepSpec(swept_parameter='n_nodes', values=[20])
    assert spec.base.generator is config.Generator.DISCRETE
    assert spec.base == config.sweep_simulation()

    mapped = config.SweepSpec.from_mapping(
        {'swept_parameter': 'n_nodes', 'values': [5], 'n_nodes': 5}
    )
    assert mapped.base.generator is config.Generator.DISCRETE
    assert mapped.to_dict()['base']['generator'] == 'discrete'

    continuous = config.SweepSpec.from_mapping(
        {
            'swept_parameter': 'n_nodes',
            'values': [5],
            'n_nodes': 5,
            'generator': 'continuous',
        }
    )
    assert continuous.base.generator is config.Generator.CONTINUOUS
    # Plain simulations keep the event stream generator
    assert config.SimConfig().generator is config.Generator.CONTINUOUS


def test_sweep_spec_ranges_become_tuples():
    spec = config.SweepSpec(
        swept_parameter='alpha_range', values=[[0.1, 0.2], [0.3, 0.5]]
    )
    assert spec.values == ((0.1, 0.2), (0.3, 0.5))
    assert spec.cell_config(spec.values[0], 0).alpha_range == (0.1, 0.2)


@pytest.mark.parametrize(
    'mapping',
    [
        {'values': [1]},
        {'swept_parameter': 'colour', 'values': [1]},
        {'swept_parameter': 'n_nodes', 'values': []},
        {'swept_parameter': 'n_nodes', 'values': [0]},
        {'swept_parameter': 'n_nodes', 'values': [3], 'n_repeats': 0},
    ],
)
def test_sweep_spec_rejects(mapping):
    with pytest.raises(base.ValidationError):
        config.SweepSpec.from_mapping(mapping)


def test_check_keys():
    config.check_keys(
        {'n_nodes': 1, 'max_iters': 2}, config.SimConfig, config.FitConfig
    )
    with pytest.raises(base.ValidationError, match='colour'):
        config.check_keys({'colour': 1}, config.SimConfig)
    config.check_keys({'seed': 1}, config.FitConfig, extra=('seed',))


def test_load_config(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{"n_nodes": 3}')
    assert config.load_config(path) == {'n_nodes': 3}

    path.write_text('{\n  "n_nodes": 3,\n}')
    with pytest.raises(base.DataFormatError) as excinfo:
        config.load_config(path)
    assert excinfo.value.line == 3

    path.write_text('[1, 2]')
    with pytest.raises(base.DataFormatError):
        config.load_config(path)


@pytest.mark.parametrize(
    'value,expected',
    [
        (None, None),
        ('', None),
        ('1', True),
        ('y', True),
        ('yes', True),
        ('true', True),
        ('on', True),
        ('0', False),
        ('n', False),
        ('no', False),
        ('false', False),
        ('off', False),
    ],
)
def test_env_flag(value, expected, monkeypatch):
    if value is not None:
        monkeypatch.setenv('TEST_ENV', value)
    assert env.env_flag('TEST_ENV') == expected

    if value:
        monkeypatch.setenv('TEST_ENV', value.upper())
        assert env.env_flag('TEST_ENV') == expected

    monkeypatch.undo()


def test_env_defaults(monkeypatch):
    assert env.default_threads() == 1
    assert env.default_progress() is False
    monkeypatch.setenv('SHP_THREADS', '4')
    monkeypatch.setenv('SHP_PROGRESS', 'yes')
    assert env.default_threads() == 4
    assert env.default_progress() is True
    monkeypatch.setenv('SHP_THREADS', '0')
    assert env.default_threads() == 1
    monkeypatch.setenv('SHP_THREADS', 'many')
    assert env.default_threads() == 1


def test_derive_seed_is_stable_and_distinct():
    seeds = {
        utils.derive_seed(0, key)
        for key in ('dag', 'params', 'data', 0, 1, 2)
    }
    assert len(seeds) == 6
    assert utils.derive_seed(5, 1, 2) != utils.derive_seed(5, 2, 1)
    a = utils.make_rng(utils.derive_seed(9, 'x')).random(3)
    b = utils.make_rng(utils.derive_seed(9, 'x')).random(3)
    np.testing.assert_array_equal(a, b)


def test_map_ordered_keeps_input_order():
    def slow_square(value):
        return value * value

    items = list(range(50))
    assert utils.map_ordered(slow_square, items, threads=8) == [
        value * value for value in items
    ]
    assert utils.map_ordered(slow_square, [], threads=8) == []


def test_log_duration(caplog):
    with caplog.at_level(logging.INFO, logger='shp.utils'):
        with utils.log_duration('Counting %d things', 3):
            pass
    assert 'Counting 3 things took' in caplog.text


def test_error_hierarchy():
    error = base.CyclicGraphError(('a', 'b'))
    assert error.cycle == ('a', 'b')
    assert error.exit_code == base.EXIT_VALIDATION
    assert isinstance(error, ValueError)

    numeric = base.ZeroIntensityError('a', 3)
    assert numeric.bin == 3
    assert numeric.exit_code == base.EXIT_NUMERIC
    assert isinstance(numeric, ArithmeticError)

    io_error = base.DataFormatError('bad', 'x.csv', 4)
    assert str(io_error) == 'x.csv:4: bad'
    assert io_error.exit_code == base.EXIT_IO
