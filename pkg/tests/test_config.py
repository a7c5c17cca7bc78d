import json

import pytest

from snce.config import (DEFAULT_PATH, ConfigError, ConfigLoader, GridSpec, MlpSpec, Objective, TemperatureSpec,
                         ToyConfig, canonical_json, config_hash, load_config, to_dict)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestDefaults:
    def test_default_file_matches_dataclass_defaults(self):
        assert load_config(DEFAULT_PATH) == ToyConfig()

    def test_default_values(self):
        config = ToyConfig()
        assert config.grid.K == 2500
        assert config.n_samples == 100
        assert config.steps == 2000
        assert config.temperature.temperature().two_tau_sq == 1.0
        assert config.mlp.depth == 10 and config.mlp.hidden_width == 256
        assert config.optimizer.learning_rate == 1e-3

    def test_labels(self):
        assert ToyConfig().label == 'snce_2tau2_1'
        assert ToyConfig(objective=Objective.CE).label == 'ce'
        assert ToyConfig(objective=Objective.L2_REGRESSION).label == 'l2_regression'
        assert ToyConfig(temperature=TemperatureSpec(tau=0.5)).label == 'snce_tau0.5'
        assert ToyConfig(objective=Objective.LABEL_SMOOTHING, epsilon=0.05).label == 'ce_ls0.05'
        assert ToyConfig(objective=Objective.STOCHASTIC_QUANTIZATION).label == 'sq_2tau2_1'
        assert ToyConfig(objective='stochastic_quantization', temperature=TemperatureSpec(tau=0.3)).label == 'sq_tau0.3'

    def test_string_objective(self):
        assert ToyConfig(objective='ce').objective is Objective.CE


class TestLoading:
    def test_yaml(self, tmp_path):
        path = write(tmp_path, 'toy.yaml', 'objective: ce\ngrid:\n  n_per_axis: 20\nseed: 3\n')
        config = ConfigLoader().load(path)
        assert config.objective is Objective.CE
        assert config.grid == GridSpec(n_per_axis=20)
        assert config.seed == 3
        assert config.mlp == MlpSpec()

    def test_empty_yaml_is_the_default(self, tmp_path):
        assert ConfigLoader().load(write(tmp_path, 'empty.yaml', '')) == ToyConfig()

    def test_nested_field_is_named(self, tmp_path):
        path = write(tmp_path, 'bad.json', json.dumps({'grid': {'n_per_axis': 0}}))
        with pytest.raises(ConfigError) as info:
            ConfigLoader().load(path)
        assert info.value.field == 'grid.n_per_axis'
        assert str(info.value).startswith('grid.n_per_axis:')

    def test_unknown_field(self):
        with pytest.raises(ConfigError) as info:
            ConfigLoader().parse({'mlp': {'depth': 3, 'dropout': 0.5}})
        assert info.value.field == 'mlp.dropout'

    def test_unknown_top_level_field(self):
        with pytest.raises(ConfigError, match='learning_rate'):
            ConfigLoader().parse({'learning_rate': 0.1})

    def test_both_temperatures(self):
        with pytest.raises(ConfigError) as info:
            ConfigLoader().parse({'temperature': {'tau': 0.7, 'two_tau_sq': 1.0}})
        assert info.value.field == 'temperature.tau'

    def test_bad_objective(self):
        with pytest.raises(ConfigError, match='objective'):
            ConfigLoader().parse({'objective': 'mse'})

    @pytest.mark.parametrize('data, field_name', [
        ({'mixture': {'variance': -1.0}}, 'mixture.variance'),
        ({'mixture': {'weights': [0.7, 0.7]}}, 'mixture.weights'),
        ({'grid': {'lo': 1.0, 'hi': 0.0}}, 'grid.hi'),
        ({'optimizer': {'kind': 'rmsprop'}}, 'optimizer.kind'),
        ({'batch_size': 500}, 'batch_size'),
        ({'steps': 0}, 'steps'),
        ({'seed': -1}, 'seed'),
    ])
    def test_invalid_values(self, data, field_name):
        with pytest.raises(ConfigError) as info:
            ConfigLoader().parse(data)
        assert info.value.field == field_name

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError):
            ConfigLoader().parse({'grid': [1, 2]})

    def test_unparseable_file(self, tmp_path):
        with pytest.raises(ConfigError, match='cannot parse'):
            ConfigLoader().load(write(tmp_path, 'bad.json', '{"seed": '))

    def test_nan_is_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            ConfigLoader().load(write(tmp_path, 'nan.json', '{"epsilon": NaN}'))


class TestDigest:
    def test_hash_ignores_key_order(self):
        assert config_hash({'a': 1, 'b': [1, 2]}) == config_hash({'b': [1, 2], 'a': 1})

    def test_hash_tracks_values(self):
        assert config_hash(ToyConfig()) != config_hash(ToyConfig(seed=1))
        assert len(config_hash(ToyConfig())) == 64

    def test_canonical_json_round_trips_through_the_loader(self):
        config = ToyConfig(objective=Objective.CE, seed=4, grid=GridSpec(n_per_axis=12))
        assert ConfigLoader().parse(json.loads(canonical_json(config))) == config
        assert to_dict(config)['objective'] == 'ce'
