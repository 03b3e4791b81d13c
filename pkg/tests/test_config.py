"""
Tests for configuration presets and run-config files
"""
import pytest

from shorttext.config import (
    FLAT_KEYS,
    BaseConfig,
    DistilConfig,
    EncoderConfig,
    ModelConfig,
    TestingConfig,
    TrainConfig,
    config_by_name,
    dump_run_config,
    get_preset,
    load_run_config,
    parse_run_config_text,
)
from shorttext.errors import ConfigError


def write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_presets_validate():
    for name, preset in config_by_name.items():
        config = preset.train_config()
        assert isinstance(config, TrainConfig), name
        assert config.patience == 3


def test_distil_and_base_shapes():
    distil = DistilConfig.train_config().model.encoder
    base = BaseConfig.train_config().model.encoder
    assert (distil.num_layers, base.num_layers) == (6, 12)
    assert distil.hidden == base.hidden == 768
    assert (distil.freeze_below, base.freeze_below) == (5, 11)


def test_get_preset(monkeypatch):
    assert get_preset("testing") is TestingConfig
    monkeypatch.setenv("SHORTTEXT_CONFIG", "base")
    assert get_preset() is BaseConfig
    with pytest.raises(ConfigError):
        get_preset("huge")


def test_flat_keys_cover_every_field():
    flat = TrainConfig().to_flat()
    assert set(flat) == set(FLAT_KEYS)
    for key in ("learning_rate", "num_layers", "lam", "mode", "phi", "freeze_below", "word_hidden"):
        assert key in FLAT_KEYS


def test_parse_comments_and_blanks():
    raw = parse_run_config_text("# header\n\nlam = 0.25  # fusion weight\nmode=cls-ladder\n")
    assert raw == {"lam": "0.25", "mode": "cls-ladder"}


def test_parse_rejects_duplicates_and_garbage():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_run_config_text("lam = 0.1\nlam = 0.2\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_run_config_text("just words\n")


def test_load_run_config_types(tmp_path):
    path = write_config(tmp_path, "learning_rate = 0.1\nbidirectional = true\nnum_labels = 15\n")
    config = load_run_config(path, preset="testing")
    assert config.learning_rate == 0.1
    assert config.model.fusion.bidirectional is True
    assert config.model.num_labels == 15
    assert config.model.encoder.hidden == TestingConfig.HIDDEN


def test_unknown_keys_reported_by_name(tmp_path):
    path = write_config(tmp_path, "learnig_rate = 0.1\nlamda = 0.3\n")
    with pytest.raises(ConfigError) as info:
        load_run_config(path)
    assert "learnig_rate" in str(info.value) and "lamda" in str(info.value)


def test_invalid_values_reported(tmp_path):
    with pytest.raises(ConfigError, match="lam"):
        load_run_config(write_config(tmp_path, "lam = 1.5\n"))
    with pytest.raises(ConfigError, match="mode"):
        load_run_config(write_config(tmp_path, "mode = sideways\n"))


def test_freeze_default_follows_num_layers(tmp_path):
    """Test that freeze_below is re-derived as L - 1 when only num_layers is set"""
    config = load_run_config(write_config(tmp_path, "num_layers = 4\n"), preset="testing")
    assert config.model.encoder.freeze_below == 3
    explicit = load_run_config(write_config(tmp_path, "num_layers = 4\nfreeze_below = 0\n"), preset="testing")
    assert explicit.model.encoder.freeze_below == 0


def test_max_len_bounded_by_positions(tmp_path):
    with pytest.raises(ConfigError, match="max_len"):
        load_run_config(write_config(tmp_path, "max_len = 500\n"), preset="testing")


def test_seed_environment_override(tmp_path, monkeypatch):
    path = write_config(tmp_path, "seed = 5\n")
    monkeypatch.setenv("DBLP_SEED", "123")
    assert load_run_config(path).seed == 123
    monkeypatch.setenv("DBLP_SEED", "abc")
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "absent.cfg"))


def test_dump_and_load(tmp_path):
    original = TestingConfig.train_config(lam=0.3, mode="cls-ladder", bidirectional=True)
    path = write_config(tmp_path, dump_run_config(original))
    assert load_run_config(path, preset="desk") == original


def test_model_config_dict_round_trip():
    config = ModelConfig(encoder=EncoderConfig(num_layers=3, hidden=12, heads=3))
    assert ModelConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize(
    "overrides",
    [dict(heads=5), dict(freeze_below=9), dict(patience=0), dict(max_epochs=0), dict(phi=-1.0)],
)
def test_train_config_rejects(overrides):
    with pytest.raises(ConfigError):
        TestingConfig.train_config(**overrides)


def test_config_file_not_utf8(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_bytes(b"lam = 0.5  # \xff\n")
    with pytest.raises(ConfigError, match="UTF-8"):
        load_run_config(str(path))
