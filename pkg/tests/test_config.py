import json

import pytest

from langevin_unlearning.config import (
    SCHEMA,
    ExperimentConfig,
    load_config,
    parse_config_text,
    resolve_settings,
)
from langevin_unlearning.data_io import save_dataset
from langevin_unlearning.model import derive_profile
from langevin_unlearning.synth import generate_synthetic, SyntheticShiftSpec

TEXT = """
# desk-scale run
data.dim = 4          # trailing comment
data.n_priv = 80

engine.eta = 0.25
estimator.seeds = 0, 1, 2
run.plot = off
"""


class TestParseText:
    def test_comments_and_blanks_ignored(self):
        mapping = parse_config_text(TEXT)
        assert mapping == {
            "data.dim": "4",
            "data.n_priv": "80",
            "engine.eta": "0.25",
            "estimator.seeds": "0, 1, 2",
            "run.plot": "off",
        }

    def test_duplicate_key_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            parse_config_text("a.b = 1\na.b = 2\n")

    def test_missing_equals_rejected(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_config_text("data.dim 4\n")

    def test_value_may_contain_equals(self):
        assert parse_config_text("data.file = x=y")["data.file"] == "x=y"


class TestLoadConfig:
    def test_text_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(TEXT)
        assert load_config(str(path))["data.dim"] == "4"

    def test_json_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"data.dim": 4, "run.plot": False}))
        mapping = load_config(str(path))
        assert mapping["data.dim"] == 4
        assert mapping["run.plot"] is False

    def test_json_must_be_object(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError, match="flat object"):
            load_config(str(path))


class TestResolveSettings:
    def test_defaults_fill_missing_keys(self):
        settings = resolve_settings({})
        assert settings["data.dim"] == 10
        assert settings["engine.sigma"] == 0.05
        assert settings["estimator.seeds"] == (0, 1, 2, 3, 4)
        assert settings["run.out"] == "out"
        assert set(settings) == set(SCHEMA)

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="data.dims"):
            resolve_settings({"data.dims": "4"})

    def test_bad_value_names_the_key(self):
        with pytest.raises(ValueError, match="engine.eta"):
            resolve_settings({"engine.eta": "fast"})

    def test_string_coercions(self):
        settings = resolve_settings(parse_config_text(TEXT))
        assert settings["data.dim"] == 4
        assert settings["engine.eta"] == 0.25
        assert settings["estimator.seeds"] == (0, 1, 2)
        assert settings["run.plot"] is False

    def test_native_values_pass_through(self):
        settings = resolve_settings(
            {"data.dim": 7, "run.plot": True, "estimator.seeds": [3, 4]}
        )
        assert settings["data.dim"] == 7
        assert settings["run.plot"] is True
        assert settings["estimator.seeds"] == (3, 4)

    def test_bool_spellings(self):
        for raw, expected in (
            ("true", True), ("ON", True), ("1", True),
            ("false", False), ("no", False), ("0", False),
        ):
            assert resolve_settings({"run.plot": raw})["run.plot"] is expected
        with pytest.raises(ValueError, match="run.plot"):
            resolve_settings({"run.plot": "maybe"})


class TestExperimentConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.from_mapping({})
        assert cfg.data_file is None
        assert cfg.synth.dim == 10
        assert cfg.synth.n_priv == 2000
        assert cfg.hyper.eta == 0.5
        assert cfg.hyper.steps_learn == 20
        assert cfg.n_models == 200
        assert cfg.run_estimator is True
        assert cfg.run_attack is False
        assert cfg.plot is True
        assert cfg.out_dir == "out"

    def test_profile_matches_inputs(self):
        cfg = ExperimentConfig.from_mapping({"model.lam": 0.08, "model.clip": 2.0})
        expected = derive_profile(lam=0.08, clip=2.0)
        assert cfg.profile.M == expected.M
        assert cfg.profile.L == expected.L
        assert cfg.profile.m == expected.m

    def test_data_file_prefix_must_exist(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            ExperimentConfig.from_mapping(
                {"data.file": str(tmp_path / "missing")}
            )
        prefix = str(tmp_path / "ds")
        dataset, d_infty = generate_synthetic(
            SyntheticShiftSpec(dim=3, n_pub=4, n_priv=6, n_forget=1)
        )
        save_dataset(dataset, d_infty, prefix)
        cfg = ExperimentConfig.from_mapping({"data.file": prefix})
        assert cfg.data_file == prefix

    def test_discriminator_spec_tracks_objective(self):
        dv = ExperimentConfig.from_mapping({})
        assert dv.discriminator_spec(5).output_activation == "identity"
        assert dv.discriminator_spec(5).input_dim == 5
        assert dv.discriminator_spec(5).spectral_norm is False
        cc = ExperimentConfig.from_mapping({"estimator.objective": "cc"})
        assert cc.discriminator_spec(5).output_activation == "polysoftplus"

    def test_estimator_config_wiring(self):
        cfg = ExperimentConfig.from_mapping(
            {"estimator.alpha": "3.0", "estimator.seeds": "5,6"}
        )
        assert cfg.estimator.alpha == 3.0
        assert cfg.estimator.seeds == (5, 6)
        assert cfg.estimator.objective == "dv"

    def test_canonical_text_is_sorted_and_complete(self):
        cfg = ExperimentConfig.from_mapping({"data.dim": 4})
        lines = cfg.canonical_text().splitlines()
        keys = [line.split(" = ")[0] for line in lines]
        assert keys == sorted(SCHEMA)
        assert "data.dim = 4" in lines
        assert "estimator.seeds = 0,1,2,3,4" in lines

    def test_hash_stable_and_sensitive(self):
        a = ExperimentConfig.from_mapping({"data.dim": 4})
        b = ExperimentConfig.from_mapping({"data.dim": "4"})
        c = ExperimentConfig.from_mapping({"data.dim": 5})
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()
