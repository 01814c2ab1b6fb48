import json

import pytest

from uqcycle.config import DEFAULTS, ConfigError, load_config, resolve
from uqcycle.datasets import DatasetKind
from uqcycle.layers import Method
from uqcycle.uncertainty import AggMode


class TestResolve:
    def test_empty_config_gets_every_default(self):
        cfg = resolve({})
        assert cfg.model.lambda_cyc == DEFAULTS["model"]["lambda_cyc"]
        assert cfg.train.seed == 42 and cfg.train.lr == 2e-4
        assert cfg.stochastic.method is Method.MC_DROPOUT and cfg.stochastic.samples == 16
        assert cfg.agg_mode is AggMode(DEFAULTS["eval"]["agg_mode"]) and cfg.normalization == "pool"
        assert [o.kind for o in cfg.ood] == [DatasetKind.PHANTOM_OOD_GEOMETRY, DatasetKind.NOISE_OOD]

    def test_partial_section_merges(self):
        cfg = resolve({"train": {"steps": 3}})
        assert cfg.train.steps == 3 and cfg.train.batch_size == DEFAULTS["train"]["batch_size"]

    def test_resolved_expands_stochastic_defaults(self):
        cfg = resolve({"stochastic": {"method": "ENSEMBLE"}})
        assert cfg.resolved["stochastic"]["samples"] == 5
        assert cfg.resolved["stochastic"]["ensemble_size"] == 5

    def test_ood_entry_defaults(self):
        cfg = resolve({"dataset": {"ood": [{"name": "nat", "kind": "NATURAL_OOD"}]}})
        assert cfg.ood[0].count == 32 and cfg.ood[0].label == "nat"

    def test_dump_is_sorted_and_stable(self, tmp_path):
        cfg = resolve({"model": {"lambda_cyc": 1.5}})
        cfg.dump_resolved(tmp_path / "a.json")
        resolve(json.loads((tmp_path / "a.json").read_text())).dump_resolved(tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    @pytest.mark.parametrize(
        "raw, where",
        [
            ({"bogus": 1}, "<root>"),
            ({"model": {"lambda": 1}}, "model"),
            ({"model": {"lambda_cyc": 0}}, "model/lambda_cyc"),
            ({"train": {"steps": -1}}, "train/steps"),
            ({"stochastic": {"method": "BAYES"}}, "stochastic/method"),
            ({"stochastic": {"drop_prob": 1.0}}, "stochastic/drop_prob"),
            ({"dataset": {"image_size": 8}}, "dataset/image_size"),
            ({"dataset": {"ood": [{"name": "a b", "kind": "NOISE_OOD"}]}}, "dataset/ood/0/name"),
            ({"eval": {"normalization": "global"}}, "eval/normalization"),
        ],
    )
    def test_schema_errors_name_location(self, raw, where):
        with pytest.raises(ConfigError, match=f"at {where}"):
            resolve(raw)

    def test_duplicate_ood_names(self):
        ood = [{"name": "n", "kind": "NOISE_OOD"}, {"name": "n", "kind": "NATURAL_OOD"}]
        with pytest.raises(ConfigError, match="duplicate"):
            resolve({"dataset": {"ood": ood}})

    def test_reserved_id_name(self):
        with pytest.raises(ConfigError):
            resolve({"dataset": {"ood": [{"name": "id", "kind": "NOISE_OOD"}]}})

    def test_eval_seed_must_differ_from_train(self):
        with pytest.raises(ConfigError):
            resolve({"dataset": {"id_eval": {"seed": 1000}}})

    def test_external_needs_path(self):
        with pytest.raises(ConfigError):
            resolve({"dataset": {"ood": [{"name": "ext", "kind": "EXTERNAL_PGM"}]}})

    def test_cross_field_stochastic_error(self):
        with pytest.raises(ConfigError):
            resolve({"stochastic": {"method": "ENSEMBLE", "ensemble_size": 5, "samples": 3}})


class TestLoad:
    def test_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(p)

    def test_non_object(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_config(p)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            load_config(tmp_path / "absent.json")
