"""Experiment configuration: strict JSON schema, defaults, typed view."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema

from .datasets import DatasetKind, DatasetSpec
from .layers import Method, StochasticConfig
from .model import CycleMode, ModelConfig, TrainConfig
from .uncertainty import AggMode


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}


def _obj(props: dict, required: tuple = ()) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props, "required": list(required)}


_SET = {
    "count": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
    "texture_std": {"type": "number", "minimum": 0},
}

SCHEMA = _obj(
    {
        "dataset": _obj(
            {
                "image_size": {"type": "integer", "minimum": 16, "multipleOf": 4},
                "id_train": _obj({**_SET, "seed_b": {"type": "integer", "minimum": 0}}),
                "id_eval": _obj(_SET),
                "ood": {
                    "type": "array",
                    "items": _obj(
                        {
                            **_SET,
                            "name": {"type": "string", "pattern": "^[A-Za-z0-9]+$"},
                            "kind": {"enum": ["PHANTOM_OOD_GEOMETRY", "NOISE_OOD", "NATURAL_OOD", "EXTERNAL_PGM"]},
                            "path": {"type": "string"},
                        },
                        required=("name", "kind"),
                    ),
                },
            }
        ),
        "model": _obj(
            {
                "channels": {"type": "integer", "minimum": 1},
                "n_res": {"type": "integer", "minimum": 0},
                "upsample": {"enum": ["nearest", "transposed"]},
                "lambda_cyc": {"type": "number", "exclusiveMinimum": 0},
                "mode": {"enum": [m.value for m in CycleMode]},
                "identity_loss": {"type": "boolean"},
                "lambda_identity": {"type": "number", "minimum": 0},
            }
        ),
        "stochastic": _obj(
            {
                "method": {"enum": [m.value for m in Method]},
                "drop_prob": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "ensemble_size": {"type": "integer", "minimum": 1},
                "flipout_init_logvar": _NUM,
                "samples": {"type": "integer", "minimum": 1},
            }
        ),
        "train": _obj(
            {
                "steps": {"type": "integer", "minimum": 0},
                "batch_size": {"type": "integer", "minimum": 1},
                "lr": {"type": "number", "exclusiveMinimum": 0},
                "beta1": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "beta2": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "checkpoint_interval": {"type": "integer", "minimum": 0},
            }
        ),
        "eval": _obj(
            {
                "agg_mode": {"enum": [a.value for a in AggMode]},
                "bins": {"type": "integer", "minimum": 1},
                "normalization": {"enum": ["pool", "per_map"]},
                "seed": {"type": "integer", "minimum": 0},
                "plots": {"type": "boolean"},
            }
        ),
        "output_dir": {"type": "string", "minLength": 1},
    }
)

DEFAULTS: dict[str, Any] = {
    "dataset": {
        "image_size": 32,
        "id_train": {"count": 128, "seed": 1000, "seed_b": 2000, "texture_std": 0.04},
        "id_eval": {"count": 32, "seed": 3000, "texture_std": 0.04},
        "ood": [
            {"name": "geometry", "kind": "PHANTOM_OOD_GEOMETRY", "count": 32, "seed": 4000},
            {"name": "noise", "kind": "NOISE_OOD", "count": 32, "seed": 5000},
        ],
    },
    "model": {
        "channels": 8,
        "n_res": 2,
        "upsample": "nearest",
        "lambda_cyc": 10.0,
        "mode": "NLL_CYCLE",
        "identity_loss": False,
        "lambda_identity": 5.0,
    },
    "stochastic": {"method": "MC_DROPOUT", "ensemble_size": 5, "flipout_init_logvar": -6.0},
    "train": {
        "steps": 2000,
        "batch_size": 1,
        "lr": 2e-4,
        "beta1": 0.5,
        "beta2": 0.999,
        "seed": 42,
        "checkpoint_interval": 0,
    },
    "eval": {"agg_mode": "PIXEL_MEAN", "bins": 50, "normalization": "pool", "seed": 7, "plots": True},
    "output_dir": "runs/default",
}

_OOD_DEFAULTS = {"count": 32, "seed": 0, "texture_std": 0.04}


@dataclass
class ExperimentConfig:
    id_train_a: DatasetSpec
    id_train_b: DatasetSpec
    id_eval: DatasetSpec
    ood: list[DatasetSpec]
    model: ModelConfig
    stochastic: StochasticConfig
    train: TrainConfig
    agg_mode: AggMode
    bins: int
    normalization: str
    eval_seed: int
    plots: bool
    output_dir: Path
    resolved: dict

    def dump_resolved(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.resolved, indent=2, sort_keys=True) + "\n")


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve(raw: dict) -> ExperimentConfig:
    """Validate ``raw`` against the schema and expand every default."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {e.message}") from None
    cfg = _merge(DEFAULTS, raw)
    ds = cfg["dataset"]
    ds["ood"] = [_merge(_OOD_DEFAULTS, o) for o in ds["ood"]]
    names = [o["name"] for o in ds["ood"]]
    if len(set(names)) != len(names):
        raise ConfigError(f"config error at dataset/ood: duplicate names {names}")
    if "id" in names:
        raise ConfigError("config error at dataset/ood: name 'id' is reserved for the ID eval set")
    tr, ev = ds["id_train"], ds["id_eval"]
    if ev["seed"] in (tr["seed"], tr["seed_b"]):
        raise ConfigError("config error at dataset/id_eval/seed: must differ from the training seeds")
    for o in ds["ood"]:
        if o["kind"] == "EXTERNAL_PGM" and "path" not in o:
            raise ConfigError(f"config error at dataset/ood/{o['name']}: EXTERNAL_PGM needs a path")
    try:
        size = ds["image_size"]
        a = DatasetSpec(DatasetKind.PHANTOM_A, tr["count"], size, tr["seed"], tr["texture_std"], name="train_a")
        b = DatasetSpec(DatasetKind.PHANTOM_B, tr["count"], size, tr["seed_b"], tr["texture_std"], name="train_b")
        e = DatasetSpec(DatasetKind.PHANTOM_A, ev["count"], size, ev["seed"], ev["texture_std"], name="id")
        ood = [
            DatasetSpec(o["kind"], o["count"], size, o["seed"], o["texture_std"], o.get("path"), o["name"])
            for o in ds["ood"]
        ]
        model = ModelConfig(**cfg["model"])
        stochastic = StochasticConfig(**cfg["stochastic"])
        train = TrainConfig(**cfg["train"])
    except (ValueError, TypeError) as err:
        raise ConfigError(f"config error: {err}") from None
    cfg["stochastic"] = stochastic.to_dict()
    evc = cfg["eval"]
    return ExperimentConfig(
        a, b, e, ood, model, stochastic, train,
        AggMode(evc["agg_mode"]), evc["bins"], evc["normalization"], evc["seed"], evc["plots"],
        Path(cfg["output_dir"]), cfg,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config error: {path} is not valid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config error: top level must be a JSON object")
    return resolve(raw)
