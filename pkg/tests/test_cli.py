import json
import os
import subprocess
import sys

import numpy as np
import pytest

from uqcycle import cli
from uqcycle.datasets import read_pgm_raw

TINY = {
    "dataset": {
        "image_size": 16,
        "id_train": {"count": 4},
        "id_eval": {"count": 4},
        "ood": [
            {"name": "geometry", "kind": "PHANTOM_OOD_GEOMETRY", "count": 4, "seed": 4000},
            {"name": "noise", "kind": "NOISE_OOD", "count": 4, "seed": 5000},
        ],
    },
    "model": {"channels": 2, "n_res": 1},
    "train": {"steps": 2},
    "eval": {"bins": 5, "plots": False},
}


def write_config(path, output_dir, **sections):
    cfg = json.loads(json.dumps(TINY))
    for k, v in sections.items():
        cfg.setdefault(k, {}).update(v)
    cfg["output_dir"] = str(output_dir)
    path.write_text(json.dumps(cfg))
    return str(path)


def run_ok(*argv):
    code = cli.run(list(argv))
    assert code == cli.EXIT_OK
    return code


@pytest.fixture
def inputs(tmp_path):
    cfg = write_config(tmp_path / "data.json", tmp_path / "unused")
    run_ok("gen-data", "--config", cfg, "--out", str(tmp_path / "data"))
    return tmp_path / "data" / "id_eval"


class TestGenData:
    def test_counts_and_manifests(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        run_ok("gen-data", "--config", cfg, "--out", str(tmp_path / "d"))
        for name in ("train_a", "train_b", "id_eval", "ood_geometry", "ood_noise"):
            assert len(list((tmp_path / "d" / name).glob("*.pgm"))) == 4
            man = json.loads((tmp_path / "d" / name / "manifest.json").read_text())
            assert len(man["ids"]) == 4 and "seed" in man["spec"]
        resolved = json.loads((tmp_path / "d" / "config.resolved.json").read_text())
        assert resolved["model"]["lambda_cyc"] > 0 and resolved["train"]["steps"] == 2
        assert not (tmp_path / "d" / cli.LOCK_NAME).exists()

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        run_ok("gen-data", "--config", cfg, "--out", str(tmp_path / "a"))
        run_ok("gen-data", "--config", cfg, "--out", str(tmp_path / "b"))
        for f in sorted((tmp_path / "a").rglob("*")):
            if f.is_file():
                other = tmp_path / "b" / f.relative_to(tmp_path / "a")
                if f.name == "manifest.json":
                    a, b = json.loads(f.read_text()), json.loads(other.read_text())
                    a.pop("created_at"), b.pop("created_at")
                    assert a == b
                else:
                    assert f.read_bytes() == other.read_bytes(), f

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"model": {"depth": 3}}))
        assert cli.run(["gen-data", "--config", str(p), "--out", str(tmp_path / "d")]) == cli.EXIT_CONFIG
        assert "model" in capsys.readouterr().err
        assert not (tmp_path / "d").exists()

    def test_missing_config_is_io_error(self, tmp_path):
        assert cli.run(["gen-data", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == cli.EXIT_IO

    def test_locked_directory(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        out = tmp_path / "d"
        out.mkdir()
        (out / cli.LOCK_NAME).write_text(str(os.getpid()))
        assert cli.run(["gen-data", "--config", cfg, "--out", str(out)]) == cli.EXIT_IO

    def test_stale_lock_is_reclaimed(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        out = tmp_path / "d"
        out.mkdir()
        (out / cli.LOCK_NAME).write_text("not-a-pid")
        run_ok("gen-data", "--config", cfg, "--out", str(out))


class TestTrain:
    def test_steps_zero_writes_initialization(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 0})
        run_ok("train", "--config", cfg)
        d = tmp_path / "run" / "train"
        assert sorted(f.name for f in d.iterdir()) == ["final.ckpt", "final.meta.json", "losses.csv"]
        assert len((d / "losses.csv").read_text().splitlines()) == 1
        assert (tmp_path / "run" / "config.resolved.json").exists()

    def test_ensemble_writes_five_members(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 0}, stochastic={"method": "ENSEMBLE"})
        run_ok("train", "--config", cfg)
        ck = sorted((tmp_path / "run" / "train").glob("member_*/final.ckpt"))
        assert len(ck) == 5
        seeds = [json.loads(c.with_name("final.meta.json").read_text())["seed"] for c in ck]
        assert seeds == [42, 43, 44, 45, 46]
        assert len({c.read_bytes() for c in ck}) == 5

    def test_rerun_identical(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        run_ok("train", "--config", cfg)
        run_ok("train", "--config", cfg, "--output-dir", str(tmp_path / "again"))
        for name in ("losses.csv", "final.ckpt"):
            assert (tmp_path / "run" / "train" / name).read_bytes() == (tmp_path / "again" / "train" / name).read_bytes()

    def test_divergence_exit_code(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"lr": 1e30}, stochastic={"method": "FLIPOUT"})
        with np.errstate(all="ignore"):
            assert cli.run(["train", "--config", cfg]) == cli.EXIT_RUNTIME


class TestDecompose:
    def test_outputs(self, tmp_path, inputs):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 1}, stochastic={"samples": 3})
        run_ok("train", "--config", cfg)
        out = tmp_path / "dec"
        run_ok("decompose", "--config", cfg, "--ckpt", str(tmp_path / "run" / "train"), "--input", str(inputs), "--out", str(out))
        n = len(list(inputs.glob("*.pgm")))
        assert len(list(out.glob("*.pgm"))) == 3 * n
        assert len(list(out.glob("*.f32"))) == 3 * n
        side = json.loads(next(out.glob("id_00000.json")).read_text())
        assert len(side["provenance"]["seeds"]) == 3
        ep = np.fromfile(out / "id_00000_epistemic.f32", "<f4")
        assert ep.size == 16 * 16 and np.all(ep >= 0)

    def test_single_sample_epistemic_is_zero(self, tmp_path, inputs):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 1}, stochastic={"samples": 1})
        run_ok("train", "--config", cfg)
        out = tmp_path / "dec"
        run_ok("decompose", "--config", cfg, "--ckpt", str(tmp_path / "run"), "--input", str(inputs), "--out", str(out))
        for f in out.glob("*_epistemic.pgm"):
            assert not read_pgm_raw(f)[0].any()
        for f in out.glob("*_epistemic.f32"):
            assert not np.fromfile(f, "<f4").any()

    def test_identical_ensemble_epistemic_is_zero(self, tmp_path, inputs):
        cfg = write_config(
            tmp_path / "c.json", tmp_path / "run", train={"steps": 1}, stochastic={"method": "ENSEMBLE", "ensemble_size": 3}
        )
        run_ok("train", "--config", cfg)
        member = str(tmp_path / "run" / "train" / "member_0" / "final.ckpt")
        out = tmp_path / "dec"
        run_ok("decompose", "--config", cfg, *["--ckpt", member] * 3, "--input", str(inputs), "--out", str(out))
        for f in out.glob("*_epistemic.f32"):
            assert not np.fromfile(f, "<f4").any()

    def test_wrong_checkpoint_count(self, tmp_path, inputs):
        cfg = write_config(
            tmp_path / "c.json", tmp_path / "run", train={"steps": 0}, stochastic={"method": "ENSEMBLE", "ensemble_size": 2}
        )
        run_ok("train", "--config", cfg)
        member = str(tmp_path / "run" / "train" / "member_0")
        code = cli.run(["decompose", "--config", cfg, "--ckpt", member, "--input", str(inputs), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_CONFIG

    def test_method_mismatch(self, tmp_path, inputs):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 0})
        run_ok("train", "--config", cfg)
        other = write_config(tmp_path / "o.json", tmp_path / "run", stochastic={"method": "FLIPOUT"})
        code = cli.run(["decompose", "--config", other, "--ckpt", str(tmp_path / "run"), "--input", str(inputs), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_CONFIG

    def test_missing_checkpoint(self, tmp_path, inputs):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        code = cli.run(["decompose", "--config", cfg, "--ckpt", str(tmp_path / "none.ckpt"), "--input", str(inputs), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_IO

    def test_corrupt_checkpoint(self, tmp_path, inputs):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run")
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"UQT1CKPT\x01")
        code = cli.run(["decompose", "--config", cfg, "--ckpt", str(bad), "--input", str(inputs), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_IO

    def test_malformed_pgm_input(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 0})
        run_ok("train", "--config", cfg)
        bad = tmp_path / "in"
        bad.mkdir()
        (bad / "x.pgm").write_bytes(b"P2\n1 1\n255\n0")
        code = cli.run(["decompose", "--config", cfg, "--ckpt", str(tmp_path / "run"), "--input", str(bad), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_IO


class TestEvaluateOod:
    def test_report_files_and_rerun(self, tmp_path):
        cfg = write_config(tmp_path / "c.json", tmp_path / "run", train={"steps": 1}, stochastic={"samples": 2})
        run_ok("train", "--config", cfg)
        run_ok("evaluate-ood", "--config", cfg, "--ckpt", str(tmp_path / "run"))
        ev = tmp_path / "run" / "eval"
        assert len(list(ev.glob("roc_*.csv"))) == 6
        summary = (ev / "summary.csv").read_text()
        assert summary.splitlines()[0] == "method,kind,dataset_pair,auc,separability"
        assert len(summary.splitlines()) == 7
        run_ok("evaluate-ood", "--config", cfg, "--ckpt", str(tmp_path / "run"), "--out", str(tmp_path / "again"))
        for f in ev.glob("*.csv"):
            assert f.read_bytes() == (tmp_path / "again" / f.name).read_bytes(), f.name


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("UQT_THREADS", "3")
    assert cli.worker_count() == 3
    monkeypatch.setenv("UQT_THREADS", "junk")
    assert cli.worker_count() >= 1


def test_console_entry_point(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{\"nope\": 1}")
    r = subprocess.run([sys.executable, "-m", "uqcycle.cli", "gen-data", "--config", str(p), "--out", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 2 and "config error" in r.stderr
