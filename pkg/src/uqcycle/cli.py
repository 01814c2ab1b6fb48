"""``uqcycle`` command line: gen-data, train, decompose, evaluate-ood.

Exit codes: 0 success, 2 config error, 3 runtime/divergence error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import checkpoint
from .config import ConfigError, ExperimentConfig, load_config
from .datasets import DatasetKind, ImageBatch, PgmError, encode_pgm, encode_pgm_unit, load_pgm_dir, make_dataset
from .layers import Method
from .model import DivergenceError, TranslationModel, sample_predictions, train
from .ood import ood_report
from .tensor import NonFiniteError
from .uncertainty import combine, minmax_normalize

log = logging.getLogger("uqcycle")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4
LOCK_NAME = ".uqcycle.lock"


class RunError(RuntimeError):
    pass


def worker_count() -> int:
    try:
        n = int(os.environ.get("UQT_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n or (os.cpu_count() or 1))


@contextmanager
def dir_lock(out: Path):
    """Exclusive ownership of ``out`` for the life of one command."""
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        if _stale(lock):
            lock.unlink()
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        else:
            raise OSError(f"{out} is locked by another uqcycle process ({lock})") from None
    os.write(fd, str(os.getpid()).encode())
    os.close(fd)
    try:
        yield
    finally:
        lock.unlink(missing_ok=True)


def _stale(lock: Path) -> bool:
    try:
        pid = int(lock.read_text().strip() or "0")
    except (OSError, ValueError):
        return True
    if pid <= 0:
        return True
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return True
    except PermissionError:
        return False
    return False


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# gen-data


def _write_set(batch: ImageBatch, spec_dict: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(worker_count()) as pool:
        list(pool.map(lambda p: (out / f"{p[0]}.pgm").write_bytes(encode_pgm(p[1][0], 8)), zip(batch.ids, batch.data)))
    manifest = {"spec": spec_dict, "ids": batch.ids, "created_at": _now()}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_gen_data(cfg: ExperimentConfig, out: Path) -> None:
    with dir_lock(out):
        sets = [("train_a", cfg.id_train_a), ("train_b", cfg.id_train_b), ("id_eval", cfg.id_eval)]
        sets += [(f"ood_{s.name}", s) for s in cfg.ood if s.kind is not DatasetKind.EXTERNAL_PGM]
        for dirname, spec in sets:
            _write_set(make_dataset(spec), spec.to_dict(), out / dirname)
        cfg.dump_resolved(out / "config.resolved.json")
        top = {"sets": [d for d, _ in sets], "dataset": cfg.resolved["dataset"], "created_at": _now()}
        (out / "manifest.json").write_text(json.dumps(top, indent=2, sort_keys=True) + "\n")
    log.info("wrote %d datasets to %s", len(sets), out)


# ---------------------------------------------------------------------------
# train


def _train_member(args) -> tuple[list, int]:
    cfg, seed, ckdir = args
    from dataclasses import replace

    data_p = make_dataset(cfg.id_train_a).data
    data_q = make_dataset(cfg.id_train_b).data
    model, state = train(data_p, data_q, cfg.model, cfg.stochastic, replace(cfg.train, seed=seed), checkpoint_dir=ckdir)
    _write_meta(Path(ckdir) / "final.meta.json", cfg, seed, state.step)
    return state.losses, state.step


def _write_meta(path: Path, cfg: ExperimentConfig, seed: int, step: int) -> None:
    meta = {
        "method": cfg.stochastic.method.value,
        "model": cfg.model.to_dict(),
        "stochastic": cfg.stochastic.to_dict(),
        "seed": seed,
        "step": step,
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def cmd_train(cfg: ExperimentConfig) -> list[Path]:
    out = cfg.output_dir
    with dir_lock(out):
        cfg.dump_resolved(out / "config.resolved.json")
        if cfg.stochastic.method is Method.ENSEMBLE:
            jobs = [
                (cfg, cfg.train.seed + i, str(out / "train" / f"member_{i}")) for i in range(cfg.stochastic.ensemble_size)
            ]
        else:
            jobs = [(cfg, cfg.train.seed, str(out / "train"))]
        workers = min(worker_count(), len(jobs))
        if workers > 1:
            with ProcessPoolExecutor(workers) as pool:
                results = list(pool.map(_train_member, jobs))
        else:
            results = [_train_member(j) for j in jobs]
        for (_, _, ckdir), (_, steps) in zip(jobs, results):
            log.info("trained %s for %d steps", ckdir, steps)
    return [Path(j[2]) / "final.ckpt" for j in jobs]


# ---------------------------------------------------------------------------
# checkpoint loading


def resolve_checkpoints(paths: list[str], cfg: ExperimentConfig) -> list[Path]:
    """Expand ``--ckpt`` arguments: a file, a training dir, or a run dir (``<run>/train``)."""
    found: list[Path] = []
    for p in map(Path, paths):
        if p.is_file():
            found.append(p)
            continue
        if not p.is_dir():
            raise FileNotFoundError(f"checkpoint not found: {p}")
        for d in (p, p / "train"):
            if (d / "final.ckpt").is_file():
                found.append(d / "final.ckpt")
                break
            members = sorted(d.glob("member_*/final.ckpt"), key=lambda q: int(q.parent.name.split("_")[1]))
            if members:
                found.extend(members)
                break
        else:
            raise FileNotFoundError(f"no checkpoint found under {p}")
    want = cfg.stochastic.ensemble_size if cfg.stochastic.method is Method.ENSEMBLE else 1
    if len(found) != want:
        raise ConfigError(
            f"config error: {cfg.stochastic.method.value} expects {want} checkpoint(s), got {len(found)}"
        )
    return found


def load_models(paths: list[str], cfg: ExperimentConfig):
    models = []
    for path in resolve_checkpoints(paths, cfg):
        meta_path = path.with_name(path.stem + ".meta.json")
        if meta_path.is_file():
            meta = json.loads(meta_path.read_text())
            if meta.get("method") != cfg.stochastic.method.value:
                raise ConfigError(
                    f"config error: checkpoint {path} was trained with {meta.get('method')}, "
                    f"config asks for {cfg.stochastic.method.value}"
                )
        model = TranslationModel(cfg.model, cfg.stochastic)
        try:
            model.load_state_dict(checkpoint.load(path))
        except ValueError as e:
            if isinstance(e, checkpoint.CheckpointError):
                raise
            raise ConfigError(f"config error: {e}") from None
        models.append(model)
    return models if cfg.stochastic.method is Method.ENSEMBLE else models[0]


# ---------------------------------------------------------------------------
# decompose


def cmd_decompose(cfg: ExperimentConfig, ckpts: list[str], input_dir: Path, out: Path) -> int:
    model = load_models(ckpts, cfg)
    batch = load_pgm_dir(input_dir)
    samples = sample_predictions(model, batch.data, cfg.stochastic, seed=cfg.eval_seed)
    maps = combine(samples)
    with dir_lock(out):
        cfg.dump_resolved(out / "config.resolved.json")

        def emit(i_id):
            i, img_id = i_id
            side = {"image_id": img_id, "provenance": samples.provenance, "maps": {}}
            mu = maps.mu_star[i, 0]
            (out / f"{img_id}_mu.pgm").write_bytes(encode_pgm(mu, 16))
            (out / f"{img_id}_mu.f32").write_bytes(mu.astype("<f4").tobytes())
            side["maps"]["mu"] = {"min": float(mu.min()), "max": float(mu.max()), "encoding": "[-1,1] linear"}
            for kind in ("aleatoric", "epistemic"):
                m = getattr(maps, kind)[i, 0]
                nm = minmax_normalize(m)
                (out / f"{img_id}_{kind}.pgm").write_bytes(encode_pgm_unit(nm.values, 16))
                (out / f"{img_id}_{kind}.f32").write_bytes(m.astype("<f4").tobytes())
                side["maps"][kind] = {"min": nm.lo, "max": nm.hi, "degenerate": nm.degenerate}
            side["shape"] = list(mu.shape)
            (out / f"{img_id}.json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")

        with ThreadPoolExecutor(worker_count()) as pool:
            list(pool.map(emit, enumerate(batch.ids)))
    return len(batch.ids)


# ---------------------------------------------------------------------------
# evaluate-ood


def cmd_evaluate_ood(cfg: ExperimentConfig, ckpts: list[str], out: Path | None = None):
    model = load_models(ckpts, cfg)
    out = out or cfg.output_dir / "eval"
    id_batch = make_dataset(cfg.id_eval)
    oods = {spec.name: make_dataset(spec) for spec in cfg.ood}
    with dir_lock(out):
        cfg.dump_resolved(out / "config.resolved.json")
        return ood_report(
            model,
            cfg.stochastic,
            ("id", id_batch),
            oods,
            agg_mode=cfg.agg_mode,
            bins=cfg.bins,
            normalization=cfg.normalization,
            seed=cfg.eval_seed,
            out_dir=out,
            plots=cfg.plots,
        )


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uqcycle", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write the synthetic datasets as PGM files")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train one model or every ensemble member")
    t.add_argument("--config", required=True)
    t.add_argument("--output-dir", help="override output_dir from the config")

    d = sub.add_parser("decompose", help="translate PGM inputs and write mean/aleatoric/epistemic maps")
    d.add_argument("--config", required=True)
    d.add_argument("--ckpt", required=True, action="append", help="checkpoint file or run dir (repeatable)")
    d.add_argument("--input", required=True)
    d.add_argument("--out", required=True)

    e = sub.add_parser("evaluate-ood", help="histograms, ROC curves and AUC for ID vs OOD")
    e.add_argument("--config", required=True)
    e.add_argument("--ckpt", required=True, action="append", help="checkpoint file or run dir (repeatable)")
    e.add_argument("--out", help="report dir (default: <output_dir>/eval)")
    return p


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "gen-data":
            cmd_gen_data(cfg, Path(args.out))
        elif args.command == "train":
            if args.output_dir:
                cfg.output_dir = Path(args.output_dir)
                cfg.resolved["output_dir"] = args.output_dir
            cmd_train(cfg)
        elif args.command == "decompose":
            cmd_decompose(cfg, args.ckpt, Path(args.input), Path(args.out))
        else:
            cmd_evaluate_ood(cfg, args.ckpt, Path(args.out) if args.out else None)
    except ConfigError as e:
        print(f"uqcycle: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, PgmError, checkpoint.CheckpointError) as e:
        print(f"uqcycle: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (DivergenceError, NonFiniteError, ValueError, RuntimeError) as e:
        print(f"uqcycle: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
