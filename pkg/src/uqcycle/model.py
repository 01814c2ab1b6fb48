"""CycleGAN-style translator with mean and log-variance output heads.

Two generators (``G: P -> Q`` and ``F: Q -> P``) each predict a per-pixel
Gaussian: a tanh-bounded mean and a clamped log-variance. The cycle term is
either the L1 reconstruction error or the Gaussian NLL of the input under the
reconstructing generator's heads. Two least-squares discriminators see only
mean images.
"""
from __future__ import annotations

import csv
import enum
import logging
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import checkpoint
from . import tensor as T
from .layers import Conv2d, Method, StochasticConfig, dropout_forward
from .optim import Adam
from .tensor import NonFiniteError, ShapeError, Tensor
from .uncertainty import SampleSet

log = logging.getLogger(__name__)

LOGVAR_MIN = -10.0
LOGVAR_MAX = 4.0
LOSS_FIELDS = ("adv_G", "adv_F", "d_P", "d_Q", "L_cyc", "total")


class CycleMode(str, enum.Enum):
    L1_CYCLE = "L1_CYCLE"
    NLL_CYCLE = "NLL_CYCLE"


class DivergenceError(RuntimeError):
    def __init__(self, step: int, cause: str):
        super().__init__(f"training diverged at step {step}: {cause}")
        self.step = step


@dataclass(frozen=True)
class ModelConfig:
    channels: int = 8
    n_res: int = 2
    upsample: str = "nearest"  # or "transposed"
    lambda_cyc: float = 10.0
    mode: CycleMode = CycleMode.NLL_CYCLE
    identity_loss: bool = False
    lambda_identity: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "mode", CycleMode(self.mode))
        if self.lambda_cyc <= 0:
            raise ValueError("lambda_cyc must be > 0")
        if self.upsample not in ("nearest", "transposed"):
            raise ValueError(f"unknown upsample mode {self.upsample!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        return d


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    batch_size: int = 1
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0
    checkpoint_interval: int = 0


# ---------------------------------------------------------------------------
# networks


class _Upsample:
    """Nearest 2x upsample + 3x3 conv, or a 4x4 stride-2 transposed conv."""

    def __init__(self, cin, cout, rng, mode, kind, p, init_logvar, dtype):
        self.mode = mode
        if mode == "nearest":
            self.conv = Conv2d(cin, cout, 3, rng, kind=kind, p=p, init_logvar=init_logvar, dtype=dtype)
        else:
            self.conv = _ConvTranspose(cin, cout, rng, kind, p, init_logvar, dtype)

    def parameters(self, prefix):
        return self.conv.parameters(prefix)

    def __call__(self, x, rng):
        if self.mode == "nearest":
            return self.conv(T.upsample_nearest(x, 2), rng)
        return self.conv(x, rng)


class _ConvTranspose:
    def __init__(self, cin, cout, rng, kind, p, init_logvar, dtype):
        self.kind = kind
        self.p = p
        w = (rng.standard_normal((cin, cout, 4, 4)) * np.sqrt(2.0 / (cin * 4))).astype(dtype)
        self.weight = Tensor(w, requires_grad=True, dtype=dtype)
        self.bias = Tensor(np.zeros(cout), requires_grad=True, dtype=dtype)
        self.log_var = Tensor(np.full(w.shape, init_logvar), requires_grad=True, dtype=dtype) if kind == "variational" else None

    def parameters(self, prefix):
        out = {f"{prefix}weight": self.weight, f"{prefix}bias": self.bias}
        if self.log_var is not None:
            out[f"{prefix}weight_logvar"] = self.log_var
        return out

    def __call__(self, x, rng):
        w = self.weight
        if self.kind == "dropconnect" and self.p > 0:
            from .layers import dropconnect_mask

            w = w * dropconnect_mask(w, self.p, rng)
        elif self.kind == "variational":
            xi = Tensor._wrap(rng.standard_normal(w.shape).astype(w.dtype))
            w = w + T.exp(self.log_var * 0.5) * xi
        return T.conv_transpose2d(x, w, self.bias, stride=2, pad=1)


def _decoder_kind(stochastic: StochasticConfig | None) -> str:
    if stochastic is None:
        return "plain"
    return {Method.MC_DROPCONNECT: "dropconnect", Method.FLIPOUT: "variational"}.get(stochastic.method, "plain")


class Generator:
    """Encoder (2 stride-2 convs) -> residual bottleneck -> decoder (2 upsampling
    blocks + 1x1 mixing conv) -> 1x1 mean and log-variance heads.

    Stochastic layers live in the decoder only.
    """

    def __init__(
        self,
        config: ModelConfig,
        stochastic: StochasticConfig | None,
        rng: np.random.Generator,
        dtype=np.float32,
    ):
        c = config.channels
        kind = _decoder_kind(stochastic)
        p = stochastic.drop_prob if stochastic is not None else 0.0
        lv = stochastic.flipout_init_logvar if stochastic is not None else -6.0
        self.dropout = p if (stochastic is not None and stochastic.method is Method.MC_DROPOUT) else 0.0
        self.stochastic = kind != "plain" or self.dropout > 0

        self.down1 = Conv2d(1, c, 3, rng, stride=2, dtype=dtype)
        self.down2 = Conv2d(c, 2 * c, 3, rng, stride=2, dtype=dtype)
        self.res = [
            (Conv2d(2 * c, 2 * c, 3, rng, dtype=dtype), Conv2d(2 * c, 2 * c, 3, rng, dtype=dtype))
            for _ in range(config.n_res)
        ]
        self.up1 = _Upsample(2 * c, c, rng, config.upsample, kind, p, lv, dtype)
        self.up2 = _Upsample(c, c, rng, config.upsample, kind, p, lv, dtype)
        self.mix = Conv2d(c, c, 1, rng, kind=kind, p=p, init_logvar=lv, dtype=dtype)
        self.head_mu = Conv2d(c, 1, 1, rng, kind=kind, p=p, init_logvar=lv, dtype=dtype)
        self.head_logvar = Conv2d(c, 1, 1, rng, kind=kind, p=p, init_logvar=lv, dtype=dtype)

    def parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        out.update(self.down1.parameters(f"{prefix}down1."))
        out.update(self.down2.parameters(f"{prefix}down2."))
        for i, (a, b) in enumerate(self.res):
            out.update(a.parameters(f"{prefix}res{i}.a."))
            out.update(b.parameters(f"{prefix}res{i}.b."))
        out.update(self.up1.parameters(f"{prefix}up1."))
        out.update(self.up2.parameters(f"{prefix}up2."))
        out.update(self.mix.parameters(f"{prefix}mix."))
        out.update(self.head_mu.parameters(f"{prefix}head_mu."))
        out.update(self.head_logvar.parameters(f"{prefix}head_logvar."))
        return out

    def features(self, x: Tensor, rng: np.random.Generator | None = None) -> Tensor:
        if x.ndim != 4 or x.shape[1] != 1:
            raise ShapeError(f"generator expects (N, 1, H, W) input, got {x.shape}")
        if x.shape[2] % 4 or x.shape[3] % 4:
            raise ShapeError(f"generator needs H, W divisible by 4, got {x.shape[2:]}")
        if self.stochastic and rng is None:
            raise ValueError("stochastic generator needs an rng")
        act = T.leaky_relu
        h = act(T.instance_norm(self.down1(x)))
        h = act(T.instance_norm(self.down2(h)))
        for a, b in self.res:
            h = h + T.instance_norm(b(act(T.instance_norm(a(h)))))
        h = act(T.instance_norm(self.up1(h, rng)))
        if self.dropout:
            h = dropout_forward(h, self.dropout, rng)
        h = act(T.instance_norm(self.up2(h, rng)))
        if self.dropout:
            h = dropout_forward(h, self.dropout, rng)
        return act(self.mix(h, rng))

    def __call__(self, x: Tensor, rng: np.random.Generator | None = None) -> tuple[Tensor, Tensor]:
        h = self.features(x, rng)
        mu = T.tanh(self.head_mu(h, rng))
        logvar = T.clamp(self.head_logvar(h, rng), LOGVAR_MIN, LOGVAR_MAX)
        return mu, logvar


class Discriminator:
    """Three stride-2 convs; emits an (H/8, W/8) grid of realness scores."""

    def __init__(self, channels: int, rng: np.random.Generator, dtype=np.float32):
        c = channels
        self.c1 = Conv2d(1, c, 3, rng, stride=2, dtype=dtype)
        self.c2 = Conv2d(c, 2 * c, 3, rng, stride=2, dtype=dtype)
        self.c3 = Conv2d(2 * c, 1, 3, rng, stride=2, dtype=dtype)

    def parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out = {}
        for name in ("c1", "c2", "c3"):
            out.update(getattr(self, name).parameters(f"{prefix}{name}."))
        return out

    def __call__(self, x: Tensor) -> Tensor:
        h = T.leaky_relu(self.c1(x))
        h = T.leaky_relu(T.instance_norm(self.c2(h)))
        return self.c3(h)


class TranslationModel:
    """``G: P -> Q``, ``F: Q -> P`` and discriminators ``D_P``, ``D_Q``."""

    def __init__(
        self,
        config: ModelConfig | None = None,
        stochastic: StochasticConfig | None = None,
        seed: int | np.random.SeedSequence = 0,
        dtype=np.float32,
    ):
        self.config = config or ModelConfig()
        self.stochastic = stochastic or StochasticConfig()
        self.method = self.stochastic.method
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        rg, rf, rdp, rdq = (np.random.default_rng(s) for s in ss.spawn(4))
        gen_stoch = None if self.method is Method.ENSEMBLE else self.stochastic
        self.G = Generator(self.config, gen_stoch, rg, dtype)
        self.F = Generator(self.config, gen_stoch, rf, dtype)
        self.D_P = Discriminator(self.config.channels, rdp, dtype)
        self.D_Q = Discriminator(self.config.channels, rdq, dtype)

    def generator_parameters(self) -> dict[str, Tensor]:
        return {**self.G.parameters("G."), **self.F.parameters("F.")}

    def discriminator_parameters(self) -> dict[str, Tensor]:
        return {**self.D_P.parameters("D_P."), **self.D_Q.parameters("D_Q.")}

    def parameters(self) -> dict[str, Tensor]:
        return {**self.generator_parameters(), **self.discriminator_parameters()}

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        missing = sorted(set(params) - set(state))
        extra = sorted(set(state) - set(params))
        if missing or extra:
            raise ValueError(
                f"checkpoint does not match the {self.method.value} architecture: "
                f"missing {missing[:4]}{'...' if len(missing) > 4 else ''}, "
                f"unexpected {extra[:4]}{'...' if len(extra) > 4 else ''}"
            )
        for k, p in params.items():
            if state[k].shape != p.shape:
                raise ValueError(f"checkpoint tensor {k!r} has shape {state[k].shape}, model expects {p.shape}")
            p.data = state[k].astype(p.dtype)

    def save(self, path: str | Path) -> None:
        checkpoint.save(path, self.state_dict())

    @classmethod
    def load(cls, path: str | Path, config: ModelConfig | None = None, stochastic: StochasticConfig | None = None):
        model = cls(config, stochastic)
        model.load_state_dict(checkpoint.load(path))
        return model

    def generator(self, direction: str) -> Generator:
        if direction == "P2Q":
            return self.G
        if direction == "Q2P":
            return self.F
        raise ValueError(f"direction must be 'P2Q' or 'Q2P', got {direction!r}")


# ---------------------------------------------------------------------------
# losses


def _same_shape(op: str, *ts: Tensor) -> None:
    if len({t.shape for t in ts}) != 1:
        raise ShapeError(f"{op}: shape mismatch {[t.shape for t in ts]}")


def nll_loss(mu: Tensor, logvar: Tensor, target: Tensor) -> Tensor:
    """Mean per-pixel Gaussian NLL (constant term dropped), in log-variance form."""
    _same_shape("nll_loss", mu, logvar, target)
    r = mu - target
    loss = T.mean(logvar * 0.5 + r * r * T.exp(-logvar) * 0.5)
    if not np.isfinite(loss.data).all():
        raise NonFiniteError("nll_loss")
    return loss


def l1_loss(a: Tensor, b: Tensor) -> Tensor:
    _same_shape("l1_loss", a, b)
    return T.mean(T.abs(a - b))


GeneratorFn = Callable[..., tuple[Tensor, Tensor]]


def cycle_loss_from_reconstructions(
    x: Tensor,
    rec_x: tuple[Tensor, Tensor],
    y: Tensor,
    rec_y: tuple[Tensor, Tensor],
    mode: CycleMode | str,
) -> Tensor:
    mode = CycleMode(mode)
    if mode is CycleMode.NLL_CYCLE:
        return nll_loss(rec_x[0], rec_x[1], x) + nll_loss(rec_y[0], rec_y[1], y)
    return l1_loss(rec_x[0], x) + l1_loss(rec_y[0], y)


def cycle_loss(
    x: Tensor,
    y: Tensor,
    G: GeneratorFn,
    F: GeneratorFn,
    mode: CycleMode | str = CycleMode.NLL_CYCLE,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Cycle term for a P-batch ``x`` and a Q-batch ``y``.

    Generators return ``(mu, logvar)``; only ``mu`` is fed forward into the
    reconstructing generator.
    """
    fake_q, _ = G(x, rng)
    rec_x = F(fake_q, rng)
    fake_p, _ = F(y, rng)
    rec_y = G(fake_p, rng)
    return cycle_loss_from_reconstructions(x, rec_x, y, rec_y, mode)


def discriminator_loss(D: Callable[[Tensor], Tensor], real: Tensor, fake_mu: Tensor) -> Tensor:
    d_real = D(real)
    d_fake = D(fake_mu.detach())
    _same_shape("adversarial_losses", d_real, d_fake)
    return T.mean((d_real - 1.0) * (d_real - 1.0)) * 0.5 + T.mean(d_fake * d_fake) * 0.5


def generator_adv_loss(D: Callable[[Tensor], Tensor], fake_mu: Tensor) -> Tensor:
    d = D(fake_mu)
    return T.mean((d - 1.0) * (d - 1.0))


def adversarial_losses(D: Callable[[Tensor], Tensor], real: Tensor, fake_mu: Tensor) -> tuple[Tensor, Tensor]:
    """Least-squares GAN losses ``(d_loss, g_loss)`` for one discriminator."""
    _same_shape("adversarial_losses", real, fake_mu)
    return discriminator_loss(D, real, fake_mu), generator_adv_loss(D, fake_mu)


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainState:
    step: int = 0
    losses: list[dict[str, float]] = field(default_factory=list)
    lambda_cyc: float = 10.0
    mode: CycleMode = CycleMode.NLL_CYCLE
    seed: int = 0

    def record(self, row: dict[str, float]) -> None:
        self.losses.append(dict(row))

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.losses], dtype=np.float64)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("step",) + LOSS_FIELDS)
            for i, row in enumerate(self.losses, start=1):
                w.writerow([i] + [repr(row[k]) for k in LOSS_FIELDS])


def smoothed(values: Sequence[float], window: int = 100) -> np.ndarray:
    """Trailing moving average (shorter windows at the start)."""
    v = np.asarray(values, dtype=np.float64)
    c = np.concatenate([[0.0], np.cumsum(v)])
    idx = np.arange(1, len(v) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


@contextmanager
def frozen(params: Iterable[Tensor]):
    """Exclude ``params`` from gradient recording inside the block."""
    params = list(params)
    flags = [p.requires_grad for p in params]
    for p in params:
        p.requires_grad = False
    try:
        yield
    finally:
        for p, f in zip(params, flags):
            p.requires_grad = f


def _zero(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None


def train(
    data_p: np.ndarray,
    data_q: np.ndarray,
    model_config: ModelConfig | None = None,
    stochastic: StochasticConfig | None = None,
    train_config: TrainConfig | None = None,
    checkpoint_dir: str | Path | None = None,
    model: TranslationModel | None = None,
) -> tuple[TranslationModel, TrainState]:
    """Alternate one Adam step on both discriminators and one on both generators.

    ``data_p`` and ``data_q`` are ``(N, 1, H, W)`` arrays in [-1, 1]. With a
    checkpoint dir, ``step_XXXXXX.ckpt`` files are written every
    ``checkpoint_interval`` steps and ``final.ckpt`` plus ``losses.csv`` at
    the end.
    """
    mc = model_config or ModelConfig()
    tc = train_config or TrainConfig()
    data_p = np.asarray(data_p)
    data_q = np.asarray(data_q)
    if len(data_p) == 0 or len(data_q) == 0:
        raise ValueError("train: both datasets must be non-empty")
    if data_p.shape[1:] != data_q.shape[1:]:
        raise ShapeError(f"train: image dims differ between domains: {data_p.shape[1:]} vs {data_q.shape[1:]}")
    ss_init, ss_data, ss_noise = np.random.SeedSequence(tc.seed).spawn(3)
    if model is None:
        model = TranslationModel(mc, stochastic, seed=ss_init)
    dtype = model.G.down1.weight.dtype
    data_p = data_p.astype(dtype, copy=False)
    data_q = data_q.astype(dtype, copy=False)
    rng_data = np.random.default_rng(ss_data)
    rng = np.random.default_rng(ss_noise)
    state = TrainState(lambda_cyc=mc.lambda_cyc, mode=mc.mode, seed=tc.seed)

    gparams = model.generator_parameters()
    dparams = model.discriminator_parameters()
    opt_g = Adam(gparams, lr=tc.lr, betas=(tc.beta1, tc.beta2))
    opt_d = Adam(dparams, lr=tc.lr, betas=(tc.beta1, tc.beta2))
    ckdir = Path(checkpoint_dir) if checkpoint_dir is not None else None

    for step in range(1, tc.steps + 1):
        x = Tensor._wrap(data_p[rng_data.integers(0, len(data_p), tc.batch_size)])
        y = Tensor._wrap(data_q[rng_data.integers(0, len(data_q), tc.batch_size)])
        try:
            row = _train_step(model, mc, x, y, rng, opt_g, opt_d, gparams, dparams)
        except NonFiniteError as e:
            raise DivergenceError(step, str(e)) from e
        if not np.isfinite(row["total"]):
            raise DivergenceError(step, "non-finite generator loss")
        state.record(row)
        state.step = step
        if ckdir is not None and tc.checkpoint_interval and step % tc.checkpoint_interval == 0:
            model.save(ckdir / f"step_{step:06d}.ckpt")

    if ckdir is not None:
        model.save(ckdir / "final.ckpt")
        state.write_csv(ckdir / "losses.csv")
    return model, state


def _train_step(model, mc, x, y, rng, opt_g, opt_d, gparams, dparams) -> dict[str, float]:
    G, F = model.G, model.F
    fake_q, _ = G(x, rng)
    rec_x = F(fake_q, rng)
    fake_p, _ = F(y, rng)
    rec_y = G(fake_p, rng)

    # discriminators first
    d_q = discriminator_loss(model.D_Q, y, fake_q)
    d_p = discriminator_loss(model.D_P, x, fake_p)
    _zero(dparams)
    T.backward(d_q + d_p)
    opt_d.step()

    with frozen(dparams.values()):
        adv_g = generator_adv_loss(model.D_Q, fake_q)
        adv_f = generator_adv_loss(model.D_P, fake_p)
        cyc = cycle_loss_from_reconstructions(x, rec_x, y, rec_y, mc.mode)
        total = adv_g + adv_f + cyc * mc.lambda_cyc
        if mc.identity_loss:
            idt = l1_loss(G(y, rng)[0], y) + l1_loss(F(x, rng)[0], x)
            total = total + idt * mc.lambda_identity
        _zero(gparams)
        T.backward(total)
    opt_g.step()
    return {
        "adv_G": adv_g.item(),
        "adv_F": adv_f.item(),
        "d_P": d_p.item(),
        "d_Q": d_q.item(),
        "L_cyc": cyc.item(),
        "total": total.item(),
    }


# ---------------------------------------------------------------------------
# sampling


def _batched(fn, x: np.ndarray, chunk: int = 64):
    mus, lvs = [], []
    for i in range(0, len(x), chunk):
        mu, lv = fn(Tensor._wrap(x[i : i + chunk]))
        mus.append(mu.data)
        lvs.append(lv.data)
    return np.concatenate(mus), np.concatenate(lvs)


def _check_same_architecture(members: Sequence[TranslationModel]) -> None:
    ref = {k: v.shape for k, v in members[0].parameters().items()}
    for i, m in enumerate(members[1:], start=1):
        shapes = {k: v.shape for k, v in m.parameters().items()}
        if shapes != ref:
            raise ValueError(f"ensemble member {i} has a different architecture from member 0")


def ensemble_predict(members: Sequence[TranslationModel], x: np.ndarray, direction: str = "P2Q") -> SampleSet:
    """One (mu, var) pair per ensemble member."""
    members = list(members)
    if len(members) < 2:
        raise ValueError(f"ensemble_predict needs >= 2 members, got {len(members)}")
    _check_same_architecture(members)
    dtype = members[0].G.down1.weight.dtype
    x = np.asarray(x, dtype=dtype)
    pairs = []
    with T.no_grad():
        for m in members:
            gen = m.generator(direction)
            mu, lv = _batched(lambda t: gen(t, None), x)
            pairs.append((mu, np.exp(lv.astype(np.float64))))
    return SampleSet.from_pairs(pairs, {"method": Method.ENSEMBLE.value, "members": len(members), "seeds": []})


def sample_predictions(
    model: TranslationModel | Sequence[TranslationModel],
    x: np.ndarray,
    config: StochasticConfig,
    seed: int = 0,
    direction: str = "P2Q",
) -> SampleSet:
    """Draw ``config.samples`` stochastic predictions for a batch ``x``.

    Each pass gets its own RNG substream spawned from ``seed``; the substream
    seeds are logged in ``provenance["seeds"]``.
    """
    if config.samples < 1:
        raise ValueError("sample count M must be >= 1")
    if config.method is Method.ENSEMBLE:
        members = [model] if isinstance(model, TranslationModel) else list(model)
        if any(m.method is not Method.ENSEMBLE for m in members):
            raise ValueError("ENSEMBLE sampling needs models trained as ensemble members")
        if len(members) == 1:
            return _single_pass(members[0], x, direction)
        return ensemble_predict(members, x, direction)
    if not isinstance(model, TranslationModel):
        raise ValueError(f"{config.method.value} sampling takes a single model, got {type(model).__name__}")
    if model.method is not config.method:
        raise ValueError(f"model was built for {model.method.value}, sampling asked for {config.method.value}")
    gen = model.generator(direction)
    dtype = gen.down1.weight.dtype
    x = np.asarray(x, dtype=dtype)
    children = np.random.SeedSequence(seed).spawn(config.samples)
    seeds = [int(c.generate_state(1)[0]) for c in children]
    pairs = []
    with T.no_grad():
        for child in children:
            rng = np.random.default_rng(child)
            mu, lv = _batched(lambda t: gen(t, rng), x)
            pairs.append((mu, np.exp(lv.astype(np.float64))))
    return SampleSet.from_pairs(pairs, {"method": config.method.value, "seed": seed, "seeds": seeds})


def _single_pass(model: TranslationModel, x: np.ndarray, direction: str) -> SampleSet:
    gen = model.generator(direction)
    x = np.asarray(x, dtype=gen.down1.weight.dtype)
    with T.no_grad():
        mu, lv = _batched(lambda t: gen(t, None), x)
    return SampleSet.from_pairs([(mu, np.exp(lv.astype(np.float64)))], {"method": Method.ENSEMBLE.value, "members": 1})
