"""Procedural image domains and Netpbm (PGM P5) I/O.

Domain A images are nested-ellipse "phantoms" with a fixed per-tissue
intensity table. Domain B renders the same geometry through a monotone
decreasing intensity remap (tissue contrast inverted), so A <-> B is a
bijection and cycle consistency is attainable. Training sets draw A and B
from independent seeds: no pairing is available to the model.

Out-of-distribution generators cover near-OOD geometry (rectangles and
triangles with unseen intensities), uniform noise, and smooth "natural"
gradient-and-blob scenes. Every image is a pure function of (spec, index).
"""
from __future__ import annotations

import enum
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

MIN_IMAGE_SIZE = 16
TISSUE_LEVELS_A = (0.75, -0.35, 0.35, -0.7)
GEOMETRY_OOD_LEVELS = (0.05, 0.95, -0.1, 0.6)
LEVEL_JITTER = 0.05
_REMAP_GAIN = 1.5


class DatasetKind(str, enum.Enum):
    PHANTOM_A = "PHANTOM_A"
    PHANTOM_B = "PHANTOM_B"
    PHANTOM_OOD_GEOMETRY = "PHANTOM_OOD_GEOMETRY"
    NOISE_OOD = "NOISE_OOD"
    NATURAL_OOD = "NATURAL_OOD"
    EXTERNAL_PGM = "EXTERNAL_PGM"


@dataclass(frozen=True)
class DatasetSpec:
    kind: DatasetKind = DatasetKind.PHANTOM_A
    count: int = 32
    image_size: int = 32
    seed: int = 0
    texture_std: float = 0.04
    path: str | None = None
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DatasetKind(self.kind))
        if self.kind is DatasetKind.EXTERNAL_PGM:
            if not self.path:
                raise ValueError("EXTERNAL_PGM dataset needs a path")
            return
        if self.count < 1:
            raise ValueError(f"dataset count must be >= 1, got {self.count}")
        if self.image_size < MIN_IMAGE_SIZE:
            raise ValueError(f"image_size must be >= {MIN_IMAGE_SIZE}, got {self.image_size}")

    @property
    def label(self) -> str:
        return self.name or self.kind.value.lower()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


@dataclass
class ImageBatch:
    data: np.ndarray  # (N, 1, H, W) float32 in [-1, 1]
    ids: list[str]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.data.ndim != 4 or self.data.shape[1] != 1:
            raise ValueError(f"ImageBatch data must be (N, 1, H, W), got {self.data.shape}")
        if len(self.ids) != len(self.data):
            raise ValueError("ImageBatch: ids and data lengths differ")

    def __len__(self) -> int:
        return len(self.ids)


# ---------------------------------------------------------------------------
# intensity remap between the two phantom domains


def remap_b(v):
    """A-level -> B-level. Monotone decreasing bijection of [-1, 1]."""
    return -np.tanh(_REMAP_GAIN * np.asarray(v)) / np.tanh(_REMAP_GAIN)


def remap_b_inverse(u):
    return np.arctanh(-np.asarray(u) * np.tanh(_REMAP_GAIN)) / _REMAP_GAIN


# ---------------------------------------------------------------------------
# rendering helpers


def _grid(size: int):
    c = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    return np.meshgrid(c, c, indexing="ij")  # yy, xx in [-1, 1]


def _ellipse_mask(yy, xx, cy, cx, ay, ax, theta):
    ct, st = np.cos(theta), np.sin(theta)
    dy, dx = yy - cy, xx - cx
    u = dx * ct + dy * st
    v = -dx * st + dy * ct
    return (u / ax) ** 2 + (v / ay) ** 2 <= 1.0


def _smooth(img: np.ndarray) -> np.ndarray:
    p = np.pad(img, 1, mode="edge")
    h, w = img.shape
    acc = np.zeros_like(img)
    for i in range(3):
        for j in range(3):
            acc += p[i : i + h, j : j + w]
    return acc / 9.0


def _texture(rng: np.random.Generator, size: int, std: float) -> np.ndarray:
    t = _smooth(rng.standard_normal((size, size)))
    return t / (t.std() + 1e-12) * std


def phantom_labels(size: int, rng: np.random.Generator) -> np.ndarray:
    """Label map of 2-4 nested ellipses: 0 background, k = nesting depth."""
    yy, xx = _grid(size)
    depth = int(rng.integers(2, 5))
    labels = np.zeros((size, size), dtype=np.int8)
    cy, cx = rng.uniform(-0.08, 0.08, 2)
    ay, ax = rng.uniform(0.62, 0.85, 2)
    theta = rng.uniform(0, np.pi)
    region = np.ones_like(labels, dtype=bool)
    for k in range(1, depth + 1):
        mask = _ellipse_mask(yy, xx, cy, cx, ay, ax, theta) & region
        labels[mask] = k
        region = mask
        shrink = rng.uniform(0.55, 0.78)
        cy += rng.uniform(-0.15, 0.15) * ay * (1 - shrink)
        cx += rng.uniform(-0.15, 0.15) * ax * (1 - shrink)
        ay, ax = ay * shrink, ax * rng.uniform(0.55, 0.78)
        theta += rng.uniform(-0.4, 0.4)
    return labels


def tissue_levels_a(depth: int, rng: np.random.Generator) -> np.ndarray:
    base = np.array(TISSUE_LEVELS_A[:depth])
    return base + rng.uniform(-LEVEL_JITTER, LEVEL_JITTER, depth)


def _render(labels: np.ndarray, levels: np.ndarray, texture: np.ndarray) -> np.ndarray:
    img = np.full(labels.shape, -1.0)
    inside = labels > 0
    img[inside] = levels[labels[inside] - 1] + texture[inside]
    return np.clip(img, -1.0, 1.0)


def gen_phantom_pair(
    spec: DatasetSpec, rng: np.random.Generator, return_labels: bool = False
):
    """One A image and its B counterpart sharing a single geometry draw.

    Returns ``(a, b)`` as ``(H, W)`` float arrays, or ``(a, b, labels,
    levels_a)`` with ``return_labels=True``.
    """
    size = spec.image_size
    if size < MIN_IMAGE_SIZE:
        raise ValueError(f"image_size must be >= {MIN_IMAGE_SIZE}, got {size}")
    geo_rng, tex_a, tex_b = rng.spawn(3)
    labels = phantom_labels(size, geo_rng)
    depth = int(labels.max())
    levels_a = tissue_levels_a(depth, geo_rng)
    a = _render(labels, levels_a, _texture(tex_a, size, spec.texture_std))
    b = _render(labels, remap_b(levels_a), _texture(tex_b, size, spec.texture_std * 1.5))
    if return_labels:
        return a, b, labels, levels_a
    return a, b


def _image_rng(spec: DatasetSpec, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([spec.seed, index]))


def _tri_mask(yy, xx, pts):
    (y0, x0), (y1, x1), (y2, x2) = pts

    def edge(ya, xa, yb, xb):
        return (xx - xa) * (yb - ya) - (yy - ya) * (xb - xa)

    d0, d1, d2 = edge(y0, x0, y1, x1), edge(y1, x1, y2, x2), edge(y2, x2, y0, x0)
    neg = (d0 < 0) | (d1 < 0) | (d2 < 0)
    pos = (d0 > 0) | (d1 > 0) | (d2 > 0)
    return ~(neg & pos)


def _geometry_image(spec: DatasetSpec, rng: np.random.Generator) -> tuple[np.ndarray, list[str]]:
    size = spec.image_size
    yy, xx = _grid(size)
    img = np.full((size, size), -1.0)
    shapes = []
    n = int(rng.integers(2, 5))
    for k in range(n):
        level = GEOMETRY_OOD_LEVELS[k % len(GEOMETRY_OOD_LEVELS)] + rng.uniform(-LEVEL_JITTER, LEVEL_JITTER)
        if rng.random() < 0.5:
            cy, cx = rng.uniform(-0.5, 0.5, 2)
            hy, hx = rng.uniform(0.15, 0.6, 2)
            mask = (np.abs(yy - cy) <= hy) & (np.abs(xx - cx) <= hx)
            shapes.append("rectangle")
        else:
            mask = _tri_mask(yy, xx, rng.uniform(-0.9, 0.9, (3, 2)))
            shapes.append("triangle")
        img[mask] = level
    img = img + np.where(img > -1.0, _texture(rng, size, spec.texture_std), 0.0)
    return np.clip(img, -1.0, 1.0), shapes


def _natural_image(spec: DatasetSpec, rng: np.random.Generator) -> np.ndarray:
    size = spec.image_size
    yy, xx = _grid(size)
    rgb = np.empty((3, size, size))
    for ch in range(3):
        ang = rng.uniform(0, 2 * np.pi)
        field_ = rng.uniform(0.2, 0.6) * (np.cos(ang) * xx + np.sin(ang) * yy)
        for _ in range(int(rng.integers(3, 7))):
            cy, cx = rng.uniform(-1, 1, 2)
            s = rng.uniform(0.1, 0.5)
            field_ += rng.uniform(-1, 1) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
        rgb[ch] = field_
    gray = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]
    gray += _texture(rng, size, spec.texture_std)
    lo, hi = gray.min(), gray.max()
    return (gray - lo) / (hi - lo) * 2.0 - 1.0 if hi > lo else np.zeros_like(gray)


def gen_ood(spec: DatasetSpec) -> ImageBatch:
    """Synthesize an OOD batch of ``spec.kind``."""
    kind = spec.kind
    imgs, shapes = [], []
    for i in range(spec.count):
        rng = _image_rng(spec, i)
        if kind is DatasetKind.PHANTOM_OOD_GEOMETRY:
            img, sh = _geometry_image(spec, rng)
            shapes.append(sh)
        elif kind is DatasetKind.NOISE_OOD:
            img = rng.uniform(-1.0, 1.0, (spec.image_size, spec.image_size))
        elif kind is DatasetKind.NATURAL_OOD:
            img = _natural_image(spec, rng)
        else:
            raise ValueError(f"gen_ood: {kind.value} is not an OOD generator")
        imgs.append(img)
    batch = _batch(imgs, spec)
    if shapes:
        batch.meta["shapes"] = shapes
    return batch


def gen_domain(spec: DatasetSpec) -> ImageBatch:
    """A PHANTOM_A or PHANTOM_B set; image i uses seed (spec.seed, i)."""
    if spec.kind not in (DatasetKind.PHANTOM_A, DatasetKind.PHANTOM_B):
        raise ValueError(f"gen_domain: {spec.kind.value} is not a phantom domain")
    pick = 0 if spec.kind is DatasetKind.PHANTOM_A else 1
    imgs = [gen_phantom_pair(spec, _image_rng(spec, i))[pick] for i in range(spec.count)]
    return _batch(imgs, spec)


def _batch(imgs: Sequence[np.ndarray], spec: DatasetSpec) -> ImageBatch:
    data = np.stack(imgs)[:, None].astype(np.float32)
    ids = [f"{spec.label}_{i:05d}" for i in range(len(imgs))]
    return ImageBatch(data, ids, {"kind": spec.kind.value, "seed": spec.seed})


def make_dataset(spec: DatasetSpec) -> ImageBatch:
    if spec.kind in (DatasetKind.PHANTOM_A, DatasetKind.PHANTOM_B):
        return gen_domain(spec)
    if spec.kind is DatasetKind.EXTERNAL_PGM:
        return load_pgm_dir(spec.path)
    return gen_ood(spec)


# ---------------------------------------------------------------------------
# PGM (P5)


class PgmError(ValueError):
    pass


_WS = b" \t\n\r\v\f"
_INT = re.compile(rb"\d+")


def _parse_header(blob: bytes, path) -> tuple[int, int, int, int]:
    """Return (width, height, maxval, data_offset)."""
    if blob[:2] != b"P5":
        raise PgmError(f"{path}: bad magic {blob[:2]!r} at byte offset 0 (expected b'P5')")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(blob):
            raise PgmError(f"{path}: truncated header at byte offset {pos}")
        if blob[pos] == ord("#"):
            end = blob.find(b"\n", pos)
            pos = len(blob) if end < 0 else end + 1
            continue
        if blob[pos] in _WS:
            pos += 1
            continue
        m = _INT.match(blob, pos)
        if m is None:
            raise PgmError(f"{path}: malformed header field at byte offset {pos}")
        fields.append((int(m.group()), pos))
        pos = m.end()
    if pos >= len(blob) or blob[pos] not in _WS:
        raise PgmError(f"{path}: missing whitespace after maxval at byte offset {pos}")
    (w, pw), (h, ph), (maxval, pm) = fields
    if w < 1:
        raise PgmError(f"{path}: invalid width {w} at byte offset {pw}")
    if h < 1:
        raise PgmError(f"{path}: invalid height {h} at byte offset {ph}")
    if not 0 < maxval < 65536:
        raise PgmError(f"{path}: invalid maxval {maxval} at byte offset {pm}")
    return w, h, maxval, pos + 1


def read_pgm_raw(path: str | os.PathLike) -> tuple[np.ndarray, int]:
    blob = Path(path).read_bytes()
    w, h, maxval, off = _parse_header(blob, path)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = w * h * dtype.itemsize
    if len(blob) - off < need:
        raise PgmError(f"{path}: pixel data truncated at byte offset {len(blob)} (need {need} bytes from {off})")
    pix = np.frombuffer(blob, dtype=dtype, count=w * h, offset=off).reshape(h, w)
    if pix.max(initial=0) > maxval:
        raise PgmError(f"{path}: pixel value exceeds maxval {maxval}")
    return pix.astype(np.uint16), maxval


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a P5 image and map ``[0, maxval]`` linearly onto ``[-1, 1]``."""
    pix, maxval = read_pgm_raw(path)
    return (pix.astype(np.float64) / maxval * 2.0 - 1.0).astype(np.float32)


def encode_pgm(img: np.ndarray, bits: int = 8) -> bytes:
    """Encode a [-1, 1] image as P5; values outside the range are clipped."""
    if bits not in (8, 16):
        raise ValueError("bits must be 8 or 16")
    maxval = 255 if bits == 8 else 65535
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"encode_pgm expects a 2-D image, got {arr.shape}")
    q = np.rint((np.clip(arr, -1.0, 1.0) + 1.0) * 0.5 * maxval)
    pix = q.astype(">u2" if bits == 16 else "u1")
    h, w = arr.shape
    return f"P5\n{w} {h}\n{maxval}\n".encode("ascii") + pix.tobytes()


def encode_pgm_unit(img: np.ndarray, bits: int = 16) -> bytes:
    """Encode a [0, 1] map (e.g. a normalized uncertainty image)."""
    return encode_pgm(np.asarray(img, dtype=np.float64) * 2.0 - 1.0, bits)


def write_pgm(path: str | os.PathLike, img: np.ndarray, bits: int = 8) -> None:
    Path(path).write_bytes(encode_pgm(img, bits))


def load_pgm_dir(path: str | os.PathLike) -> ImageBatch:
    """Load every ``*.pgm`` in ``path`` (sorted by name) as one batch."""
    d = Path(path)
    if not d.is_dir():
        raise FileNotFoundError(f"not a directory: {d}")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() == ".pgm")
    if not files:
        raise FileNotFoundError(f"no .pgm files in {d}")
    imgs = [read_pgm(f) for f in files]
    ref = imgs[0].shape
    bad = [f.name for f, im in zip(files, imgs) if im.shape != ref]
    if bad:
        raise PgmError(f"mixed image dimensions in {d}: expected {ref[1]}x{ref[0]}, offending files: {', '.join(bad)}")
    return ImageBatch(np.stack(imgs)[:, None], [f.stem for f in files], {"kind": DatasetKind.EXTERNAL_PGM.value, "path": str(d)})


def write_batch(batch: ImageBatch, out_dir: str | os.PathLike, bits: int = 8) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for img_id, img in zip(batch.ids, batch.data):
        p = out / f"{img_id}.pgm"
        write_pgm(p, img[0], bits)
        paths.append(p)
    return paths
