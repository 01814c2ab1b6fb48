import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from uqcycle import checkpoint
from uqcycle.checkpoint import MAGIC, CheckpointError


def test_layout_of_a_single_tensor():
    blob = checkpoint.dumps({"w": np.array([[1.0, 2.0, 3.0]], np.float32)})
    expected = MAGIC + struct.pack("<I", 1) + b"w" + struct.pack("<III", 2, 1, 3) + struct.pack("<3f", 1, 2, 3)
    assert blob == expected


def test_roundtrip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    params = {
        "G.down1.weight": rng.standard_normal((8, 1, 3, 3)).astype(np.float32),
        "G.down1.bias": rng.standard_normal(8).astype(np.float32),
        "scalar": np.array(np.float32(np.nan)),
        "unicode.gewicht_ü": np.array([np.inf, -0.0, 1e-45], np.float32),
    }
    path = tmp_path / "m.ckpt"
    checkpoint.save(path, params)
    back = checkpoint.load(path)
    assert list(back) == list(params)
    for k in params:
        assert back[k].shape == params[k].shape
        assert back[k].tobytes() == params[k].tobytes()
    assert checkpoint.dumps(back) == path.read_bytes()


@given(
    st.dictionaries(
        st.text(min_size=1, max_size=12),
        hnp.arrays(np.float32, hnp.array_shapes(min_dims=0, max_dims=4, max_side=4)),
        max_size=5,
    )
)
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(params):
    back = checkpoint.loads(checkpoint.dumps(params))
    assert list(back) == list(params)
    for k, v in params.items():
        assert back[k].tobytes() == v.tobytes() and back[k].shape == v.shape


def test_bad_magic():
    with pytest.raises(CheckpointError):
        checkpoint.loads(b"NOTACKPT")


def test_truncated():
    blob = checkpoint.dumps({"w": np.ones(4, np.float32)})
    with pytest.raises(CheckpointError, match="truncated"):
        checkpoint.loads(blob[:-3])


def test_duplicate_names_rejected():
    one = checkpoint.dumps({"w": np.ones(1, np.float32)})
    with pytest.raises(CheckpointError, match="duplicate"):
        checkpoint.loads(one + one[len(MAGIC):])


def test_save_is_atomic_no_tmp_left(tmp_path):
    checkpoint.save(tmp_path / "a" / "x.ckpt", {"w": np.zeros(2, np.float32)})
    assert sorted(p.name for p in (tmp_path / "a").iterdir()) == ["x.ckpt"]
