import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lesionqvt.errors import DimsMismatch, MissingHeaderField, NonPositiveTarget, UnsupportedElementType
from lesionqvt.volume import (
    BinaryMask,
    ScalarVolume,
    binarize_mask,
    read_volume,
    resample_isotropic,
    resample_mask_nearest,
    write_volume,
)


def _header(path, dims, etype="MET_SHORT", raw="v.raw", extra=()):
    lines = [
        "NDims = 3",
        f"DimSize = {' '.join(map(str, dims))}",
        "ElementSpacing = 1 1 1",
        f"ElementType = {etype}",
        "ElementByteOrderMSB = False",
        *extra,
        f"ElementDataFile = {raw}",
    ]
    path.write_text("\n".join(lines) + "\n")


def test_decode_int16(tmp_path):
    _header(tmp_path / "v.mhd", (2, 2, 1))
    (tmp_path / "v.raw").write_bytes(np.array([0, 100, 200, 300], "<i2").tobytes())
    v = read_volume(tmp_path / "v.mhd")
    assert v.dims == (2, 2, 1)
    # x-fastest: linear order [0,100,200,300] maps to (0,0),(1,0),(0,1),(1,1)
    assert v.data.ravel(order="F").tolist() == [0, 100, 200, 300]
    assert v.data.dtype == np.float64


def test_dims_mismatch(tmp_path):
    _header(tmp_path / "v.mhd", (3, 3, 3))
    (tmp_path / "v.raw").write_bytes(np.zeros(26, "<i2").tobytes())
    with pytest.raises(DimsMismatch):
        read_volume(tmp_path / "v.mhd")


def test_missing_field_and_bad_type(tmp_path):
    (tmp_path / "a.mhd").write_text("NDims = 3\nDimSize = 1 1 1\n")
    with pytest.raises(MissingHeaderField):
        read_volume(tmp_path / "a.mhd")
    _header(tmp_path / "b.mhd", (1, 1, 1), etype="MET_UCHAR")
    with pytest.raises(UnsupportedElementType):
        read_volume(tmp_path / "b.mhd")


def test_float_round_trip_bit_exact(tmp_path, rng):
    data = rng.normal(size=(8, 8, 8)).astype(np.float32).astype(np.float64)
    v = ScalarVolume(data, (0.75, 0.75, 0.75), (1.5, -2.0, 3.25))
    write_volume(v, tmp_path / "f.mhd", "MET_FLOAT")
    back = read_volume(tmp_path / "f.mhd")
    assert np.array_equal(back.data, v.data)
    assert back.spacing == (0.75, 0.75, 0.75)
    assert back.origin == v.origin


def test_int_round_trip_and_idempotent_bytes(tmp_path, rng):
    v = ScalarVolume(rng.integers(-1024, 3000, size=(5, 4, 3)).astype(float))
    write_volume(v, tmp_path / "a.mhd")
    write_volume(read_volume(tmp_path / "a.mhd"), tmp_path / "b.mhd")
    assert (tmp_path / "a.raw").read_bytes() == (tmp_path / "b.raw").read_bytes()
    assert (tmp_path / "a.mhd").read_text().replace("a.raw", "b.raw") == (tmp_path / "b.mhd").read_text()


def test_constant_air_payload(tmp_path):
    write_volume(ScalarVolume(np.full((4, 4, 4), -1000.0)), tmp_path / "c.mhd")
    payload = (tmp_path / "c.raw").read_bytes()
    assert np.array_equal(np.frombuffer(payload, "<i2"), np.full(64, -1000))
    assert "DimSize = 4 4 4" in (tmp_path / "c.mhd").read_text()


def test_binarize():
    v = ScalarVolume(np.array([0, 1, 0, 1], float).reshape(4, 1, 1))
    assert binarize_mask(v, 0.5).data.ravel().tolist() == [False, True, False, True]
    assert not binarize_mask(ScalarVolume(np.zeros((2, 2, 2))), 0.5).data.any()
    assert binarize_mask(v, -0.5).data.all()


def test_resample_constant():
    v = ScalarVolume(np.full((10, 10, 10), 42.0), (1.5, 1.5, 1.5))
    out = resample_isotropic(v, 0.75)
    assert out.dims == (20, 20, 20)
    assert np.all(out.data == 42.0)
    assert out.spacing == (0.75, 0.75, 0.75)


def test_resample_identity(rng):
    v = ScalarVolume(rng.normal(size=(5, 6, 7)), (0.75,) * 3, (3.0, 2.0, 1.0))
    out = resample_isotropic(v, 0.75)
    assert np.array_equal(out.data, v.data)
    assert out.origin == v.origin


def test_resample_ramp_matches_linear_oracle():
    n = 9
    ramp = np.broadcast_to(np.arange(n, dtype=float)[:, None, None], (n, 2, 2))
    out = resample_isotropic(ScalarVolume(ramp), 0.5)
    assert out.dims == (18, 4, 4)
    q = np.arange(18) * 0.5
    expected = np.minimum(q, n - 1)  # clamp beyond the last center
    assert np.allclose(out.data[:, 0, 0], expected, atol=1e-6)


def test_resample_errors():
    with pytest.raises(NonPositiveTarget):
        resample_isotropic(ScalarVolume(np.zeros((2, 2, 2))), 0)
    with pytest.raises(NonPositiveTarget):
        resample_mask_nearest(BinaryMask(np.zeros((2, 2, 2))), -1)


def test_mask_nearest_cases():
    m = np.zeros((3, 3, 3), bool)
    m[1, 1, 1] = True
    out = resample_mask_nearest(BinaryMask(m, (1.5,) * 3), 0.75)
    assert out.dims == (6, 6, 6)
    assert out.count == 8
    # oracle: output j samples input coordinate j*0.5; nearest center, halfway ties upward
    hit = [j for j in range(6) if int(np.floor(j * 0.5 + 0.5)) == 1]
    assert hit == [1, 2]
    assert out.data[1:3, 1:3, 1:3].all()
    full = resample_mask_nearest(BinaryMask(np.ones((3, 4, 5)), (1.5,) * 3), 0.75)
    assert full.dims == (6, 8, 10) and full.data.all()
    assert resample_mask_nearest(BinaryMask(np.zeros((3, 3, 3)), (2.0,) * 3), 0.75).count == 0


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    spacing=st.tuples(*[st.sampled_from([0.5, 0.75, 1.0, 1.3, 2.0])] * 3),
    target=st.sampled_from([0.4, 0.75, 1.1]),
)
def test_resample_bounded_by_input(seed, spacing, target):
    data = np.random.default_rng(seed).normal(0, 100, size=(4, 5, 3))
    out = resample_isotropic(ScalarVolume(data, spacing), target)
    assert out.data.min() >= data.min() - 1e-9
    assert out.data.max() <= data.max() + 1e-9
    assert out.dims == tuple(int(np.ceil(n * s / target - 1e-9)) for n, s in zip(data.shape, spacing))
