import numpy as np
import pytest

from motility import imgproc
from motility.errors import ShapeMismatch, WrongChannelCount


def test_greyscale_white_and_black():
    white = np.full((4, 4, 3), 255.0, dtype=np.float32)
    black = np.zeros((4, 4, 3), dtype=np.float32)
    assert np.allclose(imgproc.to_greyscale(white), 255.0, atol=1e-4)
    assert np.allclose(imgproc.to_greyscale(black), 0.0)


def test_greyscale_pure_red():
    red = np.zeros((2, 2, 3), dtype=np.float32)
    red[:, :, 0] = 255.0
    # 0.299 * 255 = 76.245
    assert np.allclose(imgproc.to_greyscale(red), 76.245, atol=1e-4)


def test_greyscale_rejects_single_channel():
    with pytest.raises(WrongChannelCount):
        imgproc.to_greyscale(np.zeros((4, 4, 1), dtype=np.float32))


def test_greyscale_idempotent_through_rgb_roundtrip():
    rng = np.random.default_rng(0)
    frame = rng.uniform(0, 255, size=(16, 12, 3)).astype(np.float32)
    grey = imgproc.to_greyscale(frame)
    again = imgproc.to_greyscale(imgproc.ensure_rgb(grey))
    assert np.array_equal(grey, again)


def test_resize_identity_is_bitwise():
    rng = np.random.default_rng(1)
    frame = rng.uniform(0, 255, size=(9, 7, 3)).astype(np.float32)
    out = imgproc.resize_bilinear(frame, 9, 7)
    assert np.array_equal(out, frame)


def test_resize_constant_stays_constant():
    for out_h, out_w in [(1, 1), (5, 3), (17, 31), (224, 224)]:
        frame = np.full((8, 8, 2), 42.5, dtype=np.float32)
        out = imgproc.resize_bilinear(frame, out_h, out_w)
        assert out.shape == (out_h, out_w, 2)
        assert np.allclose(out, 42.5, atol=1e-4)


def test_resize_checker_to_center():
    # 2x2 [[0,255],[255,0]] down to 1x1 samples the exact center: 127.5
    frame = np.array([[0.0, 255.0], [255.0, 0.0]], dtype=np.float32)[:, :, None]
    out = imgproc.resize_bilinear(frame, 1, 1)
    assert out.shape == (1, 1, 1)
    assert abs(float(out[0, 0, 0]) - 127.5) < 1e-4


def test_resize_preserves_range():
    rng = np.random.default_rng(2)
    for _ in range(10):
        h, w = rng.integers(2, 40, size=2)
        oh, ow = rng.integers(1, 60, size=2)
        frame = rng.uniform(0, 255, size=(h, w, 1)).astype(np.float32)
        out = imgproc.resize_bilinear(frame, int(oh), int(ow))
        assert out.min() >= frame.min() - 1e-3
        assert out.max() <= frame.max() + 1e-3


def test_normalize_modes():
    frame = np.array([[[0.0, 127.5, 255.0]]], dtype=np.float32)
    unit = imgproc.normalize(frame, "unit")
    sym = imgproc.normalize(frame, "symmetric")
    assert np.allclose(unit[0, 0], [0.0, 0.5, 1.0])
    assert np.allclose(sym[0, 0], [-1.0, 0.0, 1.0])


def test_normalize_unit_roundtrip():
    rng = np.random.default_rng(3)
    frame = rng.uniform(0, 255, size=(10, 10, 3)).astype(np.float32)
    back = imgproc.normalize(frame, "unit") * 255.0
    assert np.allclose(back, frame, atol=1e-5)


def test_flatten_row_major():
    frame = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)[:, :, None]
    assert np.array_equal(imgproc.flatten_row_major(frame), [1, 2, 3, 4])
    assert np.array_equal(
        imgproc.flatten_row_major(np.full((1, 1, 1), 7.0, dtype=np.float32)), [7.0]
    )
    vec = imgproc.flatten_row_major(np.zeros((64, 64, 1), dtype=np.float32))
    assert vec.shape == (4096,)


def test_flatten_rejects_rgb():
    with pytest.raises(WrongChannelCount):
        imgproc.flatten_row_major(np.zeros((2, 2, 3), dtype=np.float32))


def test_as_frame_rejects_nonfinite():
    bad = np.full((2, 2, 1), np.nan, dtype=np.float32)
    with pytest.raises(ShapeMismatch):
        imgproc.as_frame(bad)


def test_tensor_cache_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    for shape in [(3,), (4, 5), (2, 3, 4), (2, 2, 2, 2)]:
        t = rng.normal(size=shape).astype(np.float32)
        path = tmp_path / f"t{len(shape)}.ten"
        imgproc.save_tensor(path, t)
        back = imgproc.load_tensor(path)
        assert back.shape == t.shape
        assert np.array_equal(back, t)


def test_tensor_cache_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ten"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(ShapeMismatch):
        imgproc.load_tensor(path)
