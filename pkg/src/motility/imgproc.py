"""Core pixel kernels and the frame tensor convention.

A frame tensor is a float32 numpy array of shape (height, width, channels),
channel-last, values finite. Greyscale frames keep an explicit singleton
channel axis. All kernels here are pure functions.

Tensors can be cached on disk in the ``.ten`` container: magic ``TEN1``,
one u8 dtype code (0 = float32), one u8 rank, little-endian u32 dims,
then the payload little-endian.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import ShapeMismatch, WrongChannelCount

# Rec. 601 luma weights, pinned for the whole pipeline.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

TEN_MAGIC = b"TEN1"
_DTYPE_CODES = {0: np.dtype("<f4")}


def as_frame(data, channels=None):
    """Coerce array-like input into a valid frame tensor.

    Raises ShapeMismatch for wrong rank / non-finite values and
    WrongChannelCount when `channels` is given and does not match.
    """
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ShapeMismatch(f"frame tensor must be rank 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeMismatch("frame tensor contains non-finite values")
    if channels is not None and arr.shape[2] != channels:
        raise WrongChannelCount(channels, arr.shape[2])
    return arr


def to_greyscale(frame):
    """Collapse an RGB frame to one luma channel (0.299 R + 0.587 G + 0.114 B)."""
    frame = as_frame(frame, channels=3)
    wr, wg, wb = LUMA_WEIGHTS
    # accumulate in float64 so grey -> replicate -> grey is exactly idempotent
    planes = frame.astype(np.float64)
    grey = wr * planes[:, :, 0] + wg * planes[:, :, 1] + wb * planes[:, :, 2]
    return grey[:, :, None].astype(np.float32)


def ensure_grey(frame):
    """Single-channel view of a frame: pass-through for C=1, luma for C=3."""
    frame = as_frame(frame)
    if frame.shape[2] == 1:
        return frame
    return to_greyscale(frame)


def ensure_rgb(frame):
    """Three-channel view of a frame: pass-through for C=3, replicate for C=1."""
    frame = as_frame(frame)
    if frame.shape[2] == 3:
        return frame
    if frame.shape[2] == 1:
        return np.repeat(frame, 3, axis=2)
    raise WrongChannelCount(3, frame.shape[2])


def resize_bilinear(frame, out_h, out_w):
    """Bilinear resize with pixel-center alignment.

    Source coordinate for output pixel i is (i + 0.5) * in/out - 0.5,
    clamped to the valid range; interpolation is per channel.
    """
    frame = as_frame(frame)
    if out_h < 1 or out_w < 1:
        raise ShapeMismatch(f"output size must be >= 1, got ({out_h}, {out_w})")
    in_h, in_w = frame.shape[:2]
    if (out_h, out_w) == (in_h, in_w):
        return frame.copy()

    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (in_h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (in_w / out_w) - 0.5
    ys = np.clip(ys, 0.0, in_h - 1.0)
    xs = np.clip(xs, 0.0, in_w - 1.0)

    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0).astype(np.float32)[:, None, None]
    wx = (xs - x0).astype(np.float32)[None, :, None]

    top = frame[y0[:, None], x0[None, :]] * (1 - wx) + frame[y0[:, None], x1[None, :]] * wx
    bot = frame[y1[:, None], x0[None, :]] * (1 - wx) + frame[y1[:, None], x1[None, :]] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)


def normalize(frame, mode="symmetric"):
    """Map [0, 255] pixel values to a network input range.

    "unit" -> [0, 1]; "symmetric" -> [-1, 1].
    """
    frame = as_frame(frame)
    if mode == "unit":
        return frame / np.float32(255.0)
    if mode == "symmetric":
        return frame / np.float32(127.5) - np.float32(1.0)
    raise ValueError(f"unknown normalization mode {mode!r}")


def flatten_row_major(frame):
    """Flatten a single-channel frame to a 1-D vector in row-major order."""
    frame = as_frame(frame, channels=1)
    return frame.reshape(-1).copy()


# --- .ten container ---

def save_tensor(path, tensor, atomic=True):
    """Write a float32 tensor to a .ten file (atomically by default)."""
    arr = np.ascontiguousarray(np.asarray(tensor, dtype="<f4"))
    header = TEN_MAGIC + struct.pack("<BB", 0, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    path = os.fspath(path)
    if atomic:
        dirname = os.path.dirname(path) or "."
        fd, tmp = tempfile.mkstemp(dir=dirname, suffix=".ten.tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(header)
                fh.write(arr.tobytes())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    else:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes())


def load_tensor(path):
    """Read a .ten file back into a numpy array."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TEN_MAGIC:
            raise ShapeMismatch(f"{path}: bad magic {magic!r}, expected {TEN_MAGIC!r}")
        code, rank = struct.unpack("<BB", fh.read(2))
        if code not in _DTYPE_CODES:
            raise ShapeMismatch(f"{path}: unknown dtype code {code}")
        dims = struct.unpack(f"<{rank}I", fh.read(4 * rank))
        dtype = _DTYPE_CODES[code]
        count = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(fh.read(count * dtype.itemsize), dtype=dtype, count=count)
    return data.reshape(dims).astype(np.float32)
