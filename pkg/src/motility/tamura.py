"""Tamura texture descriptor (coarseness, contrast, 16-bin directionality).

The per-frame descriptor serializes to 18 values: [coarseness, contrast,
16 directionality bins]. The per-video feature vector for the classical
models concatenates the descriptors of the 120 scheduled frames (two per
second for the first minute), length 2160.

Conventions pinned here (and mirrored by the brute-force test oracles):

* coarseness scales k = 0..4 with nominal window size 2^k; windows are
  centered on the pixel, which forces odd sides 2^k + 1 for k >= 1 (an
  even window cannot be centered on the grid, and off-center anchoring
  breaks the exact 180-degree-rotation invariance). The comparison offset
  is 2^(k-1), rounded up to 1 at k = 0.
* directionality measures edge orientation: theta = (atan2(dV, dH) + pi/2)
  mod pi, so vertical stripes vote at pi/2.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import classical_frame_indices, open_frames
from .errors import FrameTooSmall
from .imgproc import as_frame, ensure_grey, load_tensor, save_tensor

logger = logging.getLogger(__name__)

COARSENESS_SCALES = 5          # k = 0..4, window sizes 1..16
COARSENESS_MARGIN = 16         # interior margin so every A_k access is in-bounds
DIRECTIONALITY_BINS = 16
EDGE_THRESHOLD = 12.0
DESCRIPTOR_DIM = 1 + 1 + DIRECTIONALITY_BINS
FRAMES_PER_VIDEO = 120
VIDEO_FEATURE_DIM = FRAMES_PER_VIDEO * DESCRIPTOR_DIM


@dataclass(frozen=True)
class TamuraVector:
    coarseness: float
    contrast: float
    directionality: np.ndarray

    def as_array(self):
        out = np.empty(DESCRIPTOR_DIM, dtype=np.float32)
        out[0] = self.coarseness
        out[1] = self.contrast
        out[2:] = self.directionality
        return out


def _grey_plane(frame):
    frame = as_frame(frame, channels=1)
    return frame[:, :, 0].astype(np.float64)


def _window_means(img, k):
    """(H, W) array of centered window means; NaN where the window leaves the frame."""
    h_img, w_img = img.shape
    if k == 0:
        return img.copy()
    h = 1 << (k - 1)          # half window
    s = 2 * h + 1             # window side, centered on the pixel
    ii = np.zeros((h_img + 1, w_img + 1), dtype=np.float64)
    ii[1:, 1:] = np.cumsum(np.cumsum(img, axis=0), axis=1)
    out = np.full((h_img, w_img), np.nan)
    sums = (
        ii[s:, s:] - ii[:-s, s:] - ii[s:, :-s] + ii[:-s, :-s]
    )
    out[h:h_img - h, h:w_img - h] = sums / float(s * s)
    return out


def coarseness(frame):
    """Mean best texel scale over interior pixels; 1.0 for a constant image."""
    img = _grey_plane(frame)
    h_img, w_img = img.shape
    if h_img < 4 * COARSENESS_MARGIN or w_img < 4 * COARSENESS_MARGIN:
        raise FrameTooSmall((h_img, w_img), 4 * COARSENESS_MARGIN)

    m = COARSENESS_MARGIN
    ys = slice(m, h_img - m)
    energies = []
    for k in range(COARSENESS_SCALES):
        a = _window_means(img, k)
        d = (1 << (k - 1)) if k >= 1 else 1
        eh = np.abs(a[ys, m + d:w_img - m + d] - a[ys, m - d:w_img - m - d])
        ev = np.abs(
            a[m + d:h_img - m + d, m:w_img - m]
            - a[m - d:h_img - m - d, m:w_img - m]
        )
        energies.append(np.maximum(eh, ev))
    stacked = np.stack(energies, axis=0)
    best_k = np.argmax(stacked, axis=0)       # first max -> smallest k on ties
    s_best = np.float64(2.0) ** best_k
    return float(s_best.mean())


def contrast(frame):
    """sigma / kurtosis^(1/4); zero for (near-)constant images."""
    img = _grey_plane(frame)
    mu = img.mean()
    var = ((img - mu) ** 2).mean()
    sigma = np.sqrt(var)
    if sigma < 1e-9:
        return 0.0
    mu4 = ((img - mu) ** 4).mean()
    alpha4 = mu4 / (var * var)
    return float(sigma / alpha4 ** 0.25)


def directionality(frame, bins=DIRECTIONALITY_BINS, edge_threshold=EDGE_THRESHOLD):
    """Normalized edge-orientation histogram over [0, pi).

    Prewitt gradients, magnitude (|dH| + |dV|) / 2; only pixels at or above
    edge_threshold vote. All-zero histogram when nothing votes.
    """
    img = _grey_plane(frame)
    h_img, w_img = img.shape
    if h_img < 3 or w_img < 3:
        raise FrameTooSmall((h_img, w_img), 3)

    # Prewitt responses on the interior
    c = img
    dh = (
        c[:-2, 2:] + c[1:-1, 2:] + c[2:, 2:]
        - c[:-2, :-2] - c[1:-1, :-2] - c[2:, :-2]
    )
    dv = (
        c[2:, :-2] + c[2:, 1:-1] + c[2:, 2:]
        - c[:-2, :-2] - c[:-2, 1:-1] - c[:-2, 2:]
    )
    mag = (np.abs(dh) + np.abs(dv)) / 2.0
    votes = mag >= edge_threshold
    hist = np.zeros(bins, dtype=np.float64)
    if not votes.any():
        return hist.astype(np.float32)
    theta = np.mod(np.arctan2(dv[votes], dh[votes]) + np.pi / 2.0, np.pi)
    idx = np.minimum((theta / (np.pi / bins)).astype(np.intp), bins - 1)
    hist = np.bincount(idx, minlength=bins).astype(np.float64)
    hist /= hist.sum()
    return hist.astype(np.float32)


def describe_frame(frame, bins=DIRECTIONALITY_BINS, edge_threshold=EDGE_THRESHOLD):
    """Full 18-dim descriptor of a single-channel frame."""
    return TamuraVector(
        coarseness=coarseness(frame),
        contrast=contrast(frame),
        directionality=directionality(frame, bins=bins, edge_threshold=edge_threshold),
    )


def video_feature_vector(record, frames=None):
    """2160-dim per-video feature vector for the classical models.

    Two frames per second for the first 60 seconds; indices past the end of
    a short video are dropped and the vector is zero-padded with a warning.
    """
    own_handle = frames is None
    if own_handle:
        frames = open_frames(record)
    try:
        indices = classical_frame_indices(record.fps)
        out = np.zeros(VIDEO_FEATURE_DIM, dtype=np.float32)
        dropped = 0
        for slot, idx in enumerate(indices):
            if idx >= frames.frame_count:
                dropped += 1
                continue
            grey = ensure_grey(frames.read(idx))
            out[slot * DESCRIPTOR_DIM:(slot + 1) * DESCRIPTOR_DIM] = (
                describe_frame(grey).as_array()
            )
        if dropped:
            logger.warning(
                "participant '%s': %d of %d scheduled frames beyond the video end; "
                "feature vector zero-padded",
                record.participant_id, dropped, len(indices),
            )
        return out
    finally:
        if own_handle:
            frames.close()


def save_feature_matrix(path, matrix, ids):
    """Dataset feature cache: one rank-2 .ten plus a row -> participant CSV."""
    matrix = np.asarray(matrix, dtype=np.float32)
    if matrix.shape[0] != len(ids):
        raise ValueError(f"{matrix.shape[0]} rows vs {len(ids)} ids")
    path = Path(path)
    save_tensor(path, matrix)
    with path.with_suffix(".csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "participant_id"])
        for i, pid in enumerate(ids):
            writer.writerow([i, pid])


def load_feature_matrix(path):
    """Inverse of save_feature_matrix; returns (matrix, ids)."""
    path = Path(path)
    matrix = load_tensor(path)
    ids = []
    with path.with_suffix(".csv").open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            ids.append(row["participant_id"])
    return matrix, ids
