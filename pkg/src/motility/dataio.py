"""Dataset manifest parsing, frame sources, and sample-window scheduling.

The manifest is a UTF-8 CSV with header
``participant_id,frame_source,fps,frame_count,age,bmi,abstinence,concentration,progressive,nonprogressive,immotile``.
An empty concentration cell means the value is absent.

A frame source is either a directory of lexicographically ordered images or
a raw sequence file:

* ``.y8seq``  — magic ``Y8SQ``, little-endian u32 width/height/frame_count,
  then frame_count x (height*width) bytes of 8-bit greyscale, row-major.
* ``.rgbseq`` — magic ``RGBS``, same header, 3 bytes per pixel (R, G, B).
"""

from __future__ import annotations

import csv
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadNumeric,
    DataError,
    InconsistentDimensions,
    MissingColumn,
    TargetSumOutOfRange,
    UnreadableFrame,
    VideoTooShort,
)

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = [
    "participant_id", "frame_source", "fps", "frame_count",
    "age", "bmi", "abstinence", "concentration",
    "progressive", "nonprogressive", "immotile",
]

_SEQ_FORMATS = {
    ".y8seq": (b"Y8SQ", 1),
    ".rgbseq": (b"RGBS", 3),
}

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".pgm", ".ppm"}


def round_half_away(x):
    """round() with halves away from zero (Python's round is banker's)."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


@dataclass(frozen=True)
class ParticipantFeatures:
    age: float
    bmi: float
    abstinence: float
    concentration: float | None = None

    def __post_init__(self):
        if not self.age > 0:
            raise DataError(f"age must be > 0, got {self.age}")
        if not self.bmi > 0:
            raise DataError(f"bmi must be > 0, got {self.bmi}")
        if self.abstinence < 0:
            raise DataError(f"abstinence must be >= 0, got {self.abstinence}")
        if self.concentration is not None and self.concentration < 0:
            raise DataError(f"concentration must be >= 0, got {self.concentration}")


@dataclass(frozen=True)
class MotilityTargets:
    """Percentages of progressive / non-progressive / immotile spermatozoa.

    The three categories partition 100% but manual counts round, so sums in
    [98, 102] pass silently, sums in [90, 110] warn, anything else is rejected.
    """
    progressive: float
    nonprogressive: float
    immotile: float

    def __post_init__(self):
        for name, v in self.as_dict().items():
            if not 0.0 <= v <= 100.0:
                raise DataError(f"{name} must be in [0, 100], got {v}")

    def as_dict(self):
        return {
            "progressive": self.progressive,
            "nonprogressive": self.nonprogressive,
            "immotile": self.immotile,
        }

    def as_array(self):
        return np.array(
            [self.progressive, self.nonprogressive, self.immotile], dtype=np.float32
        )

    @property
    def total(self):
        return self.progressive + self.nonprogressive + self.immotile


TARGET_NAMES = ("progressive", "nonprogressive", "immotile")


@dataclass(frozen=True)
class VideoRecord:
    participant_id: str
    frame_source: str
    fps: float
    frame_count: int
    features: ParticipantFeatures
    targets: MotilityTargets

    def __post_init__(self):
        if self.frame_count < 30:
            raise DataError(
                f"participant '{self.participant_id}': frame_count must be >= 30, "
                f"got {self.frame_count}"
            )
        if not self.fps > 0:
            raise DataError(
                f"participant '{self.participant_id}': fps must be > 0, got {self.fps}"
            )


@dataclass(frozen=True)
class SampleWindow:
    video: str
    start_frame: int
    length: int


def _check_target_sum(participant_id, targets: MotilityTargets):
    total = targets.total
    if 98.0 <= total <= 102.0:
        return
    if 90.0 <= total <= 110.0:
        logger.warning(
            "participant '%s': motility targets sum to %.3f (outside [98, 102])",
            participant_id, total,
        )
        return
    raise TargetSumOutOfRange(participant_id, total)


def _parse_float(raw, row_index, col):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise BadNumeric(row_index, col, raw) from None


def load_manifest(path):
    """Parse a manifest CSV into a list of VideoRecord."""
    path = Path(path)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in MANIFEST_COLUMNS:
            if col not in header:
                raise MissingColumn(col)
        for row_index, row in enumerate(reader):
            pid = row["participant_id"].strip()
            conc_raw = (row.get("concentration") or "").strip()
            features = ParticipantFeatures(
                age=_parse_float(row["age"], row_index, "age"),
                bmi=_parse_float(row["bmi"], row_index, "bmi"),
                abstinence=_parse_float(row["abstinence"], row_index, "abstinence"),
                concentration=(
                    _parse_float(conc_raw, row_index, "concentration")
                    if conc_raw else None
                ),
            )
            targets = MotilityTargets(
                progressive=_parse_float(row["progressive"], row_index, "progressive"),
                nonprogressive=_parse_float(
                    row["nonprogressive"], row_index, "nonprogressive"
                ),
                immotile=_parse_float(row["immotile"], row_index, "immotile"),
            )
            _check_target_sum(pid, targets)
            frame_count_f = _parse_float(row["frame_count"], row_index, "frame_count")
            if frame_count_f != int(frame_count_f):
                raise BadNumeric(row_index, "frame_count", row["frame_count"])
            records.append(VideoRecord(
                participant_id=pid,
                frame_source=row["frame_source"].strip(),
                fps=_parse_float(row["fps"], row_index, "fps"),
                frame_count=int(frame_count_f),
                features=features,
                targets=targets,
            ))
    return records


def write_manifest(path, records):
    """Write records back to CSV; inverse of load_manifest on valid lists."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_COLUMNS)
        for rec in records:
            conc = rec.features.concentration
            writer.writerow([
                rec.participant_id,
                rec.frame_source,
                repr(rec.fps),
                rec.frame_count,
                repr(rec.features.age),
                repr(rec.features.bmi),
                repr(rec.features.abstinence),
                "" if conc is None else repr(conc),
                repr(rec.targets.progressive),
                repr(rec.targets.nonprogressive),
                repr(rec.targets.immotile),
            ])


class FrameSource:
    """Random-access reader over a frame source.

    Yields float32 frame tensors of shape (H, W, C) with values in [0, 255].
    One reader per handle; do not share across threads.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._fh = None
        if self.path.is_dir():
            self._files = sorted(
                p for p in self.path.iterdir()
                if p.suffix.lower() in _IMAGE_SUFFIXES
            )
            if not self._files:
                raise UnreadableFrame(0, f"no image files in {self.path}")
            first = self._read_image(0)
            self.height, self.width, self.channels = first.shape
            self.frame_count = len(self._files)
            self._mode = "dir"
        elif self.path.suffix in _SEQ_FORMATS:
            magic, channels = _SEQ_FORMATS[self.path.suffix]
            self._fh = self.path.open("rb")
            got = self._fh.read(4)
            if got != magic:
                raise UnreadableFrame(0, f"bad magic {got!r}, expected {magic!r}")
            self.width, self.height, self.frame_count = struct.unpack(
                "<III", self._fh.read(12)
            )
            self.channels = channels
            self._frame_bytes = self.height * self.width * channels
            self._mode = "seq"
        else:
            raise DataError(f"unsupported frame source: {self.path}")

    def _read_image(self, index):
        from PIL import Image

        path = self._files[index]
        try:
            with Image.open(path) as img:
                arr = np.asarray(img.convert("RGB"), dtype=np.float32)
        except Exception as exc:
            raise UnreadableFrame(index, str(exc)) from exc
        return arr

    def read(self, index):
        if not 0 <= index < self.frame_count:
            raise UnreadableFrame(index, f"index out of range [0, {self.frame_count})")
        if self._mode == "dir":
            arr = self._read_image(index)
            if arr.shape[:2] != (self.height, self.width):
                raise InconsistentDimensions(
                    index, (self.height, self.width), arr.shape[:2]
                )
            return arr
        self._fh.seek(16 + index * self._frame_bytes)
        raw = self._fh.read(self._frame_bytes)
        if len(raw) != self._frame_bytes:
            raise UnreadableFrame(index, "truncated sequence file")
        arr = np.frombuffer(raw, dtype=np.uint8).astype(np.float32)
        return arr.reshape(self.height, self.width, self.channels)

    def frames(self, start, length):
        """List of `length` consecutive frames beginning at `start`."""
        return [self.read(start + i) for i in range(length)]

    def __len__(self):
        return self.frame_count

    def __getitem__(self, index):
        return self.read(index)

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def open_frames(record):
    """Open the frame source of a VideoRecord."""
    source = record.frame_source if isinstance(record, VideoRecord) else record
    return FrameSource(source)


def write_y8seq(path, frames):
    """Write greyscale frames (H, W) or (H, W, 1) uint8-range to a .y8seq file."""
    frames = [np.asarray(f) for f in frames]
    h, w = frames[0].shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"Y8SQ")
        fh.write(struct.pack("<III", w, h, len(frames)))
        for f in frames:
            fh.write(np.clip(f, 0, 255).astype(np.uint8).reshape(h, w).tobytes())


def write_rgbseq(path, frames):
    """Write RGB frames (H, W, 3) uint8-range to a .rgbseq file."""
    frames = [np.asarray(f) for f in frames]
    h, w = frames[0].shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"RGBS")
        fh.write(struct.pack("<III", w, h, len(frames)))
        for f in frames:
            fh.write(np.clip(f, 0, 255).astype(np.uint8).reshape(h, w, 3).tobytes())


def schedule_windows(frame_count, n_samples=250, length=30, video=""):
    """Evenly spaced sample windows across the whole video.

    start_i = round(i * (frame_count - length) / (n_samples - 1)), halves away
    from zero, so the first window starts at 0 and the last at
    frame_count - length.
    """
    if frame_count < length:
        raise VideoTooShort(frame_count, length)
    if n_samples < 1:
        raise DataError(f"n_samples must be >= 1, got {n_samples}")
    span = frame_count - length
    if n_samples == 1:
        starts = [0]
    else:
        starts = [
            round_half_away(i * span / (n_samples - 1)) for i in range(n_samples)
        ]
    return [SampleWindow(video=video, start_frame=s, length=length) for s in starts]


def classical_frame_indices(fps, seconds=60):
    """Frame indices for the handcrafted-feature path.

    Two frames per second (the first and the middle one) for `seconds`
    seconds; always exactly 2 * seconds indices. Indices past the end of a
    short video are the caller's problem (clamp/drop with a warning).
    """
    if not fps > 0:
        raise DataError(f"fps must be > 0, got {fps}")
    indices = []
    for s in range(seconds):
        indices.append(round_half_away(s * fps))
        indices.append(round_half_away(s * fps + fps / 2.0))
    return indices
