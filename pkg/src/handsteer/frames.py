"""Frame ingestion, sliding-window extraction and small signal utilities.

A frame carries the palm normal (unit 3-vector), the three orientation
angles and the palm velocity. Observations are windows of ``W`` consecutive
frames flattened channel-major into a single column: channel ``c`` occupies
positions ``[c*W, (c+1)*W)`` in the order (nx, ny, nz, roll, pitch, yaw).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    NonFiniteInput,
    TargetTooSmall,
    TooShort,
    WrongWindowLength,
    ZeroNormal,
)

#: Feature channels per frame, in flattening order.
CHANNELS = ("nx", "ny", "nz", "roll", "pitch", "yaw")
N_CHANNELS = len(CHANNELS)

#: Default sliding-window width (frames) and sampling rate (Hz).
DEFAULT_WINDOW = 25
DEFAULT_RATE_HZ = 50.0


@dataclass(frozen=True)
class SignalFrame:
    """One timestamped sample of the tracked hand.

    ``palm_normal`` is unit length after ingestion; ``palm_velocity`` is in
    mm/s. All fields are finite.
    """

    t: float
    palm_normal: np.ndarray
    roll: float
    pitch: float
    yaw: float
    palm_velocity: np.ndarray

    def features(self) -> np.ndarray:
        """The 6 classification channels (nx, ny, nz, roll, pitch, yaw)."""
        return np.array(
            [
                self.palm_normal[0],
                self.palm_normal[1],
                self.palm_normal[2],
                self.roll,
                self.pitch,
                self.yaw,
            ]
        )

    def speed(self) -> float:
        """Magnitude of the palm velocity vector (mm/s)."""
        return float(np.linalg.norm(self.palm_velocity))


@dataclass(frozen=True)
class FeatureColumn:
    """Channel-major flattened window of N_CHANNELS * W values."""

    values: np.ndarray
    window_end_index: int = -1


@dataclass(frozen=True)
class SpeedColumn:
    """Per-frame palm-speed magnitudes over one window (all >= 0)."""

    values: np.ndarray
    window_end_index: int = -1


@dataclass
class LabeledStream:
    """A frame sequence plus optional per-frame ground-truth labels."""

    frames: list[SignalFrame]
    truth: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.truth is not None and len(self.truth) != len(self.frames):
            raise ValueError(
                f"truth length {len(self.truth)} != frame count {len(self.frames)}"
            )
        ts = [f.t for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("frame timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.frames)


def ingest_frame(raw: Sequence[float]) -> SignalFrame:
    """Build a frame from the 10 raw values (t nx ny nz roll pitch yaw vx vy vz).

    The palm normal is renormalized to unit length. Non-finite input is
    rejected, as is a normal with norm below 1e-9.
    """
    vals = np.asarray(raw, dtype=float)
    if vals.shape != (10,):
        raise WrongWindowLength(f"expected 10 raw values, got shape {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise NonFiniteInput(f"non-finite value in raw frame: {vals!r}")
    normal = vals[1:4]
    norm = np.linalg.norm(normal)
    if norm < 1e-9:
        raise ZeroNormal(f"palm normal norm {norm:g} below 1e-9")
    if abs(norm - 1.0) > 1e-12:  # keep re-ingestion exactly idempotent
        normal = normal / norm
    return SignalFrame(
        t=float(vals[0]),
        palm_normal=normal,
        roll=float(vals[4]),
        pitch=float(vals[5]),
        yaw=float(vals[6]),
        palm_velocity=vals[7:10].copy(),
    )


def make_window(frames: Sequence[SignalFrame], end_index: int = -1) -> FeatureColumn:
    """Flatten exactly W frames channel-major into one feature column."""
    w = len(frames)
    if w < 1:
        raise WrongWindowLength("empty window")
    feats = np.stack([f.features() for f in frames], axis=1)  # (6, W)
    return FeatureColumn(values=feats.reshape(-1), window_end_index=end_index)


def make_speed_window(frames: Sequence[SignalFrame], end_index: int = -1) -> SpeedColumn:
    """Per-frame speed magnitudes for exactly W frames."""
    if len(frames) < 1:
        raise WrongWindowLength("empty window")
    return SpeedColumn(
        values=np.array([f.speed() for f in frames]), window_end_index=end_index
    )


def check_window_length(frames: Sequence[SignalFrame], width: int) -> None:
    if len(frames) != width:
        raise WrongWindowLength(f"expected {width} frames, got {len(frames)}")


def unflatten(column: np.ndarray, width: int) -> np.ndarray:
    """Inverse of the channel-major flatten: (6*W,) -> (6, W)."""
    column = np.asarray(column)
    if column.size != N_CHANNELS * width:
        raise WrongWindowLength(
            f"column of length {column.size} does not hold {N_CHANNELS}x{width}"
        )
    return column.reshape(N_CHANNELS, width)


def window_end_indices(n_frames: int, width: int) -> range:
    """End indices of the scan windows: W .. N-1 (N - W windows in total).

    The window ending at ``width - 1`` (the only one starting at frame 0) is
    deliberately excluded so a 1000-frame stream yields exactly 975 windows.
    """
    return range(width, n_frames)


def feature_matrix(stream: LabeledStream | Sequence[SignalFrame], width: int = DEFAULT_WINDOW):
    """All scan windows of a stream as columns of a (6*W, N-W) matrix.

    Returns ``(X, end_indices)``.
    """
    frames = stream.frames if isinstance(stream, LabeledStream) else list(stream)
    n = len(frames)
    ends = window_end_indices(n, width)
    if len(ends) < 1:
        raise TooShort(f"stream of {n} frames yields no windows at W={width}")
    feats = np.stack([f.features() for f in frames], axis=1)  # (6, N)
    cols = np.empty((N_CHANNELS * width, len(ends)))
    for j, e in enumerate(ends):
        cols[:, j] = feats[:, e - width + 1 : e + 1].reshape(-1)
    return cols, np.array(ends)


def speed_matrix(stream: LabeledStream | Sequence[SignalFrame], width: int = DEFAULT_WINDOW):
    """All scan windows of the per-frame speed signal, shape (W, N-W)."""
    frames = stream.frames if isinstance(stream, LabeledStream) else list(stream)
    n = len(frames)
    ends = window_end_indices(n, width)
    if len(ends) < 1:
        raise TooShort(f"stream of {n} frames yields no windows at W={width}")
    speeds = np.array([f.speed() for f in frames])
    cols = np.empty((width, len(ends)))
    for j, e in enumerate(ends):
        cols[:, j] = speeds[e - width + 1 : e + 1]
    return cols, np.array(ends)


def resample_to_length(signal: Sequence[float], length: int) -> np.ndarray:
    """Linearly resample a signal at ``length`` uniform points over [0, 1].

    Endpoints are preserved; a signal resampled to its own length is returned
    unchanged (up to float arithmetic).
    """
    sig = np.asarray(signal, dtype=float)
    if sig.ndim != 1 or sig.size < 2:
        raise TooShort(f"need a 1-D signal of length >= 2, got shape {sig.shape}")
    if length < 2:
        raise TooShort(f"target length must be >= 2, got {length}")
    src = np.linspace(0.0, 1.0, sig.size)
    dst = np.linspace(0.0, 1.0, length)
    return np.interp(dst, src, sig)


def zero_pad(vector: Sequence[float], target: int) -> np.ndarray:
    """Append zeros to reach ``target`` length."""
    vec = np.asarray(vector, dtype=float)
    if target < vec.size:
        raise TargetTooSmall(f"target {target} < input length {vec.size}")
    out = np.zeros(target, dtype=float)
    out[: vec.size] = vec
    return out


# --- stream file format -----------------------------------------------------
#
# One frame per line: `t nx ny nz roll pitch yaw vx vy vz [label]`.
# Floats are written with repr (shortest exact round-trip), so a file read
# back reproduces the stream bit for bit.


def _frame_fields(frame: SignalFrame) -> list[float]:
    return [
        frame.t,
        frame.palm_normal[0],
        frame.palm_normal[1],
        frame.palm_normal[2],
        frame.roll,
        frame.pitch,
        frame.yaw,
        frame.palm_velocity[0],
        frame.palm_velocity[1],
        frame.palm_velocity[2],
    ]


def write_stream(path: str | Path, stream: LabeledStream) -> None:
    lines = []
    for i, frame in enumerate(stream.frames):
        parts = [repr(float(v)) for v in _frame_fields(frame)]
        if stream.truth is not None:
            parts.append(stream.truth[i])
        lines.append(" ".join(parts))
    Path(path).write_text("\n".join(lines) + "\n")


def read_stream(path: str | Path) -> LabeledStream:
    frames: list[SignalFrame] = []
    truth: list[str] = []
    labeled = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (10, 11):
            raise ValueError(f"{path}:{lineno}: expected 10 or 11 fields, got {len(parts)}")
        has_label = len(parts) == 11
        if labeled is None:
            labeled = has_label
        elif labeled != has_label:
            raise ValueError(f"{path}:{lineno}: inconsistent label column")
        frames.append(ingest_frame([float(p) for p in parts[:10]]))
        if has_label:
            truth.append(parts[10])
    return LabeledStream(frames=frames, truth=truth if labeled else None)


def iter_stream_frames(stream: LabeledStream) -> Iterable[SignalFrame]:
    return iter(stream.frames)
