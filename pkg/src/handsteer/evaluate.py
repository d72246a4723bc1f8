"""Window-level scoring of recognizer output against generator truth.

Per-frame truth labels become per-window truth with an overlap rule: a window
overlapping one transition segment by more than W/2 frames inherits that
gesture label, otherwise it takes the majority posture in its span. Windows
within W indices of a truth change are the boundary band, where window-level
truth is inherently ambiguous; accuracies are reported both with the band
included and excluded.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .frames import LabeledStream
from .labels import GESTURES, POSTURES, is_gesture, map_to_command
from .recognizer import RecognizerModel, StepEvent, run_stream

#: Canonical label order for confusion matrices: 5 postures then 8 gestures.
ALL_LABELS = tuple(p.value for p in POSTURES) + tuple(g.value for g in GESTURES)


def window_truths(stream: LabeledStream, width: int) -> list[str]:
    """Per-window truth labels for the scan windows (ends W .. N-1)."""
    labels = stream.truth
    if labels is None:
        raise ValueError("stream has no truth labels")
    n = len(labels)
    out: list[str] = []
    for e in range(width, n):
        span = labels[e - width + 1 : e + 1]
        gesture_counts = Counter(l for l in span if is_gesture(l))
        if gesture_counts:
            best, count = gesture_counts.most_common(1)[0]
            if count > width / 2:
                out.append(best)
                continue
        postures = [l for l in span if not is_gesture(l)]
        out.append(Counter(postures).most_common(1)[0][0])
    return out


def boundary_band(truths: list[str], width: int) -> np.ndarray:
    """Boolean mask of windows within ``width`` indices of a truth change."""
    t = np.asarray(truths)
    mask = np.zeros(t.size, dtype=bool)
    for b in np.flatnonzero(t[:-1] != t[1:]):
        lo = max(0, b - width + 1)
        hi = min(t.size, b + 1 + width)
        mask[lo:hi] = True
    return mask


@dataclass
class EvalResult:
    name: str
    events: list[StepEvent]
    truths: list[str]
    band: np.ndarray
    raw_accuracy: float
    raw_accuracy_excl: float
    command_accuracy: float
    command_accuracy_excl: float
    confusion: np.ndarray  # rows truth, cols predicted, ALL_LABELS order
    seconds_per_window: float
    windows: int = 0
    windows_excl: int = 0
    labeled: bool = True

    def raw_errors_excl(self) -> int:
        return round((1.0 - self.raw_accuracy_excl) * self.windows_excl)


def evaluate_stream(
    model: RecognizerModel, stream: LabeledStream, name: str = "stream"
) -> EvalResult:
    """Replay a stream through the recognizer and score it.

    Unlabeled streams still produce events; accuracy fields are NaN.
    """
    t0 = time.perf_counter()
    events = run_stream(model, stream)
    elapsed = time.perf_counter() - t0
    per_window = elapsed / max(len(events), 1)

    if stream.truth is None:
        return EvalResult(
            name=name,
            events=events,
            truths=[],
            band=np.zeros(0, dtype=bool),
            raw_accuracy=float("nan"),
            raw_accuracy_excl=float("nan"),
            command_accuracy=float("nan"),
            command_accuracy_excl=float("nan"),
            confusion=np.zeros((len(ALL_LABELS), len(ALL_LABELS)), dtype=int),
            seconds_per_window=per_window,
            windows=len(events),
            windows_excl=0,
            labeled=False,
        )

    truths = window_truths(stream, model.width)
    if len(truths) != len(events):
        raise AssertionError(
            f"{len(truths)} truth windows vs {len(events)} events"
        )
    band = boundary_band(truths, model.width)
    pred = np.array([ev.label for ev in events])
    truth_arr = np.array(truths)
    raw_ok = pred == truth_arr

    truth_cmds = np.array([map_to_command(t) for t in truths])
    filt_cmds = np.array([ev.filtered_command for ev in events])
    cmd_ok = filt_cmds == truth_cmds

    keep = ~band
    index = {lab: i for i, lab in enumerate(ALL_LABELS)}
    confusion = np.zeros((len(ALL_LABELS), len(ALL_LABELS)), dtype=int)
    for t, p in zip(truth_arr[keep], pred[keep]):
        confusion[index[t], index[p]] += 1

    return EvalResult(
        name=name,
        events=events,
        truths=truths,
        band=band,
        raw_accuracy=float(raw_ok.mean()),
        raw_accuracy_excl=float(raw_ok[keep].mean()) if keep.any() else float("nan"),
        command_accuracy=float(cmd_ok.mean()),
        command_accuracy_excl=float(cmd_ok[keep].mean()) if keep.any() else float("nan"),
        confusion=confusion,
        seconds_per_window=per_window,
        windows=len(events),
        windows_excl=int(keep.sum()),
    )
