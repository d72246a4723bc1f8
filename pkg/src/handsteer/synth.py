"""Synthetic hand-signal generator.

Stands in for the tracked-hand sensor: posture segments hold a per-posture
anchor feature tuple plus zero-mean noise at near-zero palm speed; transition
segments sweep between anchors with a smoothstep ramp and an elevated speed
bump. Every stream carries per-frame truth labels and segment metadata, so
training and evaluation can be scored against exact ground truth.

All randomness flows from one seed; two calls with the same scenario and seed
produce bit-identical streams.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadScenario, IllegalTransition, UnknownPosture
from .frames import DEFAULT_RATE_HZ, LabeledStream, SignalFrame
from .labels import GestureLabel, PostureLabel, transition_between

#: Default per-channel feature noise (std) used for training material.
DEFAULT_NOISE = 0.02

#: Peak palm speed during a transition sweep (mm/s).
DEFAULT_SPEED_PEAK = 250.0

#: The translation bump occupies this central fraction of the sweep: the palm
#: eases into the reorientation before it starts traveling, so any window with
#: meaningful speed content also holds a good stretch of orientation ramp.
BUMP_SUPPORT = 0.4

#: Palm-velocity noise std is noise * this factor (mm/s per unit noise).
SPEED_JITTER = 25.0

#: Per-visit anchor offset factor used for training recordings: each dwell
#: visit holds the anchor plus a constant offset with std = noise * factor
#: per channel. A hand deliberately re-settles between training holds, so the
#: two GoStraight dwells of an out-and-back recording are distinct tight
#: clusters; the training-side clustering depends on that. Evaluation
#: scenarios keep the factor at zero.
TRAINING_VISIT_JITTER = 4.0

#: Anchor (nx, ny, nz, roll, pitch, yaw) per posture; normals get normalized.
#: Deliberately not mirrored: the four directions leading away from the
#: GoStraight anchor are mutually low-coherence (pairwise |cos| <= 0.36), so
#: partially-swept windows cannot be mimicked by signed combinations of the
#: wrong pair's ramps.
ANCHORS: dict[PostureLabel, np.ndarray] = {
    PostureLabel.GO_STRAIGHT: np.array([0.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
    PostureLabel.TURN_LEFT: np.array([-0.72, -0.62, 0.12, 0.95, 0.15, 0.35]),
    PostureLabel.TURN_RIGHT: np.array([0.20, -0.90, -0.38, -0.15, 0.55, -0.95]),
    PostureLabel.STOP: np.array([0.05, -0.15, -0.99, 0.10, -1.10, 0.10]),
    PostureLabel.REVERSE: np.array([-0.42, -0.82, 0.30, -0.75, 0.40, 0.58]),
}

#: Unit direction the palm travels when moving from GoStraight to a posture.
_TRAVEL_DIR: dict[PostureLabel, np.ndarray] = {
    PostureLabel.TURN_LEFT: np.array([-1.0, 0.0, 0.0]),
    PostureLabel.TURN_RIGHT: np.array([1.0, 0.0, 0.0]),
    PostureLabel.STOP: np.array([0.0, 0.0, -1.0]),
    PostureLabel.REVERSE: np.array([0.0, 0.0, 1.0]),
}


def anchor_features(posture: PostureLabel) -> np.ndarray:
    """Anchor 6-tuple with the normal part normalized to unit length."""
    a = ANCHORS[posture].copy()
    a[:3] /= np.linalg.norm(a[:3])
    return a


@dataclass(frozen=True)
class Scenario:
    """A posture itinerary with dwell and transition durations.

    Consecutive postures must differ and every move must have GoStraight on
    one end; reciprocal moves (e.g. TurnLeft -> TurnRight) are rejected.
    """

    postures: tuple[PostureLabel, ...]
    dwells: tuple[float, ...]
    transition: float = 0.5
    rate_hz: float = DEFAULT_RATE_HZ
    noise: float = DEFAULT_NOISE
    speed_peak: float = DEFAULT_SPEED_PEAK
    visit_jitter: float = 0.0  # per-visit anchor offset std, in noise units
    jitter_seed: int | None = None  # offsets drawn from their own stream
    name: str = "scenario"

    def __post_init__(self):
        if len(self.postures) == 0:
            raise BadScenario("scenario has no postures")
        if len(self.dwells) != len(self.postures):
            raise BadScenario(
                f"{len(self.dwells)} dwells for {len(self.postures)} postures"
            )
        for p in self.postures:
            if not isinstance(p, PostureLabel):
                raise UnknownPosture(f"unknown posture {p!r}")
        for a, b in zip(self.postures, self.postures[1:]):
            if a == b:
                raise BadScenario(f"repeated posture {a.value} with no transition")
            if transition_between(a, b) is None:
                raise IllegalTransition(
                    f"{a.value} -> {b.value} does not pass through GoStraight"
                )
        if any(d < 0 for d in self.dwells):
            raise BadScenario("negative dwell duration")
        if self.visit_jitter < 0:
            raise BadScenario("visit_jitter must be >= 0")
        if self.transition <= 0 and len(self.postures) > 1:
            raise BadScenario("transition duration must be positive")
        if self.rate_hz <= 0:
            raise BadScenario("rate must be positive")
        if self.total_duration() <= 0:
            raise BadScenario("scenario duration is zero")

    def total_duration(self) -> float:
        return sum(self.dwells) + self.transition * (len(self.postures) - 1)


@dataclass(frozen=True)
class _Segment:
    label: str
    start: int  # first frame index
    stop: int  # one past last frame index
    kind: str  # "dwell" | "transition"
    a: PostureLabel
    b: PostureLabel | None = None


def _segment_plan(scenario: Scenario) -> tuple[list[_Segment], int]:
    """Frame-exact segment layout. Boundaries are rounded cumulative times."""
    bounds = [0.0]
    labels: list[tuple[str, str, PostureLabel, PostureLabel | None]] = []
    for i, (p, d) in enumerate(zip(scenario.postures, scenario.dwells)):
        bounds.append(bounds[-1] + d)
        labels.append((p.value, "dwell", p, None))
        if i < len(scenario.postures) - 1:
            nxt = scenario.postures[i + 1]
            gesture = transition_between(p, nxt)
            assert gesture is not None
            bounds.append(bounds[-1] + scenario.transition)
            labels.append((gesture.value, "transition", p, nxt))
    frame_bounds = [int(round(b * scenario.rate_hz)) for b in bounds]
    segments = [
        _Segment(label=lab, start=frame_bounds[k], stop=frame_bounds[k + 1],
                 kind=kind, a=a, b=b)
        for k, (lab, kind, a, b) in enumerate(labels)
    ]
    n = frame_bounds[-1]
    if n < 1:
        raise BadScenario("scenario too short to produce frames")
    return segments, n


def _smoothstep(u: np.ndarray | float):
    return 3.0 * u * u - 2.0 * u * u * u


def _speed_bump(u: np.ndarray) -> np.ndarray:
    """Raised-cosine translation-speed profile on the central part of a
    sweep, peaking at 1 mid-transition and exactly zero outside the support."""
    centered = (u - 0.5) / BUMP_SUPPORT
    inside = np.abs(centered) < 0.5
    out = np.zeros_like(u)
    out[inside] = np.cos(np.pi * centered[inside]) ** 2
    return out


def generate(scenario: Scenario, seed: int = 0) -> LabeledStream:
    """Render a scenario into a labeled frame stream.

    Deterministic given (scenario, seed). Truth labels change only at the
    segment boundaries declared by the scenario; segment frame ranges are
    recorded in ``stream.meta["segments"]``.
    """
    segments, n = _segment_plan(scenario)
    rng = np.random.default_rng(seed)
    dt = 1.0 / scenario.rate_hz

    # One constant offset per dwell visit (zero-length dwells still anchor
    # the transitions around them, so they draw an offset too). A dedicated
    # jitter stream lets several recordings share one offset sequence, so
    # their dwell content stays comparable across recordings.
    jitter_rng = (
        rng if scenario.jitter_seed is None
        else np.random.default_rng(scenario.jitter_seed)
    )
    offsets = {
        k: jitter_rng.normal(0.0, 1.0, size=6)
        * (scenario.noise * scenario.visit_jitter)
        for k, seg in enumerate(segments)
        if seg.kind == "dwell"
    }

    def dwell_anchor(k: int) -> np.ndarray:
        return anchor_features(segments[k].a) + offsets[k]

    frames: list[SignalFrame] = []
    truth: list[str] = []
    for k, seg in enumerate(segments):
        length = seg.stop - seg.start
        if length == 0:
            continue
        feat_noise = rng.normal(0.0, 1.0, size=(length, 6)) * scenario.noise
        vel_noise = rng.normal(0.0, 1.0, size=(length, 3)) * (
            scenario.noise * SPEED_JITTER
        )
        if seg.kind == "dwell":
            base = np.tile(dwell_anchor(k), (length, 1))
            vel = vel_noise
        else:
            u = (np.arange(length) + 0.5) / length
            a, b = dwell_anchor(k - 1), dwell_anchor(k + 1)
            ramp = _smoothstep(u)[:, None]
            base = a[None, :] + ramp * (b - a)[None, :]
            far = seg.b if seg.a == PostureLabel.GO_STRAIGHT else seg.a
            sign = 1.0 if seg.a == PostureLabel.GO_STRAIGHT else -1.0
            bump = _speed_bump(u)
            vel = (
                sign * scenario.speed_peak * bump[:, None] * _TRAVEL_DIR[far][None, :]
                + vel_noise
            )
        feats = base + feat_noise
        for i in range(length):
            normal = feats[i, :3]
            normal = normal / np.linalg.norm(normal)
            frames.append(
                SignalFrame(
                    t=(seg.start + i) * dt,
                    palm_normal=normal,
                    roll=float(feats[i, 3]),
                    pitch=float(feats[i, 4]),
                    yaw=float(feats[i, 5]),
                    palm_velocity=vel[i],
                )
            )
            truth.append(seg.label)

    meta = {
        "name": scenario.name,
        "rate_hz": scenario.rate_hz,
        "noise": scenario.noise,
        "seed": seed,
        "segments": [
            (s.label, s.start, s.stop) for s in segments if s.stop > s.start
        ],
    }
    return LabeledStream(frames=frames, truth=truth, meta=meta)


# --- canned scenario builders -----------------------------------------------


def bilateral_training(far: PostureLabel, total: float = 20.0,
                       transition: float = 0.5, noise: float = DEFAULT_NOISE,
                       rate_hz: float = DEFAULT_RATE_HZ,
                       jitter_seed: int | None = None) -> Scenario:
    """Out-and-back gesture recording: Go -> far -> Go with no far dwell.

    The hand sweeps out and immediately returns, so the stream is exactly two
    gesture phases of equal length meeting at the apex: the outbound phase
    (GoStraight dwell + outbound sweep) and the return phase (return sweep +
    GoStraight dwell). The apex is the declared truth boundary; the per-visit
    anchor offsets keep the two GoStraight dwells distinguishable.
    """
    dwell = (total - 2.0 * transition) / 2.0
    if dwell <= 0:
        raise BadScenario("total too short for two transitions")
    return Scenario(
        postures=(PostureLabel.GO_STRAIGHT, far, PostureLabel.GO_STRAIGHT),
        dwells=(dwell, 0.0, dwell),
        transition=transition,
        noise=noise,
        rate_hz=rate_hz,
        visit_jitter=TRAINING_VISIT_JITTER,
        jitter_seed=jitter_seed,
        name=f"train-{far.value}",
    )


def bilateral_boundary_frame(stream: LabeledStream) -> int:
    """The apex of an out-and-back training stream: the frame where the
    outbound gesture segment hands over to the return segment."""
    segs = stream.meta.get("segments", [])
    gestures = [s for s in segs if s[0] in GestureLabel._value2member_map_]
    if len(gestures) != 2 or gestures[0][2] != gestures[1][1]:
        raise ValueError("stream is not an out-and-back training recording")
    return gestures[0][2]


def posture_recording(posture: PostureLabel, total: float = 20.0,
                      noise: float = DEFAULT_NOISE,
                      rate_hz: float = DEFAULT_RATE_HZ) -> Scenario:
    """A single held posture."""
    return Scenario(
        postures=(posture,),
        dwells=(total,),
        noise=noise,
        rate_hz=rate_hz,
        name=f"posture-{posture.value}",
    )


def bilateral_eval(far: PostureLabel, total: float = 20.0,
                   noise: float = DEFAULT_NOISE,
                   rate_hz: float = DEFAULT_RATE_HZ) -> Scenario:
    """Go -> far -> Go visit with real dwells, for evaluation streams."""
    inner = total - 1.0  # two 0.5 s transitions
    return Scenario(
        postures=(PostureLabel.GO_STRAIGHT, far, PostureLabel.GO_STRAIGHT),
        dwells=(inner * 0.4, inner * 0.2, inner * 0.4),
        noise=noise,
        rate_hz=rate_hz,
        name=f"eval-{far.value}",
    )


def random_walk(seed: int, total: float = 20.0, noise: float = DEFAULT_NOISE,
                rate_hz: float = DEFAULT_RATE_HZ,
                transition: float = 0.5) -> Scenario:
    """Random posture itinerary alternating through GoStraight.

    Each visit adds a random far posture and a return to GoStraight, with
    dwells drawn in [1.5, 2.5] s; the final GoStraight dwell absorbs the
    remainder so the stream lasts exactly ``total`` seconds.
    """
    rng = np.random.default_rng(seed)
    others = [p for p in PostureLabel if p != PostureLabel.GO_STRAIGHT]
    postures: list[PostureLabel] = [PostureLabel.GO_STRAIGHT]
    dwells: list[float] = [float(rng.uniform(1.5, 2.5))]
    while True:
        d_far = float(rng.uniform(1.5, 2.5))
        d_back = float(rng.uniform(1.5, 2.5))
        committed = sum(dwells) + transition * (len(postures) - 1)
        if committed + d_far + d_back + 2.0 * transition > total:
            break
        postures.append(others[int(rng.integers(len(others)))])
        postures.append(PostureLabel.GO_STRAIGHT)
        dwells.extend([d_far, d_back])
    committed = sum(dwells) + transition * (len(postures) - 1)
    dwells[-1] += total - committed
    return Scenario(
        postures=tuple(postures),
        dwells=tuple(dwells),
        transition=transition,
        noise=noise,
        rate_hz=rate_hz,
        name=f"walk-{seed}",
    )


def transition_midpoints(stream: LabeledStream) -> list[float]:
    """Midpoint frame of every transition segment in a generated stream."""
    segs = stream.meta.get("segments", [])
    return [
        (start + stop) / 2.0
        for label, start, stop in segs
        if label in GestureLabel._value2member_map_
    ]


TRANSITION_POSTURES = (
    PostureLabel.TURN_LEFT,
    PostureLabel.TURN_RIGHT,
    PostureLabel.STOP,
    PostureLabel.REVERSE,
)


def standard_training_set(seed: int = 0, noise: float = DEFAULT_NOISE,
                          rate_hz: float = DEFAULT_RATE_HZ) -> dict[str, LabeledStream]:
    """The nine §-standard recordings: 4 bilateral transitions + 5 postures.

    Keys are `transition-<Far>` and `posture-<Posture>`.
    """
    out: dict[str, LabeledStream] = {}
    # One shared offset sequence: the operator re-settles the same way in
    # every recording, so dwell content stays comparable across pairs.
    jitter_seed = seed + 777
    for i, far in enumerate(TRANSITION_POSTURES):
        out[f"transition-{far.value}"] = generate(
            bilateral_training(far, noise=noise, rate_hz=rate_hz,
                               jitter_seed=jitter_seed),
            seed=seed + i,
        )
    for i, p in enumerate(PostureLabel):
        out[f"posture-{p.value}"] = generate(
            posture_recording(p, noise=noise, rate_hz=rate_hz), seed=seed + 100 + i
        )
    return out


def standard_eval_scenarios(noise: float = DEFAULT_NOISE,
                            rate_hz: float = DEFAULT_RATE_HZ) -> list[Scenario]:
    """Twelve evaluation itineraries: one per bilateral pair plus eight walks."""
    scenarios = [bilateral_eval(far, noise=noise, rate_hz=rate_hz)
                 for far in TRANSITION_POSTURES]
    for k in range(8):
        scenarios.append(random_walk(1000 + k, noise=noise, rate_hz=rate_hz))
    return scenarios
