"""Posture, gesture and meta-state labels plus the steering-command map.

Labels are plain string enums so they serialize directly into stream files,
reports and wire messages. Enum declaration order fixes the class index used
for residual tie-breaking (lowest index wins).
"""
from __future__ import annotations

from enum import Enum


class MetaState(str, Enum):
    NO_HAND = "NoHand"
    POSTURE = "PostureState"
    TRANSITION = "TransitionState"


class PostureLabel(str, Enum):
    GO_STRAIGHT = "GoStraight"
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    STOP = "Stop"
    REVERSE = "Reverse"


class GestureLabel(str, Enum):
    GO2LEFT = "Go2Left"
    LEFT2GO = "Left2Go"
    GO2RIGHT = "Go2Right"
    RIGHT2GO = "Right2Go"
    GO2STOP = "Go2Stop"
    STOP2GO = "Stop2Go"
    GO2REVERSE = "Go2Reverse"
    REVERSE2GO = "Reverse2Go"


POSTURES = tuple(PostureLabel)
GESTURES = tuple(GestureLabel)

#: Gesture spoken while moving a -> b. Every legal move has GoStraight on one end.
_TRANSITION_OF = {
    (PostureLabel.GO_STRAIGHT, PostureLabel.TURN_LEFT): GestureLabel.GO2LEFT,
    (PostureLabel.TURN_LEFT, PostureLabel.GO_STRAIGHT): GestureLabel.LEFT2GO,
    (PostureLabel.GO_STRAIGHT, PostureLabel.TURN_RIGHT): GestureLabel.GO2RIGHT,
    (PostureLabel.TURN_RIGHT, PostureLabel.GO_STRAIGHT): GestureLabel.RIGHT2GO,
    (PostureLabel.GO_STRAIGHT, PostureLabel.STOP): GestureLabel.GO2STOP,
    (PostureLabel.STOP, PostureLabel.GO_STRAIGHT): GestureLabel.STOP2GO,
    (PostureLabel.GO_STRAIGHT, PostureLabel.REVERSE): GestureLabel.GO2REVERSE,
    (PostureLabel.REVERSE, PostureLabel.GO_STRAIGHT): GestureLabel.REVERSE2GO,
}


def transition_between(a: PostureLabel, b: PostureLabel) -> GestureLabel | None:
    """Gesture performed when moving from posture ``a`` to ``b``, or None."""
    return _TRANSITION_OF.get((a, b))


#: Steering command for every posture and gesture. Gestures that end on a
#: posture carry that posture's command; all X2Go gestures return command 1.
COMMAND_MAP: dict[str, int] = {
    PostureLabel.GO_STRAIGHT.value: 1,
    GestureLabel.LEFT2GO.value: 1,
    GestureLabel.RIGHT2GO.value: 1,
    GestureLabel.STOP2GO.value: 1,
    GestureLabel.REVERSE2GO.value: 1,
    PostureLabel.TURN_LEFT.value: 2,
    GestureLabel.GO2LEFT.value: 2,
    PostureLabel.TURN_RIGHT.value: 3,
    GestureLabel.GO2RIGHT.value: 3,
    PostureLabel.STOP.value: 4,
    GestureLabel.GO2STOP.value: 4,
    PostureLabel.REVERSE.value: 5,
    GestureLabel.GO2REVERSE.value: 5,
}


def map_to_command(label: str | PostureLabel | GestureLabel) -> int:
    """Steering command (1..5) for a posture or gesture label. Total map."""
    key = label.value if isinstance(label, Enum) else str(label)
    return COMMAND_MAP[key]


def is_posture(label: str) -> bool:
    return label in PostureLabel._value2member_map_


def is_gesture(label: str) -> bool:
    return label in GestureLabel._value2member_map_
