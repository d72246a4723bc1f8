"""handsteer: continuous posture/gesture recognition for steering commands."""

__version__ = "0.1.0"
