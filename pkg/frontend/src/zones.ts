// Dwell zones map pointer positions onto the posture anchor features the
// recognition model was trained on. Resting inside a zone emits that
// posture's anchor; positions between zones blend the nearest anchors.

import { FrameMessage } from "./messages.js";

export interface Zone {
  name: string;
  x: number;
  y: number;
  radius: number;
  /** Anchor features (nx, ny, nz, roll, pitch, yaw); the palm-normal part is
   * unit length. Must match the signal generator's anchor table. */
  anchor: [number, number, number, number, number, number];
}

function normalized(
  raw: [number, number, number, number, number, number],
): [number, number, number, number, number, number] {
  const n = Math.hypot(raw[0], raw[1], raw[2]);
  return [raw[0] / n, raw[1] / n, raw[2] / n, raw[3], raw[4], raw[5]];
}

export const ARENA = { width: 800, height: 600 };

export const ZONES: Zone[] = [
  { name: "GoStraight", x: 400, y: 300, radius: 70, anchor: normalized([0.0, -1.0, 0.0, 0.0, 0.0, 0.0]) },
  { name: "TurnLeft", x: 120, y: 300, radius: 70, anchor: normalized([-0.72, -0.62, 0.12, 0.95, 0.15, 0.35]) },
  { name: "TurnRight", x: 680, y: 300, radius: 70, anchor: normalized([0.2, -0.9, -0.38, -0.15, 0.55, -0.95]) },
  { name: "Stop", x: 400, y: 90, radius: 70, anchor: normalized([0.05, -0.15, -0.99, 0.1, -1.1, 0.1]) },
  { name: "Reverse", x: 400, y: 510, radius: 70, anchor: normalized([-0.42, -0.82, 0.3, -0.75, 0.4, 0.58]) },
];

/** Pointer px/s -> palm mm/s; swift zone-to-zone moves land in the speed
 * range the transition dictionary was trained on. */
export const SPEED_SCALE = 0.5;

/** The palm model's translation bump occupies this central fraction of a
 * transition; the emitted speed follows the same profile so live moves look
 * like the signals the model was trained on. */
export const BUMP_SUPPORT = 0.4;

export interface TransitionProgress {
  source: Zone;
  target: Zone;
  /** 0 resting in the source zone .. 1 arriving at the target zone. */
  u: number;
}

function rimDistance(x: number, y: number, zone: Zone): number {
  return Math.max(Math.hypot(x - zone.x, y - zone.y) - zone.radius, 0);
}

/** Where the pointer sits between its two nearest zones. */
export function transitionProgress(
  x: number,
  y: number,
  zones: Zone[] = ZONES,
): TransitionProgress {
  const sorted = [...zones].sort(
    (a, b) => rimDistance(x, y, a) - rimDistance(x, y, b),
  );
  const source = sorted[0];
  const target = sorted[1];
  const dSource = rimDistance(x, y, source);
  const dTarget = rimDistance(x, y, target);
  const u = dSource <= 0 ? 0 : dSource / (dSource + dTarget);
  return { source, target, u };
}

function smoothstep(u: number): number {
  return 3 * u * u - 2 * u * u * u;
}

/** Anchor features along the source -> target path: exact anchors inside a
 * zone, a smoothstep blend of the two nearest anchors in between. */
export function blendFeatures(
  x: number,
  y: number,
  zones: Zone[] = ZONES,
): [number, number, number, number, number, number] {
  const { source, target, u } = transitionProgress(x, y, zones);
  const s = smoothstep(u);
  const out: [number, number, number, number, number, number] = [0, 0, 0, 0, 0, 0];
  for (let c = 0; c < 6; c++) {
    out[c] = source.anchor[c] + s * (target.anchor[c] - source.anchor[c]);
  }
  return out;
}

/** Raised-cosine gate over the central part of a transition: zero while
 * dwelling, one mid-move. */
export function speedGate(u: number): number {
  const centered = (u - 0.5) / BUMP_SUPPORT;
  if (Math.abs(centered) >= 0.5) return 0;
  const c = Math.cos(Math.PI * centered);
  return c * c;
}

export interface PointerFrame {
  t: number;
  x: number;
  y: number;
  speed: number; // smoothed pointer speed, px/s
  present: boolean;
}

/** One pointer sample -> one wire frame for the service. */
export function framesFromPointer(p: PointerFrame, zones: Zone[] = ZONES): FrameMessage {
  if (!p.present) {
    return { type: "frame", t: p.t, features: [0, -1, 0, 0, 0, 0], speed: 0, present: false };
  }
  const { u } = transitionProgress(p.x, p.y, zones);
  return {
    type: "frame",
    t: p.t,
    features: blendFeatures(p.x, p.y, zones),
    speed: p.speed * SPEED_SCALE * speedGate(u),
    present: true,
  };
}

export function zoneAt(x: number, y: number, zones: Zone[] = ZONES): Zone | null {
  for (const zone of zones) {
    if (Math.hypot(x - zone.x, y - zone.y) <= zone.radius) return zone;
  }
  return null;
}
