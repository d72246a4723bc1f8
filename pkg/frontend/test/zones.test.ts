import { describe, expect, it } from "vitest";

import {
  blendFeatures,
  framesFromPointer,
  SPEED_SCALE,
  speedGate,
  transitionProgress,
  zoneAt,
  ZONES,
} from "../src/zones.js";

const go = ZONES[0];
const left = ZONES[1];

describe("zone blending", () => {
  it("snaps to the anchor when resting inside a zone", () => {
    const feats = blendFeatures(go.x, go.y);
    for (let c = 0; c < 6; c++) {
      expect(feats[c]).toBeCloseTo(go.anchor[c], 9);
    }
  });

  it("snaps anywhere within the zone radius, not just the center", () => {
    const feats = blendFeatures(left.x + 40, left.y - 30);
    for (let c = 0; c < 6; c++) {
      expect(feats[c]).toBeCloseTo(left.anchor[c], 6);
    }
  });

  it("blends the two nearest anchors midway between zones", () => {
    const midX = (go.x + left.x) / 2;
    const feats = blendFeatures(midX, go.y);
    for (let c = 0; c < 6; c++) {
      const mid = (go.anchor[c] + left.anchor[c]) / 2;
      expect(feats[c]).toBeCloseTo(mid, 9); // smoothstep(0.5) = 0.5
    }
  });

  it("progress runs 0 to 1 along the source-target axis", () => {
    expect(transitionProgress(go.x, go.y).u).toBe(0);
    const leaving = transitionProgress(go.x - 100, go.y); // just outside Go
    expect(leaving.source.name).toBe("GoStraight");
    expect(leaving.target.name).toBe("TurnLeft");
    expect(leaving.u).toBeGreaterThan(0.1);
    expect(leaving.u).toBeLessThan(0.5);
    const arriving = transitionProgress(left.x + 100, left.y); // just outside Left
    expect(arriving.source.name).toBe("TurnLeft");
    expect(arriving.u).toBeLessThan(0.5);
    expect(transitionProgress(left.x + 30, left.y).u).toBe(0);
  });

  it("all anchors have unit palm normals", () => {
    for (const zone of ZONES) {
      const n = Math.hypot(zone.anchor[0], zone.anchor[1], zone.anchor[2]);
      expect(n).toBeCloseTo(1.0, 9);
    }
  });
});

describe("framesFromPointer", () => {
  it("emits the dwell anchor at near-zero speed when resting", () => {
    const msg = framesFromPointer({ t: 1.0, x: go.x, y: go.y, speed: 0, present: true });
    expect(msg.type).toBe("frame");
    expect(msg.present).toBe(true);
    expect(msg.speed).toBe(0);
    expect(msg.features[1]).toBeCloseTo(-1.0, 6);
  });

  it("scales pointer speed into palm speed mid-move", () => {
    const midX = (go.x + left.x) / 2; // u = 0.5 where the gate is fully open
    const msg = framesFromPointer({ t: 0.5, x: midX, y: go.y, speed: 800, present: true });
    expect(msg.speed).toBeCloseTo(800 * SPEED_SCALE, 9);
  });

  it("gates speed to zero while dwelling, even with pointer jitter", () => {
    const msg = framesFromPointer({ t: 0.5, x: go.x + 20, y: go.y, speed: 300, present: true });
    expect(msg.speed).toBe(0);
  });

  it("gate is compact: closed near the ends of a move", () => {
    expect(speedGate(0)).toBe(0);
    expect(speedGate(0.29)).toBe(0);
    expect(speedGate(0.5)).toBeCloseTo(1.0, 9);
    expect(speedGate(0.71)).toBe(0);
    expect(speedGate(1)).toBe(0);
  });

  it("forwards absence with present=false and no speed", () => {
    const msg = framesFromPointer({ t: 2.0, x: 0, y: 0, speed: 500, present: false });
    expect(msg.present).toBe(false);
    expect(msg.speed).toBe(0);
  });
});

describe("zoneAt", () => {
  it("finds the zone under the pointer and null elsewhere", () => {
    expect(zoneAt(go.x + 10, go.y - 10)?.name).toBe("GoStraight");
    expect(zoneAt(5, 5)).toBeNull();
  });
});
