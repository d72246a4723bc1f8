// Fixed-rate frame sender decoupled from the render loop: exactly one
// outbound frame per tick while the socket is open, responses only enqueued
// and drained by the caller.

import { SpeedTracker } from "./kinematics.js";
import { decodeServiceMessage, encodeFrame, ServiceMessage } from "./messages.js";
import { framesFromPointer, PointerFrame, Zone, ZONES } from "./zones.js";

export interface PointerState {
  x: number;
  y: number;
  present: boolean;
}

export interface SocketLike {
  readonly readyState: number;
  send(data: string): void;
}

const OPEN = 1;

export class FrameSender {
  readonly inbox: ServiceMessage[] = [];
  private tracker = new SpeedTracker();
  private started: number | null = null;
  private framesSent = 0;

  constructor(
    private readonly socket: SocketLike,
    private readonly zones: Zone[] = ZONES,
    readonly rateHz = 50,
  ) {}

  /** Tick at the send rate: sample the pointer state, emit one frame. */
  tick(nowSeconds: number, pointer: PointerState): void {
    if (this.socket.readyState !== OPEN) return;
    if (this.started === null) this.started = nowSeconds;
    let frame: PointerFrame;
    if (pointer.present) {
      const speed = this.tracker.update(nowSeconds, pointer.x, pointer.y);
      frame = { t: nowSeconds - this.started, x: pointer.x, y: pointer.y, speed, present: true };
    } else {
      this.tracker.reset();
      frame = { t: nowSeconds - this.started, x: 0, y: 0, speed: 0, present: false };
    }
    this.socket.send(encodeFrame(framesFromPointer(frame, this.zones)));
    this.framesSent += 1;
  }

  onMessage(raw: string): void {
    this.inbox.push(decodeServiceMessage(raw));
  }

  /** Drain pending service responses in arrival order. */
  drain(): ServiceMessage[] {
    return this.inbox.splice(0, this.inbox.length);
  }

  get sent(): number {
    return this.framesSent;
  }
}
