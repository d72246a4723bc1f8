// Browser entry point: pointer movements over the zone canvas stream to the
// recognition service; returned commands drive the wheelchair rendering.

import { applyCommand, DEFAULT_PARAMS, initialPose, WheelchairPose } from "./chair.js";
import { FrameSender, PointerState } from "./sender.js";
import { ARENA, ZONES, zoneAt } from "./zones.js";

const params = new URLSearchParams(window.location.search);
const host = params.get("host") ?? "127.0.0.1";
const port = params.get("port") ?? "8765";

const canvas = document.getElementById("arena") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const commandEl = document.getElementById("command")!;
const labelEl = document.getElementById("label")!;

const pointer: PointerState = { x: 0, y: 0, present: false };
canvas.addEventListener("pointermove", (e) => {
  const rect = canvas.getBoundingClientRect();
  pointer.x = ((e.clientX - rect.left) / rect.width) * ARENA.width;
  pointer.y = ((e.clientY - rect.top) / rect.height) * ARENA.height;
  pointer.present = true;
});
canvas.addEventListener("pointerleave", () => {
  pointer.present = false;
});

let pose: WheelchairPose = initialPose();
let lastCommand: number | null = null;
let lastLabel = "-";
let meta = "NoHand";

const socket = new WebSocket(`ws://${host}:${port}`);
const sender = new FrameSender(socket);
socket.onopen = () => {
  statusEl.textContent = `connected to ${host}:${port}`;
};
socket.onclose = () => {
  statusEl.textContent = "disconnected";
};
socket.onerror = () => {
  statusEl.textContent = "connection error";
};
socket.onmessage = (event) => {
  // only enqueue here; the render loop drains
  sender.onMessage(String(event.data));
};

const sendPeriodMs = 1000 / sender.rateHz;
setInterval(() => {
  sender.tick(performance.now() / 1000, pointer);
}, sendPeriodMs);

const chairDt = 1 / sender.rateHz;

function drainResponses(): void {
  for (const msg of sender.drain()) {
    if (msg.type === "error") {
      statusEl.textContent = `protocol error: ${msg.code}`;
      continue;
    }
    meta = msg.meta;
    if (msg.meta === "NoHand" || msg.command === undefined) {
      continue; // chair holds its last commanded motion
    }
    lastCommand = msg.command;
    lastLabel = msg.label ?? "-";
    pose = applyCommand(pose, msg.command, chairDt);
  }
}

function drawZones(): void {
  for (const zone of ZONES) {
    const inside = zoneAt(pointer.x, pointer.y) === zone && pointer.present;
    ctx.beginPath();
    ctx.arc(zone.x, zone.y, zone.radius, 0, 2 * Math.PI);
    ctx.fillStyle = inside ? "#cde6ff" : "#f0f0f0";
    ctx.fill();
    ctx.strokeStyle = "#888";
    ctx.stroke();
    ctx.fillStyle = "#333";
    ctx.textAlign = "center";
    ctx.font = "14px sans-serif";
    ctx.fillText(zone.name, zone.x, zone.y + 4);
  }
}

function drawChair(): void {
  const sx = ARENA.width / DEFAULT_PARAMS.arenaWidth;
  const sy = ARENA.height / DEFAULT_PARAMS.arenaHeight;
  const px = pose.x * sx;
  const py = pose.y * sy;
  ctx.save();
  ctx.translate(px, py);
  ctx.rotate(pose.heading);
  ctx.fillStyle = "#2b6cb0";
  ctx.fillRect(-16, -10, 32, 20);
  ctx.fillStyle = "#f6ad55";
  ctx.beginPath();
  ctx.moveTo(16, 0);
  ctx.lineTo(6, -6);
  ctx.lineTo(6, 6);
  ctx.fill();
  ctx.restore();
}

function render(): void {
  drainResponses();
  ctx.clearRect(0, 0, ARENA.width, ARENA.height);
  drawZones();
  drawChair();
  commandEl.textContent = lastCommand === null ? "-" : String(lastCommand);
  labelEl.textContent = `${lastLabel} (${meta})`;
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
