/**
 * Browser UI for the floater steering service.
 *
 * Renders the latest received frame to a canvas: the rotated lattice, the
 * light disc, and the trajectory of recent floater centers. Left-drag on
 * the arena moves the light (throttled), the wheel zooms about the cursor
 * and shift-drag or middle-drag pans. Everything drawn comes from server
 * frames; the client never advances the simulation itself.
 */

import { Camera } from "./camera.js";
import { SteeringClient, ConnectionStatus } from "./client.js";
import { EXCITED, REFRACTORY, RESTING, StateFrame, rleDecode } from "./protocol.js";
import { RingBuffer } from "./ringbuffer.js";
import { Throttle } from "./throttle.js";

// Palette shared with the CLI snapshot renderer (excited darkest).
const COLOR_BACKGROUND = "#ffffff";
const COLOR_EXCITED = "#000000";
const COLOR_REFRACTORY = "#808080";
const COLOR_RESTING = "#dcdcdc";
const COLOR_TRAIL = "#808080";
const COLOR_LIGHT = "#000000";

const LIGHT_RADIUS = 8; // world units, matching the service default
const TRAIL_CAPACITY = 5000;
const SET_LIGHT_INTERVAL_MS = 100; // at most 10 light updates per second
const LIGHT_CONFIRM_EPS = 1e-6;

interface DecodedFrame {
  frame: StateFrame;
  cells: Uint8Array;
}

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

const canvas = element<HTMLCanvasElement>("arena");
const context = canvas.getContext("2d")!;
const statusEl = element<HTMLSpanElement>("status");
const noticeEl = element<HTMLSpanElement>("notice");
const stepEl = element<HTMLSpanElement>("step");
const excitedEl = element<HTMLSpanElement>("excited");
const distEl = element<HTMLSpanElement>("dist");
const pendingEl = element<HTMLSpanElement>("pending");
const ruleInput = element<HTMLInputElement>("rule");
const seedInput = element<HTMLInputElement>("seed");
const speedInput = element<HTMLInputElement>("speed");
const speedValueEl = element<HTMLSpanElement>("speed-value");

const camera = new Camera(1, 1);
const trail = new RingBuffer<{ x: number; y: number }>(TRAIL_CAPACITY);

let latest: DecodedFrame | null = null;
let fitted = false;
let pendingLight: { x: number; y: number } | null = null;
let noticeTimer: ReturnType<typeof setTimeout> | null = null;
let renderQueued = false;

function serviceUrl(): string {
  const override = new URLSearchParams(location.search).get("url");
  if (override !== null) {
    return override;
  }
  const host = location.hostname === "" ? "127.0.0.1" : location.hostname;
  return `ws://${host}:8700`;
}

function showNotice(message: string): void {
  noticeEl.textContent = message;
  if (noticeTimer !== null) {
    clearTimeout(noticeTimer);
  }
  noticeTimer = setTimeout(() => {
    noticeEl.textContent = "";
    noticeTimer = null;
  }, 5000);
}

function showStatus(status: ConnectionStatus, detail?: string): void {
  statusEl.textContent = detail === undefined ? status : `${status} (${detail})`;
  statusEl.className = `status status-${status}`;
}

function onFrame(frame: StateFrame): void {
  const cells = rleDecode(frame.grid, frame.width * frame.height);
  if (latest !== null && frame.step < latest.frame.step) {
    trail.clear(); // the simulation was reset; the old trajectory is stale
  }
  latest = { frame, cells };
  trail.push({ x: frame.x, y: frame.y });
  if (pendingLight !== null
      && Math.abs(frame.light_x - pendingLight.x) < LIGHT_CONFIRM_EPS
      && Math.abs(frame.light_y - pendingLight.y) < LIGHT_CONFIRM_EPS) {
    pendingLight = null;
  }
  if (!fitted) {
    fitViewTo(frame);
    fitted = true;
  }
  stepEl.textContent = String(frame.step);
  excitedEl.textContent = String(frame.excited);
  distEl.textContent = frame.dist.toFixed(1);
  pendingEl.textContent = pendingLight === null ? "" : "light pending";
  requestRender();
}

function fitViewTo(frame: StateFrame): void {
  const reach = Math.max(frame.width, frame.height);
  const minX = Math.min(frame.x - reach, frame.light_x - 4 * LIGHT_RADIUS);
  const maxX = Math.max(frame.x + reach, frame.light_x + 4 * LIGHT_RADIUS);
  const minY = Math.min(frame.y - reach, frame.light_y - 4 * LIGHT_RADIUS);
  const maxY = Math.max(frame.y + reach, frame.light_y + 4 * LIGHT_RADIUS);
  camera.fit(minX, minY, maxX, maxY);
}

function requestRender(): void {
  if (renderQueued) {
    return;
  }
  renderQueued = true;
  requestAnimationFrame(() => {
    renderQueued = false;
    render();
  });
}

function render(): void {
  const ratio = window.devicePixelRatio || 1;
  context.setTransform(ratio, 0, 0, ratio, 0, 0);
  context.fillStyle = COLOR_BACKGROUND;
  context.fillRect(0, 0, camera.viewportWidth, camera.viewportHeight);
  if (latest === null) {
    return;
  }
  drawTrail();
  drawLattice(latest);
  drawLight(latest.frame);
  drawPendingLight();
}

function drawTrail(): void {
  if (trail.length < 2) {
    return;
  }
  context.strokeStyle = COLOR_TRAIL;
  context.lineWidth = 1;
  context.beginPath();
  const first = camera.worldToScreen(trail.at(0).x, trail.at(0).y);
  context.moveTo(first.x, first.y);
  for (let i = 1; i < trail.length; i++) {
    const point = camera.worldToScreen(trail.at(i).x, trail.at(i).y);
    context.lineTo(point.x, point.y);
  }
  context.stroke();
}

function drawLattice(decoded: DecodedFrame): void {
  const { frame, cells } = decoded;
  const center = camera.worldToScreen(frame.x, frame.y);
  context.save();
  context.translate(center.x, center.y);
  // Flip y so body axes match world axes, then rotate by the heading.
  context.scale(camera.zoom, -camera.zoom);
  context.rotate(frame.heading);
  const halfW = (frame.width - 1) / 2;
  const halfH = (frame.height - 1) / 2;
  const passes: [number, string][] = [
    [RESTING, COLOR_RESTING],
    [REFRACTORY, COLOR_REFRACTORY],
    [EXCITED, COLOR_EXCITED],
  ];
  for (const [state, color] of passes) {
    context.fillStyle = color;
    context.beginPath();
    for (let i = 0; i < cells.length; i++) {
      if (cells[i] !== state) {
        continue;
      }
      const cx = i % frame.width;
      const cy = (i / frame.width) | 0;
      context.rect(cx - halfW - 0.5, cy - halfH - 0.5, 1, 1);
    }
    context.fill();
  }
  context.restore();
}

function drawLight(frame: StateFrame): void {
  const center = camera.worldToScreen(frame.light_x, frame.light_y);
  context.fillStyle = COLOR_LIGHT;
  context.beginPath();
  context.arc(center.x, center.y, LIGHT_RADIUS * camera.zoom, 0, 2 * Math.PI);
  context.fill();
}

function drawPendingLight(): void {
  if (pendingLight === null) {
    return;
  }
  const center = camera.worldToScreen(pendingLight.x, pendingLight.y);
  context.strokeStyle = COLOR_LIGHT;
  context.lineWidth = 1;
  context.setLineDash([4, 4]);
  context.beginPath();
  context.arc(center.x, center.y, LIGHT_RADIUS * camera.zoom, 0, 2 * Math.PI);
  context.stroke();
  context.setLineDash([]);
}

const client = new SteeringClient({
  url: serviceUrl(),
  onFrame,
  onNotice: showNotice,
  onStatus: showStatus,
});

const lightThrottle = new Throttle<{ x: number; y: number }>((target) => {
  if (client.send({ cmd: "set_light", x: target.x, y: target.y })) {
    pendingLight = target;
    pendingEl.textContent = "light pending";
    requestRender();
  } else {
    showNotice("not connected, light command dropped");
  }
}, SET_LIGHT_INTERVAL_MS);

function resize(): void {
  const ratio = window.devicePixelRatio || 1;
  const width = canvas.clientWidth;
  const height = canvas.clientHeight;
  canvas.width = Math.max(1, Math.round(width * ratio));
  canvas.height = Math.max(1, Math.round(height * ratio));
  camera.setViewport(width, height);
  requestRender();
}

function canvasPoint(event: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return { x: event.clientX - rect.left, y: event.clientY - rect.top };
}

let dragMode: "light" | "pan" | null = null;
let lastDrag = { x: 0, y: 0 };

canvas.addEventListener("mousedown", (event) => {
  const point = canvasPoint(event);
  if (event.button === 1 || (event.button === 0 && event.shiftKey)) {
    dragMode = "pan";
    lastDrag = point;
    event.preventDefault();
    return;
  }
  if (event.button === 0) {
    dragMode = "light";
    const world = camera.screenToWorld(point.x, point.y);
    lightThrottle.push({ x: world.x, y: world.y });
  }
});

window.addEventListener("mousemove", (event) => {
  if (dragMode === null) {
    return;
  }
  const point = canvasPoint(event);
  if (dragMode === "pan") {
    camera.panByScreen(point.x - lastDrag.x, point.y - lastDrag.y);
    lastDrag = point;
    requestRender();
  } else {
    const world = camera.screenToWorld(point.x, point.y);
    lightThrottle.push({ x: world.x, y: world.y });
  }
});

window.addEventListener("mouseup", () => {
  if (dragMode === "light") {
    lightThrottle.flush(); // the final cursor position always lands
  }
  dragMode = null;
});

canvas.addEventListener("wheel", (event) => {
  event.preventDefault();
  const point = canvasPoint(event);
  camera.zoomAt(point.x, point.y, Math.exp(-event.deltaY * 0.001));
  requestRender();
}, { passive: false });

element<HTMLButtonElement>("pause").addEventListener("click", () => {
  client.send({ cmd: "pause" });
});

element<HTMLButtonElement>("resume").addEventListener("click", () => {
  client.send({ cmd: "resume" });
});

function applyRule(): void {
  const code = ruleInput.value.trim();
  if (!/^[0-9]{4}$/.test(code)) {
    showNotice("rule code must be exactly 4 digits");
    return;
  }
  client.send({ cmd: "set_rule", code });
}

element<HTMLButtonElement>("apply-rule").addEventListener("click", applyRule);
ruleInput.addEventListener("keydown", (event) => {
  if (event.key === "Enter") {
    applyRule();
  }
});

element<HTMLButtonElement>("reset").addEventListener("click", () => {
  const seed = Number(seedInput.value);
  if (!Number.isInteger(seed) || seed < 0) {
    showNotice("seed must be a non-negative integer");
    return;
  }
  client.send({ cmd: "reset", seed });
});

speedInput.addEventListener("input", () => {
  speedValueEl.textContent = speedInput.value;
});
speedInput.addEventListener("change", () => {
  client.send({ cmd: "set_speed", steps_per_second: Number(speedInput.value) });
});

window.addEventListener("resize", resize);
resize();
client.connect();
