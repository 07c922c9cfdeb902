// Entry point: wire the pointer, the session stream and the renderer
// together. Scenario choices (server, mode, preset) come from query
// parameters and are fixed once the session is created.

import { createSession, fetchFinalMetrics, SessionStream } from "./client.js";
import { DEFAULT_SPRING, pointerToForce } from "./input.js";
import { ViewState } from "./viewmodel.js";
import { connectionBanner, gaugeText, Renderer } from "./render.js";

const WORLD_RADIUS = 0.05; // the 5 cm tracing circle
const SEND_HZ = 90; // client force rate, within the service's 60-120 Hz target

const qs = new URLSearchParams(location.search);
const server = qs.get("server") ?? location.origin;
const mode = qs.get("mode") ?? "shared";
const loops = Number(qs.get("loops") ?? "4");

const canvas = document.getElementById("task") as HTMLCanvasElement;
const hud = document.getElementById("hud") as HTMLDivElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const overlay = document.getElementById("overlay") as HTMLDivElement;

const state = new ViewState();
const renderer = new Renderer(canvas, { worldRadius: WORLD_RADIUS });
const stream = new SessionStream();

let pointerWorld: [number, number] | null = null;
let lastFrameWall = 0;

canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  updatePointer(e);
});
canvas.addEventListener("pointermove", updatePointer);
canvas.addEventListener("pointerup", () => {
  pointerWorld = null;
});

function updatePointer(e: PointerEvent): void {
  if (e.buttons === 0 && e.type === "pointermove" && pointerWorld === null) return;
  const rect = canvas.getBoundingClientRect();
  const px = ((e.clientX - rect.left) / rect.width) * canvas.width;
  const py = ((e.clientY - rect.top) / rect.height) * canvas.height;
  pointerWorld = renderer.transform.toWorld(px, py);
}

async function run(): Promise<void> {
  let sessionId: string;
  try {
    const desc = await createSession({ server, mode, loops, timeoutS: 300 });
    sessionId = desc.id;
  } catch (err) {
    banner.textContent = String(err);
    return;
  }

  stream.onMessage = (msg) => {
    if (msg.type === "frame") {
      state.applyFrame(msg);
      state.connection = "live";
      lastFrameWall = performance.now();
    } else if (msg.type === "done") {
      state.connection = "closed";
      showSummary(sessionId, msg.completed, msg.metrics);
    } else {
      banner.textContent = msg.error;
    }
  };
  stream.onClose = () => {
    if (state.connection !== "closed") state.connection = "error";
  };
  stream.connect(server, sessionId);

  // force messages at a fixed client rate; zero force when idle keeps the
  // session ticking so the timeout is honest
  setInterval(() => {
    if (state.connection === "closed") return;
    const ee: [number, number] = [state.eePos[0], state.eePos[1]];
    const f = pointerWorld ? pointerToForce(pointerWorld, ee, DEFAULT_SPRING) : [0, 0, 0];
    stream.sendForce(f as [number, number, number]);
  }, 1000 / SEND_HZ);

  const paint = (): void => {
    if (state.connection === "live" && performance.now() - lastFrameWall > 800) {
      state.connection = "stale";
    }
    renderer.draw(state);
    hud.textContent = gaugeText(state);
    banner.textContent = connectionBanner(state.connection) || banner.textContent;
    if (state.connection === "live") banner.textContent = "";
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);
}

async function showSummary(
  sessionId: string,
  completed: boolean,
  pushed: Record<string, number> | null,
): Promise<void> {
  const metrics = pushed ?? (await fetchFinalMetrics(server, sessionId));
  const rows = metrics
    ? Object.entries(metrics)
        .map(([k, v]) => `<tr><td>${k}</td><td>${v.toFixed(3)}</td></tr>`)
        .join("")
    : "<tr><td colspan=2>metrics unavailable</td></tr>";
  overlay.innerHTML = `
    <div class="card">
      <h2>${completed ? "task complete" : "timed out"}</h2>
      <table>${rows}</table>
      <button onclick="location.reload()">run again</button>
    </div>`;
  overlay.style.display = "flex";
}

run();
