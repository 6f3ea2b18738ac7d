import { actuatorPanel, barPercent } from "./bars.js";
import { ConsoleViewState } from "./state.js";
import { ConsoleEvent } from "./types.js";

// Pure DOM rendering; every number shown comes verbatim from the last event.

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function renderBanner(state: ConsoleViewState): void {
  const banner = el("banner");
  banner.dataset.status = state.connection;
  banner.textContent =
    state.connection === "open"
      ? "connected"
      : state.connection === "connecting"
        ? "connecting..."
        : "disconnected - retrying";
}

export function renderFrames(state: ConsoleViewState, httpBase: string): void {
  const event = state.lastEvent;
  const tick = event?.tick ?? 0;
  for (const view of ["real", "vr"] as const) {
    const panel = el(`panel-${view}`);
    const visible = state.view === "both" || state.view === view;
    panel.style.display = visible ? "" : "none";
    if (visible) {
      // Tick in the query string forces a refresh per control step.
      el<HTMLImageElement>(`frame-${view}`).src = `${httpBase}/frame/${view}?t=${tick}`;
    }
  }
}

export function renderTelemetry(state: ConsoleViewState): void {
  const event = state.lastEvent;
  if (!event || event.type !== "event") return;
  el("sim-time").textContent = `t = ${event.sim_time} s (tick ${event.tick})`;
  if (event.drone) {
    el("drone-pos").textContent = event.drone.position.map(String).join(", ");
    el("drone-vel").textContent = event.drone.velocity.map(String).join(", ");
  }
  el("instruction").textContent = event.instruction ?? "";
  const outcome = event.outcome;
  el("outcome").textContent = outcome
    ? outcome.done
      ? `done (${outcome.stop_reason})`
      : outcome.reached
        ? `reached at ${outcome.reach_time} s, hovering ${outcome.hover_span} s`
        : "en route"
    : "";
  el("paused").textContent = event.paused ? "PAUSED" : "";
}

export function renderHaptics(event: ConsoleEvent | null): void {
  const panel = actuatorPanel(event);
  panel.groups.forEach((group, g) => {
    group.forEach((extension, i) => {
      const bar = el(`bar-${g}-${i}`);
      bar.style.height = `${barPercent(extension)}%`;
      bar.title = String(extension); // exact server value on hover
    });
  });
  const badge = el("vibration-badge");
  badge.textContent = panel.vibration;
  badge.dataset.level = panel.vibration;
  el("hv-value").textContent = panel.hv === null ? "-" : String(panel.hv);
}

export function renderHistory(state: ConsoleViewState): void {
  const list = el("history");
  list.innerHTML = "";
  for (const entry of state.history.slice(-12).reverse()) {
    const item = document.createElement("li");
    item.textContent = entry.note ? `${entry.commandText} (${entry.note})` : entry.commandText;
    list.appendChild(item);
  }
}

export function renderErrors(state: ConsoleViewState): void {
  const box = el("errors");
  const latest = state.errors[state.errors.length - 1];
  box.textContent = latest ?? "";
}

export function renderAll(state: ConsoleViewState, httpBase: string): void {
  renderBanner(state);
  renderFrames(state, httpBase);
  renderTelemetry(state);
  renderHaptics(state.lastEvent);
  renderHistory(state);
  renderErrors(state);
}
