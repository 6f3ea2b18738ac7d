import { ConsoleClient } from "./client.js";
import {
  applyEvent,
  initialState,
  recordCommand,
  setConnection,
  setView,
} from "./state.js";
import { ConsoleCommand, FrameView } from "./types.js";
import { renderAll } from "./ui.js";

// Boot: read the service address, open the event stream, wire the inputs.

const params = new URLSearchParams(window.location.search);
const serviceAddress = params.get("service") ?? "127.0.0.1:8400";
const httpBase = `http://${serviceAddress}`;
const wsUrl = `ws://${serviceAddress}/ws`;

let state = initialState();

function refresh(): void {
  renderAll(state, httpBase);
}

const client = new ConsoleClient(wsUrl, {
  onEvent: (event) => {
    state = applyEvent(state, event);
    refresh();
  },
  onStatus: (status) => {
    state = setConnection(state, status);
    refresh();
  },
  onNotice: (message) => {
    state = applyEvent(state, { type: "error", message });
    refresh();
  },
});

function sendCommand(command: ConsoleCommand, label: string): void {
  const result = client.send(command);
  state = recordCommand(state, label, Date.now(),
    result === "sent" ? undefined : result);
  refresh();
}

document.getElementById("send-instruction")?.addEventListener("click", () => {
  const input = document.getElementById("instruction-input") as HTMLInputElement;
  const text = input.value.trim();
  if (text) {
    sendCommand({ type: "set_instruction", text }, `instruction: ${text}`);
    input.value = "";
  }
});

document.getElementById("pause")?.addEventListener("click", () =>
  sendCommand({ type: "pause" }, "pause"));
document.getElementById("resume")?.addEventListener("click", () =>
  sendCommand({ type: "resume" }, "resume"));

document.getElementById("view-select")?.addEventListener("change", (e) => {
  state = setView(state, (e.target as HTMLSelectElement).value as FrameView);
  refresh();
});

document.getElementById("spawn-form")?.addEventListener("submit", (e) => {
  e.preventDefault();
  const shape = (document.getElementById("spawn-shape") as HTMLSelectElement).value;
  const texture = (document.getElementById("spawn-texture") as HTMLSelectElement).value;
  const x = Number((document.getElementById("spawn-x") as HTMLInputElement).value);
  const y = Number((document.getElementById("spawn-y") as HTMLInputElement).value);
  sendCommand(
    { type: "spawn", object: { shape, texture, position: [x, y, 1.0], size: 0.2 } },
    `spawn ${shape}/${texture} at (${x}, ${y})`,
  );
});

client.connect();
refresh();
