import { ConnectionStatus, ConsoleEvent, FrameView } from "./types.js";

export interface HistoryEntry {
  commandText: string;
  at: number; // wall-clock ms when issued
  note?: string;
}

export interface ConsoleViewState {
  connection: ConnectionStatus;
  lastEvent: ConsoleEvent | null;
  errors: string[];
  history: HistoryEntry[];
  view: FrameView;
}

export function initialState(): ConsoleViewState {
  return {
    connection: "connecting",
    lastEvent: null,
    errors: [],
    history: [],
    view: "both",
  };
}

// Events apply in arrival order; a stale tick (reordered frame) is ignored
// so the display can never run backwards.
export function applyEvent(state: ConsoleViewState, event: ConsoleEvent): ConsoleViewState {
  if (event.type === "error") {
    return { ...state, errors: [...state.errors, event.message ?? "unknown error"] };
  }
  const lastTick = state.lastEvent?.tick ?? -1;
  if (event.tick !== undefined && event.tick < lastTick) {
    return state;
  }
  return { ...state, lastEvent: event };
}

export function setConnection(state: ConsoleViewState, connection: ConnectionStatus): ConsoleViewState {
  return { ...state, connection };
}

export function recordCommand(state: ConsoleViewState, commandText: string, at: number, note?: string): ConsoleViewState {
  return { ...state, history: [...state.history, { commandText, at, note }] };
}

export function setView(state: ConsoleViewState, view: FrameView): ConsoleViewState {
  return { ...state, view };
}
