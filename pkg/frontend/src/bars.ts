import { ConsoleEvent } from "./types.js";

export interface ActuatorPanel {
  // Two groups of three extensions in [0, 1], exactly as the server sent them.
  groups: [number[], number[]];
  vibration: "high" | "low" | "null";
  vibrationPhase: number;
  hv: number | null;
}

const IDLE: ActuatorPanel = {
  groups: [
    [0, 0, 0],
    [0, 0, 0],
  ],
  vibration: "null",
  vibrationPhase: 0,
  hv: null,
};

// Numbers pass through untouched: the panel must reproduce server values
// exactly, with no smoothing or rounding of the underlying data.
export function actuatorPanel(event: ConsoleEvent | null): ActuatorPanel {
  if (!event || !event.arrays || event.arrays.length !== 2) {
    return IDLE;
  }
  const [left, right] = event.arrays;
  const hv = event.last_action && event.last_action.length === 7
    ? event.last_action[6]
    : null;
  return {
    groups: [[...left.extensions], [...right.extensions]],
    vibration: left.vibration,
    vibrationPhase: left.vibration_phase,
    hv,
  };
}

export function barPercent(extension: number): number {
  return Math.min(100, Math.max(0, extension * 100));
}
