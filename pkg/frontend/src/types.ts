// Wire types mirroring the sim service JSON schema. The console renders
// exactly what the server sends; nothing here is computed client-side.

export interface ArrayState {
  extensions: [number, number, number];
  vibration: "high" | "low" | "null";
  vibration_phase: number;
}

export interface ObjectState {
  shape: "cube" | "sphere" | "cone";
  texture: "food" | "plastic" | "other";
  position: number[];
  size: number;
}

export interface OutcomeState {
  reached: boolean;
  reach_time: number | null;
  hover_span: number;
  success: boolean;
  done: boolean;
  stop_reason: string | null;
}

export interface ConsoleEvent {
  type: "event" | "error";
  tick?: number;
  sim_time?: number;
  paused?: boolean;
  drone?: { position: number[]; velocity: number[] };
  objects?: ObjectState[];
  instruction?: string;
  last_action?: number[] | null;
  arrays?: ArrayState[] | null;
  outcome?: OutcomeState;
  message?: string;
}

export type ConsoleCommand =
  | { type: "set_instruction"; text: string }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "reset"; scene: unknown }
  | { type: "spawn"; object: unknown };

export type ConnectionStatus = "connecting" | "open" | "closed";

export type FrameView = "real" | "vr" | "both";
