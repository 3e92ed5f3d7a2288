/**
 * Wire protocol for the floater steering service.
 *
 * The service speaks newline-delimited UTF-8 JSON: every line is one object.
 * Server lines carry a `type` field ("state" frames or "error" notices);
 * client lines carry a `cmd` field. Lattice states travel inside frames as a
 * row-major run-length encoding, "<count>x<digit>" tokens separated by
 * commas, where the digit is 0 resting, 1 excited or 2 refractory.
 */

export const RESTING = 0;
export const EXCITED = 1;
export const REFRACTORY = 2;

/** One decimated snapshot of the running simulation. */
export interface StateFrame {
  type: "state";
  step: number;
  x: number;
  y: number;
  heading: number;
  light_x: number;
  light_y: number;
  excited: number;
  dist: number;
  width: number;
  height: number;
  grid: string;
}

/** Sent to a client whose last command could not be applied. */
export interface ErrorNotice {
  type: "error";
  message: string;
}

export type ServerMessage = StateFrame | ErrorNotice;

export type ClientCommand =
  | { cmd: "set_light"; x: number; y: number }
  | { cmd: "pause" }
  | { cmd: "resume" }
  | { cmd: "reset"; seed: number }
  | { cmd: "set_rule"; code: string }
  | { cmd: "set_speed"; steps_per_second: number };

export class ProtocolError extends Error {}

const RLE_TOKEN = /^([0-9]+)x([0-9])$/;

/**
 * Decode an RLE grid string to a flat row-major array of state digits.
 *
 * When expectedLength is given, the digits are written straight into an
 * array of that size and any token that would overflow it aborts the
 * decode, so a hostile count cannot force a huge allocation.
 */
export function rleDecode(text: string, expectedLength?: number): Uint8Array {
  if (text === "") {
    if (expectedLength !== undefined && expectedLength !== 0) {
      throw new ProtocolError(`grid RLE is empty, expected ${expectedLength} digits`);
    }
    return new Uint8Array(0);
  }
  const tokens = text.split(",");
  let total = 0;
  const counts = new Array<number>(tokens.length);
  const digits = new Array<number>(tokens.length);
  for (let i = 0; i < tokens.length; i++) {
    const match = RLE_TOKEN.exec(tokens[i]);
    if (match === null) {
      throw new ProtocolError(`bad RLE token ${JSON.stringify(tokens[i])}`);
    }
    const count = Number(match[1]);
    const digit = Number(match[2]);
    if (count < 1 || digit > REFRACTORY) {
      throw new ProtocolError(
        `bad RLE token ${JSON.stringify(tokens[i])}: count >= 1, digit in 0..2`,
      );
    }
    total += count;
    if (expectedLength !== undefined && total > expectedLength) {
      throw new ProtocolError(`grid RLE exceeds ${expectedLength} digits`);
    }
    counts[i] = count;
    digits[i] = digit;
  }
  if (expectedLength !== undefined && total !== expectedLength) {
    throw new ProtocolError(`grid RLE decodes to ${total} digits, expected ${expectedLength}`);
  }
  const out = new Uint8Array(total);
  let offset = 0;
  for (let i = 0; i < counts.length; i++) {
    out.fill(digits[i], offset, offset + counts[i]);
    offset += counts[i];
  }
  return out;
}

/** Inverse of rleDecode; used by tests to build valid frames. */
export function rleEncode(states: ArrayLike<number>): string {
  if (states.length === 0) {
    return "";
  }
  const tokens: string[] = [];
  let runDigit = states[0];
  let runLength = 1;
  for (let i = 1; i < states.length; i++) {
    if (states[i] === runDigit) {
      runLength += 1;
    } else {
      tokens.push(`${runLength}x${runDigit}`);
      runDigit = states[i];
      runLength = 1;
    }
  }
  tokens.push(`${runLength}x${runDigit}`);
  return tokens.join(",");
}

function requireFinite(obj: Record<string, unknown>, field: string): number {
  const value = obj[field];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new ProtocolError(`frame field ${field} must be a finite number`);
  }
  return value;
}

function requireInt(obj: Record<string, unknown>, field: string, min: number): number {
  const value = requireFinite(obj, field);
  if (!Number.isInteger(value) || value < min) {
    throw new ProtocolError(`frame field ${field} must be an integer >= ${min}`);
  }
  return value;
}

/** Parse one server line. Throws ProtocolError on anything malformed. */
export function decodeServerMessage(line: string): ServerMessage {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (error) {
    throw new ProtocolError(`server line is not valid JSON: ${String(error)}`);
  }
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new ProtocolError("server line must be a JSON object");
  }
  const record = obj as Record<string, unknown>;
  if (record.type === "error") {
    if (typeof record.message !== "string") {
      throw new ProtocolError("error notice must carry a string message");
    }
    return { type: "error", message: record.message };
  }
  if (record.type !== "state") {
    throw new ProtocolError(`unknown server message type ${JSON.stringify(record.type)}`);
  }
  const width = requireInt(record, "width", 1);
  const height = requireInt(record, "height", 1);
  if (typeof record.grid !== "string") {
    throw new ProtocolError("frame field grid must be a string");
  }
  rleDecode(record.grid, width * height);
  return {
    type: "state",
    step: requireInt(record, "step", 0),
    x: requireFinite(record, "x"),
    y: requireFinite(record, "y"),
    heading: requireFinite(record, "heading"),
    light_x: requireFinite(record, "light_x"),
    light_y: requireFinite(record, "light_y"),
    excited: requireInt(record, "excited", 0),
    dist: requireFinite(record, "dist"),
    width,
    height,
    grid: record.grid,
  };
}

/** Serialize one command as a single LF-terminated JSON line. */
export function encodeCommand(command: ClientCommand): string {
  return JSON.stringify(command) + "\n";
}
