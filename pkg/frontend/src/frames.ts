/**
 * Length-prefixed JSON frames: a 4-byte big-endian payload length followed
 * by a UTF-8 JSON object with at least a "type" key.
 */

export const MESSAGE_TYPES = [
  "hello",
  "spec",
  "reset",
  "obs",
  "act",
  "step_result",
  "close",
  "error",
] as const;

export type MessageType = (typeof MESSAGE_TYPES)[number];

export interface WireMessage {
  type: MessageType;
  session?: string;
  payload?: Record<string, unknown>;
  [extra: string]: unknown;
}

export function encodeFrame(msg: WireMessage): Buffer {
  if (!MESSAGE_TYPES.includes(msg.type)) {
    throw new Error(`unknown message type ${String(msg.type)}`);
  }
  const body = Buffer.from(JSON.stringify(msg), "utf-8");
  const header = Buffer.alloc(4);
  header.writeUInt32BE(body.length, 0);
  return Buffer.concat([header, body]);
}

/** Incremental decoder over a byte stream; push chunks, pull messages. */
export class FrameReader {
  private buffer: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): WireMessage[] {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    const messages: WireMessage[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const length = this.buffer.readUInt32BE(0);
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.subarray(4, 4 + length);
      this.buffer = this.buffer.subarray(4 + length);
      const msg = JSON.parse(body.toString("utf-8")) as WireMessage;
      if (typeof msg !== "object" || msg === null || !("type" in msg)) {
        throw new Error("frame payload must be an object with a type");
      }
      messages.push(msg);
    }
    return messages;
  }
}
