/**
 * Remote environment handle over the uavpos TCP wire protocol.
 *
 * The client performs no environment logic: every value it returns is
 * parsed straight from a server frame. Only action codes are validated
 * locally (against the spec advertised by the server) to fail fast.
 */

import * as net from "node:net";

import { FrameReader, WireMessage, encodeFrame } from "./frames.js";

export interface Observation {
  x: number;
  y: number;
  z: number;
  x_norm: number;
  y_norm: number;
  z_norm: number;
  n_los: number;
  n_ues: number;
}

export interface StepResult {
  observation: Observation;
  reward: number;
  done: boolean;
  info: Record<string, unknown>;
}

export interface EnvSpec {
  action_count: number;
  actions: string[];
  episode_length: number;
  decision_interval: number;
  observation: {
    fields: string[];
    position_ranges: Record<string, [number, number]>;
    n_ues: number;
  };
  scenario: string;
}

export class ProtocolError extends Error {}

interface Pending {
  resolve: (msg: WireMessage) => void;
  reject: (err: Error) => void;
}

export class RemoteEnv {
  readonly spec: EnvSpec;
  readonly session: string | undefined;
  private socket: net.Socket;
  private pending: Pending[] = [];
  private closed = false;

  private constructor(socket: net.Socket, spec: EnvSpec, session?: string) {
    this.socket = socket;
    this.spec = spec;
    this.session = session;
  }

  /** Connect to "host:port" and complete the hello/spec exchange. */
  static async connect(endpoint: string, timeoutMs = 10_000): Promise<RemoteEnv> {
    const sep = endpoint.lastIndexOf(":");
    if (sep < 0) throw new Error("endpoint must be host:port");
    const host = endpoint.slice(0, sep);
    const port = Number(endpoint.slice(sep + 1));

    const socket = await new Promise<net.Socket>((resolve, reject) => {
      const s = net.createConnection({ host, port }, () => {
        s.setTimeout(0);
        resolve(s);
      });
      s.setTimeout(timeoutMs, () => {
        s.destroy();
        reject(new Error(`connection to ${endpoint} timed out`));
      });
      s.once("error", reject);
    });

    const reader = new FrameReader();
    const pending: Pending[] = [];
    socket.on("data", (chunk) => {
      let messages: WireMessage[];
      try {
        messages = reader.push(chunk);
      } catch (err) {
        for (const p of pending.splice(0)) p.reject(err as Error);
        socket.destroy();
        return;
      }
      for (const msg of messages) {
        const p = pending.shift();
        if (p) p.resolve(msg);
      }
    });
    socket.on("close", () => {
      for (const p of pending.splice(0)) {
        p.reject(new ProtocolError("connection closed"));
      }
    });
    socket.on("error", () => {
      /* surfaced via close */
    });

    const hello = new Promise<WireMessage>((resolve, reject) => {
      pending.push({ resolve, reject });
    });
    socket.write(encodeFrame({ type: "hello" }));
    const reply = await hello;
    if (reply.type === "error") {
      const note = (reply.payload as { message?: string })?.message;
      throw new ProtocolError(note ?? "server rejected hello");
    }
    if (reply.type !== "spec") {
      throw new ProtocolError(`expected spec, got ${reply.type}`);
    }
    const env = new RemoteEnv(
      socket,
      reply.payload as unknown as EnvSpec,
      reply.session
    );
    env.pending = pending;
    return env;
  }

  actionSpace(): { n: number; names: string[] } {
    return { n: this.spec.action_count, names: this.spec.actions };
  }

  observationSpace(): EnvSpec["observation"] {
    return this.spec.observation;
  }

  private exchange(msg: WireMessage): Promise<WireMessage> {
    if (this.closed) {
      return Promise.reject(new ProtocolError("client closed"));
    }
    const reply = new Promise<WireMessage>((resolve, reject) => {
      this.pending.push({ resolve, reject });
    });
    this.socket.write(encodeFrame(msg));
    return reply;
  }

  private unwrap(reply: WireMessage, want: string): Record<string, unknown> {
    if (reply.type === "error") {
      const note = (reply.payload as { message?: string })?.message;
      throw new ProtocolError(note ?? "server error");
    }
    if (reply.type !== want) {
      throw new ProtocolError(`expected ${want}, got ${reply.type}`);
    }
    return reply.payload as Record<string, unknown>;
  }

  async reset(seed = 0): Promise<Observation> {
    const reply = await this.exchange({ type: "reset", payload: { seed } });
    return this.unwrap(reply, "obs") as unknown as Observation;
  }

  async step(action: number): Promise<StepResult> {
    if (
      !Number.isInteger(action) ||
      action < 0 ||
      action >= this.spec.action_count
    ) {
      throw new RangeError(
        `action ${action} out of range 0..${this.spec.action_count - 1}`
      );
    }
    const reply = await this.exchange({ type: "act", payload: { action } });
    return this.unwrap(reply, "step_result") as unknown as StepResult;
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    await new Promise<void>((resolve) => {
      this.socket.end(encodeFrame({ type: "close" }), () => resolve());
    });
    this.socket.destroy();
  }
}

export const connect = RemoteEnv.connect;
