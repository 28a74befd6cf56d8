import { spawn, execFile } from "node:child_process";
import * as fs from "node:fs";
import * as net from "node:net";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { promisify } from "node:util";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { FrameReader, RemoteEnv, connect, encodeFrame } from "../src/index.js";

const execFileAsync = promisify(execFile);
const here = path.dirname(fileURLToPath(import.meta.url));
const repoRoot = path.resolve(here, "..", "..");
const PYTHON = process.env.UAVPOS_PYTHON ?? "python3";

let serverProc: ReturnType<typeof spawn>;
let endpoint: string;
let configPath: string;

function waitForServer(host: string, port: number, ms = 15000): Promise<void> {
  const deadline = Date.now() + ms;
  return new Promise((resolve, reject) => {
    const attempt = () => {
      const sock = net.createConnection({ host, port }, () => {
        sock.destroy();
        resolve();
      });
      sock.on("error", () => {
        sock.destroy();
        if (Date.now() > deadline) reject(new Error("server never came up"));
        else setTimeout(attempt, 150);
      });
    };
    attempt();
  });
}

beforeAll(async () => {
  // Short-episode variant of the shipped obstacle scenario.
  const shipped = JSON.parse(
    fs.readFileSync(
      path.join(repoRoot, "src", "uavpos", "scenarios", "scenario_b.json"),
      "utf-8"
    )
  );
  shipped.env = { episode_duration: 2.0 };
  configPath = path.join(os.tmpdir(), `uavpos-client-test-${process.pid}.json`);
  fs.writeFileSync(configPath, JSON.stringify(shipped));

  const port = 23000 + Math.floor(Math.random() * 2000);
  endpoint = `127.0.0.1:${port}`;
  serverProc = spawn(
    PYTHON,
    ["-m", "uavpos.cli", "serve", "--config", configPath, "--listen", endpoint],
    { stdio: ["ignore", "ignore", "pipe"] }
  );
  await waitForServer("127.0.0.1", port);
}, 30000);

afterAll(() => {
  serverProc?.kill();
  fs.rmSync(configPath, { force: true });
});

describe("frame codec", () => {
  test("round trip", () => {
    const reader = new FrameReader();
    const msg = { type: "act" as const, payload: { action: 3 } };
    const out = reader.push(encodeFrame(msg));
    expect(out).toEqual([msg]);
  });

  test("reassembles split frames", () => {
    const reader = new FrameReader();
    const buf = Buffer.concat([
      encodeFrame({ type: "hello" }),
      encodeFrame({ type: "close" }),
    ]);
    const messages = [];
    for (const byte of buf) {
      messages.push(...reader.push(Buffer.from([byte])));
    }
    expect(messages.map((m) => m.type)).toEqual(["hello", "close"]);
  });

  test("rejects unknown outbound type", () => {
    expect(() =>
      encodeFrame({ type: "warp" as never })
    ).toThrow(/unknown message type/);
  });
});

describe("remote environment", () => {
  test("spec advertises the action and observation spaces", async () => {
    const env = await connect(endpoint);
    expect(env.spec.action_count).toBe(7);
    expect(env.actionSpace().n).toBe(7);
    expect(env.actionSpace().names).toContain("stay");
    expect(env.observationSpace().fields).toContain("n_los");
    expect(env.spec.episode_length).toBe(20);
    await env.close();
  });

  test("reset and step report positions and rewards", async () => {
    const env = await connect(endpoint);
    const obs = await env.reset(1);
    expect(obs.x).toBe(50);
    expect(obs.z).toBe(20);
    const result = await env.step(0);
    expect(result.observation.z).toBe(21);
    expect(result.reward).toBeGreaterThanOrEqual(0);
    expect(result.reward).toBeLessThanOrEqual(1);
    await env.close();
  });

  test("out-of-range actions are rejected locally", async () => {
    const env = await connect(endpoint);
    await env.reset(0);
    await expect(env.step(9)).rejects.toThrow(RangeError);
    await expect(env.step(-1)).rejects.toThrow(RangeError);
    await env.step(6); // session still healthy: nothing invalid was sent
    await env.close();
  });

  test("step after done surfaces the server contract error", async () => {
    const env = await connect(endpoint);
    await env.reset(0);
    for (let i = 0; i < 20; i++) {
      const r = await env.step(6);
      expect(r.done).toBe(i === 19);
    }
    await expect(env.step(6)).rejects.toThrow(/finished/);
    await env.close();
  });

  test("connection to a dead port fails cleanly", async () => {
    await expect(connect("127.0.0.1:1")).rejects.toThrow();
  });
});

describe("client returns only server-derived values", () => {
  test("responses deep-equal the recorded wire payloads", async () => {
    // Record server->client frames through a pass-through proxy, then
    // check every object the client returned against the raw frames.
    const [host, portStr] = endpoint.split(":");
    const recorded: Buffer[] = [];
    const proxy = net.createServer((downstream) => {
      const upstream = net.createConnection({
        host,
        port: Number(portStr),
      });
      downstream.pipe(upstream);
      upstream.on("data", (chunk) => {
        recorded.push(Buffer.from(chunk));
        downstream.write(chunk);
      });
      upstream.on("close", () => downstream.destroy());
      downstream.on("close", () => upstream.destroy());
    });
    await new Promise<void>((resolve) =>
      proxy.listen(0, "127.0.0.1", () => resolve())
    );
    const proxyPort = (proxy.address() as net.AddressInfo).port;

    const env = await connect(`127.0.0.1:${proxyPort}`);
    const seen: unknown[] = [env.spec];
    seen.push(await env.reset(5));
    for (const a of [0, 2, 5, 6]) {
      seen.push(await env.step(a));
    }
    await env.close();
    proxy.close();

    const reader = new FrameReader();
    const frames = recorded.flatMap((chunk) => reader.push(chunk));
    expect(frames.length).toBe(seen.length);
    frames.forEach((frame, i) => {
      expect(seen[i]).toEqual(frame.payload);
    });
  });
});

describe("bridge conformance", () => {
  async function rolloutInProcess(seed: number, actions: number[]) {
    const { stdout } = await execFileAsync(PYTHON, [
      "-m",
      "uavpos.cli",
      "rollout",
      "--config",
      configPath,
      "--seed",
      String(seed),
      "--actions",
      actions.join(","),
    ]);
    return JSON.parse(stdout) as {
      reset: Record<string, number>;
      steps: {
        observation: Record<string, number>;
        reward: number;
        done: boolean;
        info: Record<string, unknown>;
      }[];
    };
  }

  // Deterministic linear-congruential stream so the sequences are stable.
  function makeRng(seed: number) {
    let state = seed >>> 0;
    return () => {
      state = (state * 1664525 + 1013904223) >>> 0;
      return state / 2 ** 32;
    };
  }

  test(
    "100 random action sequences match in-process trajectories",
    async () => {
      const rng = makeRng(99);
      const sequences = Array.from({ length: 100 }, (_, i) => ({
        seed: Math.floor(rng() * 1000),
        actions: Array.from(
          { length: 1 + Math.floor(rng() * 14) },
          () => Math.floor(rng() * 7)
        ),
      }));

      const env = await connect(endpoint);
      const pool = 8;
      for (let base = 0; base < sequences.length; base += pool) {
        const batch = sequences.slice(base, base + pool);
        const expected = await Promise.all(
          batch.map(({ seed, actions }) => rolloutInProcess(seed, actions))
        );
        for (let k = 0; k < batch.length; k++) {
          const { seed, actions } = batch[k];
          const remoteReset = await env.reset(seed);
          expect(remoteReset).toEqual(expected[k].reset);
          for (let i = 0; i < actions.length; i++) {
            const remote = await env.step(actions[i]);
            const local = expected[k].steps[i];
            expect(remote.observation).toEqual(local.observation);
            expect(remote.reward).toBe(local.reward);
            expect(remote.done).toBe(local.done);
            expect(remote.info).toEqual(local.info);
            if (remote.done) break;
          }
        }
      }
      await env.close();
    },
    180000
  );
});
