/**
 * Demonstration: train a small TensorFlow.js DQN against a running
 * uavpos environment server. Start the server first:
 *
 *   uavpos serve --config src/uavpos/scenarios/scenario_b.json \
 *                --listen 127.0.0.1:9500
 *
 * then:  npx ts-node --esm examples/train_dqn.ts [host:port]
 *
 * This script exists to show the client wiring; it is not a tuned
 * reference implementation (that lives server-side).
 */

import * as tf from "@tensorflow/tfjs";

import { RemoteEnv, StepResult, connect } from "../src/index.js";

const ENDPOINT = process.argv[2] ?? "127.0.0.1:9500";
const EPISODES = 3;
const STEPS_PER_EPISODE = 200;
const BATCH = 64;
const GAMMA = 0.95;
const BUFFER = 10_000;
const SYNC_EVERY = 100;

type Transition = {
  obs: number[];
  action: number;
  reward: number;
  next: number[];
  done: boolean;
};

function toVector(obs: StepResult["observation"]): number[] {
  return [obs.x_norm, obs.y_norm, obs.z_norm, obs.n_los / obs.n_ues];
}

function buildNet(obsDim: number, nActions: number): tf.Sequential {
  const net = tf.sequential();
  net.add(tf.layers.dense({ inputShape: [obsDim], units: 32, activation: "relu" }));
  net.add(tf.layers.dense({ units: 32, activation: "relu" }));
  net.add(tf.layers.dense({ units: nActions }));
  net.compile({ optimizer: tf.train.adam(1e-2), loss: "meanSquaredError" });
  return net;
}

async function trainStep(
  net: tf.Sequential,
  target: tf.Sequential,
  batch: Transition[]
): Promise<number> {
  const obs = tf.tensor2d(batch.map((t) => t.obs));
  const next = tf.tensor2d(batch.map((t) => t.next));
  const qNext = target.predict(next) as tf.Tensor2D;
  const maxNext = (await qNext.max(1).array()) as number[];
  const qNow = (await (net.predict(obs) as tf.Tensor2D).array()) as number[][];
  batch.forEach((t, i) => {
    qNow[i][t.action] = t.reward + (t.done ? 0 : GAMMA * maxNext[i]);
  });
  const targets = tf.tensor2d(qNow);
  const history = await net.fit(obs, targets, { epochs: 1, verbose: 0 });
  tf.dispose([obs, next, qNext, targets]);
  return history.history.loss?.[0] as number;
}

async function main(): Promise<void> {
  const env: RemoteEnv = await connect(ENDPOINT);
  const nActions = env.actionSpace().n;
  const obsDim = 4;
  const net = buildNet(obsDim, nActions);
  const target = buildNet(obsDim, nActions);
  target.setWeights(net.getWeights());

  const replay: Transition[] = [];
  let step = 0;

  for (let episode = 0; episode < EPISODES; episode++) {
    let obs = toVector(await env.reset(episode));
    let episodeReturn = 0;
    for (let i = 0; i < STEPS_PER_EPISODE; i++) {
      const epsilon = Math.max(0.05, 1 - step / (EPISODES * STEPS_PER_EPISODE * 0.6));
      let action: number;
      if (Math.random() < epsilon) {
        action = Math.floor(Math.random() * nActions);
      } else {
        action = tf.tidy(() =>
          (net.predict(tf.tensor2d([obs])) as tf.Tensor2D).argMax(1).dataSync()[0]
        );
      }
      const result = await env.step(action);
      const next = toVector(result.observation);
      replay.push({ obs, action, reward: result.reward, next, done: result.done });
      if (replay.length > BUFFER) replay.shift();
      episodeReturn += result.reward;
      obs = next;

      if (replay.length >= BATCH && step % 4 === 0) {
        const batch = Array.from(
          { length: BATCH },
          () => replay[Math.floor(Math.random() * replay.length)]
        );
        await trainStep(net, target, batch);
      }
      if (step % SYNC_EVERY === 0) target.setWeights(net.getWeights());
      step += 1;
      if (result.done) break;
    }
    console.log(
      `episode ${episode + 1}/${EPISODES} return=${episodeReturn.toFixed(1)}`
    );
  }
  await env.close();
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
