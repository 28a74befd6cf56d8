export {
  RemoteEnv,
  connect,
  ProtocolError,
  type EnvSpec,
  type Observation,
  type StepResult,
} from "./client.js";
export { FrameReader, encodeFrame, MESSAGE_TYPES } from "./frames.js";
export type { WireMessage, MessageType } from "./frames.js";
