// Binary wire protocol: 26-byte envelope + 13 typed payloads.
// Mirrors the server codec bit for bit; the golden-vector suite in
// ../testdata/golden is the shared conformance contract.

export const MAGIC0 = 0x48;
export const MAGIC1 = 0x50;
export const VERSION = 1;
export const HEADER_SIZE = 26;
export const JOINT_BLOCK_SIZE = 28;
export const FULL_BODY_JOINTS = 59;
export const IK_JOINTS = 9;
export const ROTATION_NORM_TOL = 1e-3;
const YAW_SLACK = 1e-6;

export enum MsgType {
  JoinRequest = 1,
  JoinAccept = 2,
  Snapshot = 3,
  AvatarManifest = 4,
  PoseFull = 5,
  PoseIK = 6,
  TransformSimple = 7,
  SlideCommand = 8,
  MuteControl = 9,
  PhaseChange = 10,
  AudioFrame = 11,
  Leave = 12,
  Heartbeat = 13,
}

export enum Role {
  Presenter = 0,
  Examiner = 1,
  Audience = 2,
  OnsiteBridge = 3,
}

export enum Phase {
  Presentation = 0,
  OpenDiscussion = 1,
  ClosedDiscussion = 2,
  Announcement = 3,
}

export enum Locomotion {
  Idle = 0,
  Walk = 1,
}

export class ProtocolError extends Error {}
export class BadMagic extends ProtocolError {}
export class BadVersion extends ProtocolError {}
export class TruncatedPayload extends ProtocolError {}
export class UnknownMsgType extends ProtocolError {}
export class InvariantViolation extends ProtocolError {}

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // x, y, z, w

export interface JointTransform {
  position: Vec3;
  rotation: Quat;
}

export interface PoseFull {
  kind: "pose_full";
  spaceFlag: number;
  joints: JointTransform[];
}

export interface PoseIK {
  kind: "pose_ik";
  joints: JointTransform[];
  locomotion: Locomotion;
}

export interface TransformSimple {
  kind: "transform_simple";
  position: Vec3;
  yaw: number;
  locomotion: Locomotion;
  intensity: number;
}

export interface SlideCommand {
  kind: "slide_command";
  slideIndex: number;
}

export interface MuteControl {
  kind: "mute_control";
  targetId: number;
  muted: boolean;
}

export interface PhaseChange {
  kind: "phase_change";
  phase: Phase;
}

export interface JoinRequest {
  kind: "join_request";
  role: Role;
  displayName: string;
  avatarRef: string;
}

export interface CachedPose {
  msgType: MsgType;
  seq: number;
  timestampMs: bigint;
  payload: Uint8Array;
}

export interface SnapshotEntry {
  participantId: number;
  role: Role;
  muted: boolean;
  avatarRef: string;
  pose: CachedPose | null;
}

export interface Snapshot {
  kind: "snapshot";
  slideIndex: number;
  phase: Phase;
  entries: SnapshotEntry[];
}

export interface JoinAccept {
  kind: "join_accept";
  participantId: number;
  role: Role;
  snapshot: Snapshot;
}

export interface AvatarManifest {
  kind: "avatar_manifest";
  participantId: number;
  role: Role;
  avatarRef: string;
}

export interface AudioFrame {
  kind: "audio_frame";
  data: Uint8Array;
}

export interface Leave {
  kind: "leave";
}

export interface Heartbeat {
  kind: "heartbeat";
}

export type Message =
  | PoseFull
  | PoseIK
  | TransformSimple
  | SlideCommand
  | MuteControl
  | PhaseChange
  | JoinRequest
  | JoinAccept
  | Snapshot
  | AvatarManifest
  | AudioFrame
  | Leave
  | Heartbeat;

export interface Envelope {
  msgType: MsgType;
  roomId: number;
  senderId: number;
  seq: number;
  timestampMs: bigint;
  message: Message;
}

export const POSE_TYPES = new Set<number>([
  MsgType.PoseFull,
  MsgType.PoseIK,
  MsgType.TransformSimple,
]);

const POSE_PAYLOAD_SIZES = new Map<number, number>([
  [MsgType.PoseFull, 2 + FULL_BODY_JOINTS * JOINT_BLOCK_SIZE],
  [MsgType.PoseIK, 1 + IK_JOINTS * JOINT_BLOCK_SIZE + 1],
  [MsgType.TransformSimple, 21],
]);

// ---------------------------------------------------------------------------
// reader / writer

class Reader {
  private view: DataView;
  pos = 0;

  constructor(private data: Uint8Array) {
    this.view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  }

  get remaining(): number {
    return this.data.length - this.pos;
  }

  private need(n: number): void {
    if (this.pos + n > this.data.length) {
      throw new TruncatedPayload("payload ends mid-field");
    }
  }

  u8(): number {
    this.need(1);
    return this.data[this.pos++];
  }

  u16(): number {
    this.need(2);
    const v = this.view.getUint16(this.pos, true);
    this.pos += 2;
    return v;
  }

  u32(): number {
    this.need(4);
    const v = this.view.getUint32(this.pos, true);
    this.pos += 4;
    return v;
  }

  u64(): bigint {
    this.need(8);
    const v = this.view.getBigUint64(this.pos, true);
    this.pos += 8;
    return v;
  }

  f32(): number {
    this.need(4);
    const v = this.view.getFloat32(this.pos, true);
    this.pos += 4;
    return v;
  }

  bytes(n: number): Uint8Array {
    this.need(n);
    const out = this.data.subarray(this.pos, this.pos + n);
    this.pos += n;
    return out;
  }

  string(what: string): string {
    const n = this.u8();
    const raw = this.bytes(n);
    try {
      return new TextDecoder("utf-8", { fatal: true }).decode(raw);
    } catch {
      throw new InvariantViolation(`${what} is not valid UTF-8`);
    }
  }

  done(what: string): void {
    if (this.pos !== this.data.length) {
      throw new InvariantViolation(`${what}: trailing payload bytes`);
    }
  }
}

class Writer {
  private chunks: number[] = [];

  u8(v: number): void {
    this.chunks.push(v & 0xff);
  }

  u16(v: number): void {
    this.u8(v);
    this.u8(v >>> 8);
  }

  u32(v: number): void {
    this.u16(v & 0xffff);
    this.u16(Math.floor(v / 0x10000));
  }

  u64(v: bigint): void {
    for (let i = 0n; i < 8n; i++) {
      this.u8(Number((v >> (8n * i)) & 0xffn));
    }
  }

  f32(v: number): void {
    const buf = new DataView(new ArrayBuffer(4));
    buf.setFloat32(0, v, true);
    for (let i = 0; i < 4; i++) this.u8(buf.getUint8(i));
  }

  bytes(data: Uint8Array): void {
    for (const b of data) this.chunks.push(b);
  }

  string(s: string, what: string): void {
    const raw = new TextEncoder().encode(s);
    if (raw.length > 255) throw new InvariantViolation(`${what} exceeds 255 bytes`);
    this.u8(raw.length);
    this.bytes(raw);
  }

  take(): Uint8Array {
    return Uint8Array.from(this.chunks);
  }
}

// ---------------------------------------------------------------------------
// joint blocks

function readJoints(r: Reader, count: number): JointTransform[] {
  const joints: JointTransform[] = [];
  const lo = (1 - ROTATION_NORM_TOL) ** 2;
  const hi = (1 + ROTATION_NORM_TOL) ** 2;
  for (let j = 0; j < count; j++) {
    const position: Vec3 = [r.f32(), r.f32(), r.f32()];
    if (!position.every(Number.isFinite)) {
      throw new InvariantViolation(`non-finite joint position at joint ${j}`);
    }
    const rotation: Quat = [r.f32(), r.f32(), r.f32(), r.f32()];
    const n2 =
      rotation[0] * rotation[0] +
      rotation[1] * rotation[1] +
      rotation[2] * rotation[2] +
      rotation[3] * rotation[3];
    if (!(n2 >= lo && n2 <= hi)) {
      throw new InvariantViolation(`joint ${j} rotation norm out of tolerance`);
    }
    joints.push({ position, rotation });
  }
  return joints;
}

function writeJoints(w: Writer, joints: JointTransform[], expected: number, what: string): void {
  if (joints.length !== expected) {
    throw new InvariantViolation(`${what} requires ${expected} joints, got ${joints.length}`);
  }
  for (const j of joints) {
    for (const v of j.position) w.f32(v);
    for (const v of j.rotation) w.f32(v);
  }
}

// ---------------------------------------------------------------------------
// payload decoders

function checkEnum(value: number, max: number, what: string): number {
  if (value < 0 || value > max) throw new InvariantViolation(`${what}: invalid value ${value}`);
  return value;
}

function decodeSnapshotBody(r: Reader): Snapshot {
  const slideIndex = r.u16();
  const phase = checkEnum(r.u8(), 3, "phase") as Phase;
  const count = r.u8();
  const entries: SnapshotEntry[] = [];
  for (let i = 0; i < count; i++) {
    const participantId = r.u32();
    const role = checkEnum(r.u8(), 3, "role") as Role;
    const mutedRaw = r.u8();
    if (mutedRaw > 1) throw new InvariantViolation("muted flag must be 0 or 1");
    const avatarRef = r.string("avatar_ref");
    const tag = r.u8();
    let pose: CachedPose | null = null;
    if (tag !== 0) {
      const size = POSE_PAYLOAD_SIZES.get(tag);
      if (size === undefined) {
        throw new InvariantViolation(`snapshot pose tag ${tag} is not a pose type`);
      }
      const seq = r.u32();
      const timestampMs = r.u64();
      const payload = r.bytes(size);
      decodePayload(tag as MsgType, payload); // validate; keep raw bytes
      pose = { msgType: tag as MsgType, seq, timestampMs, payload };
    }
    entries.push({ participantId, role, muted: mutedRaw === 1, avatarRef, pose });
  }
  return { kind: "snapshot", slideIndex, phase, entries };
}

export function decodePayload(msgType: MsgType, payload: Uint8Array): Message {
  const r = new Reader(payload);
  switch (msgType) {
    case MsgType.PoseFull: {
      const spaceFlag = r.u8();
      if (spaceFlag > 1) throw new InvariantViolation("space_flag must be 0 or 1");
      const count = r.u8();
      if (count !== FULL_BODY_JOINTS) {
        throw new InvariantViolation(`PoseFull joint_count must be 59, got ${count}`);
      }
      if (payload.length !== POSE_PAYLOAD_SIZES.get(MsgType.PoseFull)) {
        throw new TruncatedPayload("bad PoseFull payload size");
      }
      const joints = readJoints(r, count);
      return { kind: "pose_full", spaceFlag, joints };
    }
    case MsgType.PoseIK: {
      const count = r.u8();
      if (count !== IK_JOINTS) {
        throw new InvariantViolation(`PoseIK joint_count must be 9, got ${count}`);
      }
      if (payload.length !== POSE_PAYLOAD_SIZES.get(MsgType.PoseIK)) {
        throw new TruncatedPayload("bad PoseIK payload size");
      }
      const joints = readJoints(r, count);
      const locomotion = checkEnum(r.u8(), 1, "locomotion") as Locomotion;
      return { kind: "pose_ik", joints, locomotion };
    }
    case MsgType.TransformSimple: {
      if (payload.length !== 21) throw new TruncatedPayload("bad TransformSimple payload size");
      const position: Vec3 = [r.f32(), r.f32(), r.f32()];
      if (!position.every(Number.isFinite)) throw new InvariantViolation("non-finite position");
      const yaw = r.f32();
      if (!(yaw > -Math.PI - YAW_SLACK && yaw <= Math.PI + YAW_SLACK)) {
        throw new InvariantViolation(`yaw outside (-pi, pi]: ${yaw}`);
      }
      const locomotion = checkEnum(r.u8(), 1, "locomotion") as Locomotion;
      const intensity = r.f32();
      if (!(intensity >= 0 && intensity <= 1)) {
        throw new InvariantViolation(`intensity outside [0, 1]: ${intensity}`);
      }
      return { kind: "transform_simple", position, yaw, locomotion, intensity };
    }
    case MsgType.SlideCommand: {
      if (payload.length !== 2) throw new TruncatedPayload("bad SlideCommand payload size");
      return { kind: "slide_command", slideIndex: r.u16() };
    }
    case MsgType.MuteControl: {
      if (payload.length !== 5) throw new TruncatedPayload("bad MuteControl payload size");
      const targetId = r.u32();
      const mutedRaw = r.u8();
      if (mutedRaw > 1) throw new InvariantViolation("muted flag must be 0 or 1");
      return { kind: "mute_control", targetId, muted: mutedRaw === 1 };
    }
    case MsgType.PhaseChange: {
      if (payload.length !== 1) throw new TruncatedPayload("bad PhaseChange payload size");
      return { kind: "phase_change", phase: checkEnum(r.u8(), 3, "phase") as Phase };
    }
    case MsgType.JoinRequest: {
      const role = checkEnum(r.u8(), 3, "role") as Role;
      const displayName = r.string("display_name");
      const avatarRef = r.string("avatar_ref");
      r.done("JoinRequest");
      return { kind: "join_request", role, displayName, avatarRef };
    }
    case MsgType.Snapshot: {
      const snap = decodeSnapshotBody(r);
      r.done("Snapshot");
      return snap;
    }
    case MsgType.JoinAccept: {
      const participantId = r.u32();
      const role = checkEnum(r.u8(), 3, "role") as Role;
      const snapshot = decodeSnapshotBody(r);
      r.done("JoinAccept");
      return { kind: "join_accept", participantId, role, snapshot };
    }
    case MsgType.AvatarManifest: {
      const participantId = r.u32();
      const role = checkEnum(r.u8(), 3, "role") as Role;
      const avatarRef = r.string("avatar_ref");
      r.done("AvatarManifest");
      return { kind: "avatar_manifest", participantId, role, avatarRef };
    }
    case MsgType.AudioFrame:
      return { kind: "audio_frame", data: payload.slice() };
    case MsgType.Leave:
      if (payload.length !== 0) throw new InvariantViolation("Leave payload must be empty");
      return { kind: "leave" };
    case MsgType.Heartbeat:
      if (payload.length !== 0) throw new InvariantViolation("Heartbeat payload must be empty");
      return { kind: "heartbeat" };
    default:
      throw new UnknownMsgType(`unknown msg_type ${msgType}`);
  }
}

// ---------------------------------------------------------------------------
// payload encoders

function encodeSnapshotBody(w: Writer, snap: Snapshot): void {
  w.u16(snap.slideIndex);
  w.u8(snap.phase);
  if (snap.entries.length > 255) throw new InvariantViolation("snapshot exceeds 255 participants");
  w.u8(snap.entries.length);
  for (const e of snap.entries) {
    w.u32(e.participantId);
    w.u8(e.role);
    w.u8(e.muted ? 1 : 0);
    w.string(e.avatarRef, "avatar_ref");
    if (e.pose === null) {
      w.u8(0);
    } else {
      const size = POSE_PAYLOAD_SIZES.get(e.pose.msgType);
      if (size === undefined || e.pose.payload.length !== size) {
        throw new InvariantViolation("bad snapshot pose payload");
      }
      w.u8(e.pose.msgType);
      w.u32(e.pose.seq);
      w.u64(e.pose.timestampMs);
      w.bytes(e.pose.payload);
    }
  }
}

export function encodePayload(message: Message): Uint8Array {
  const w = new Writer();
  switch (message.kind) {
    case "pose_full":
      if (message.spaceFlag !== 0 && message.spaceFlag !== 1) {
        throw new InvariantViolation("space_flag must be 0 or 1");
      }
      w.u8(message.spaceFlag);
      w.u8(FULL_BODY_JOINTS);
      writeJoints(w, message.joints, FULL_BODY_JOINTS, "PoseFull");
      break;
    case "pose_ik":
      w.u8(IK_JOINTS);
      writeJoints(w, message.joints, IK_JOINTS, "PoseIK");
      w.u8(message.locomotion);
      break;
    case "transform_simple": {
      if (!message.position.every(Number.isFinite)) {
        throw new InvariantViolation("non-finite position");
      }
      if (!(message.yaw > -Math.PI && message.yaw <= Math.PI + YAW_SLACK)) {
        throw new InvariantViolation(`yaw outside (-pi, pi]: ${message.yaw}`);
      }
      if (!(message.intensity >= 0 && message.intensity <= 1)) {
        throw new InvariantViolation(`intensity outside [0, 1]: ${message.intensity}`);
      }
      for (const v of message.position) w.f32(v);
      w.f32(message.yaw);
      w.u8(message.locomotion);
      w.f32(message.intensity);
      break;
    }
    case "slide_command":
      if (message.slideIndex < 0 || message.slideIndex > 0xffff) {
        throw new InvariantViolation("slide_index out of u16 range");
      }
      w.u16(message.slideIndex);
      break;
    case "mute_control":
      w.u32(message.targetId);
      w.u8(message.muted ? 1 : 0);
      break;
    case "phase_change":
      w.u8(message.phase);
      break;
    case "join_request":
      w.u8(message.role);
      w.string(message.displayName, "display_name");
      w.string(message.avatarRef, "avatar_ref");
      break;
    case "snapshot":
      encodeSnapshotBody(w, message);
      break;
    case "join_accept":
      w.u32(message.participantId);
      w.u8(message.role);
      encodeSnapshotBody(w, message.snapshot);
      break;
    case "avatar_manifest":
      w.u32(message.participantId);
      w.u8(message.role);
      w.string(message.avatarRef, "avatar_ref");
      break;
    case "audio_frame":
      w.bytes(message.data);
      break;
    case "leave":
    case "heartbeat":
      break;
  }
  return w.take();
}

const MSG_TYPE_OF_KIND: Record<Message["kind"], MsgType> = {
  join_request: MsgType.JoinRequest,
  join_accept: MsgType.JoinAccept,
  snapshot: MsgType.Snapshot,
  avatar_manifest: MsgType.AvatarManifest,
  pose_full: MsgType.PoseFull,
  pose_ik: MsgType.PoseIK,
  transform_simple: MsgType.TransformSimple,
  slide_command: MsgType.SlideCommand,
  mute_control: MsgType.MuteControl,
  phase_change: MsgType.PhaseChange,
  audio_frame: MsgType.AudioFrame,
  leave: MsgType.Leave,
  heartbeat: MsgType.Heartbeat,
};

export function msgTypeOf(message: Message): MsgType {
  return MSG_TYPE_OF_KIND[message.kind];
}

// ---------------------------------------------------------------------------
// envelope

export interface Header {
  roomId: number;
  senderId: number;
  seq: number;
  timestampMs: bigint;
}

export function encode(message: Message, header: Header): Uint8Array {
  const payload = encodePayload(message);
  if (payload.length > 0xffff) throw new InvariantViolation("payload too large");
  const w = new Writer();
  w.u8(MAGIC0);
  w.u8(MAGIC1);
  w.u8(VERSION);
  w.u8(msgTypeOf(message));
  w.u32(header.roomId);
  w.u32(header.senderId);
  w.u32(header.seq);
  w.u64(header.timestampMs);
  w.u16(payload.length);
  w.bytes(payload);
  return w.take();
}

export function decode(data: Uint8Array): Envelope {
  if (data.length < HEADER_SIZE) {
    throw new TruncatedPayload(`frame is ${data.length} bytes, header needs ${HEADER_SIZE}`);
  }
  const r = new Reader(data);
  const m0 = r.u8();
  const m1 = r.u8();
  if (m0 !== MAGIC0 || m1 !== MAGIC1) throw new BadMagic("bad magic");
  const version = r.u8();
  if (version !== VERSION) throw new BadVersion(`unsupported version ${version}`);
  const msgTypeRaw = r.u8();
  if (msgTypeRaw < 1 || msgTypeRaw > 13) throw new UnknownMsgType(`unknown msg_type ${msgTypeRaw}`);
  const roomId = r.u32();
  const senderId = r.u32();
  const seq = r.u32();
  const timestampMs = r.u64();
  const payloadLen = r.u16();
  if (data.length < HEADER_SIZE + payloadLen) {
    throw new TruncatedPayload("payload_len exceeds frame");
  }
  if (data.length > HEADER_SIZE + payloadLen) {
    throw new InvariantViolation("trailing bytes after payload");
  }
  const message = decodePayload(msgTypeRaw as MsgType, data.subarray(HEADER_SIZE));
  return { msgType: msgTypeRaw as MsgType, roomId, senderId, seq, timestampMs, message };
}

export function validateSequence(lastSeq: number | null, incomingSeq: number): boolean {
  return lastSeq === null || incomingSeq > lastSeq;
}

export enum StreamClass {
  Control = 0,
  Pose = 1,
  Slide = 2,
  Mute = 3,
  PhaseStream = 4,
  Audio = 5,
}

export function streamClass(msgType: MsgType): StreamClass {
  switch (msgType) {
    case MsgType.PoseFull:
    case MsgType.PoseIK:
    case MsgType.TransformSimple:
      return StreamClass.Pose;
    case MsgType.SlideCommand:
      return StreamClass.Slide;
    case MsgType.MuteControl:
      return StreamClass.Mute;
    case MsgType.PhaseChange:
      return StreamClass.PhaseStream;
    case MsgType.AudioFrame:
      return StreamClass.Audio;
    default:
      return StreamClass.Control;
  }
}
