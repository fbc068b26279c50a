// Client-side room mirror with snapshot interpolation, matching the session
// core semantics: last-value streams, a ring of timestamped pose samples per
// remote participant, 100 ms render delay, 200 ms capped extrapolation.

import {
  decodePayload,
  Envelope,
  Message,
  MsgType,
  Phase,
  PoseFull,
  PoseIK,
  POSE_TYPES,
  Role,
  Snapshot,
  StreamClass,
  streamClass,
  TransformSimple,
  validateSequence,
  type JointTransform,
} from "./protocol";
import { lerp3, slerp, wrapPi } from "./math";

export const INTERP_DELAY_MS = 100;
export const EXTRAP_CAP_MS = 200;
export const BUFFER_CAPACITY = 32;

export interface PoseSample {
  timestampMs: number;
  seq: number;
  message: PoseFull | PoseIK | TransformSimple;
}

export class PoseBuffer {
  samples: PoseSample[] = [];

  constructor(private capacity: number = BUFFER_CAPACITY) {}

  get length(): number {
    return this.samples.length;
  }

  push(timestampMs: number, seq: number, message: PoseSample["message"]): boolean {
    const last = this.samples[this.samples.length - 1];
    if (last && (seq <= last.seq || timestampMs <= last.timestampMs)) return false;
    this.samples.push({ timestampMs, seq, message });
    if (this.samples.length > this.capacity) this.samples.shift();
    return true;
  }
}

function blendJoints(a: JointTransform[], b: JointTransform[], t: number): JointTransform[] {
  return a.map((ja, i) => ({
    position: lerp3(ja.position, b[i].position, t),
    rotation: slerp(ja.rotation, b[i].rotation, t),
  }));
}

function blend(m0: PoseSample["message"], m1: PoseSample["message"], t: number): Message {
  if (m0.kind === "pose_full" && m1.kind === "pose_full") {
    return { kind: "pose_full", spaceFlag: m0.spaceFlag, joints: blendJoints(m0.joints, m1.joints, t) };
  }
  if (m0.kind === "pose_ik" && m1.kind === "pose_ik") {
    return { kind: "pose_ik", joints: blendJoints(m0.joints, m1.joints, t), locomotion: m0.locomotion };
  }
  if (m0.kind === "transform_simple" && m1.kind === "transform_simple") {
    const dyaw = wrapPi(m1.yaw - m0.yaw);
    return {
      kind: "transform_simple",
      position: lerp3(m0.position, m1.position, t),
      yaw: wrapPi(m0.yaw + dyaw * t),
      locomotion: m0.locomotion,
      intensity: m0.intensity + (m1.intensity - m0.intensity) * t,
    };
  }
  return m1;
}

function extrapolate(prev: PoseSample, last: PoseSample, dtMs: number): Message {
  const k = dtMs / (last.timestampMs - prev.timestampMs);
  const push = (p0: number[], p1: number[]) =>
    [p1[0] + (p1[0] - p0[0]) * k, p1[1] + (p1[1] - p0[1]) * k, p1[2] + (p1[2] - p0[2]) * k] as [
      number,
      number,
      number,
    ];
  const m0 = prev.message;
  const m1 = last.message;
  if (m1.kind === "pose_full" && m0.kind === "pose_full") {
    return {
      kind: "pose_full",
      spaceFlag: m1.spaceFlag,
      joints: m1.joints.map((j, i) => ({ position: push(m0.joints[i].position, j.position), rotation: j.rotation })),
    };
  }
  if (m1.kind === "pose_ik" && m0.kind === "pose_ik") {
    return {
      kind: "pose_ik",
      locomotion: m1.locomotion,
      joints: m1.joints.map((j, i) => ({ position: push(m0.joints[i].position, j.position), rotation: j.rotation })),
    };
  }
  if (m1.kind === "transform_simple" && m0.kind === "transform_simple") {
    return { ...m1, position: push(m0.position, m1.position) };
  }
  return m1;
}

export function samplePose(buffer: PoseBuffer, renderTimeMs: number): Message | null {
  const s = buffer.samples;
  if (s.length === 0) return null;
  if (renderTimeMs <= s[0].timestampMs) return s[0].message;
  const last = s[s.length - 1];
  if (renderTimeMs >= last.timestampMs) {
    if (renderTimeMs === last.timestampMs || s.length < 2) return last.message;
    return extrapolate(s[s.length - 2], last, Math.min(renderTimeMs - last.timestampMs, EXTRAP_CAP_MS));
  }
  for (let i = s.length - 1; i > 0; i--) {
    if (s[i - 1].timestampMs <= renderTimeMs && renderTimeMs <= s[i].timestampMs) {
      const t = (renderTimeMs - s[i - 1].timestampMs) / (s[i].timestampMs - s[i - 1].timestampMs);
      return blend(s[i - 1].message, s[i].message, t);
    }
  }
  return last.message;
}

export interface ParticipantView {
  role: Role;
  avatarRef: string;
  muted: boolean;
  buffer: PoseBuffer;
}

export class RoomView {
  selfId: number | null = null;
  selfRole: Role | null = null;
  slideIndex = 0;
  phase: Phase = Phase.Presentation;
  excluded = false;
  participants = new Map<number, ParticipantView>();
  slideLog: number[] = [];

  private lastSeq = new Map<string, number>();
  private pending = new Map<number, Envelope>();

  private fresh(env: Envelope): boolean {
    const cls = streamClass(env.msgType);
    if (cls === StreamClass.Control) return true;
    const key = `${env.senderId}:${cls}`;
    const last = this.lastSeq.get(key) ?? null;
    if (!validateSequence(last, env.seq)) return false;
    this.lastSeq.set(key, env.seq);
    return true;
  }

  apply(env: Envelope): boolean {
    const m = env.message;
    switch (m.kind) {
      case "join_accept":
        this.selfId = m.participantId;
        this.selfRole = m.role;
        this.applySnapshot(m.snapshot);
        return true;
      case "snapshot":
        this.applySnapshot(m);
        return true;
      case "avatar_manifest": {
        if (!this.participants.has(m.participantId)) {
          this.participants.set(m.participantId, {
            role: m.role,
            avatarRef: m.avatarRef,
            muted: m.role !== Role.Presenter && m.role !== Role.OnsiteBridge,
            buffer: new PoseBuffer(),
          });
        }
        const held = this.pending.get(m.participantId);
        if (held) {
          this.pending.delete(m.participantId);
          this.pushPose(held);
        }
        return true;
      }
      case "slide_command": {
        if (!this.fresh(env)) return false;
        this.slideIndex = m.slideIndex;
        this.slideLog.push(m.slideIndex);
        return true;
      }
      case "phase_change": {
        if (!this.fresh(env)) return false;
        this.phase = m.phase;
        if (this.phase === Phase.ClosedDiscussion && this.selfRole === Role.Audience) {
          this.excluded = true;
        }
        return true;
      }
      case "mute_control": {
        if (!this.fresh(env)) return false;
        const p = this.participants.get(m.targetId);
        if (!p) return false;
        p.muted = m.muted;
        return true;
      }
      case "leave":
        this.participants.delete(env.senderId);
        this.pending.delete(env.senderId);
        return true;
      case "pose_full":
      case "pose_ik":
      case "transform_simple": {
        if (!this.fresh(env)) return false;
        if (!this.participants.has(env.senderId)) {
          const held = this.pending.get(env.senderId);
          if (!held || env.seq > held.seq) this.pending.set(env.senderId, env);
          return false;
        }
        return this.pushPose(env);
      }
      default:
        return false;
    }
  }

  private pushPose(env: Envelope): boolean {
    const p = this.participants.get(env.senderId);
    if (!p || !POSE_TYPES.has(env.msgType)) return false;
    return p.buffer.push(Number(env.timestampMs), env.seq, env.message as PoseSample["message"]);
  }

  private applySnapshot(snap: Snapshot): void {
    this.slideIndex = snap.slideIndex;
    this.phase = snap.phase;
    this.participants.clear();
    this.pending.clear();
    for (const e of snap.entries) {
      const view: ParticipantView = {
        role: e.role,
        avatarRef: e.avatarRef,
        muted: e.muted,
        buffer: new PoseBuffer(),
      };
      if (e.pose) {
        const message = decodePayload(e.pose.msgType, e.pose.payload) as PoseSample["message"];
        view.buffer.push(Number(e.pose.timestampMs), e.pose.seq, message);
        this.lastSeq.set(`${e.participantId}:${StreamClass.Pose}`, e.pose.seq);
      }
      this.participants.set(e.participantId, view);
    }
    if (this.phase === Phase.ClosedDiscussion && this.selfRole === Role.Audience) {
      this.excluded = true;
    }
  }
}
