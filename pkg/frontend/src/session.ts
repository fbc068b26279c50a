// ViewerSession: join over WebSocket, mirror the room, stream local movement.
//
// The session only ever sends what its role is allowed to send (client-side
// mirror of the server authority table); everything else is refused locally.

import {
  encode,
  Envelope,
  decode,
  Header,
  Message,
  MsgType,
  msgTypeOf,
  Phase,
  Role,
} from "./protocol";
import { wrapPi } from "./math";
import { RoomView } from "./view";

export const WALK_SPEED_MPS = 1.4;
export const MOVE_RATE_HZ = 20;
export const INTENSITY_WINDOW_MS = 250;

// role -> message types it may originate
export const AUTHORITY: Record<Role, ReadonlySet<MsgType>> = {
  [Role.Presenter]: new Set([
    MsgType.JoinRequest, MsgType.PoseFull, MsgType.SlideCommand, MsgType.MuteControl,
    MsgType.PhaseChange, MsgType.AudioFrame, MsgType.Leave, MsgType.Heartbeat,
  ]),
  [Role.Examiner]: new Set([
    MsgType.JoinRequest, MsgType.PoseIK, MsgType.TransformSimple, MsgType.MuteControl,
    MsgType.AudioFrame, MsgType.Leave, MsgType.Heartbeat,
  ]),
  [Role.Audience]: new Set([
    MsgType.JoinRequest, MsgType.PoseIK, MsgType.TransformSimple, MsgType.MuteControl,
    MsgType.AudioFrame, MsgType.Leave, MsgType.Heartbeat,
  ]),
  [Role.OnsiteBridge]: new Set([
    MsgType.JoinRequest, MsgType.AudioFrame, MsgType.Leave, MsgType.Heartbeat,
  ]),
};

export type ConnectionStatus = "connecting" | "joined" | "closed" | "failed";

export interface SocketLike {
  send(data: Uint8Array): void;
  close(): void;
  onmessage: ((data: Uint8Array) => void) | null;
  onclose: ((reason: string) => void) | null;
  onopen: (() => void) | null;
}

// Browser WebSocket adapted to SocketLike; tests substitute a scripted feed.
export function webSocketAdapter(url: string): SocketLike {
  const ws = new WebSocket(url);
  ws.binaryType = "arraybuffer";
  const adapter: SocketLike = {
    send: (data) => ws.send(data),
    close: () => ws.close(),
    onmessage: null,
    onclose: null,
    onopen: null,
  };
  ws.addEventListener("open", () => adapter.onopen?.());
  ws.addEventListener("message", (ev) => {
    if (ev.data instanceof ArrayBuffer) adapter.onmessage?.(new Uint8Array(ev.data));
  });
  ws.addEventListener("close", (ev) => adapter.onclose?.(ev.reason || `code ${ev.code}`));
  return adapter;
}

export interface SessionOptions {
  roomId: number;
  role: Role;
  displayName: string;
  avatarRef?: string;
  now?: () => number;
}

export interface MoveInput {
  keys: ReadonlySet<string>; // "W" | "A" | "S" | "D"
  yaw: number;
}

export class ViewerSession {
  view = new RoomView();
  status: ConnectionStatus = "connecting";
  closeReason: string | null = null;
  refusedSends = 0;

  position: [number, number, number] = [0, 0, 2.5];
  yaw = Math.PI; // face the stage

  private seq = 0;
  private now: () => number;
  private moveHistory: Array<{ t: number; moving: boolean }> = [];

  constructor(
    private socket: SocketLike,
    private options: SessionOptions,
  ) {
    this.now = options.now ?? (() => Date.now());
    socket.onmessage = (data) => this.onFrame(data);
    socket.onclose = (reason) => {
      this.closeReason = reason;
      this.status = this.status === "joined" ? "closed" : "failed";
    };
    socket.onopen = () => this.sendJoin();
  }

  private header(): Header {
    this.seq += 1;
    return {
      roomId: this.options.roomId,
      senderId: this.view.selfId ?? 0,
      seq: this.seq,
      timestampMs: BigInt(Math.floor(this.now())),
    };
  }

  private sendJoin(): void {
    const join: Message = {
      kind: "join_request",
      role: this.options.role,
      displayName: this.options.displayName,
      avatarRef: this.options.avatarRef ?? `avatar://${this.options.displayName || "guest"}`,
    };
    this.socket.send(encode(join, this.header()));
  }

  /** Authority-gated send; disallowed messages are counted and dropped. */
  send(message: Message): boolean {
    if (!AUTHORITY[this.options.role].has(msgTypeOf(message))) {
      this.refusedSends += 1;
      return false;
    }
    if (this.status !== "joined" && message.kind !== "join_request") return false;
    this.socket.send(encode(message, this.header()));
    return true;
  }

  private onFrame(data: Uint8Array): void {
    const env: Envelope = decode(data);
    if (env.message.kind === "join_accept") {
      this.status = "joined";
    }
    this.view.apply(env);
    this.onUpdate?.(env);
  }

  onUpdate: ((env: Envelope) => void) | null = null;

  // -- local movement --------------------------------------------------------

  /** Integrate one movement tick (dt seconds) and stream the transform. */
  moveTick(input: MoveInput, dtS: number): void {
    const t = this.now();
    this.yaw = wrapPi(input.yaw);
    const fwd = [Math.sin(this.yaw), 0, Math.cos(this.yaw)];
    const right = [fwd[2], 0, -fwd[0]];
    let vx = 0;
    let vz = 0;
    if (input.keys.has("W")) {
      vx += fwd[0];
      vz += fwd[2];
    }
    if (input.keys.has("S")) {
      vx -= fwd[0];
      vz -= fwd[2];
    }
    if (input.keys.has("D")) {
      vx += right[0];
      vz += right[2];
    }
    if (input.keys.has("A")) {
      vx -= right[0];
      vz -= right[2];
    }
    const norm = Math.hypot(vx, vz);
    const moving = norm > 1e-9;
    if (moving) {
      this.position[0] += (vx / norm) * WALK_SPEED_MPS * dtS;
      this.position[2] += (vz / norm) * WALK_SPEED_MPS * dtS;
    }
    this.moveHistory.push({ t, moving });
    const cutoff = t - INTENSITY_WINDOW_MS;
    this.moveHistory = this.moveHistory.filter((h) => h.t >= cutoff);
    const held = this.moveHistory.filter((h) => h.moving).length;
    const intensity = this.moveHistory.length ? held / this.moveHistory.length : 0;

    let yawWire = this.yaw;
    if (yawWire <= -Math.PI) yawWire = Math.PI;
    this.send({
      kind: "transform_simple",
      position: [this.position[0], this.position[1], this.position[2]],
      yaw: yawWire,
      locomotion: moving ? 1 : 0,
      intensity,
    });
  }

  heartbeat(): void {
    this.send({ kind: "heartbeat" });
  }

  setSlide(index: number): boolean {
    return this.send({ kind: "slide_command", slideIndex: index });
  }

  setPhase(phase: Phase): boolean {
    return this.send({ kind: "phase_change", phase });
  }

  setMuted(targetId: number, muted: boolean): boolean {
    return this.send({ kind: "mute_control", targetId, muted });
  }

  leave(): void {
    this.send({ kind: "leave" });
    this.socket.close();
  }
}

// Reconnect helper: exponential backoff, capped.
export function backoffDelayMs(attempt: number): number {
  return Math.min(8000, 500 * 2 ** attempt);
}
