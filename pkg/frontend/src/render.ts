// Flat 3D canvas renderer: stick-figure avatars, the slide plane, speaking
// indicators scaled by proximity gain, and the exclusion notice.
//
// The camera is a third-person follow: positioned behind and above the local
// avatar, looking along its yaw.

import type { Message, Role, Vec3 } from "./protocol";
import { Role as RoleEnum } from "./protocol";
import { RoomView, samplePose, INTERP_DELAY_MS } from "./view";

export const AUDIO_REF_M = 1.0;
export const AUDIO_MIN_GAIN = 0.05;

export function proximityGain(listener: Vec3, speaker: Vec3): number {
  const d = Math.hypot(
    speaker[0] - listener[0],
    speaker[1] - listener[1],
    speaker[2] - listener[2],
  );
  return Math.min(1, Math.max(AUDIO_REF_M / Math.max(d, AUDIO_REF_M), AUDIO_MIN_GAIN));
}

export interface Skeleton {
  names: string[];
  parents: number[]; // -1 for the root
}

export async function loadSkeleton(url = "skeleton59.json"): Promise<Skeleton> {
  const res = await fetch(url);
  const doc = await res.json();
  return skeletonFromManifest(doc);
}

export function skeletonFromManifest(doc: {
  joints: Array<{ name: string; parent: string | null }>;
}): Skeleton {
  const names = doc.joints.map((j) => j.name);
  const index = new Map(names.map((n, i) => [n, i]));
  const parents = doc.joints.map((j) => (j.parent === null ? -1 : index.get(j.parent)!));
  return { names, parents };
}

// nine-joint stick figure: (from, to) pairs over the wire order
// hips, spine, head, l-upper, l-fore, l-hand, r-upper, r-fore, r-hand
const IK_BONES: Array<[number, number]> = [
  [0, 1], [1, 2], [1, 3], [3, 4], [4, 5], [1, 6], [6, 7], [7, 8],
];

export interface Camera {
  position: Vec3;
  yaw: number;
  fovScale: number; // pixels per meter at 1 m
}

export function thirdPersonCamera(target: Vec3, yaw: number): Camera {
  return {
    position: [
      target[0] - 2.6 * Math.sin(yaw),
      target[1] + 1.9,
      target[2] - 2.6 * Math.cos(yaw),
    ],
    yaw,
    fovScale: 420,
  };
}

export function project(camera: Camera, p: Vec3, width: number, height: number): [number, number] | null {
  const dx = p[0] - camera.position[0];
  const dy = p[1] - camera.position[1];
  const dz = p[2] - camera.position[2];
  const cos = Math.cos(-camera.yaw);
  const sin = Math.sin(-camera.yaw);
  const x = dx * cos - dz * sin;
  const z = dx * sin + dz * cos;
  if (z < 0.15) return null; // behind the camera
  return [width / 2 + (x / z) * camera.fovScale, height / 2 - ((dy + 0.6) / z) * camera.fovScale];
}

export interface SlideSource {
  /** Drawable for slide `index`, or null to fall back to the placeholder. */
  image(index: number): CanvasImageSource | null;
}

export interface RenderStats {
  avatarsDrawn: number;
  jointsDrawn: number;
  bonesDrawn: number;
  slidePlaceholder: boolean;
  indicators: Array<{ participantId: number; gain: number }>;
  excludedOverlay: boolean;
}

interface Ctx2D {
  canvas: { width: number; height: number };
  fillStyle: unknown;
  strokeStyle: unknown;
  lineWidth: number;
  font: string;
  textAlign: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  drawImage(img: CanvasImageSource, x: number, y: number, w: number, h: number): void;
}

const SLIDE_PLANE = { center: [0, 1.7, -3.0] as Vec3, width: 3.2, height: 1.8 };

function jointsOf(message: Message): Vec3[] | null {
  if (message.kind === "pose_full" || message.kind === "pose_ik") {
    return message.joints.map((j) => j.position);
  }
  if (message.kind === "transform_simple") {
    // browser users render as a simple two-segment marker at their transform
    const [x, y, z] = message.position;
    return [
      [x, y, z],
      [x, y + 1.2, z],
      [x, y + 1.55, z],
    ];
  }
  return null;
}

function bonesFor(message: Message, skeleton: Skeleton | null): Array<[number, number]> {
  if (message.kind === "pose_full" && skeleton) {
    const out: Array<[number, number]> = [];
    skeleton.parents.forEach((p, i) => {
      if (p >= 0) out.push([p, i]);
    });
    return out;
  }
  if (message.kind === "pose_ik") return IK_BONES;
  return [
    [0, 1],
    [1, 2],
  ];
}

export function renderFrame(
  ctx: Ctx2D,
  view: RoomView,
  skeleton: Skeleton | null,
  slides: SlideSource,
  localPosition: Vec3,
  localYaw: number,
  nowMs: number,
): RenderStats {
  const stats: RenderStats = {
    avatarsDrawn: 0,
    jointsDrawn: 0,
    bonesDrawn: 0,
    slidePlaceholder: false,
    indicators: [],
    excludedOverlay: false,
  };
  const width = ctx.canvas.width;
  const height = ctx.canvas.height;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);

  if (view.excluded) {
    ctx.fillStyle = "#e8e3d0";
    ctx.font = "24px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("Closed discussion in progress", width / 2, height / 2 - 12);
    ctx.fillText("You have been moved out of the room", width / 2, height / 2 + 18);
    stats.excludedOverlay = true;
    return stats;
  }

  const camera = thirdPersonCamera(localPosition, localYaw);
  const renderTime = nowMs - INTERP_DELAY_MS;

  // slide plane
  const corners: Vec3[] = [
    [SLIDE_PLANE.center[0] - SLIDE_PLANE.width / 2, SLIDE_PLANE.center[1] + SLIDE_PLANE.height / 2, SLIDE_PLANE.center[2]],
    [SLIDE_PLANE.center[0] + SLIDE_PLANE.width / 2, SLIDE_PLANE.center[1] - SLIDE_PLANE.height / 2, SLIDE_PLANE.center[2]],
  ];
  const tl = project(camera, corners[0], width, height);
  const br = project(camera, corners[1], width, height);
  if (tl && br) {
    const img = slides.image(view.slideIndex);
    if (img) {
      ctx.drawImage(img, tl[0], tl[1], br[0] - tl[0], br[1] - tl[1]);
    } else {
      stats.slidePlaceholder = true;
      ctx.fillStyle = "#2a3243";
      ctx.fillRect(tl[0], tl[1], br[0] - tl[0], br[1] - tl[1]);
      ctx.strokeStyle = "#5a6880";
      ctx.strokeRect(tl[0], tl[1], br[0] - tl[0], br[1] - tl[1]);
      ctx.fillStyle = "#aeb9cd";
      ctx.font = "28px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(`Slide ${view.slideIndex + 1}`, (tl[0] + br[0]) / 2, (tl[1] + br[1]) / 2);
    }
  }

  // remote avatars
  for (const [pid, participant] of view.participants) {
    if (pid === view.selfId) continue;
    if (participant.role === RoleEnum.OnsiteBridge) continue; // audio only, no avatar
    const pose = samplePose(participant.buffer, renderTime);
    if (!pose) continue;
    const joints = jointsOf(pose);
    if (!joints) continue;
    stats.avatarsDrawn += 1;

    ctx.strokeStyle = participant.role === RoleEnum.Presenter ? "#ffd27d" : "#8fd0ff";
    ctx.lineWidth = 2;
    for (const [a, b] of bonesFor(pose, skeleton)) {
      const pa = project(camera, joints[a], width, height);
      const pb = project(camera, joints[b], width, height);
      if (!pa || !pb) continue;
      ctx.beginPath();
      ctx.moveTo(pa[0], pa[1]);
      ctx.lineTo(pb[0], pb[1]);
      ctx.stroke();
      stats.bonesDrawn += 1;
    }
    for (const j of joints) {
      const pj = project(camera, j, width, height);
      if (!pj) continue;
      ctx.beginPath();
      ctx.arc(pj[0], pj[1], 2, 0, 2 * Math.PI);
      ctx.fill();
      stats.jointsDrawn += 1;
    }

    // speaking indicator, sized by proximity gain
    if (!participant.muted) {
      const head = joints[Math.min(2, joints.length - 1)];
      const gain = proximityGain(localPosition, head);
      const ph = project(camera, [head[0], head[1] + 0.25, head[2]], width, height);
      if (ph) {
        ctx.fillStyle = "#7dff9b";
        ctx.beginPath();
        ctx.arc(ph[0], ph[1], 3 + 9 * gain, 0, 2 * Math.PI);
        ctx.fill();
      }
      stats.indicators.push({ participantId: pid, gain });
    }
  }
  return stats;
}
