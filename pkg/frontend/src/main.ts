// Page wiring: one-click join from URL query params, render loop, input
// streaming, reconnect banner, and the presenter's slide/phase hotkeys.
//
//   index.html?room=1&role=audience&name=Kim
//
// Slides are static images at slides/<index>.png; a missing asset renders as
// a numbered placeholder.

import { Phase, Role } from "./protocol";
import { InputTracker } from "./input";
import {
  backoffDelayMs,
  MOVE_RATE_HZ,
  SessionOptions,
  ViewerSession,
  webSocketAdapter,
} from "./session";
import { loadSkeleton, renderFrame, Skeleton, SlideSource } from "./render";

const ROLE_NAMES: Record<string, Role> = {
  presenter: Role.Presenter,
  examiner: Role.Examiner,
  audience: Role.Audience,
};

class ImageSlides implements SlideSource {
  private cache = new Map<number, HTMLImageElement | null>();

  image(index: number): CanvasImageSource | null {
    if (!this.cache.has(index)) {
      const img = new Image();
      img.src = `slides/${index}.png`;
      img.onerror = () => this.cache.set(index, null);
      this.cache.set(index, img);
    }
    const img = this.cache.get(index);
    return img && img.complete && img.naturalWidth > 0 ? img : null;
  }
}

function banner(text: string, kind: "info" | "error" = "info"): void {
  const el = document.getElementById("banner")!;
  el.textContent = text;
  el.className = kind;
  el.style.display = text ? "block" : "none";
}

function main(): void {
  const params = new URLSearchParams(location.search);
  const roomId = Number(params.get("room") ?? "1");
  const role = ROLE_NAMES[params.get("role") ?? "audience"] ?? Role.Audience;
  const name = params.get("name") ?? "guest";
  const server = params.get("server") ?? `ws://${location.hostname}:8750`;

  const canvas = document.getElementById("stage") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const input = new InputTracker();
  input.attach(canvas);
  const slides = new ImageSlides();

  let skeleton: Skeleton | null = null;
  loadSkeleton().then((s) => (skeleton = s)).catch(() => banner("skeleton manifest missing", "error"));

  let session: ViewerSession | null = null;
  let attempt = 0;

  const options: SessionOptions = { roomId, role, displayName: name };

  function connect(): void {
    banner(`connecting to ${server} ...`);
    const sock = webSocketAdapter(server);
    session = new ViewerSession(sock, options);
    session.onUpdate = () => {
      if (session!.status === "joined") {
        attempt = 0;
        banner("");
      }
    };
    sock.onclose = (reason) => {
      const why = reason || "connection lost";
      if (session!.status !== "joined" && /Conflict|RoomFull|BadAvatar|PhaseRestricted/.test(why)) {
        // server verdicts are final; surface as a dialog, no retry
        window.alert(`Join refused: ${why}`);
        banner(`join refused: ${why}`, "error");
        return;
      }
      session!.status = "failed";
      attempt += 1;
      const delay = backoffDelayMs(attempt);
      banner(`${why}; reconnecting in ${(delay / 1000).toFixed(1)} s`, "error");
      setTimeout(connect, delay);
    };
  }

  connect();

  setInterval(() => {
    if (session && session.status === "joined") {
      session.moveTick({ keys: input.keys, yaw: input.yaw }, 1 / MOVE_RATE_HZ);
    }
  }, 1000 / MOVE_RATE_HZ);
  setInterval(() => session?.heartbeat(), 1000);

  // presenter hotkeys: arrows for slides, P cycles the phase, M toggles a
  // selected participant's mute (number keys pick the target)
  let muteTarget: number | null = null;
  window.addEventListener("keydown", (e) => {
    if (!session || session.status !== "joined") return;
    if (e.key === "ArrowRight") session.setSlide(session.view.slideIndex + 1);
    if (e.key === "ArrowLeft") session.setSlide(Math.max(0, session.view.slideIndex - 1));
    if (e.key.toUpperCase() === "P") session.setPhase(((session.view.phase + 1) % 4) as Phase);
    if (/^[0-9]$/.test(e.key)) muteTarget = Number(e.key);
    if (e.key.toUpperCase() === "M") {
      const target = muteTarget ?? session.view.selfId;
      if (target !== null) {
        const p = session.view.participants.get(target);
        session.setMuted(target, p ? !p.muted : false);
      }
    }
  });

  function frame(): void {
    if (session) {
      renderFrame(
        ctx as never,
        session.view,
        skeleton,
        slides,
        session.position,
        session.yaw,
        Date.now(),
      );
      const hud = document.getElementById("hud")!;
      hud.textContent =
        `room ${roomId} | ${Role[role]} | slide ${session.view.slideIndex + 1} | ` +
        `phase ${Phase[session.view.phase]} | peers ${session.view.participants.size}`;
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

main();
