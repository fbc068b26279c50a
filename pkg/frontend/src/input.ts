// Keyboard + mouse capture: WASD set and drag-to-turn yaw.

import { wrapPi } from "./math";

export class InputTracker {
  keys = new Set<string>();
  yaw = Math.PI;
  private dragging = false;
  private lastX = 0;

  attach(target: HTMLElement): void {
    window.addEventListener("keydown", (e) => {
      const k = e.key.toUpperCase();
      if ("WASD".includes(k)) this.keys.add(k);
    });
    window.addEventListener("keyup", (e) => {
      this.keys.delete(e.key.toUpperCase());
    });
    window.addEventListener("blur", () => this.keys.clear());
    target.addEventListener("mousedown", (e) => {
      this.dragging = true;
      this.lastX = e.clientX;
    });
    window.addEventListener("mouseup", () => {
      this.dragging = false;
    });
    window.addEventListener("mousemove", (e) => {
      if (!this.dragging) return;
      this.turn((e.clientX - this.lastX) * 0.008);
      this.lastX = e.clientX;
    });
  }

  turn(deltaRad: number): void {
    this.yaw = wrapPi(this.yaw + deltaRad);
  }
}
