import { clear, el, svg } from "../dom.js";
import type { RaterPoint } from "../types.js";

const WIDTH = 420;
const HEIGHT = 280;
const PAD = 24;

interface Mark {
  user: string;
  sx: number;
  sy: number;
}

function makeScale(lo: number, hi: number, outLo: number, outHi: number): (v: number) => number {
  const span = hi - lo;
  const mid = (outLo + outHi) / 2;
  if (span === 0) return () => mid;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

function starPath(cx: number, cy: number, radius: number): string {
  const points: string[] = [];
  for (let i = 0; i < 10; i++) {
    const r = i % 2 === 0 ? radius : radius * 0.45;
    const angle = -Math.PI / 2 + (i * Math.PI) / 5;
    points.push(`${(cx + r * Math.cos(angle)).toFixed(2)},${(cy + r * Math.sin(angle)).toFixed(2)}`);
  }
  return `M${points.join("L")}Z`;
}

/**
 * View B: 2D projection of the chosen item's raters. The subject, when among
 * them, is drawn as a star. Dragging a rectangle brushes the users inside it;
 * a degenerate drag (or the Clear button) empties the brush, which the
 * dashboard treats as "all raters".
 */
export class NeighborhoodView {
  readonly root: HTMLElement;
  private readonly canvas: SVGSVGElement;
  private readonly empty: HTMLElement;
  private marks: Mark[] = [];
  private dragOrigin: { x: number; y: number } | null = null;
  private rubber: SVGRectElement | null = null;

  constructor(private readonly onBrush: (users: string[]) => void) {
    this.root = el("section", "view view-neighborhood");
    const header = el("h2", "", "Raters");
    const clearButton = el("button", "clear-brush", "Clear brush");
    clearButton.type = "button";
    clearButton.addEventListener("click", () => this.clearBrush());
    this.canvas = svg("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      width: String(WIDTH),
      height: String(HEIGHT),
      class: "scatter",
    });
    this.empty = el("p", "empty-state", "nobody rated this item");
    this.empty.hidden = true;
    this.root.append(header, clearButton, this.canvas, this.empty);
    this.wireBrush();
  }

  render(raters: RaterPoint[]): void {
    clear(this.canvas);
    this.marks = [];
    this.empty.hidden = raters.length > 0;
    if (!raters.length) return;
    const xs = raters.map((r) => r.x);
    const ys = raters.map((r) => r.y);
    const scaleX = makeScale(Math.min(...xs), Math.max(...xs), PAD, WIDTH - PAD);
    const scaleY = makeScale(Math.min(...ys), Math.max(...ys), HEIGHT - PAD, PAD);
    for (const rater of raters) {
      const sx = scaleX(rater.x);
      const sy = scaleY(rater.y);
      const node = rater.isSubject
        ? svg("path", { d: starPath(sx, sy, 8), class: "mark subject" })
        : svg("circle", { cx: String(sx), cy: String(sy), r: "4", class: "mark" });
      node.dataset.user = rater.user;
      node.dataset.sx = String(sx);
      node.dataset.sy = String(sy);
      if (rater.isSubject) node.dataset.star = "true";
      const title = svg("title");
      title.textContent = rater.user;
      node.append(title);
      this.canvas.append(node);
      this.marks.push({ user: rater.user, sx, sy });
    }
  }

  /** Brush by rectangle in screen coordinates; reports covered users in render order. */
  applyBrush(x0: number, y0: number, x1: number, y1: number): void {
    const loX = Math.min(x0, x1);
    const hiX = Math.max(x0, x1);
    const loY = Math.min(y0, y1);
    const hiY = Math.max(y0, y1);
    const users = this.marks
      .filter((m) => m.sx >= loX && m.sx <= hiX && m.sy >= loY && m.sy <= hiY)
      .map((m) => m.user);
    this.onBrush(users);
  }

  clearBrush(): void {
    this.onBrush([]);
  }

  private toLocal(event: MouseEvent): { x: number; y: number } {
    const box = this.canvas.getBoundingClientRect();
    return { x: event.clientX - box.left, y: event.clientY - box.top };
  }

  private wireBrush(): void {
    this.canvas.addEventListener("mousedown", (event) => {
      this.dragOrigin = this.toLocal(event);
    });
    this.canvas.addEventListener("mousemove", (event) => {
      if (!this.dragOrigin) return;
      const here = this.toLocal(event);
      if (!this.rubber) {
        this.rubber = svg("rect", { class: "rubber" });
        this.canvas.append(this.rubber);
      }
      this.rubber.setAttribute("x", String(Math.min(this.dragOrigin.x, here.x)));
      this.rubber.setAttribute("y", String(Math.min(this.dragOrigin.y, here.y)));
      this.rubber.setAttribute("width", String(Math.abs(here.x - this.dragOrigin.x)));
      this.rubber.setAttribute("height", String(Math.abs(here.y - this.dragOrigin.y)));
    });
    this.canvas.addEventListener("mouseup", (event) => {
      if (!this.dragOrigin) return;
      const origin = this.dragOrigin;
      const here = this.toLocal(event);
      this.dragOrigin = null;
      this.rubber?.remove();
      this.rubber = null;
      const area = Math.abs(here.x - origin.x) * Math.abs(here.y - origin.y);
      if (area < 4) this.clearBrush();
      else this.applyBrush(origin.x, origin.y, here.x, here.y);
    });
  }
}
