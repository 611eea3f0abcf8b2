import { clear, el } from "../dom.js";
import type { AspectHistogram } from "../types.js";

function sortedEntries(counts: Record<string, number>): [string, number][] {
  return Object.entries(counts).sort((a, b) => b[1] - a[1] || a[0].localeCompare(b[0]));
}

/**
 * Views C and D share this shape: paired liked/disliked bar columns, sorted
 * by count descending with alphabetical tie-break, and the top liked aspect
 * called out in a caption.
 */
export class AspectBarsView {
  readonly root: HTMLElement;
  private readonly caption: HTMLElement;
  private readonly likedColumn: HTMLElement;
  private readonly dislikedColumn: HTMLElement;
  private readonly empty: HTMLElement;

  constructor(title: string) {
    this.root = el("section", "view view-aspects");
    this.root.append(el("h2", "", title));
    this.caption = el("p", "top-aspect");
    this.likedColumn = el("div", "bars liked");
    this.dislikedColumn = el("div", "bars disliked");
    const columns = el("div", "bar-columns");
    columns.append(this.likedColumn, this.dislikedColumn);
    this.empty = el("p", "empty-state", "no opinions");
    this.empty.hidden = true;
    this.root.append(this.caption, columns, this.empty);
  }

  render(histogram: AspectHistogram): void {
    this.renderColumn(this.likedColumn, histogram.liked, "liked");
    this.renderColumn(this.dislikedColumn, histogram.disliked, "disliked");
    const likedTop = sortedEntries(histogram.liked);
    if (likedTop.length) {
      this.caption.dataset.topAspect = likedTop[0][0];
      this.caption.textContent = `top liked: ${likedTop[0][0]}`;
    } else {
      delete this.caption.dataset.topAspect;
      this.caption.textContent = "";
    }
    const any = likedTop.length > 0 || Object.keys(histogram.disliked).length > 0;
    this.empty.hidden = any;
  }

  private renderColumn(column: HTMLElement, counts: Record<string, number>, kind: string): void {
    clear(column);
    const entries = sortedEntries(counts);
    const maxCount = entries.length ? entries[0][1] : 0;
    for (const [aspect, count] of entries) {
      const bar = el("div", `bar ${kind}`);
      bar.dataset.aspect = aspect;
      bar.dataset.count = String(count);
      const fill = el("span", "bar-fill");
      fill.style.width = maxCount ? `${(100 * count) / maxCount}%` : "0%";
      bar.append(fill, el("span", "bar-label", `${aspect} (${count})`));
      column.append(bar);
    }
  }
}
