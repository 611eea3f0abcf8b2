import { clear, el } from "../dom.js";
import type { RatingHistogram } from "../types.js";

const BUCKETS = ["1", "2", "3", "4", "5"];

/**
 * View F: rating counts for buckets 1..5 among the selected users. An
 * all-zero histogram collapses to the empty state.
 */
export class RatingsView {
  readonly root: HTMLElement;
  private readonly chart: HTMLElement;
  private readonly empty: HTMLElement;

  constructor() {
    this.root = el("section", "view view-ratings");
    this.root.append(el("h2", "", "Ratings"));
    this.chart = el("div", "rating-bars");
    this.empty = el("p", "empty-state", "no ratings");
    this.empty.hidden = true;
    this.root.append(this.chart, this.empty);
  }

  render(histogram: RatingHistogram): void {
    clear(this.chart);
    const counts = BUCKETS.map((bucket) => histogram[bucket] ?? 0);
    const maxCount = Math.max(...counts);
    this.empty.hidden = maxCount > 0;
    this.chart.hidden = maxCount === 0;
    if (maxCount === 0) return;
    for (const bucket of BUCKETS) {
      const count = histogram[bucket] ?? 0;
      const bar = el("div", "bar rating");
      bar.dataset.bucket = bucket;
      bar.dataset.count = String(count);
      const fill = el("span", "bar-fill");
      fill.style.height = `${(100 * count) / maxCount}%`;
      bar.append(fill, el("span", "bar-label", `${bucket}: ${count}`));
      this.chart.append(bar);
    }
  }
}
