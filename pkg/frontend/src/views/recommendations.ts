import { clear, el } from "../dom.js";
import type { Recommendation } from "../types.js";

/**
 * View A: the subject's ranked recommendation list. Each row is clickable
 * and reports its item key through onChoose; the chosen row gets a marker
 * class so the selection is visible.
 */
export class RecommendationsView {
  readonly root: HTMLElement;
  private readonly body: HTMLTableSectionElement;
  private readonly empty: HTMLElement;

  constructor(private readonly onChoose: (item: string) => void) {
    this.root = el("section", "view view-recommendations");
    this.root.append(el("h2", "", "Recommendations"));
    const table = el("table", "rec-table");
    const head = table.createTHead().insertRow();
    for (const label of ["#", "Item", "Score"]) head.append(el("th", "", label));
    this.body = table.createTBody();
    this.empty = el("p", "empty-state", "no recommendations");
    this.empty.hidden = true;
    this.root.append(table, this.empty);
  }

  render(recommendations: Recommendation[]): void {
    clear(this.body);
    this.empty.hidden = recommendations.length > 0;
    for (const rec of recommendations) {
      const row = this.body.insertRow();
      row.dataset.item = rec.item;
      row.dataset.rank = String(rec.rank);
      row.dataset.score = String(rec.score);
      row.insertCell().textContent = String(rec.rank);
      row.insertCell().textContent = rec.item;
      row.insertCell().textContent = rec.score.toFixed(4);
      row.addEventListener("click", () => this.onChoose(rec.item));
    }
  }

  markChosen(item: string | null): void {
    for (const row of Array.from(this.body.rows)) {
      row.classList.toggle("chosen", row.dataset.item === item);
    }
  }
}
