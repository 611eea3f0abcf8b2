import { clear, el } from "../dom.js";
import type { ReviewPage } from "../types.js";

/**
 * View E: one review at a time with prev/next paging. Aspect mentions are
 * wrapped in <mark> segments classed by sign (positive renders green,
 * negative red). Next is disabled on the last page, prev on the first.
 */
export class ReviewsView {
  readonly root: HTMLElement;
  private readonly container: HTMLElement;
  private readonly pageLabel: HTMLElement;
  private readonly prevButton: HTMLButtonElement;
  private readonly nextButton: HTMLButtonElement;
  private readonly empty: HTMLElement;
  private page: ReviewPage | null = null;

  constructor(private readonly onPage: (page: number) => void) {
    this.root = el("section", "view view-reviews");
    this.root.append(el("h2", "", "Reviews"));
    this.container = el("div", "review-list");
    this.prevButton = el("button", "page-prev", "prev");
    this.prevButton.type = "button";
    this.prevButton.disabled = true;
    this.prevButton.addEventListener("click", () => {
      if (this.page && this.page.page > 0) this.onPage(this.page.page - 1);
    });
    this.nextButton = el("button", "page-next", "next");
    this.nextButton.type = "button";
    this.nextButton.disabled = true;
    this.nextButton.addEventListener("click", () => {
      if (this.page && this.page.page < this.page.pageCount - 1) this.onPage(this.page.page + 1);
    });
    this.pageLabel = el("span", "page-label");
    const pager = el("div", "pager");
    pager.append(this.prevButton, this.pageLabel, this.nextButton);
    this.empty = el("p", "empty-state", "no reviews");
    this.empty.hidden = true;
    this.root.append(this.container, pager, this.empty);
  }

  render(page: ReviewPage): void {
    this.page = page;
    clear(this.container);
    this.empty.hidden = page.pageCount > 0;
    for (const review of page.reviews) {
      const block = el("article", "review");
      block.dataset.user = review.user;
      block.append(el("header", "review-user", review.user));
      const body = el("p", "review-text");
      let cursor = 0;
      for (const span of review.spans) {
        if (span.start > cursor) body.append(review.text.slice(cursor, span.start));
        const mark = el("mark", `span ${span.sign}`, review.text.slice(span.start, span.end));
        mark.dataset.start = String(span.start);
        mark.dataset.end = String(span.end);
        mark.dataset.aspect = span.aspect;
        mark.dataset.sign = span.sign;
        body.append(mark);
        cursor = span.end;
      }
      if (cursor < review.text.length) body.append(review.text.slice(cursor));
      block.append(body);
      this.container.append(block);
    }
    this.pageLabel.textContent = page.pageCount
      ? `page ${page.page + 1} of ${page.pageCount}`
      : "";
    this.prevButton.disabled = page.page <= 0;
    this.nextButton.disabled = page.page >= page.pageCount - 1;
  }
}
