import type { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { SelectionStore, type SelectionChange, type SelectionState } from "./store.js";
import { ApiError, type RaterPoint, type Recommendation } from "./types.js";
import { AspectBarsView } from "./views/aspects.js";
import { NeighborhoodView } from "./views/neighborhood.js";
import { RatingsView } from "./views/ratings.js";
import { RecommendationsView } from "./views/recommendations.js";
import { ReviewsView } from "./views/reviews.js";

const EMPTY_HISTOGRAM = { liked: {}, disliked: {} };
const EMPTY_PAGE = { page: 0, pageSize: 1, pageCount: 0, reviews: [] };

/**
 * Wires the six views to the selection store and the API client.
 *
 * Refresh contract: a subject change reloads the recommendation list and the
 * subject profile (and blanks everything downstream); choosing an item
 * reloads the rater scatter and then the three brush-dependent views; a brush
 * change reloads only those three. Every selection change bumps a version
 * counter and responses carrying a stale version are dropped, so a slow reply
 * for a superseded selection can never overwrite a newer one.
 */
export class Dashboard {
  readonly store: SelectionStore;
  readonly recommendations: RecommendationsView;
  readonly neighborhood: NeighborhoodView;
  readonly neighborhoodAspects: AspectBarsView;
  readonly subjectProfile: AspectBarsView;
  readonly reviews: ReviewsView;
  readonly ratings: RatingsView;
  readonly banner: HTMLElement;

  private version = 0;
  private recommendationList: Recommendation[] = [];
  private raterList: RaterPoint[] = [];

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    subjectUser: string,
  ) {
    this.store = new SelectionStore(subjectUser);
    this.banner = el("div", "error-banner");
    this.banner.hidden = true;
    this.recommendations = new RecommendationsView((item) => this.chooseItem(item));
    this.neighborhood = new NeighborhoodView((users) => this.applyBrush(users));
    this.neighborhoodAspects = new AspectBarsView("Neighborhood aspects");
    this.subjectProfile = new AspectBarsView("Subject profile");
    this.reviews = new ReviewsView((page) => void this.loadReviewPage(page));
    this.ratings = new RatingsView();
    this.root.classList.add("dashboard");
    this.root.append(
      this.banner,
      this.recommendations.root,
      this.neighborhood.root,
      this.neighborhoodAspects.root,
      this.subjectProfile.root,
      this.reviews.root,
      this.ratings.root,
    );
    this.store.subscribe((state, change) => this.onSelection(state, change));
  }

  /** Initial load for the configured subject. */
  async start(): Promise<void> {
    await this.refreshSubject(++this.version, this.store.current);
  }

  setSubject(user: string): void {
    this.store.setSubject(user);
  }

  /** Ignores items outside the current recommendation list. */
  chooseItem(item: string): void {
    if (!this.recommendationList.some((rec) => rec.item === item)) return;
    this.store.chooseItem(item);
    this.recommendations.markChosen(item);
  }

  /** Clamps the brush to users that are raters of the chosen item. */
  applyBrush(users: string[]): void {
    if (this.store.current.chosenItem === null) return;
    const raterKeys = new Set(this.raterList.map((r) => r.user));
    this.store.setBrush(users.filter((user) => raterKeys.has(user)));
  }

  private onSelection(state: SelectionState, change: SelectionChange): void {
    const version = ++this.version;
    this.clearError();
    if (change === "subject") {
      this.resetItemViews();
      void this.refreshSubject(version, state);
    } else if (change === "item") {
      void this.refreshItem(version, state);
    } else {
      void this.refreshBrushDependents(version, state, this.allRaterKeys());
    }
  }

  private guard(version: number): boolean {
    return version === this.version;
  }

  private allRaterKeys(): string[] {
    return this.raterList.map((r) => r.user);
  }

  private resetItemViews(): void {
    this.raterList = [];
    this.neighborhood.render([]);
    this.neighborhoodAspects.render(EMPTY_HISTOGRAM);
    this.reviews.render(EMPTY_PAGE);
    this.ratings.render({});
    this.recommendations.markChosen(null);
  }

  private async refreshSubject(version: number, state: SelectionState): Promise<void> {
    try {
      await Promise.all([
        this.api.recommendations(state.subjectUser).then((recs) => {
          if (!this.guard(version)) return;
          this.recommendationList = recs;
          this.recommendations.render(recs);
        }),
        this.api.aspectProfile(state.subjectUser).then((histogram) => {
          if (this.guard(version)) this.subjectProfile.render(histogram);
        }),
      ]);
    } catch (err) {
      if (this.guard(version)) this.showError(err);
    }
  }

  private async refreshItem(version: number, state: SelectionState): Promise<void> {
    if (state.chosenItem === null) {
      this.resetItemViews();
      return;
    }
    try {
      const raters = await this.api.raters(state.chosenItem, state.subjectUser);
      if (!this.guard(version)) return;
      this.raterList = raters;
      this.neighborhood.render(raters);
      await this.refreshBrushDependents(
        version,
        state,
        raters.map((r) => r.user),
      );
    } catch (err) {
      if (this.guard(version)) this.showError(err);
    }
  }

  private async refreshBrushDependents(
    version: number,
    state: SelectionState,
    allRaters: string[],
  ): Promise<void> {
    const item = state.chosenItem;
    if (item === null) return;
    const brushed = state.brushedUsers.length ? state.brushedUsers : null;
    const tasks: Promise<void>[] = [];
    const aspectUsers = brushed ?? allRaters;
    if (aspectUsers.length) {
      tasks.push(
        this.api.aspectDistribution(item, aspectUsers).then((histogram) => {
          if (this.guard(version)) this.neighborhoodAspects.render(histogram);
        }),
      );
    } else {
      this.neighborhoodAspects.render(EMPTY_HISTOGRAM);
    }
    tasks.push(
      this.api.reviews(item, { users: brushed ?? undefined, page: 0, pageSize: 1 }).then((page) => {
        if (this.guard(version)) this.reviews.render(page);
      }),
    );
    tasks.push(
      this.api.ratingDistribution(item, brushed ?? undefined).then((histogram) => {
        if (this.guard(version)) this.ratings.render(histogram);
      }),
    );
    try {
      await Promise.all(tasks);
    } catch (err) {
      if (this.guard(version)) this.showError(err);
    }
  }

  /** Paging within view E; not a selection change, but still version-guarded. */
  private async loadReviewPage(page: number): Promise<void> {
    const state = this.store.current;
    if (state.chosenItem === null) return;
    const version = this.version;
    try {
      const payload = await this.api.reviews(state.chosenItem, {
        users: state.brushedUsers.length ? state.brushedUsers : undefined,
        page,
        pageSize: 1,
      });
      if (this.guard(version)) this.reviews.render(payload);
    } catch (err) {
      if (this.guard(version)) this.showError(err);
    }
  }

  private showError(err: unknown): void {
    const message =
      err instanceof ApiError ? err.message : err instanceof Error ? err.message : String(err);
    this.banner.textContent = `request failed: ${message}`;
    this.banner.hidden = false;
    this.root.classList.add("stale");
  }

  private clearError(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
    this.root.classList.remove("stale");
  }
}
