/** Payload shapes for the aspectkg HTTP API. */

export interface Recommendation {
  item: string;
  score: number;
  rank: number;
}

export interface RaterPoint {
  user: string;
  x: number;
  y: number;
  isSubject: boolean;
}

/** Liked/disliked aspect counts, as served by /aspects/distribution and /users/{key}/aspect-profile. */
export interface AspectHistogram {
  liked: Record<string, number>;
  disliked: Record<string, number>;
}

export type SpanSign = "positive" | "negative" | "neutral";

export interface ReviewSpan {
  start: number;
  end: number;
  aspect: string;
  sign: SpanSign;
}

export interface HighlightedReview {
  user: string;
  text: string;
  spans: ReviewSpan[];
}

export interface ReviewPage {
  page: number;
  pageSize: number;
  pageCount: number;
  reviews: HighlightedReview[];
}

/** Keys "1".."5" mapping to counts. */
export type RatingHistogram = Record<string, number>;

export interface ApiErrorBody {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
    this.name = "ApiError";
  }
}
