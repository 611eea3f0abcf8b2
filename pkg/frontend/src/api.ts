import {
  ApiError,
  type ApiErrorBody,
  type AspectHistogram,
  type RaterPoint,
  type RatingHistogram,
  type Recommendation,
  type ReviewPage,
} from "./types.js";

/** Minimal fetch surface so tests can substitute a fixture-backed transport. */
export type FetchLike = (url: string) => Promise<{
  status: number;
  json(): Promise<unknown>;
}>;

export interface ReviewQuery {
  users?: string[];
  page?: number;
  pageSize?: number;
}

/**
 * Thin typed client over the six read endpoints.
 *
 * Every method returns the decoded payload on HTTP 200 and throws ApiError
 * carrying the server's {code, message} envelope on anything else.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(path: string, query: Record<string, string | undefined> = {}): Promise<T> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) params.set(key, value);
    }
    const qs = params.toString();
    const response = await this.fetchImpl(`${this.baseUrl}${path}${qs ? `?${qs}` : ""}`);
    const body = (await response.json()) as unknown;
    if (response.status !== 200) throw new ApiError(response.status, body as ApiErrorBody);
    return body as T;
  }

  recommendations(user: string, n = 10): Promise<Recommendation[]> {
    return this.get(`/users/${encodeURIComponent(user)}/recommendations`, { n: String(n) });
  }

  raters(item: string, subject: string): Promise<RaterPoint[]> {
    return this.get(`/items/${encodeURIComponent(item)}/raters`, { subject });
  }

  aspectDistribution(item: string, users: string[]): Promise<AspectHistogram> {
    return this.get("/aspects/distribution", { item, users: users.join(",") });
  }

  aspectProfile(user: string): Promise<AspectHistogram> {
    return this.get(`/users/${encodeURIComponent(user)}/aspect-profile`);
  }

  reviews(item: string, query: ReviewQuery = {}): Promise<ReviewPage> {
    return this.get(`/items/${encodeURIComponent(item)}/reviews`, {
      users: query.users?.join(","),
      page: String(query.page ?? 0),
      pageSize: String(query.pageSize ?? 1),
    });
  }

  ratingDistribution(item: string, users?: string[]): Promise<RatingHistogram> {
    return this.get(`/items/${encodeURIComponent(item)}/rating-distribution`, {
      users: users?.join(","),
    });
  }
}
