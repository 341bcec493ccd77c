/** Typed client over the query service. One in-flight request per panel:
 *  a newer request aborts the older one (latest wins). */

import type {
  ApiErrorBody, CategoryNode, ScoredRow, SearchPanel, Stats, TrendResponse,
} from "./types.js";
import type { PanelState } from "./state.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;
  private readonly inflight = new Map<string, AbortController>();

  constructor(base: string, fetchFn?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  url(path: string, params: Record<string, string | number | null>): string {
    const qs = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== null && value !== "") qs.set(key, String(value));
    }
    const tail = qs.toString();
    return `${this.base}${path}${tail ? "?" + tail : ""}`;
  }

  private async getJson<T>(panel: string, path: string,
                           params: Record<string, string | number | null>): Promise<T> {
    this.inflight.get(panel)?.abort();
    const controller = new AbortController();
    this.inflight.set(panel, controller);
    try {
      const resp = await this.fetchFn(this.url(path, params),
                                      { signal: controller.signal });
      const body = await resp.json();
      if (!resp.ok) {
        throw new ApiError(resp.status, body as ApiErrorBody);
      }
      return body as T;
    } finally {
      if (this.inflight.get(panel) === controller) {
        this.inflight.delete(panel);
      }
    }
  }

  categories(): Promise<CategoryNode[]> {
    return this.getJson("categories", "/categories", {});
  }

  stats(): Promise<Stats> {
    return this.getJson("stats", "/stats", {});
  }

  topn(state: PanelState): Promise<ScoredRow[]> {
    return this.getJson("topn", "/topn", {
      category: state.category,
      n: state.topN,
      min_posts: state.lo,
      max_posts: state.hi,
    });
  }

  search(query: string, n: number): Promise<SearchPanel[]> {
    return this.getJson("search", "/search", { q: query, n });
  }

  trending(tag: string, from: number, to: number): Promise<TrendResponse> {
    return this.getJson("trending", "/trending", { tag, from, to });
  }

  exportUrl(state: PanelState): string {
    return this.url("/export.csv", {
      category: state.category,
      n: state.topN,
      min_posts: state.lo,
      max_posts: state.hi,
    });
  }

  /** Fetch the CSV body verbatim (bytes passed through untouched). */
  async exportCsv(state: PanelState): Promise<Blob> {
    const resp = await this.fetchFn(this.exportUrl(state), {});
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.json() as ApiErrorBody);
    }
    return resp.blob();
  }
}
