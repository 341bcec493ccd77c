import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { DEFAULT_STATE } from "../src/state.js";
import fixtures from "./fixtures.json";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("request construction", () => {
  it("builds /topn urls from panel state, omitting unset bounds", async () => {
    const urls: string[] = [];
    const client = new ApiClient("http://svc", async (input) => {
      urls.push(input);
      return jsonResponse([]);
    });
    await client.topn({ ...DEFAULT_STATE, category: "c-shoes", topN: 7 });
    expect(urls).toEqual(["http://svc/topn?category=c-shoes&n=7"]);

    await client.topn({ ...DEFAULT_STATE, category: "c-shoes", topN: 7,
                        lo: 2, hi: 9 });
    expect(urls[1])
      .toBe("http://svc/topn?category=c-shoes&n=7&min_posts=2&max_posts=9");
  });

  it("percent-encodes hashtags in trending requests", async () => {
    const urls: string[] = [];
    const client = new ApiClient("http://svc", async (input) => {
      urls.push(input);
      return jsonResponse(fixtures.trending);
    });
    await client.trending("#makeup", 0, 20000);
    expect(urls[0]).toBe("http://svc/trending?tag=%23makeup&from=0&to=20000");
  });

  it("export url mirrors the topn parameters", () => {
    const client = new ApiClient("http://svc", async () => jsonResponse([]));
    const url = client.exportUrl({ ...DEFAULT_STATE, category: "c-x",
                                   topN: 3, lo: 1, hi: null });
    expect(url).toBe("http://svc/export.csv?category=c-x&n=3&min_posts=1");
  });
});

describe("error handling", () => {
  it("raises ApiError carrying the service's code and message", async () => {
    const client = new ApiClient("http://svc", async () =>
      jsonResponse({ code: "unknown_category", message: "no such id" }, 404));
    const err = await client.topn({ ...DEFAULT_STATE, category: "c-nope" })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("unknown_category");
  });
});

describe("latest-wins cancellation", () => {
  it("aborts the in-flight request of the same panel", async () => {
    const signals: AbortSignal[] = [];
    let release: (() => void) | null = null;
    const client = new ApiClient("http://svc", (input, init) => {
      signals.push(init!.signal!);
      return new Promise((resolve, reject) => {
        const finish = () => resolve(jsonResponse([]));
        init!.signal!.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")));
        if (release === null) {
          release = finish; // hold the first request open
        } else {
          finish();
        }
      });
    });

    const first = client.topn({ ...DEFAULT_STATE, category: "a" });
    const second = client.topn({ ...DEFAULT_STATE, category: "b" });

    await expect(first).rejects.toThrow("aborted");
    await expect(second).resolves.toEqual([]);
    expect(signals[0].aborted).toBe(true);
    expect(signals[1].aborted).toBe(false);
  });

  it("keeps different panels independent", async () => {
    const client = new ApiClient("http://svc", async (input) => {
      if (input.includes("/topn")) return jsonResponse([]);
      return jsonResponse(fixtures.search);
    });
    const [rows, panels] = await Promise.all([
      client.topn({ ...DEFAULT_STATE, category: "a" }),
      client.search("makeup", 5),
    ]);
    expect(rows).toEqual([]);
    expect(panels).toEqual(fixtures.search);
  });
});

describe("csv export", () => {
  it("passes the body through byte-for-byte", async () => {
    const client = new ApiClient("http://svc", async () =>
      new Response(fixtures.export_csv, {
        status: 200, headers: { "content-type": "text/csv" },
      }));
    const blob = await client.exportCsv({ ...DEFAULT_STATE,
                                          category: "c-shoes", topN: 8 });
    expect(await blob.text()).toBe(fixtures.export_csv);
  });
});
