import { describe, expect, it } from "vitest";

import {
  renderCategoryOptions, renderSearchPanels, renderTopn, renderTrending,
} from "../src/render.js";
import type {
  CategoryNode, ScoredRow, SearchPanel, TrendResponse,
} from "../src/types.js";
import fixtures from "./fixtures.json";

const topn = fixtures.topn as ScoredRow[];
const panels = fixtures.search as SearchPanel[];
const trend = fixtures.trending as TrendResponse;
const tree = fixtures.categories as CategoryNode[];

describe("top-N dashboard", () => {
  it("renders rows in exact payload order", () => {
    const view = renderTopn(document, topn);
    const names = [...view.querySelectorAll(".topn-row .tag-name")]
      .map((n) => n.textContent);
    expect(names).toEqual(topn.map((r) => r.hashtag));
  });

  it("prints scores and post counts straight from the payload", () => {
    const view = renderTopn(document, topn);
    const rows = [...view.querySelectorAll(".topn-row")];
    rows.forEach((row, i) => {
      expect(row.querySelector(".score")?.textContent)
        .toBe(topn[i].rerank_score.toFixed(4));
      expect(row.querySelector(".posts")?.textContent)
        .toBe(`${topn[i].post_count} posts`);
    });
  });

  it("shows the empty state for an empty payload", () => {
    const view = renderTopn(document, fixtures.topn_empty as ScoredRow[]);
    expect(view.querySelector(".empty-state")).not.toBeNull();
    expect(view.querySelectorAll(".topn-row")).toHaveLength(0);
  });
});

describe("trending dashboard", () => {
  it("renders bucket values point-for-point", () => {
    const view = renderTrending(document, trend);
    const counts = [...view.querySelectorAll(".bucket")]
      .map((b) => Number(b.textContent));
    expect(counts).toEqual(trend.buckets);
  });

  it("labels the total with the payload sum", () => {
    const view = renderTrending(document, trend);
    const total = trend.buckets.reduce((a, b) => a + b, 0);
    expect(view.querySelector(".trend-total")?.textContent)
      .toBe(`${total} posts in window`);
  });

  it("draws one polyline point per bucket", () => {
    const view = renderTrending(document, trend);
    const points = view.querySelector("polyline")?.getAttribute("points") ?? "";
    expect(points.split(" ")).toHaveLength(trend.buckets.length);
  });

  it("flat zero line when the window has no posts", () => {
    const view = renderTrending(document,
                                fixtures.trending_empty as TrendResponse);
    expect(view.querySelector(".trend-chart")?.classList.contains("flat-zero"))
      .toBe(true);
    const counts = [...view.querySelectorAll(".bucket")]
      .map((b) => Number(b.textContent));
    expect(counts).toEqual(new Array(10).fill(0));
  });
});

describe("global search page", () => {
  it("renders panels sorted as the payload is", () => {
    const view = renderSearchPanels(document, panels);
    const names = [...view.querySelectorAll(".result-panel .tag-name")]
      .map((n) => n.textContent);
    expect(names).toEqual(panels.map((p) => p.hashtag));
    const scores = panels.map((p) => p.score);
    expect([...scores].sort((a, b) => b - a)).toEqual(scores);
  });

  it("expands metadata equal to the payload on click", () => {
    const view = renderSearchPanels(document, panels);
    const card = view.querySelector(".result-panel")!;
    const meta = card.querySelector<HTMLElement>(".panel-meta")!;
    expect(meta.hidden).toBe(true);

    (card.querySelector(".panel-head") as HTMLElement).click();
    expect(meta.hidden).toBe(false);
    expect(card.classList.contains("expanded")).toBe(true);

    const p = panels[0];
    expect(meta.querySelector(".meta-posts")?.textContent)
      .toBe(`post count: ${p.post_count}`);
    expect(meta.querySelector(".meta-similarity")?.textContent)
      .toBe(`similarity: ${p.similarity}`);
    expect(meta.querySelector(".meta-timestamps")?.textContent)
      .toBe(`timestamps: ${p.timestamps.join(", ")}`);

    (card.querySelector(".panel-head") as HTMLElement).click();
    expect(meta.hidden).toBe(true);
  });

  it("shows the empty state when nothing matched", () => {
    const view = renderSearchPanels(document,
                                    fixtures.search_empty as SearchPanel[]);
    expect(view.querySelector(".empty-state")).not.toBeNull();
  });
});

describe("category control", () => {
  it("flattens the tree into indented options, ids preserved", () => {
    const select = document.createElement("select");
    renderCategoryOptions(document, tree, select);
    const values = [...select.options].map((o) => o.value);
    expect(values[0]).toBe("");
    const collect = (nodes: CategoryNode[]): string[] =>
      nodes.flatMap((n) => [n.id, ...collect(n.children)]);
    expect(values.slice(1)).toEqual(collect(tree));
  });
});
