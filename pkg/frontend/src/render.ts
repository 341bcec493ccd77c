/** DOM builders for the three sub-dashboards and the search page.
 *
 *  Every list renders in payload order; scores and counts are printed as
 *  received. Nothing here sorts, filters or rescales beyond bar widths,
 *  which are a visual mapping of the payload's own values.
 */

import type {
  CategoryNode, ScoredRow, SearchPanel, TrendResponse,
} from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document, tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderEmptyState(doc: Document, message: string): HTMLElement {
  return el(doc, "div", "empty-state", message);
}

export function renderErrorBanner(doc: Document, message: string): HTMLElement {
  const banner = el(doc, "div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.textContent = message;
  return banner;
}

/** Ranked bar list for /topn rows. */
export function renderTopn(doc: Document, rows: ScoredRow[]): HTMLElement {
  const root = el(doc, "div", "topn-list");
  if (rows.length === 0) {
    root.appendChild(renderEmptyState(doc, "no hashtags match the current filters"));
    return root;
  }
  const maxScore = Math.max(...rows.map((r) => r.rerank_score), 0);
  rows.forEach((row, i) => {
    const item = el(doc, "div", "topn-row");
    item.dataset.hashtag = row.hashtag;
    item.dataset.rank = String(i + 1);
    item.appendChild(el(doc, "span", "rank", String(i + 1)));
    item.appendChild(el(doc, "span", "tag-name", row.hashtag));
    const bar = el(doc, "div", "bar");
    const pct = maxScore > 0 ? (100 * row.rerank_score) / maxScore : 0;
    bar.style.width = `${pct.toFixed(2)}%`;
    item.appendChild(bar);
    item.appendChild(el(doc, "span", "score",
                        row.rerank_score.toFixed(4)));
    item.appendChild(el(doc, "span", "posts", `${row.post_count} posts`));
    root.appendChild(item);
  });
  return root;
}

/** Time-series view of /trending buckets (inline SVG polyline). */
export function renderTrending(doc: Document, payload: TrendResponse): HTMLElement {
  const root = el(doc, "div", "trending-view");
  root.dataset.tag = payload.tag;

  const total = payload.buckets.reduce((a, b) => a + b, 0);
  const head = el(doc, "div", "trending-head");
  head.appendChild(el(doc, "span", "trend-value",
                      `trend ${payload.trend >= 0 ? "+" : ""}${payload.trend.toFixed(3)}`));
  head.appendChild(el(doc, "span", "trend-total", `${total} posts in window`));
  root.appendChild(head);

  const width = 400;
  const height = 120;
  const maxCount = Math.max(...payload.buckets, 1);
  const svg = doc.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", total === 0 ? "trend-chart flat-zero" : "trend-chart");
  const step = width / Math.max(payload.buckets.length - 1, 1);
  const points = payload.buckets
    .map((count, i) => `${(i * step).toFixed(1)},${(height - (height - 10) * (count / maxCount)).toFixed(1)}`)
    .join(" ");
  const line = doc.createElementNS("http://www.w3.org/2000/svg", "polyline");
  line.setAttribute("points", points);
  line.setAttribute("fill", "none");
  svg.appendChild(line);
  root.appendChild(svg);

  const series = el(doc, "div", "bucket-series");
  payload.buckets.forEach((count, i) => {
    const cell = el(doc, "span", "bucket", String(count));
    cell.dataset.bucket = String(i);
    cell.dataset.count = String(count);
    series.appendChild(cell);
  });
  root.appendChild(series);
  return root;
}

/** Result panels for the global search page; clicking a panel expands
 *  its metadata. */
export function renderSearchPanels(doc: Document, panels: SearchPanel[]): HTMLElement {
  const root = el(doc, "div", "search-results");
  if (panels.length === 0) {
    root.appendChild(renderEmptyState(doc, "no results"));
    return root;
  }
  panels.forEach((panel, i) => {
    const card = el(doc, "div", "result-panel");
    card.dataset.hashtag = panel.hashtag;
    card.dataset.rank = String(i + 1);

    const head = el(doc, "div", "panel-head");
    head.appendChild(el(doc, "span", "tag-name", panel.hashtag));
    head.appendChild(el(doc, "span", "score", panel.score.toFixed(4)));
    head.appendChild(el(doc, "span", "index-id", `index ${panel.index_id}`));
    card.appendChild(head);

    const meta = el(doc, "div", "panel-meta");
    meta.hidden = true;
    meta.appendChild(el(doc, "div", "meta-posts",
                        `post count: ${panel.post_count}`));
    meta.appendChild(el(doc, "div", "meta-similarity",
                        `similarity: ${panel.similarity}`));
    meta.appendChild(el(doc, "div", "meta-timestamps",
                        `timestamps: ${panel.timestamps.join(", ")}`));
    card.appendChild(meta);

    head.addEventListener("click", () => {
      meta.hidden = !meta.hidden;
      card.classList.toggle("expanded", !meta.hidden);
    });
    root.appendChild(card);
  });
  return root;
}

/** Flatten the category tree into <option>s, indenting by depth. */
export function renderCategoryOptions(doc: Document, tree: CategoryNode[],
                                      select: HTMLSelectElement): void {
  select.textContent = "";
  const none = doc.createElement("option");
  none.value = "";
  none.textContent = "(choose a category)";
  select.appendChild(none);
  const walk = (nodes: CategoryNode[], depth: number) => {
    for (const node of nodes) {
      const opt = doc.createElement("option");
      opt.value = node.id;
      opt.textContent = `${"  ".repeat(depth)}${node.name}`;
      select.appendChild(opt);
      walk(node.children, depth + 1);
    }
  };
  walk(tree, 0);
}
