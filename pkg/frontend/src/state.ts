/** Panel state, fully serializable to URL query params so any view is a
 *  shareable link. Reloading a serialized state reproduces the view. */

export type DashboardTab = "topn" | "trending" | "search";

export interface PanelState {
  category: string | null; // selected category id
  lo: number | null;       // post-count range lower bound
  hi: number | null;       // post-count range upper bound
  topN: number;
  tab: DashboardTab;
  query: string;           // last global-search string
  tag: string;             // trending hashtag
  from: number | null;     // trending window start (epoch seconds)
  to: number | null;       // trending window end
}

export const DEFAULT_STATE: PanelState = {
  category: null,
  lo: null,
  hi: null,
  topN: 20,
  tab: "topn",
  query: "",
  tag: "",
  from: null,
  to: null,
};

const TABS: DashboardTab[] = ["topn", "trending", "search"];

/** Enforce the range invariant: lo <= hi (swap when violated). */
export function normalize(state: PanelState): PanelState {
  const out = { ...state };
  if (out.lo !== null && out.hi !== null && out.lo > out.hi) {
    [out.lo, out.hi] = [out.hi, out.lo];
  }
  if (out.from !== null && out.to !== null && out.from > out.to) {
    [out.from, out.to] = [out.to, out.from];
  }
  if (!Number.isFinite(out.topN) || out.topN < 0) {
    out.topN = DEFAULT_STATE.topN;
  }
  return out;
}

export function toQuery(state: PanelState): string {
  const s = normalize(state);
  const params = new URLSearchParams();
  if (s.category !== null) params.set("cat", s.category);
  if (s.lo !== null) params.set("lo", String(s.lo));
  if (s.hi !== null) params.set("hi", String(s.hi));
  if (s.topN !== DEFAULT_STATE.topN) params.set("n", String(s.topN));
  if (s.tab !== DEFAULT_STATE.tab) params.set("tab", s.tab);
  if (s.query) params.set("q", s.query);
  if (s.tag) params.set("tag", s.tag);
  if (s.from !== null) params.set("from", String(s.from));
  if (s.to !== null) params.set("to", String(s.to));
  return params.toString();
}

function intOrNull(raw: string | null): number | null {
  if (raw === null || raw === "") return null;
  const v = Number.parseInt(raw, 10);
  return Number.isFinite(v) ? v : null;
}

export function fromQuery(search: string): PanelState {
  const params = new URLSearchParams(search);
  const rawTab = params.get("tab");
  const tab = TABS.includes(rawTab as DashboardTab)
    ? (rawTab as DashboardTab) : DEFAULT_STATE.tab;
  return normalize({
    category: params.get("cat"),
    lo: intOrNull(params.get("lo")),
    hi: intOrNull(params.get("hi")),
    topN: intOrNull(params.get("n")) ?? DEFAULT_STATE.topN,
    tab,
    query: params.get("q") ?? "",
    tag: params.get("tag") ?? "",
    from: intOrNull(params.get("from")),
    to: intOrNull(params.get("to")),
  });
}

/** Download name for CSV exports: category id plus snapshot timestamp. */
export function exportFilename(state: PanelState, builtAt: number): string {
  return `hashtags_${state.category ?? "none"}_${builtAt}.csv`;
}
