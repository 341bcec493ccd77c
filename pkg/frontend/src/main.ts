/** Dashboard wiring: state lives in the URL, requests fire on interaction
 *  only, and each panel keeps at most one request in flight. */

import { ApiClient, ApiError } from "./api.js";
import {
  DEFAULT_STATE, PanelState, exportFilename, fromQuery, normalize, toQuery,
} from "./state.js";
import {
  renderCategoryOptions, renderEmptyState, renderErrorBanner,
  renderSearchPanels, renderTopn, renderTrending,
} from "./render.js";

const API_BASE = new URLSearchParams(window.location.search).get("api")
  ?? "http://127.0.0.1:8040";

const api = new ApiClient(API_BASE);
let state: PanelState = fromQuery(window.location.search);
let builtAt = 0;

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const categorySelect = byId<HTMLSelectElement>("category-select");
const loInput = byId<HTMLInputElement>("range-lo");
const hiInput = byId<HTMLInputElement>("range-hi");
const topNInput = byId<HTMLInputElement>("top-n");
const searchInput = byId<HTMLInputElement>("search-input");
const tagInput = byId<HTMLInputElement>("trend-tag");
const fromInput = byId<HTMLInputElement>("trend-from");
const toInput = byId<HTMLInputElement>("trend-to");
const content = byId<HTMLDivElement>("dashboard-content");
const errorHost = byId<HTMLDivElement>("error-host");
const statsHost = byId<HTMLDivElement>("stats-host");

function pushState() {
  state = normalize(state);
  const qs = toQuery(state);
  const url = qs ? `?${qs}` : window.location.pathname;
  window.history.replaceState(null, "", url);
}

function showError(err: unknown) {
  errorHost.textContent = "";
  const message = err instanceof ApiError
    ? `${err.code}: ${err.message}`
    : `request failed: ${String(err)}`;
  errorHost.appendChild(renderErrorBanner(document, message));
}

function clearError() {
  errorHost.textContent = "";
}

function swap(node: HTMLElement) {
  content.textContent = "";
  content.appendChild(node);
}

async function refresh() {
  pushState();
  for (const button of document.querySelectorAll<HTMLButtonElement>(".tab")) {
    button.classList.toggle("active", button.dataset.tab === state.tab);
  }
  try {
    if (state.tab === "topn") {
      if (!state.category) {
        swap(renderEmptyState(document, "choose a category to rank hashtags"));
        return;
      }
      const rows = await api.topn(state);
      clearError();
      swap(renderTopn(document, rows));
    } else if (state.tab === "search") {
      if (!state.query) {
        swap(renderEmptyState(document, "enter a search query"));
        return;
      }
      const panels = await api.search(state.query, state.topN);
      clearError();
      swap(renderSearchPanels(document, panels));
    } else {
      if (!state.tag || state.from === null || state.to === null) {
        swap(renderEmptyState(document, "pick a hashtag and a time window"));
        return;
      }
      const payload = await api.trending(state.tag, state.from, state.to);
      clearError();
      swap(renderTrending(document, payload));
    }
  } catch (err) {
    if ((err as DOMException)?.name === "AbortError") return; // superseded
    showError(err);
  }
}

function bindControls() {
  categorySelect.addEventListener("change", () => {
    state.category = categorySelect.value || null;
    void refresh();
  });
  const rangeChanged = () => {
    state.lo = loInput.value === "" ? null : Number(loInput.value);
    state.hi = hiInput.value === "" ? null : Number(hiInput.value);
    void refresh();
  };
  loInput.addEventListener("change", rangeChanged);
  hiInput.addEventListener("change", rangeChanged);
  topNInput.addEventListener("change", () => {
    state.topN = Number(topNInput.value) || DEFAULT_STATE.topN;
    void refresh();
  });
  searchInput.addEventListener("change", () => {
    state.query = searchInput.value.trim();
    state.tab = "search";
    void refresh();
  });
  tagInput.addEventListener("change", () => {
    state.tag = tagInput.value.trim();
    void refresh();
  });
  const windowChanged = () => {
    state.from = fromInput.value === "" ? null : Number(fromInput.value);
    state.to = toInput.value === "" ? null : Number(toInput.value);
    void refresh();
  };
  fromInput.addEventListener("change", windowChanged);
  toInput.addEventListener("change", windowChanged);

  for (const button of document.querySelectorAll<HTMLButtonElement>(".tab")) {
    button.addEventListener("click", () => {
      state.tab = button.dataset.tab as PanelState["tab"];
      void refresh();
    });
  }

  byId<HTMLButtonElement>("export-btn").addEventListener("click", async () => {
    if (!state.category) {
      showError(new ApiError(400, { code: "no_category",
                                    message: "choose a category first" }));
      return;
    }
    try {
      const blob = await api.exportCsv(state);
      const link = document.createElement("a");
      link.href = URL.createObjectURL(blob);
      link.download = exportFilename(state, builtAt);
      link.click();
      URL.revokeObjectURL(link.href);
    } catch (err) {
      showError(err);
    }
  });
}

function syncControls() {
  categorySelect.value = state.category ?? "";
  loInput.value = state.lo === null ? "" : String(state.lo);
  hiInput.value = state.hi === null ? "" : String(state.hi);
  topNInput.value = String(state.topN);
  searchInput.value = state.query;
  tagInput.value = state.tag;
  fromInput.value = state.from === null ? "" : String(state.from);
  toInput.value = state.to === null ? "" : String(state.to);
}

async function boot() {
  bindControls();
  try {
    const [tree, stats] = await Promise.all([api.categories(), api.stats()]);
    renderCategoryOptions(document, tree, categorySelect);
    builtAt = stats.built_at;
    statsHost.textContent =
      `${stats.record_count} hashtags · ${stats.category_count} categories · `
      + `snapshot ${stats.digest.slice(0, 12)}…`;
  } catch (err) {
    showError(err);
  }
  syncControls();
  void refresh();
}

void boot();
