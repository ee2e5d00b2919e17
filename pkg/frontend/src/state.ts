// Explorer state and its URL serialization. Every view the dashboard can
// show is reproducible from the query string alone, so links are shareable.

export type ActiveView = "tables" | "trends" | "sankey" | "chord";

export interface ExplorerState {
  selectedCategory: string | null;
  selectedRelationType: string | null;
  entityFilter: string; // LIKE-style pattern, empty = no filter
  selectedTermKey: string | null;
  activeView: ActiveView;
  entityPage: number; // zero-based pagination cursor for the entity table
  relationPage: number;
  sharesK: number;
}

export const DEFAULT_STATE: ExplorerState = {
  selectedCategory: null,
  selectedRelationType: null,
  entityFilter: "",
  selectedTermKey: null,
  activeView: "tables",
  entityPage: 0,
  relationPage: 0,
  sharesK: 12,
};

const VIEWS: ActiveView[] = ["tables", "trends", "sankey", "chord"];

export function encodeState(state: ExplorerState): string {
  const params = new URLSearchParams();
  if (state.selectedCategory) params.set("cat", state.selectedCategory);
  if (state.selectedRelationType) params.set("rel", state.selectedRelationType);
  if (state.entityFilter) params.set("filter", state.entityFilter);
  if (state.selectedTermKey) params.set("term", state.selectedTermKey);
  if (state.activeView !== "tables") params.set("view", state.activeView);
  if (state.entityPage > 0) params.set("epage", String(state.entityPage));
  if (state.relationPage > 0) params.set("rpage", String(state.relationPage));
  if (state.sharesK !== 12) params.set("k", String(state.sharesK));
  return params.toString();
}

export function decodeState(query: string): ExplorerState {
  const params = new URLSearchParams(query);
  const view = params.get("view");
  const intOr = (name: string, fallback: number): number => {
    const raw = params.get(name);
    if (raw === null) return fallback;
    const parsed = Number.parseInt(raw, 10);
    return Number.isFinite(parsed) && parsed >= 0 ? parsed : fallback;
  };
  return {
    selectedCategory: params.get("cat"),
    selectedRelationType: params.get("rel"),
    entityFilter: params.get("filter") ?? "",
    selectedTermKey: params.get("term"),
    activeView: VIEWS.includes(view as ActiveView) ? (view as ActiveView) : "tables",
    entityPage: intOr("epage", 0),
    relationPage: intOr("rpage", 0),
    sharesK: intOr("k", 12) || 12,
  };
}

// State transitions. Each returns a new state; selections cascade the way
// the UI drills down (picking a category resets the entity cursor, etc.).

export function selectCategory(state: ExplorerState, category: string): ExplorerState {
  return {
    ...state,
    selectedCategory: category,
    selectedTermKey: null,
    entityPage: 0,
  };
}

export function selectTerm(state: ExplorerState, termKey: string): ExplorerState {
  return { ...state, selectedTermKey: termKey };
}

export function selectRelationType(state: ExplorerState, relationType: string | null): ExplorerState {
  return { ...state, selectedRelationType: relationType, relationPage: 0 };
}

export function setEntityFilter(state: ExplorerState, pattern: string): ExplorerState {
  return { ...state, entityFilter: pattern, entityPage: 0 };
}

export function setView(state: ExplorerState, view: ActiveView): ExplorerState {
  return { ...state, activeView: view };
}

export function setEntityPage(state: ExplorerState, page: number): ExplorerState {
  return { ...state, entityPage: Math.max(0, page) };
}

export function setSharesK(state: ExplorerState, k: number): ExplorerState {
  return { ...state, sharesK: Math.max(1, k) };
}
