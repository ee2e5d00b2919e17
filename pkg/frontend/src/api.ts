// API client: typed fetches with per-key in-flight deduplication and
// sequence-numbered responses so stale answers never clobber newer state.

import type {
  CategoryRow,
  ChordPayload,
  EntityRow,
  PaperRow,
  QueryResult,
  RelationRow,
  SankeyPayload,
  SharesPayload,
  TimeseriesPayload,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();
  private sequence = 0;
  private latestDelivered = new Map<string, number>();

  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  nextSequence(): number {
    return ++this.sequence;
  }

  /**
   * True when a response stamped `sequence` is still the newest for `slot`.
   * Callers stamp before awaiting; out-of-order arrivals report false and
   * must be discarded.
   */
  deliver(slot: string, sequence: number): boolean {
    const newest = this.latestDelivered.get(slot) ?? 0;
    if (sequence < newest) return false;
    this.latestDelivered.set(slot, sequence);
    return true;
  }

  private async getJson<T>(path: string): Promise<T> {
    const url = this.baseUrl + path;
    const pending = this.inflight.get(url);
    if (pending) return pending as Promise<T>;
    const promise = (async () => {
      try {
        const resp = await this.fetchImpl(url);
        const body = await resp.json();
        if (!resp.ok) {
          throw new ApiRequestError(resp.status, body.code ?? "error", body.message ?? "request failed");
        }
        return body as T;
      } finally {
        this.inflight.delete(url);
      }
    })();
    this.inflight.set(url, promise);
    return promise;
  }

  categories(): Promise<CategoryRow[]> {
    return this.getJson("/categories");
  }

  entities(category: string, limit = 200, offset = 0): Promise<EntityRow[]> {
    const params = new URLSearchParams({ category, limit: String(limit), offset: String(offset) });
    return this.getJson(`/entities?${params}`);
  }

  relations(type?: string | null, targetLike?: string | null, limit = 200): Promise<RelationRow[]> {
    const params = new URLSearchParams({ limit: String(limit) });
    if (type) params.set("type", type);
    if (targetLike) params.set("target_like", targetLike);
    return this.getJson(`/relations?${params}`);
  }

  papers(entityKey: string, limit = 50): Promise<PaperRow[]> {
    const params = new URLSearchParams({ entity_key: entityKey, limit: String(limit) });
    return this.getJson(`/papers?${params}`);
  }

  timeseries(termKey: string, category = "MedicationName"): Promise<TimeseriesPayload> {
    const params = new URLSearchParams({ category });
    return this.getJson(`/terms/${encodeURIComponent(termKey)}/timeseries?${params}`);
  }

  shares(k: number, category = "MedicationName"): Promise<SharesPayload> {
    const params = new URLSearchParams({ k: String(k), category });
    return this.getJson(`/analytics/shares?${params}`);
  }

  sankey(rows: string, cols: string, top = 8): Promise<SankeyPayload> {
    const params = new URLSearchParams({ rows, cols, top: String(top) });
    return this.getJson(`/analytics/sankey?${params}`);
  }

  chord(category: string, top = 8): Promise<ChordPayload> {
    const params = new URLSearchParams({ category, top: String(top) });
    return this.getJson(`/analytics/chord?${params}`);
  }

  async query(sql: string): Promise<QueryResult> {
    const resp = await this.fetchImpl(this.baseUrl + "/query", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ sql }),
    });
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiRequestError(resp.status, body.code ?? "error", body.message ?? "query failed");
    }
    return body as QueryResult;
  }

  reload(): Promise<{ reloaded: boolean; papers: number }> {
    return this.fetchImpl(this.baseUrl + "/admin/reload", { method: "POST" }).then((r) => r.json());
  }
}
