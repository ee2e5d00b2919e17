// Payload shapes of the corpus API. Field names mirror the wire format.

export interface CategoryRow {
  category: string;
  count: number;
}

export interface EntityRow {
  text: string;
  count: number;
  umls_id?: string;
}

export interface RelationRow {
  paper_title: string;
  source_text: string;
  target_text: string;
  relation_type: string;
}

export interface PaperRow {
  id: string;
  title: string;
  publish_time: string | null;
}

export interface TimeseriesPayload {
  term_key: string;
  points: { month: string; count: number }[];
  skipped: number;
}

export interface SharesPayload {
  months: string[];
  terms: string[];
  shares: number[][];
  zero_months: string[];
}

export interface SankeyNode {
  key: string;
  label: string;
  side: "row" | "col";
  total: number;
}

export interface SankeyLink {
  source: string;
  target: string;
  value: number;
}

export interface SankeyPayload {
  nodes: SankeyNode[];
  links: SankeyLink[];
}

export interface ChordPayload {
  keys: string[];
  labels: string[];
  matrix: number[][];
}

export interface QueryResult {
  columns: string[] | null;
  rows: Record<string, unknown>[];
  truncated: boolean;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
}
