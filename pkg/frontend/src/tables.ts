// Pure view models for the table views. Every number displayed comes
// straight from one API response field; the only client-side work is
// LIKE filtering, pagination slicing and badge grouping by shared
// ontology id.

import { likeMatch } from "./like.js";
import type { EntityRow, PaperRow, RelationRow } from "./types.js";

export const ENTITY_PAGE_SIZE = 15;

export interface EntityViewRow extends EntityRow {
  /** Set when this row's umls_id is shared with at least one other row. */
  badge: string | null;
  termKey: string;
}

export interface EntityTableModel {
  rows: EntityViewRow[];
  page: number;
  hasPrev: boolean;
  hasNext: boolean;
  totalMatching: number;
}

export function termKeyFor(row: EntityRow): string {
  return row.umls_id ?? "text:" + row.text.toLowerCase();
}

/**
 * Entity table: LIKE-filtered, page-sliced view of the /entities payload.
 * Rows sharing one umls_id get a visual badge (the id itself) so surface
 * variants of one concept are recognizable.
 */
export function entityTableModel(
  payload: EntityRow[],
  filter: string,
  page: number,
  pageSize: number = ENTITY_PAGE_SIZE,
): EntityTableModel {
  const counts = new Map<string, number>();
  for (const row of payload) {
    if (row.umls_id) counts.set(row.umls_id, (counts.get(row.umls_id) ?? 0) + 1);
  }
  const matching = payload.filter((row) => !filter || likeMatch(filter, row.text));
  const start = page * pageSize;
  const rows = matching.slice(start, start + pageSize).map((row) => ({
    ...row,
    badge: row.umls_id && (counts.get(row.umls_id) ?? 0) > 1 ? row.umls_id : null,
    termKey: termKeyFor(row),
  }));
  return {
    rows,
    page,
    hasPrev: page > 0,
    hasNext: start + pageSize < matching.length,
    totalMatching: matching.length,
  };
}

/** Term key for a relation endpoint, resolved through the entity table. */
export function resolveTermKey(text: string, entityRows: EntityRow[]): string {
  const hit = entityRows.find((row) => row.text === text);
  if (hit) return termKeyFor(hit);
  return "text:" + text.toLowerCase();
}

export interface RelationGroup {
  relationType: string;
  count: number;
}

/** Distinct relation types with row counts, for the explorer's left table. */
export function relationTypeGroups(rows: RelationRow[]): RelationGroup[] {
  const counts = new Map<string, number>();
  for (const row of rows) {
    counts.set(row.relation_type, (counts.get(row.relation_type) ?? 0) + 1);
  }
  return [...counts.entries()]
    .map(([relationType, count]) => ({ relationType, count }))
    .sort((a, b) => b.count - a.count || a.relationType.localeCompare(b.relationType));
}

export function formatPaperRow(row: PaperRow): string {
  return row.publish_time ? `${row.title} (${row.publish_time})` : row.title;
}
