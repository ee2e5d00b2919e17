// Sankey geometry from the cross-category co-occurrence export: row
// terms become left-side bars, column terms right-side bars, links are
// cubic ribbons with thickness proportional to their count.

import type { SankeyPayload } from "../types.js";

export interface SankeyNodeBox {
  key: string;
  label: string;
  side: "row" | "col";
  total: number;
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface SankeyRibbon {
  source: string;
  target: string;
  value: number;
  path: string;
  thickness: number;
}

export interface SankeyModel {
  nodes: SankeyNodeBox[];
  links: SankeyRibbon[];
  width: number;
  height: number;
}

const NODE_WIDTH = 14;
const NODE_GAP = 8;

export function sankeyLayout(payload: SankeyPayload, width = 640, height = 360): SankeyModel {
  const rows = payload.nodes.filter((n) => n.side === "row");
  const cols = payload.nodes.filter((n) => n.side === "col");
  const boxes: SankeyNodeBox[] = [];

  const place = (nodes: typeof rows, x: number) => {
    const total = nodes.reduce((acc, n) => acc + n.total, 0);
    const gaps = NODE_GAP * Math.max(0, nodes.length - 1);
    const usable = Math.max(1, height - gaps);
    let y = 0;
    for (const node of nodes) {
      const h = total > 0 ? Math.max(2, (node.total / total) * usable) : usable / Math.max(1, nodes.length);
      boxes.push({ ...node, x, y, width: NODE_WIDTH, height: h });
      y += h + NODE_GAP;
    }
  };
  place(rows, 0);
  place(cols, width - NODE_WIDTH);

  const byKeySide = new Map(boxes.map((b) => [`${b.side}:${b.key}`, b]));
  // Stack link offsets down each node in payload order (deterministic).
  const used = new Map<SankeyNodeBox, number>();
  const links: SankeyRibbon[] = [];
  for (const link of payload.links) {
    const src = byKeySide.get(`row:${link.source}`);
    const dst = byKeySide.get(`col:${link.target}`);
    if (!src || !dst) continue;
    const srcShare = src.total > 0 ? link.value / src.total : 0;
    const dstShare = dst.total > 0 ? link.value / dst.total : 0;
    const thickness = Math.max(1, Math.min(srcShare * src.height, dstShare * dst.height));
    const sy = src.y + (used.get(src) ?? 0) + thickness / 2;
    const dy = dst.y + (used.get(dst) ?? 0) + thickness / 2;
    used.set(src, (used.get(src) ?? 0) + thickness);
    used.set(dst, (used.get(dst) ?? 0) + thickness);
    const x0 = src.x + src.width;
    const x1 = dst.x;
    const mid = (x0 + x1) / 2;
    links.push({
      source: link.source,
      target: link.target,
      value: link.value,
      thickness,
      path: `M${x0},${sy.toFixed(2)}C${mid},${sy.toFixed(2)} ${mid},${dy.toFixed(2)} ${x1},${dy.toFixed(2)}`,
    });
  }
  return { nodes: boxes, links, width, height };
}

/** Hover text for a ribbon: the pair and its co-occurrence count. */
export function ribbonTooltip(model: SankeyModel, ribbon: SankeyRibbon): string {
  const label = (side: "row" | "col", key: string) =>
    model.nodes.find((n) => n.side === side && n.key === key)?.label ?? key;
  return `${label("row", ribbon.source)} + ${label("col", ribbon.target)}: ${ribbon.value}`;
}
