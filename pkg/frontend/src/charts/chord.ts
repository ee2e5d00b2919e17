// Chord geometry for same-category co-occurrence. Groups are laid out
// around a circle with arc spans proportional to their marginals and
// ribbons between co-occurring pairs. Groups are sorted by key before
// layout so the rendered geometry does not depend on payload label order.

import type { ChordPayload } from "../types.js";

const TAU = Math.PI * 2;
const GROUP_PAD = 0.04; // radians between adjacent arcs

export interface ChordGroup {
  key: string;
  label: string;
  startAngle: number;
  endAngle: number;
  arcPath: string;
  labelAngle: number;
}

export interface ChordRibbonGeom {
  sourceKey: string;
  targetKey: string;
  value: number;
  path: string;
}

export interface ChordModel {
  groups: ChordGroup[];
  ribbons: ChordRibbonGeom[];
  radius: number;
}

function polar(radius: number, angle: number): [number, number] {
  return [radius * Math.cos(angle - Math.PI / 2), radius * Math.sin(angle - Math.PI / 2)];
}

function arcPath(r0: number, r1: number, a0: number, a1: number): string {
  const [x0, y0] = polar(r1, a0);
  const [x1, y1] = polar(r1, a1);
  const [x2, y2] = polar(r0, a1);
  const [x3, y3] = polar(r0, a0);
  const large = a1 - a0 > Math.PI ? 1 : 0;
  return (
    `M${x0.toFixed(2)},${y0.toFixed(2)}` +
    `A${r1},${r1} 0 ${large} 1 ${x1.toFixed(2)},${y1.toFixed(2)}` +
    `L${x2.toFixed(2)},${y2.toFixed(2)}` +
    `A${r0},${r0} 0 ${large} 0 ${x3.toFixed(2)},${y3.toFixed(2)}Z`
  );
}

export function chordLayout(payload: ChordPayload, radius = 170): ChordModel {
  const order = payload.keys
    .map((key, index) => ({ key, index }))
    .sort((a, b) => a.key.localeCompare(b.key));
  const n = order.length;
  const marginals = order.map(({ index }) =>
    payload.matrix[index].reduce((acc, v) => acc + v, 0),
  );
  const total = marginals.reduce((acc, v) => acc + v, 0);
  const padTotal = GROUP_PAD * n;
  const usable = Math.max(0.1, TAU - padTotal);

  const groups: ChordGroup[] = [];
  const spans: { start: number; cursor: number; width: number }[] = [];
  let angle = 0;
  for (let g = 0; g < n; g++) {
    const span = total > 0 ? (marginals[g] / total) * usable : usable / Math.max(1, n);
    const start = angle;
    const end = angle + span;
    groups.push({
      key: order[g].key,
      label: payload.labels[order[g].index],
      startAngle: start,
      endAngle: end,
      arcPath: arcPath(radius * 0.92, radius, start, end),
      labelAngle: (start + end) / 2,
    });
    spans.push({ start, cursor: start, width: span });
    angle = end + GROUP_PAD;
  }

  const innerR = radius * 0.9;
  const ribbons: ChordRibbonGeom[] = [];
  for (let gi = 0; gi < n; gi++) {
    for (let gj = gi + 1; gj < n; gj++) {
      const value = payload.matrix[order[gi].index][order[gj].index];
      if (value <= 0) continue;
      const spanFor = (g: number) =>
        marginals[g] > 0 ? (value / marginals[g]) * spans[g].width : 0;
      const a0 = spans[gi].cursor;
      const a1 = a0 + spanFor(gi);
      spans[gi].cursor = a1;
      const b0 = spans[gj].cursor;
      const b1 = b0 + spanFor(gj);
      spans[gj].cursor = b1;
      const [sx0, sy0] = polar(innerR, a0);
      const [sx1, sy1] = polar(innerR, a1);
      const [tx0, ty0] = polar(innerR, b0);
      const [tx1, ty1] = polar(innerR, b1);
      ribbons.push({
        sourceKey: order[gi].key,
        targetKey: order[gj].key,
        value,
        path:
          `M${sx0.toFixed(2)},${sy0.toFixed(2)}` +
          `A${innerR},${innerR} 0 0 1 ${sx1.toFixed(2)},${sy1.toFixed(2)}` +
          `Q0,0 ${tx0.toFixed(2)},${ty0.toFixed(2)}` +
          `A${innerR},${innerR} 0 0 1 ${tx1.toFixed(2)},${ty1.toFixed(2)}` +
          `Q0,0 ${sx0.toFixed(2)},${sy0.toFixed(2)}Z`,
      });
    }
  }
  return { groups, ribbons, radius };
}

/** Stable fingerprint of the geometry, for render comparisons. */
export function renderHash(model: ChordModel): string {
  const parts = [
    ...model.groups.map((g) => `${g.key}:${g.arcPath}`),
    ...model.ribbons.map((r) => `${r.sourceKey}>${r.targetKey}=${r.value}:${r.path}`),
  ];
  return parts.join("|");
}

export function chordTooltip(model: ChordModel, ribbon: ChordRibbonGeom): string {
  const label = (key: string) => model.groups.find((g) => g.key === key)?.label ?? key;
  return `${label(ribbon.sourceKey)} + ${label(ribbon.targetKey)}: ${ribbon.value}`;
}
