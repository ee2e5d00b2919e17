// Time-series chart geometry: pure functions from payload to SVG path
// data. The shares toggle only changes which numbers are displayed;
// both variants read their values directly from API payloads.

import type { SharesPayload, TimeseriesPayload } from "../types.js";

export interface ChartDims {
  width: number;
  height: number;
  padLeft: number;
  padBottom: number;
  padTop: number;
  padRight: number;
}

export const DEFAULT_DIMS: ChartDims = {
  width: 640,
  height: 280,
  padLeft: 44,
  padBottom: 28,
  padTop: 12,
  padRight: 12,
};

export interface LinePoint {
  x: number;
  y: number;
  month: string;
  value: number;
}

export interface LineSeries {
  key: string;
  path: string;
  points: LinePoint[];
}

export interface LineChartModel {
  series: LineSeries[];
  months: string[];
  yMax: number;
  xTicks: { x: number; label: string }[];
  yTicks: { y: number; label: string }[];
}

function scales(months: string[], yMax: number, dims: ChartDims) {
  const innerW = dims.width - dims.padLeft - dims.padRight;
  const innerH = dims.height - dims.padTop - dims.padBottom;
  const xAt = (i: number) =>
    dims.padLeft + (months.length <= 1 ? innerW / 2 : (i / (months.length - 1)) * innerW);
  const yAt = (v: number) => dims.padTop + innerH - (yMax <= 0 ? 0 : (v / yMax) * innerH);
  return { xAt, yAt };
}

function buildSeries(
  key: string,
  months: string[],
  values: number[],
  xAt: (i: number) => number,
  yAt: (v: number) => number,
): LineSeries {
  const points = values.map((value, i) => ({
    x: xAt(i),
    y: yAt(value),
    month: months[i],
    value,
  }));
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`)
    .join("");
  return { key, path, points };
}

function ticks(months: string[], yMax: number, dims: ChartDims): Pick<LineChartModel, "xTicks" | "yTicks"> {
  const { xAt, yAt } = scales(months, yMax, dims);
  const step = Math.max(1, Math.ceil(months.length / 8));
  const xTicks = months
    .map((label, i) => ({ x: xAt(i), label, index: i }))
    .filter(({ index }) => index % step === 0)
    .map(({ x, label }) => ({ x, label }));
  const yCount = 4;
  const yTicks = Array.from({ length: yCount + 1 }, (_, k) => {
    const value = (yMax * k) / yCount;
    return { y: yAt(value), label: yMax <= 1 ? `${Math.round(value * 100)}%` : String(Math.round(value)) };
  });
  return { xTicks, yTicks };
}

export function countsChart(payload: TimeseriesPayload, dims: ChartDims = DEFAULT_DIMS): LineChartModel {
  const months = payload.points.map((p) => p.month);
  const values = payload.points.map((p) => p.count);
  const yMax = Math.max(1, ...values);
  const { xAt, yAt } = scales(months, yMax, dims);
  return {
    series: [buildSeries(payload.term_key, months, values, xAt, yAt)],
    months,
    yMax,
    ...ticks(months, yMax, dims),
  };
}

export function sharesChart(payload: SharesPayload, dims: ChartDims = DEFAULT_DIMS): LineChartModel {
  const months = payload.months;
  const yMax = 1;
  const { xAt, yAt } = scales(months, yMax, dims);
  const series = payload.terms.map((key, t) =>
    buildSeries(key, months, payload.shares[t], xAt, yAt),
  );
  return { series, months, yMax, ...ticks(months, yMax, dims) };
}

/** Display-only formatting of a share for the tooltip (e.g. 0.25 -> "25.0%"). */
export function formatShare(value: number): string {
  return `${(value * 100).toFixed(1)}%`;
}

/** Per-month tooltip rows for the shares view; values come from the payload. */
export function sharesTooltip(payload: SharesPayload, monthIndex: number): { term: string; share: number }[] {
  return payload.terms.map((term, t) => ({ term, share: payload.shares[t][monthIndex] }));
}
