// DOM wiring for the explorer. All data modeling lives in the pure
// modules (state, tables, charts); this file only renders models into
// elements and routes events back into state transitions.

import { ApiClient, ApiRequestError } from "./api.js";
import { chordLayout, chordTooltip } from "./charts/chord.js";
import { countsChart, formatShare, sharesChart, type LineChartModel } from "./charts/line.js";
import { ribbonTooltip, sankeyLayout } from "./charts/sankey.js";
import {
  DEFAULT_STATE,
  decodeState,
  encodeState,
  selectCategory,
  selectRelationType,
  selectTerm,
  setEntityFilter,
  setEntityPage,
  setSharesK,
  setView,
  type ActiveView,
  type ExplorerState,
} from "./state.js";
import {
  ENTITY_PAGE_SIZE,
  entityTableModel,
  formatPaperRow,
  relationTypeGroups,
  resolveTermKey,
} from "./tables.js";
import type { EntityRow, RelationRow } from "./types.js";

const apiBase =
  document.querySelector<HTMLMetaElement>('meta[name="medlit-api-base"]')?.content ?? "";
const api = new ApiClient(apiBase);

let state: ExplorerState = decodeState(location.search.replace(/^\?/, ""));
let entityPayload: EntityRow[] = [];
let relationPayload: RelationRow[] = [];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setState(next: ExplorerState, push = true) {
  state = next;
  if (push) {
    const qs = encodeState(state);
    history.pushState(null, "", qs ? `?${qs}` : location.pathname);
  }
  void render();
}

window.addEventListener("popstate", () => {
  state = decodeState(location.search.replace(/^\?/, ""));
  void render();
});

function banner(err: unknown, retry: () => void) {
  const box = byId("error-banner");
  box.textContent = "";
  const message =
    err instanceof ApiRequestError ? `${err.code}: ${err.message}` : `request failed: ${err}`;
  box.append(el("span", {}, message));
  const button = el("button", { class: "retry" }, "retry");
  button.addEventListener("click", () => {
    box.classList.add("hidden");
    retry();
  });
  box.append(button);
  box.classList.remove("hidden");
}

function clearBanner() {
  byId("error-banner").classList.add("hidden");
}

// -- tables view -------------------------------------------------------------

async function renderCategories() {
  const slot = "categories";
  const seq = api.nextSequence();
  try {
    const rows = await api.categories();
    if (!api.deliver(slot, seq)) return;
    const table = byId("category-table");
    table.textContent = "";
    if (rows.length === 0) {
      table.append(el("p", { class: "empty" }, "store is empty"));
      return;
    }
    const head = el("tr");
    head.append(el("th", {}, "category"), el("th", {}, "count"));
    const tbl = el("table");
    tbl.append(head);
    for (const row of rows) {
      const tr = el("tr", { class: row.category === state.selectedCategory ? "selected" : "" });
      tr.append(el("td", {}, row.category), el("td", { class: "num" }, String(row.count)));
      tr.addEventListener("click", () => setState(selectCategory(state, row.category)));
      tbl.append(tr);
    }
    table.append(tbl);
  } catch (err) {
    banner(err, renderCategories);
  }
}

async function renderEntities() {
  const panel = byId("entity-table");
  if (!state.selectedCategory) {
    panel.textContent = "";
    panel.append(el("p", { class: "empty" }, "pick a category on the left"));
    return;
  }
  const slot = "entities";
  const seq = api.nextSequence();
  try {
    entityPayload = await api.entities(state.selectedCategory);
    if (!api.deliver(slot, seq)) return;
    const model = entityTableModel(entityPayload, state.entityFilter, state.entityPage);
    panel.textContent = "";
    if (model.rows.length === 0) {
      panel.append(el("p", { class: "empty" }, "no entities match"));
      return;
    }
    const tbl = el("table");
    const head = el("tr");
    head.append(el("th", {}, "text"), el("th", {}, "count"), el("th", {}, "umls_id"));
    tbl.append(head);
    for (const row of model.rows) {
      const tr = el("tr", { class: row.termKey === state.selectedTermKey ? "selected" : "" });
      const idCell = el("td");
      if (row.umls_id) {
        idCell.append(
          el("span", { class: row.badge ? "badge shared" : "badge" }, row.umls_id),
        );
      }
      tr.append(el("td", {}, row.text), el("td", { class: "num" }, String(row.count)), idCell);
      tr.addEventListener("click", () => setState(selectTerm(state, row.termKey)));
      tbl.append(tr);
    }
    panel.append(tbl);
    const pager = el("div", { class: "pager" });
    const prev = el("button", {}, "prev") as HTMLButtonElement;
    const next = el("button", {}, "next") as HTMLButtonElement;
    prev.disabled = !model.hasPrev;
    next.disabled = !model.hasNext;
    prev.addEventListener("click", () => setState(setEntityPage(state, state.entityPage - 1)));
    next.addEventListener("click", () => setState(setEntityPage(state, state.entityPage + 1)));
    pager.append(
      prev,
      el("span", {}, `page ${model.page + 1} (${model.totalMatching} rows)`),
      next,
    );
    panel.append(pager);
  } catch (err) {
    banner(err, renderEntities);
  }
}

async function renderRelations() {
  const panel = byId("relation-table");
  const slot = "relations";
  const seq = api.nextSequence();
  try {
    const all = await api.relations();
    if (!api.deliver(slot, seq)) return;
    const groups = relationTypeGroups(all);
    const typePanel = byId("relation-types");
    typePanel.textContent = "";
    const typeTable = el("table");
    const head = el("tr");
    head.append(el("th", {}, "relation type"), el("th", {}, "count"));
    typeTable.append(head);
    for (const group of groups) {
      const tr = el("tr", {
        class: group.relationType === state.selectedRelationType ? "selected" : "",
      });
      tr.append(el("td", {}, group.relationType), el("td", { class: "num" }, String(group.count)));
      tr.addEventListener("click", () =>
        setState(selectRelationType(state, group.relationType)),
      );
      typeTable.append(tr);
    }
    typePanel.append(typeTable);

    relationPayload = state.selectedRelationType
      ? await api.relations(state.selectedRelationType, state.entityFilter || null)
      : all;
    panel.textContent = "";
    if (relationPayload.length === 0) {
      panel.append(el("p", { class: "empty" }, "no relations of this type"));
      return;
    }
    const tbl = el("table");
    const rhead = el("tr");
    rhead.append(
      el("th", {}, "paper"),
      el("th", {}, "source"),
      el("th", {}, "target"),
      el("th", {}, "type"),
    );
    tbl.append(rhead);
    for (const row of relationPayload) {
      const tr = el("tr");
      tr.append(
        el("td", {}, row.paper_title),
        el("td", {}, row.source_text),
        el("td", {}, row.target_text),
        el("td", {}, row.relation_type),
      );
      tr.addEventListener("click", () => void drillDownPapers(row));
      tbl.append(tr);
    }
    panel.append(tbl);
  } catch (err) {
    banner(err, renderRelations);
  }
}

async function drillDownPapers(row: RelationRow) {
  const key = resolveTermKey(row.target_text, entityPayload);
  const slot = "papers";
  const seq = api.nextSequence();
  try {
    const papers = await api.papers(key);
    if (!api.deliver(slot, seq)) return;
    const panel = byId("papers-panel");
    panel.textContent = "";
    panel.append(el("h3", {}, `papers mentioning ${row.target_text}`));
    if (papers.length === 0) {
      panel.append(el("p", { class: "empty" }, "no papers found"));
      return;
    }
    const list = el("ul");
    for (const paper of papers) list.append(el("li", {}, formatPaperRow(paper)));
    panel.append(list);
  } catch (err) {
    banner(err, () => void drillDownPapers(row));
  }
}

// -- charts -------------------------------------------------------------------

function drawLineChart(target: HTMLElement, model: LineChartModel, tooltip: (s: string, i: number) => string) {
  target.textContent = "";
  if (model.months.length === 0) {
    target.append(el("p", { class: "empty" }, "no dated mentions"));
    return;
  }
  const svg = svgEl("svg", { viewBox: "0 0 640 280", class: "chart" });
  for (const tick of model.yTicks) {
    svg.append(svgEl("line", { x1: "44", x2: "628", y1: String(tick.y), y2: String(tick.y), class: "grid" }));
    const label = svgEl("text", { x: "40", y: String(tick.y + 4), class: "tick", "text-anchor": "end" });
    label.textContent = tick.label;
    svg.append(label);
  }
  for (const tick of model.xTicks) {
    const label = svgEl("text", { x: String(tick.x), y: "272", class: "tick", "text-anchor": "middle" });
    label.textContent = tick.label;
    svg.append(label);
  }
  model.series.forEach((series, s) => {
    svg.append(svgEl("path", { d: series.path, class: `line line-${s % 8}` }));
    series.points.forEach((p, i) => {
      const dot = svgEl("circle", { cx: String(p.x), cy: String(p.y), r: "3", class: `dot line-${s % 8}` });
      const title = svgEl("title");
      title.textContent = tooltip(series.key, i);
      dot.append(title);
      svg.append(dot);
    });
  });
  target.append(svg);
}

async function renderTrends() {
  const panel = byId("trends-panel");
  if (!state.selectedTermKey) {
    panel.textContent = "";
    panel.append(el("p", { class: "empty" }, "pick an entity in the tables view first"));
    return;
  }
  const mode = (byId("trend-mode") as HTMLSelectElement).value;
  const slot = "trends";
  const seq = api.nextSequence();
  try {
    if (mode === "shares") {
      const payload = await api.shares(state.sharesK, state.selectedCategory ?? "MedicationName");
      if (!api.deliver(slot, seq)) return;
      const model = sharesChart(payload);
      drawLineChart(panel, model, (key, i) => {
        const t = payload.terms.indexOf(key);
        return `${key} ${payload.months[i]}: ${formatShare(payload.shares[t][i])}`;
      });
    } else {
      const payload = await api.timeseries(
        state.selectedTermKey,
        state.selectedCategory ?? "MedicationName",
      );
      if (!api.deliver(slot, seq)) return;
      const model = countsChart(payload);
      drawLineChart(panel, model, (key, i) => {
        const point = payload.points[i];
        return `${key} ${point.month}: ${point.count}`;
      });
      byId("trend-note").textContent =
        payload.skipped > 0 ? `${payload.skipped} undated mentions excluded` : "";
    }
  } catch (err) {
    banner(err, renderTrends);
  }
}

async function intersectPapers(keyA: string, keyB: string, label: string, panelId = "cooccur-papers") {
  // Two /papers calls intersected client-side by paper id.
  const [a, b] = await Promise.all([api.papers(keyA, 200), api.papers(keyB, 200)]);
  const ids = new Set(a.map((p) => p.id));
  const both = b.filter((p) => ids.has(p.id));
  const panel = byId(panelId);
  panel.textContent = "";
  panel.append(el("h3", {}, `papers mentioning ${label}`));
  const list = el("ul");
  for (const paper of both) list.append(el("li", {}, formatPaperRow(paper)));
  if (both.length === 0) panel.append(el("p", { class: "empty" }, "no papers found"));
  panel.append(list);
}

async function renderSankey() {
  const panel = byId("sankey-panel");
  const rowsCat = (byId("sankey-rows") as HTMLSelectElement).value || "Diagnosis";
  const colsCat = (byId("sankey-cols") as HTMLSelectElement).value || "MedicationName";
  const slot = "sankey";
  const seq = api.nextSequence();
  try {
    const payload = await api.sankey(rowsCat, colsCat);
    if (!api.deliver(slot, seq)) return;
    panel.textContent = "";
    const model = sankeyLayout(payload);
    if (model.links.length === 0) {
      panel.append(el("p", { class: "empty" }, "no co-occurrences"));
      return;
    }
    const svg = svgEl("svg", { viewBox: `0 0 ${model.width} ${model.height}`, class: "chart tall" });
    for (const ribbon of model.links) {
      const path = svgEl("path", {
        d: ribbon.path,
        class: "ribbon",
        "stroke-width": String(ribbon.thickness),
      });
      const title = svgEl("title");
      title.textContent = ribbonTooltip(model, ribbon);
      path.append(title);
      path.addEventListener("click", () =>
        void intersectPapers(ribbon.source, ribbon.target, ribbonTooltip(model, ribbon)),
      );
      svg.append(path);
    }
    for (const node of model.nodes) {
      svg.append(
        svgEl("rect", {
          x: String(node.x),
          y: String(node.y),
          width: String(node.width),
          height: String(node.height),
          class: "node",
        }),
      );
      const text = svgEl("text", {
        x: String(node.side === "row" ? node.x + node.width + 4 : node.x - 4),
        y: String(node.y + node.height / 2 + 4),
        class: "node-label",
        "text-anchor": node.side === "row" ? "start" : "end",
      });
      text.textContent = `${node.label} (${node.total})`;
      svg.append(text);
    }
    panel.append(svg);
  } catch (err) {
    banner(err, renderSankey);
  }
}

async function renderChord() {
  const panel = byId("chord-panel");
  const category = (byId("chord-category") as HTMLSelectElement).value || "MedicationName";
  const slot = "chord";
  const seq = api.nextSequence();
  try {
    const payload = await api.chord(category);
    if (!api.deliver(slot, seq)) return;
    panel.textContent = "";
    const model = chordLayout(payload);
    if (model.ribbons.length === 0) {
      panel.append(el("p", { class: "empty" }, "no co-occurrences"));
      return;
    }
    const size = model.radius * 2 + 90;
    const svg = svgEl("svg", {
      viewBox: `${-size / 2} ${-size / 2} ${size} ${size}`,
      class: "chart tall",
    });
    for (const ribbon of model.ribbons) {
      const path = svgEl("path", { d: ribbon.path, class: "chord-ribbon" });
      const title = svgEl("title");
      title.textContent = chordTooltip(model, ribbon);
      path.append(title);
      path.addEventListener("click", () =>
        void intersectPapers(
          ribbon.sourceKey,
          ribbon.targetKey,
          chordTooltip(model, ribbon),
          "cooccur-papers-chord",
        ),
      );
      svg.append(path);
    }
    for (const group of model.groups) {
      const arc = svgEl("path", { d: group.arcPath, class: "chord-arc" });
      const title = svgEl("title");
      title.textContent = group.label;
      arc.append(title);
      svg.append(arc);
      const angle = group.labelAngle;
      const r = model.radius + 12;
      const x = r * Math.cos(angle - Math.PI / 2);
      const y = r * Math.sin(angle - Math.PI / 2);
      const text = svgEl("text", {
        x: x.toFixed(1),
        y: y.toFixed(1),
        class: "node-label",
        "text-anchor": x < 0 ? "end" : "start",
      });
      text.textContent = group.label;
      svg.append(text);
    }
    panel.append(svg);
  } catch (err) {
    banner(err, renderChord);
  }
}

// -- shell ---------------------------------------------------------------------

async function render() {
  clearBanner();
  document.querySelectorAll<HTMLButtonElement>("#view-tabs button").forEach((button) => {
    button.classList.toggle("active", button.dataset.view === state.activeView);
  });
  document.querySelectorAll<HTMLElement>(".view").forEach((section) => {
    section.classList.toggle("hidden", section.dataset.view !== state.activeView);
  });
  const filterBox = byId("entity-filter") as HTMLInputElement;
  if (filterBox.value !== state.entityFilter) filterBox.value = state.entityFilter;

  if (state.activeView === "tables") {
    await Promise.all([renderCategories(), renderEntities(), renderRelations()]);
  } else if (state.activeView === "trends") {
    await renderTrends();
  } else if (state.activeView === "sankey") {
    await renderSankey();
  } else {
    await renderChord();
  }
}

function wireShell() {
  document.querySelectorAll<HTMLButtonElement>("#view-tabs button").forEach((button) => {
    button.addEventListener("click", () =>
      setState(setView(state, button.dataset.view as ActiveView)),
    );
  });
  const filterBox = byId("entity-filter") as HTMLInputElement;
  filterBox.addEventListener("change", () => setState(setEntityFilter(state, filterBox.value)));
  byId("trend-mode").addEventListener("change", () => void renderTrends());
  const kBox = byId("shares-k") as HTMLInputElement;
  kBox.value = String(state.sharesK);
  kBox.addEventListener("change", () => setState(setSharesK(state, Number(kBox.value))));
  ["sankey-rows", "sankey-cols"].forEach((id) =>
    byId(id).addEventListener("change", () => void renderSankey()),
  );
  byId("chord-category").addEventListener("change", () => void renderChord());
  byId("refresh").addEventListener("click", async () => {
    await api.reload();
    void render();
  });
}

wireShell();
void render();
