// DOM projection of the controllers: rating cards, the convergence chart,
// and the recommendation list. No state lives here.

import { FeedbackItem, IterationSummary, Recommendation } from "./api.js";
import { drawingFromEdges } from "./layout.js";
import { RatingBatch } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function patternView(item: FeedbackItem | Recommendation): HTMLElement {
  const wrap = el("div", "pattern");
  const kind = "kind" in item ? (item as FeedbackItem).kind : item.edges.length ? "graph" : "set";
  if (item.edges && item.edges.length > 0) {
    wrap.appendChild(graphSvg(item));
    return wrap;
  }
  if (kind === "sequence" || item.rendering.includes("->")) {
    for (const [i, tok] of item.rendering.split("->").entries()) {
      if (i > 0) wrap.appendChild(el("span", "arrow", "→"));
      wrap.appendChild(el("span", "chip chain", tok.trim()));
    }
    return wrap;
  }
  for (const tok of item.rendering.replace(/[{}]/g, "").split(",")) {
    if (tok.trim()) wrap.appendChild(el("span", "chip", tok.trim()));
  }
  return wrap;
}

function graphSvg(item: FeedbackItem | Recommendation): SVGSVGElement {
  const drawing = drawingFromEdges(item.edges);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", "0 0 220 160");
  svg.setAttribute("class", "graph");
  for (const edge of drawing.edges) {
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(edge.from.x));
    line.setAttribute("y1", String(edge.from.y));
    line.setAttribute("x2", String(edge.to.x));
    line.setAttribute("y2", String(edge.to.y));
    svg.appendChild(line);
    const mid = document.createElementNS(SVG_NS, "text");
    mid.setAttribute("x", String((edge.from.x + edge.to.x) / 2));
    mid.setAttribute("y", String((edge.from.y + edge.to.y) / 2 - 3));
    mid.setAttribute("class", "edge-label");
    mid.textContent = edge.label;
    svg.appendChild(mid);
  }
  for (const node of drawing.nodes) {
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(node.pos.x));
    circle.setAttribute("cy", String(node.pos.y));
    circle.setAttribute("r", "11");
    svg.appendChild(circle);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(node.pos.x));
    label.setAttribute("y", String(node.pos.y + 4));
    label.setAttribute("class", "node-label");
    label.textContent = node.label;
    svg.appendChild(label);
  }
  return svg;
}

export function renderCards(
  container: HTMLElement,
  batch: RatingBatch,
  onChange: () => void,
): void {
  container.replaceChildren();
  for (const item of batch.items) {
    const card = el("div", "card");
    card.dataset.patternId = String(item.pattern_id);
    const head = el("div", "card-head");
    head.appendChild(el("span", "support", `support ${item.support}`));
    card.appendChild(head);
    card.appendChild(patternView(item));
    const controls = el("div", "ratings");
    for (const rating of batch.allowedRatings) {
      const label = el("label");
      const input = document.createElement("input");
      input.type = "radio";
      input.name = `rating-${item.pattern_id}`;
      input.value = String(rating);
      input.addEventListener("change", () => {
        batch.rate(item.pattern_id, rating);
        card.classList.add("rated");
        onChange();
      });
      label.appendChild(input);
      label.appendChild(el("span", undefined, batch.ratingName(rating)));
      controls.appendChild(label);
    }
    card.appendChild(controls);
    const error = el("div", "card-error");
    card.appendChild(error);
    container.appendChild(card);
  }
}

export function showCardError(container: HTMLElement, patternId: number, message: string): void {
  const card = container.querySelector<HTMLElement>(`[data-pattern-id="${patternId}"] .card-error`);
  if (card) card.textContent = message;
}

export function renderSummary(container: HTMLElement, summary: IterationSummary): void {
  const parts = [
    `iteration ${summary.iteration}`,
    `‖Δθ‖ = ${summary.theta_delta.toFixed(6)}`,
    `status ${summary.status}`,
  ];
  if (summary.weighted_f_score !== undefined) {
    parts.push(`held-out F ${summary.weighted_f_score.toFixed(3)}`);
  }
  container.textContent = parts.join("  ·  ");
}

export function renderProgress(container: HTMLElement, history: IterationSummary[], status: string): void {
  container.replaceChildren();
  if (history.length === 0) {
    container.appendChild(el("p", "empty", "No iterations yet."));
    return;
  }
  container.appendChild(chart(history, status));
  const table = el("table", "metrics");
  const head = el("tr");
  for (const title of ["iteration", "‖Δθ‖", "weighted F", "ratings"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const entry of history) {
    const row = el("tr");
    row.appendChild(el("td", undefined, String(entry.iteration)));
    row.appendChild(el("td", undefined, entry.theta_delta.toFixed(6)));
    row.appendChild(el("td", undefined, entry.weighted_f_score?.toFixed(3) ?? "—"));
    row.appendChild(el("td", undefined, String(entry.feedback_count)));
    table.appendChild(row);
  }
  container.appendChild(table);
}

function chart(history: IterationSummary[], status: string): SVGSVGElement {
  const width = 560;
  const height = 200;
  const pad = 30;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "chart");
  const xs = (i: number) =>
    pad + (history.length === 1 ? 0 : (i * (width - 2 * pad)) / (history.length - 1));

  const deltas = history.map((h) => h.theta_delta);
  const maxDelta = Math.max(...deltas, 1e-9);
  const deltaLine = history
    .map((h, i) => `${xs(i)},${height - pad - (h.theta_delta / maxDelta) * (height - 2 * pad)}`)
    .join(" ");
  const deltaPoly = document.createElementNS(SVG_NS, "polyline");
  deltaPoly.setAttribute("points", deltaLine);
  deltaPoly.setAttribute("class", "line delta");
  svg.appendChild(deltaPoly);

  const scored = history.filter((h) => h.weighted_f_score !== undefined);
  if (scored.length) {
    const fLine = history
      .map((h, i) =>
        h.weighted_f_score === undefined
          ? null
          : `${xs(i)},${height - pad - h.weighted_f_score * (height - 2 * pad)}`,
      )
      .filter((p): p is string => p !== null)
      .join(" ");
    const fPoly = document.createElementNS(SVG_NS, "polyline");
    fPoly.setAttribute("points", fLine);
    fPoly.setAttribute("class", "line fscore");
    svg.appendChild(fPoly);
  }

  if (status === "converged") {
    const marker = document.createElementNS(SVG_NS, "line");
    const x = xs(history.length - 1);
    marker.setAttribute("x1", String(x));
    marker.setAttribute("x2", String(x));
    marker.setAttribute("y1", String(pad));
    marker.setAttribute("y2", String(height - pad));
    marker.setAttribute("class", "converged-marker");
    svg.appendChild(marker);
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(x - 4));
    text.setAttribute("y", String(pad - 6));
    text.setAttribute("class", "marker-label");
    text.textContent = "converged";
    svg.appendChild(text);
  }
  return svg;
}

export function renderRecommendations(container: HTMLElement, items: Recommendation[]): void {
  container.replaceChildren();
  if (items.length === 0) {
    container.appendChild(
      el("p", "empty", "Nothing to recommend yet: rate at least one batch first."),
    );
    return;
  }
  for (const item of items) {
    const row = el("div", "rec-row");
    row.appendChild(el("span", "prob", item.probability.toFixed(3)));
    row.appendChild(patternView(item));
    container.appendChild(row);
  }
}
