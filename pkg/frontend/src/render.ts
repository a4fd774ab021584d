import { visibleRows } from "./relevance";
import type { Action, ExplorerState, VisPayload } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const MAP_SIZE = 400;
const MAP_PAD = 48;
const MAX_RADIUS = 48;

export type Dispatch = (action: Action) => void;

function fmt(value: number): string {
  return value.toFixed(2);
}

/** Map a payload coordinate onto the pixel square, preserving aspect:
 *  both axes share the symmetric domain [-m, m]. */
function pixelScale(payload: VisPayload): (value: number) => number {
  let m = 0;
  for (const row of payload.mds) {
    m = Math.max(m, Math.abs(row.x), Math.abs(row.y));
  }
  if (m === 0) {
    m = 1;
  }
  const half = MAP_SIZE / 2 - MAP_PAD;
  return (value) => MAP_SIZE / 2 + (value / m) * half;
}

/** Circle area is proportional to topic prevalence. */
function radiusFor(prevalencePct: number): number {
  return MAX_RADIUS * Math.sqrt(prevalencePct / 100);
}

export function renderMap(
  container: HTMLElement,
  payload: VisPayload,
  state: ExplorerState,
  dispatch: Dispatch,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "topic-map");
  svg.setAttribute("viewBox", `0 0 ${MAP_SIZE} ${MAP_SIZE}`);
  svg.setAttribute("role", "img");
  svg.setAttribute("aria-label", "Intertopic distance map");
  svg.addEventListener("click", () => dispatch({ type: "select", topic: null }));

  const scale = pixelScale(payload);
  for (const row of payload.mds) {
    const group = doc.createElementNS(SVG_NS, "g");
    const selected = state.selectedTopic === row.id;
    group.setAttribute("class", selected ? "topic selected" : "topic");
    group.setAttribute("data-topic-id", String(row.id));
    group.addEventListener("click", (event) => {
      event.stopPropagation();
      dispatch({ type: "select", topic: row.id });
    });

    const circle = doc.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", fmt(scale(row.x)));
    circle.setAttribute("cy", fmt(scale(-row.y)));
    circle.setAttribute("r", fmt(radiusFor(row.prevalence_pct)));
    group.appendChild(circle);

    const label = doc.createElementNS(SVG_NS, "text");
    label.setAttribute("x", fmt(scale(row.x)));
    label.setAttribute("y", fmt(scale(-row.y)));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("dy", "0.35em");
    label.textContent = String(row.id);
    group.appendChild(label);

    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export function renderTerms(
  container: HTMLElement,
  payload: VisPayload,
  state: ExplorerState,
  dispatch: Dispatch,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;

  const heading = doc.createElement("h2");
  heading.className = "term-heading";
  heading.textContent =
    state.selectedTopic === null
      ? "Most salient terms"
      : `Top terms for topic ${state.selectedTopic}`;
  container.appendChild(heading);

  const rows = visibleRows(payload, state);
  let maxTotal = 0;
  for (const row of rows) {
    maxTotal = Math.max(maxTotal, row.total, row.freq);
  }
  if (maxTotal === 0) {
    maxTotal = 1;
  }

  const list = doc.createElement("div");
  list.className = "term-list";
  for (const row of rows) {
    const item = doc.createElement("div");
    item.className = state.hoveredTerm === row.term ? "term-row hovered" : "term-row";
    item.setAttribute("data-term", row.term);
    item.addEventListener("mouseenter", () => dispatch({ type: "hover", term: row.term }));
    item.addEventListener("mouseleave", () => dispatch({ type: "hover", term: null }));

    const label = doc.createElement("span");
    label.className = "term-label";
    label.textContent = row.term;
    item.appendChild(label);

    const track = doc.createElement("div");
    track.className = "bar-track";
    const totalBar = doc.createElement("div");
    totalBar.className = "bar-total";
    totalBar.style.width = fmt((100 * row.total) / maxTotal) + "%";
    const freqBar = doc.createElement("div");
    freqBar.className = "bar-freq";
    freqBar.style.width = fmt(Math.min(100, (100 * row.freq) / maxTotal)) + "%";
    track.appendChild(totalBar);
    track.appendChild(freqBar);
    item.appendChild(track);

    const counts = doc.createElement("span");
    counts.className = "term-counts";
    counts.textContent = `${fmt(row.freq)} / ${fmt(row.total)}`;
    item.appendChild(counts);

    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderSlider(
  container: HTMLElement,
  payload: VisPayload,
  state: ExplorerState,
  dispatch: Dispatch,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;

  const label = doc.createElement("label");
  label.className = "lambda-label";
  label.textContent = "relevance weight λ ";

  const value = doc.createElement("span");
  value.className = "lambda-value";
  value.textContent = String(state.lambda);

  const slider = doc.createElement("input");
  slider.type = "range";
  slider.className = "lambda-slider";
  slider.min = "0";
  slider.max = "1";
  slider.step = String(payload.lambda_step);
  slider.value = String(state.lambda);
  slider.addEventListener("input", () => {
    dispatch({ type: "lambda", value: Number(slider.value) });
  });

  label.appendChild(value);
  container.appendChild(label);
  container.appendChild(slider);
}

export function renderError(root: HTMLElement, messages: string[]): void {
  root.textContent = "";
  const doc = root.ownerDocument;
  const panel = doc.createElement("div");
  panel.className = "error-panel";
  const heading = doc.createElement("h2");
  heading.textContent = "Could not load visualization data";
  panel.appendChild(heading);
  const list = doc.createElement("ul");
  for (const message of messages) {
    const item = doc.createElement("li");
    item.textContent = message;
    list.appendChild(item);
  }
  panel.appendChild(list);
  root.appendChild(panel);
}
