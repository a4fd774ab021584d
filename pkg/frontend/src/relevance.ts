import type { ExplorerState, TermRow, VisPayload } from "./types";

/** Relevance of a term at blend weight lambda: lambda * log p(w|t)
 *  plus (1 - lambda) * log lift. */
export function relevanceScore(row: TermRow, lambda: number): number {
  return lambda * row.logprob + (1 - lambda) * row.loglift;
}

/** The overview rows; the payload ships them already ordered by
 *  saliency, so payload order is the display order. */
export function defaultRows(payload: VisPayload): TermRow[] {
  return payload.tinfo.filter((row) => row.category === "Default");
}

/** A topic's rows in payload order, which is the lambda = 1 (within
 *  topic probability) ranking computed server-side. */
export function topicRows(payload: VisPayload, topicId: number): TermRow[] {
  const category = `Topic${topicId}`;
  return payload.tinfo.filter((row) => row.category === category);
}

/** Re-rank a topic's terms for the given lambda. The sort is stable
 *  over payload order, so exact score ties keep the server-side
 *  lambda = 1 ordering; at lambda = 1 the result is the payload order
 *  itself. */
export function rankTerms(
  payload: VisPayload,
  topicId: number,
  lambda: number,
): TermRow[] {
  if (!(lambda >= 0 && lambda <= 1)) {
    throw new RangeError(`lambda out of range: ${lambda}`);
  }
  const rows = topicRows(payload, topicId);
  return rows
    .map((row, index) => ({ row, index, score: relevanceScore(row, lambda) }))
    .sort((a, b) => (b.score - a.score) || (a.index - b.index))
    .map((entry) => entry.row);
}

/** The rows the term panel should show for the current state. */
export function visibleRows(payload: VisPayload, state: ExplorerState): TermRow[] {
  if (state.selectedTopic === null) {
    return defaultRows(payload);
  }
  return rankTerms(payload, state.selectedTopic, state.lambda);
}
