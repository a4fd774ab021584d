import type { ExplorerState, VisPayload } from "./types";

export const INITIAL_LAMBDA = 0.48;

/** Snap a raw slider value onto the payload's lambda_step grid,
 *  clamped to [0, 1]. Rounded to 12 significant digits so grid points
 *  compare equal across recomputations. */
export function quantizeLambda(raw: number, step: number): number {
  if (!Number.isFinite(raw)) {
    throw new RangeError("lambda must be a finite number");
  }
  const clamped = Math.min(1, Math.max(0, raw));
  const snapped = Math.round(clamped / step) * step;
  return Number(Math.min(1, snapped).toPrecision(12));
}

/** Every quantized grid value from 0 to 1 inclusive. */
export function lambdaGrid(step: number): number[] {
  const points: number[] = [];
  for (let i = 0; i * step <= 1 + step / 2; i++) {
    const value = quantizeLambda(i * step, step);
    if (points.length === 0 || points[points.length - 1] !== value) {
      points.push(value);
    }
  }
  return points;
}

export function initialState(payload: VisPayload): ExplorerState {
  return {
    selectedTopic: null,
    lambda: quantizeLambda(INITIAL_LAMBDA, payload.lambda_step),
    hoveredTerm: null,
  };
}

/** All reducers return the same state object when nothing changes, so
 *  callers can skip re-rendering on reference equality. */
export function selectTopic(
  state: ExplorerState,
  topic: number | null,
  topicCount: number,
): ExplorerState {
  if (topic !== null && (!Number.isInteger(topic) || topic < 1 || topic > topicCount)) {
    throw new RangeError(`topic id out of range: ${topic}`);
  }
  if (topic === state.selectedTopic) {
    return state;
  }
  return { ...state, selectedTopic: topic };
}

export function setLambda(
  state: ExplorerState,
  raw: number,
  step: number,
): ExplorerState {
  const lambda = quantizeLambda(raw, step);
  if (lambda === state.lambda) {
    return state;
  }
  return { ...state, lambda };
}

export function hoverTerm(state: ExplorerState, term: string | null): ExplorerState {
  if (term === state.hoveredTerm) {
    return state;
  }
  return { ...state, hoveredTerm: term };
}
