import { describe, expect, it } from "vitest";

import {
  INITIAL_LAMBDA,
  hoverTerm,
  initialState,
  lambdaGrid,
  quantizeLambda,
  selectTopic,
  setLambda,
} from "../src/state";
import type { VisPayload } from "../src/types";

import handFixture from "./fixtures/hand.json";

const hand = handFixture as VisPayload;

describe("quantizeLambda", () => {
  it("snaps onto the step grid", () => {
    expect(quantizeLambda(0.483, 0.01)).toBe(0.48);
    expect(quantizeLambda(0.487, 0.01)).toBe(0.49);
    expect(quantizeLambda(0.125, 0.25)).toBe(0.25);
  });

  it("clamps to [0, 1]", () => {
    expect(quantizeLambda(-0.4, 0.01)).toBe(0);
    expect(quantizeLambda(1.7, 0.01)).toBe(1);
  });

  it("keeps grid points fixed", () => {
    for (const step of [0.01, 0.05, 0.1]) {
      for (const value of lambdaGrid(step)) {
        expect(quantizeLambda(value, step)).toBe(value);
      }
    }
  });

  it("rejects non-finite input", () => {
    expect(() => quantizeLambda(Number.NaN, 0.01)).toThrow(RangeError);
  });
});

describe("lambdaGrid", () => {
  it("spans 0..1 inclusive for step 0.01", () => {
    const grid = lambdaGrid(0.01);
    expect(grid).toHaveLength(101);
    expect(grid[0]).toBe(0);
    expect(grid[48]).toBe(0.48);
    expect(grid[100]).toBe(1);
  });
});

describe("initialState", () => {
  it("starts unselected at the quantized initial lambda", () => {
    const state = initialState(hand);
    expect(state.selectedTopic).toBeNull();
    expect(state.hoveredTerm).toBeNull();
    expect(state.lambda).toBe(quantizeLambda(INITIAL_LAMBDA, hand.lambda_step));
    expect(state.lambda).toBe(0.48);
  });
});

describe("reducers", () => {
  it("selects and deselects topics", () => {
    const start = initialState(hand);
    const selected = selectTopic(start, 2, 2);
    expect(selected.selectedTopic).toBe(2);
    expect(selectTopic(selected, null, 2).selectedTopic).toBeNull();
  });

  it("rejects out-of-range topic ids", () => {
    const start = initialState(hand);
    expect(() => selectTopic(start, 3, 2)).toThrow(RangeError);
    expect(() => selectTopic(start, 0, 2)).toThrow(RangeError);
  });

  it("returns the same reference when nothing changes", () => {
    const start = initialState(hand);
    expect(selectTopic(start, null, 2)).toBe(start);
    expect(setLambda(start, 0.48, hand.lambda_step)).toBe(start);
    expect(setLambda(start, 0.4801, hand.lambda_step)).toBe(start);
    expect(hoverTerm(start, null)).toBe(start);
  });

  it("quantizes lambda updates", () => {
    const start = initialState(hand);
    const moved = setLambda(start, 0.3333, hand.lambda_step);
    expect(moved.lambda).toBe(0.33);
    expect(moved.selectedTopic).toBe(start.selectedTopic);
  });

  it("tracks hovered terms", () => {
    const start = initialState(hand);
    const hovered = hoverTerm(start, "w1");
    expect(hovered.hoveredTerm).toBe("w1");
    expect(hoverTerm(hovered, "w1")).toBe(hovered);
    expect(hoverTerm(hovered, null).hoveredTerm).toBeNull();
  });
});
