import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { boot } from "../src/main";

import pipelineFixture from "./fixtures/visdata.json";

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  root = document.getElementById("app") as HTMLElement;
});

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("boot", () => {
  it("fetches ./visdata.json exactly once and mounts the widget", async () => {
    const fetchMock = vi.fn(async () => ({
      ok: true,
      json: async () => JSON.parse(JSON.stringify(pipelineFixture)) as unknown,
    }));
    vi.stubGlobal("fetch", fetchMock);

    await boot(root);

    expect(fetchMock).toHaveBeenCalledTimes(1);
    expect(fetchMock).toHaveBeenCalledWith("./visdata.json");
    expect(root.querySelectorAll(".topic")).toHaveLength(5);
    expect(root.querySelector(".error-panel")).toBeNull();
  });

  it("shows the error panel when the payload cannot be fetched", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => ({ ok: false, status: 404, json: async () => ({}) })));
    await boot(root);
    expect(root.querySelector(".error-panel")).not.toBeNull();
    expect(root.querySelector("svg")).toBeNull();
    expect(root.textContent).toContain("404");
  });

  it("shows the error panel when the payload violates the schema", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => ({ ok: true, json: async () => ({ schema_version: 1 }) })),
    );
    await boot(root);
    expect(root.querySelector(".error-panel")).not.toBeNull();
    expect(root.querySelector("svg")).toBeNull();
  });
});
