import { mountExplorer } from "./app";
import { renderError } from "./render";

/** Boot: the widget's only network access is this one static fetch. */
export async function boot(root: HTMLElement): Promise<void> {
  try {
    const response = await fetch("./visdata.json");
    if (!response.ok) {
      throw new Error(`failed to load visdata.json: HTTP ${response.status}`);
    }
    mountExplorer(root, await response.json());
  } catch (error) {
    renderError(root, [String(error)]);
  }
}

const root = typeof document === "undefined" ? null : document.getElementById("app");
if (root) {
  void boot(root);
}
