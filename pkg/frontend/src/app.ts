import { renderError, renderMap, renderSlider, renderTerms } from "./render";
import { validatePayload } from "./schema";
import { hoverTerm, initialState, selectTopic, setLambda } from "./state";
import type { Action, ExplorerState, VisPayload } from "./types";

export interface Explorer {
  readonly root: HTMLElement;
  readonly payload: VisPayload;
  readonly state: ExplorerState;
  /** Per-panel render tallies, exposed so tests can assert memoization. */
  readonly renderCount: { map: number; terms: number; slider: number };
  dispatch(action: Action): void;
}

class ExplorerImpl implements Explorer {
  readonly root: HTMLElement;
  readonly payload: VisPayload;
  state: ExplorerState;
  renderCount = { map: 0, terms: 0, slider: 0 };

  private mapPanel: HTMLElement;
  private termPanel: HTMLElement;
  private sliderPanel: HTMLElement;

  constructor(root: HTMLElement, payload: VisPayload) {
    this.root = root;
    this.payload = payload;
    this.state = initialState(payload);

    const doc = root.ownerDocument;
    root.textContent = "";
    const shell = doc.createElement("div");
    shell.className = "explorer";
    this.mapPanel = doc.createElement("div");
    this.mapPanel.className = "map-panel";
    this.termPanel = doc.createElement("div");
    this.termPanel.className = "term-panel";
    this.sliderPanel = doc.createElement("div");
    this.sliderPanel.className = "slider-panel";
    shell.appendChild(this.mapPanel);
    shell.appendChild(this.termPanel);
    shell.appendChild(this.sliderPanel);
    root.appendChild(shell);

    this.renderMapPanel();
    this.renderTermPanel();
    this.renderSliderPanel();
  }

  dispatch = (action: Action): void => {
    const previous = this.state;
    switch (action.type) {
      case "select":
        this.state = selectTopic(previous, action.topic, this.payload.mds.length);
        if (this.state !== previous) {
          // Selection changes both panels; the map only re-highlights.
          this.renderMapPanel();
          this.renderTermPanel();
        }
        break;
      case "lambda":
        this.state = setLambda(previous, action.value, this.payload.lambda_step);
        if (this.state !== previous) {
          // The map is independent of lambda by contract.
          this.renderTermPanel();
          this.renderSliderPanel();
        }
        break;
      case "hover":
        this.state = hoverTerm(previous, action.term);
        if (this.state !== previous) {
          this.renderTermPanel();
        }
        break;
    }
  };

  private renderMapPanel(): void {
    renderMap(this.mapPanel, this.payload, this.state, this.dispatch);
    this.renderCount.map++;
  }

  private renderTermPanel(): void {
    renderTerms(this.termPanel, this.payload, this.state, this.dispatch);
    this.renderCount.terms++;
  }

  private renderSliderPanel(): void {
    renderSlider(this.sliderPanel, this.payload, this.state, this.dispatch);
    this.renderCount.slider++;
  }
}

/** Validate and mount. On schema violations the root shows only the
 *  error panel (no partial render) and the function returns null. */
export function mountExplorer(root: HTMLElement, data: unknown): Explorer | null {
  const errors = validatePayload(data);
  if (errors.length > 0) {
    renderError(root, errors);
    return null;
  }
  return new ExplorerImpl(root, data as VisPayload);
}
