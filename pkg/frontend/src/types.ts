export interface MdsRow {
  id: number;
  x: number;
  y: number;
  prevalence_pct: number;
}

export interface TermRow {
  term: string;
  category: string;
  freq: number;
  total: number;
  logprob: number;
  loglift: number;
}

export interface VisPayload {
  schema_version: number;
  lambda_step: number;
  R: number;
  mds: MdsRow[];
  tinfo: TermRow[];
}

export interface ExplorerState {
  /** Display id 1..K, or null for the overview. */
  selectedTopic: number | null;
  /** Always quantized to the payload's lambda_step grid. */
  lambda: number;
  hoveredTerm: string | null;
}

export type Action =
  | { type: "select"; topic: number | null }
  | { type: "lambda"; value: number }
  | { type: "hover"; term: string | null };
