import type { VisPayload } from "./types";

const PAYLOAD_KEYS = ["schema_version", "lambda_step", "R", "mds", "tinfo"];
const MDS_KEYS = ["id", "x", "y", "prevalence_pct"];
const TINFO_KEYS = ["term", "category", "freq", "total", "logprob", "loglift"];
const CATEGORY_RE = /^(Default|Topic[1-9][0-9]*)$/;

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function checkKeys(
  record: Record<string, unknown>,
  expected: string[],
  where: string,
  errors: string[],
): boolean {
  let ok = true;
  for (const key of expected) {
    if (!(key in record)) {
      errors.push(`${where}: missing required key "${key}"`);
      ok = false;
    }
  }
  for (const key of Object.keys(record)) {
    if (!expected.includes(key)) {
      errors.push(`${where}: unexpected key "${key}"`);
      ok = false;
    }
  }
  return ok;
}

/** Structural validation mirroring the payload's published JSON Schema.
 *  Returns a list of violations; an empty list means the payload is valid. */
export function validatePayload(data: unknown): string[] {
  const errors: string[] = [];
  if (!isRecord(data)) {
    return ["payload: expected a JSON object"];
  }
  if (!checkKeys(data, PAYLOAD_KEYS, "payload", errors)) {
    return errors;
  }
  if (data.schema_version !== 1) {
    errors.push(`payload: unsupported schema_version ${String(data.schema_version)}`);
  }
  if (!isFiniteNumber(data.lambda_step) || data.lambda_step <= 0 || data.lambda_step > 1) {
    errors.push("payload: lambda_step must be a number in (0, 1]");
  }
  if (!isFiniteNumber(data.R) || !Number.isInteger(data.R) || data.R < 1) {
    errors.push("payload: R must be an integer >= 1");
  }

  if (!Array.isArray(data.mds)) {
    errors.push("payload: mds must be an array");
  } else {
    data.mds.forEach((row, i) => {
      const where = `mds[${i}]`;
      if (!isRecord(row)) {
        errors.push(`${where}: expected an object`);
        return;
      }
      if (!checkKeys(row, MDS_KEYS, where, errors)) {
        return;
      }
      if (!isFiniteNumber(row.id) || !Number.isInteger(row.id) || row.id < 1) {
        errors.push(`${where}: id must be an integer >= 1`);
      }
      if (!isFiniteNumber(row.x) || !isFiniteNumber(row.y)) {
        errors.push(`${where}: x and y must be finite numbers`);
      }
      if (
        !isFiniteNumber(row.prevalence_pct) ||
        row.prevalence_pct < 0 ||
        row.prevalence_pct > 100
      ) {
        errors.push(`${where}: prevalence_pct must lie in [0, 100]`);
      }
    });
  }

  if (!Array.isArray(data.tinfo)) {
    errors.push("payload: tinfo must be an array");
  } else {
    data.tinfo.forEach((row, i) => {
      const where = `tinfo[${i}]`;
      if (!isRecord(row)) {
        errors.push(`${where}: expected an object`);
        return;
      }
      if (!checkKeys(row, TINFO_KEYS, where, errors)) {
        return;
      }
      if (typeof row.term !== "string" || row.term.length === 0) {
        errors.push(`${where}: term must be a non-empty string`);
      }
      if (typeof row.category !== "string" || !CATEGORY_RE.test(row.category)) {
        errors.push(`${where}: category must be "Default" or "Topic<n>"`);
      }
      if (!isFiniteNumber(row.freq) || row.freq < 0) {
        errors.push(`${where}: freq must be a number >= 0`);
      }
      if (!isFiniteNumber(row.total) || row.total < 0) {
        errors.push(`${where}: total must be a number >= 0`);
      }
      if (!isFiniteNumber(row.logprob) || !isFiniteNumber(row.loglift)) {
        errors.push(`${where}: logprob and loglift must be finite numbers`);
      }
    });
  }
  return errors;
}

/** Narrow unknown data to VisPayload, throwing on the first violation. */
export function parsePayload(data: unknown): VisPayload {
  const errors = validatePayload(data);
  if (errors.length > 0) {
    throw new Error(errors.join("; "));
  }
  return data as VisPayload;
}
