/**
 * CSV parsing against the frozen trace schemas written by the motoreff CLI.
 * Validation failures name the offending column so broken inputs are
 * diagnosable from the exit message alone.
 */

import { readFileSync } from "fs";

export const SCHEMAS: Record<string, string[]> = {
  estimates: ["t", "eta1", "eta2", "eta3", "eta4", "irls_iters", "rejected", "gap", "converged"],
  truth: ["t", "eta1", "eta2", "eta3", "eta4"],
  ekf: ["t", "eta1", "eta2", "eta3", "eta4"],
  weights: ["t", "segment", "weight", "rejected"],
  kkt_trace: ["window", "irls_iter", "newton_iter", "r_dual_norm", "r_cent_norm", "gap", "alpha", "beta"],
  metrics: ["method", "motor", "rmse", "std", "max_spike"],
  metrics_compare: ["method", "motor", "rmse", "std", "max_spike"],
  iterates: ["irls_iter", "newton_iter", "eta1", "eta2", "eta3", "eta4"],
};

export class SchemaError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length === 0) throw new SchemaError("empty csv");
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((ln) => ln.split(","));
  for (let i = 0; i < rows.length; i++) {
    if (rows[i].length !== header.length) {
      throw new SchemaError(`row ${i + 2}: expected ${header.length} fields, found ${rows[i].length}`);
    }
  }
  return { header, rows };
}

export function loadTable(path: string, kind: string): Table {
  const schema = SCHEMAS[kind];
  if (!schema) throw new SchemaError(`unknown table kind '${kind}'`);
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new SchemaError(`${path}: ${(err as Error).message}`);
  }
  const table = parseCsv(text);
  for (const col of schema) {
    if (!table.header.includes(col)) {
      throw new SchemaError(`${path}: missing column '${col}' (expected schema: ${schema.join(",")})`);
    }
  }
  for (const col of table.header) {
    if (!schema.includes(col)) {
      throw new SchemaError(`${path}: unexpected column '${col}' (expected schema: ${schema.join(",")})`);
    }
  }
  return table;
}

export function numeric(table: Table, column: string): number[] {
  const idx = table.header.indexOf(column);
  if (idx < 0) throw new SchemaError(`missing column '${column}'`);
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (Number.isNaN(v)) throw new SchemaError(`column '${column}' row ${i + 2}: not a number: '${row[idx]}'`);
    return v;
  });
}

export function strings(table: Table, column: string): string[] {
  const idx = table.header.indexOf(column);
  if (idx < 0) throw new SchemaError(`missing column '${column}'`);
  return table.rows.map((row) => row[idx]);
}
