/**
 * Minimal CSV reading with schema validation for octoarm run directories.
 *
 * Files are comma-separated with a header row; every consumer declares the
 * columns it needs and parsing fails with the file and column named.
 */

import { readFileSync } from "node:fs";

export class SchemaError extends Error {
  constructor(public file: string, public detail: string) {
    super(`${file}: ${detail}`);
    this.name = "SchemaError";
  }
}

export interface Table {
  columns: string[];
  rows: string[][];
}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new SchemaError(path, "file is missing or unreadable");
  }
  const lines = text.split("\n").map((l) => l.endsWith("\r") ? l.slice(0, -1) : l)
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(path, "file is empty");
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  return { columns, rows };
}

/** Numeric column accessors, validated against the header. */
export function numericColumns(
  path: string,
  table: Table,
  wanted: string[],
): Map<string, number[]> {
  const index = new Map<string, number>();
  table.columns.forEach((c, i) => index.set(c, i));
  const out = new Map<string, number[]>();
  for (const name of wanted) {
    const i = index.get(name);
    if (i === undefined) {
      throw new SchemaError(path, `missing column '${name}'`);
    }
    const vals = new Array<number>(table.rows.length);
    for (let r = 0; r < table.rows.length; r++) {
      const cell = table.rows[r][i];
      const v = Number(cell);
      if (cell === undefined || cell === "" || Number.isNaN(v)) {
        throw new SchemaError(
          path,
          `non-numeric value '${cell}' in column '${name}' at row ${r + 2}`,
        );
      }
      vals[r] = v;
    }
    out.set(name, vals);
  }
  return out;
}

/** String column accessor (for enumerated kinds). */
export function stringColumn(
  path: string,
  table: Table,
  name: string,
): string[] {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new SchemaError(path, `missing column '${name}'`);
  }
  return table.rows.map((r) => r[i]);
}
