/** Minimal strict CSV reader for the simulator's result schemas. */

export class MissingColumnError extends Error {
  constructor(column: string, available: string[]) {
    super(
      `missing column '${column}' (available: ${available.join(", ")})`,
    );
    this.name = "MissingColumnError";
  }
}

export class EmptyDataError extends Error {
  constructor() {
    super("input contains a header but no data rows");
    this.name = "EmptyDataError";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new EmptyDataError();
  }
  const header = lines[0].split(",").map((c) => c.trim());
  const rows = lines.slice(1).map((l) => l.split(",").map((c) => c.trim()));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(
        `row has ${row.length} fields, header has ${header.length}`,
      );
    }
  }
  return { header, rows };
}

/** Numeric column accessor; throws a named error when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.header);
  }
  return table.rows.map((r, line) => {
    const v = Number(r[idx]);
    if (r[idx] === "" || Number.isNaN(v)) {
      throw new Error(
        `column '${name}' row ${line + 1}: '${r[idx]}' is not numeric`,
      );
    }
    return v;
  });
}

/** String column accessor; throws a named error when absent. */
export function textColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.header);
  }
  return table.rows.map((r) => r[idx]);
}

export function requireRows(table: Table): void {
  if (table.rows.length === 0) {
    throw new EmptyDataError();
  }
}
