import { describe, expect, it } from "vitest";
import {
  column,
  EmptyDataError,
  MissingColumnError,
  parseCsv,
  requireRows,
  textColumn,
} from "../src/csv.js";

const SAMPLE = "a,b,c\n1,2,x\n3,4,y\n";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv(SAMPLE);
    expect(t.header).toEqual(["a", "b", "c"]);
    expect(t.rows).toHaveLength(2);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1\n")).toThrow(/field/);
  });

  it("tolerates trailing blank lines", () => {
    expect(parseCsv("a\n1\n\n").rows).toHaveLength(1);
  });
});

describe("column access", () => {
  it("parses numeric columns", () => {
    expect(column(parseCsv(SAMPLE), "b")).toEqual([2, 4]);
  });

  it("returns text columns verbatim", () => {
    expect(textColumn(parseCsv(SAMPLE), "c")).toEqual(["x", "y"]);
  });

  it("names the missing column", () => {
    const t = parseCsv(SAMPLE);
    expect(() => column(t, "p_err_max")).toThrow(MissingColumnError);
    expect(() => column(t, "p_err_max")).toThrow(/p_err_max/);
  });

  it("rejects non-numeric cells in numeric columns", () => {
    expect(() => column(parseCsv(SAMPLE), "c")).toThrow(/numeric/);
  });
});

describe("requireRows", () => {
  it("raises on header-only tables", () => {
    expect(() => requireRows(parseCsv("a,b\n"))).toThrow(EmptyDataError);
  });
});
