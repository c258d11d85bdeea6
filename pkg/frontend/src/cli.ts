#!/usr/bin/env node
/** Render SVG figures from simulator CSV output. */

import { readFileSync, writeFileSync } from "node:fs";
import { render, type FigureKind } from "./figures.js";

const KINDS = ["phase", "crossing", "region", "resource"] as const;

export interface CliArgs {
  kind: FigureKind;
  input: string;
  output: string;
}

export function parseArgs(argv: string[]): CliArgs {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near '${flag}'`);
    }
    opts.set(flag.slice(2), value);
  }
  const kind = opts.get("kind");
  const input = opts.get("in");
  const output = opts.get("out");
  if (!kind || !input || !output) {
    throw new Error(
      "usage: plot --kind phase|crossing|region|resource --in data.csv --out figure.svg",
    );
  }
  if (!(KINDS as readonly string[]).includes(kind)) {
    throw new Error(`unknown figure kind '${kind}' (expected ${KINDS.join("|")})`);
  }
  return { kind: kind as FigureKind, input, output };
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const csvText = readFileSync(args.input, "utf8");
    const svg = render(args.kind, csvText);
    writeFileSync(args.output, svg, "utf8");
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  return 0;
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!)) {
  process.exit(main(process.argv.slice(2)));
}
