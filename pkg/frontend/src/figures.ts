/** Figure builders over the simulator's documented CSV schemas. */

import { column, parseCsv, requireRows, textColumn, type Table } from "./csv.js";
import { renderFigure, type Curve } from "./svg.js";

export type FigureKind = "phase" | "crossing" | "region" | "resource";

function groupBy(keys: string[]): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  keys.forEach((k, i) => {
    const arr = groups.get(k) ?? [];
    arr.push(i);
    groups.set(k, arr);
  });
  return groups;
}

/** Phase diagram: tolerable gate error per heralding failure, per strategy. */
export function phaseFigure(table: Table): string {
  requireRows(table);
  const strategy = textColumn(table, "strategy");
  const ph = column(table, "p_h");
  const pg = column(table, "p_G_max");
  const curves: Curve[] = [];
  for (const [label, idx] of groupBy(strategy)) {
    curves.push({
      label,
      points: idx.map((i) => ({ x: ph[i], y: pg[i] })),
    });
  }
  return renderFigure(curves, {
    title: "Correctable gate error vs heralded failure",
    xLabel: "heralded failure probability p_h",
    yLabel: "maximal gate error p_G",
    logY: true,
  });
}

/** Threshold crossing: failure rate vs swept parameter, one curve per size. */
export function crossingFigure(table: Table): string {
  requireRows(table);
  const sizes = textColumn(table, "L");
  const rate = column(table, "fail_rate");
  const ciLow = column(table, "ci_low");
  const ciHigh = column(table, "ci_high");
  // the swept axis is whichever loss/error column actually varies
  const axes = ["p_loss", "p_bond", "p_err"] as const;
  let axis: (typeof axes)[number] = "p_err";
  for (const a of axes) {
    const vals = column(table, a);
    if (new Set(vals).size > 1) {
      axis = a;
      break;
    }
  }
  const xs = column(table, axis);
  const curves: Curve[] = [];
  for (const [label, idx] of groupBy(sizes)) {
    curves.push({
      label: `L = ${label}`,
      points: idx.map((i) => ({
        x: xs[i],
        y: rate[i],
        yLow: ciLow[i],
        yHigh: ciHigh[i],
      })),
    });
  }
  return renderFigure(curves, {
    title: "Logical failure rate by lattice size",
    xLabel: axis,
    yLabel: "failure rate",
  });
}

/** Correctable region boundary: max error rate vs loss. */
export function regionFigure(table: Table): string {
  requireRows(table);
  const loss = column(table, "p_loss");
  const errMax = column(table, "p_err_max");
  const ci = column(table, "ci");
  const points = loss.map((x, i) => ({
    x,
    y: errMax[i],
    yLow: Math.max(0, errMax[i] - ci[i]),
    yHigh: errMax[i] + ci[i],
  }));
  return renderFigure([{ label: "boundary", points }], {
    title: "Correctable region boundary",
    xLabel: "loss parameter",
    yLabel: "maximal error rate p_err",
  });
}

/** Resource footprint per strategy against heralding failure. */
export function resourceFigure(table: Table): string {
  requireRows(table);
  const strategy = textColumn(table, "strategy");
  const ph = column(table, "p_h");
  const qubits = column(table, "resource_qubits");
  const curves: Curve[] = [];
  for (const [label, idx] of groupBy(strategy)) {
    curves.push({
      label,
      points: idx.map((i) => ({ x: ph[i], y: qubits[i] })),
    });
  }
  return renderFigure(curves, {
    title: "Resource size vs heralded failure",
    xLabel: "heralded failure probability p_h",
    yLabel: "qubits per resource",
    logY: true,
  });
}

const BUILDERS: Record<FigureKind, (t: Table) => string> = {
  phase: phaseFigure,
  crossing: crossingFigure,
  region: regionFigure,
  resource: resourceFigure,
};

export function render(kind: FigureKind, csvText: string): string {
  const builder = BUILDERS[kind];
  if (!builder) {
    throw new Error(`unknown figure kind '${kind}'`);
  }
  return builder(parseCsv(csvText));
}
