/** Direct SVG emission: axes, linear/log scales, curves, error bars. */

export interface Point {
  x: number;
  y: number;
  yLow?: number;
  yHigh?: number;
}

export interface Curve {
  label: string;
  points: Point[];
}

export interface FigureOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  width?: number;
  height?: number;
}

const COLORS = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
];

const MARGIN = { top: 40, right: 24, bottom: 52, left: 68 };

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / n)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const s = candidates.find((c) => span / c <= n + 1) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12; v += s) {
    ticks.push(Number(v.toPrecision(10)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (
    let e = Math.floor(Math.log10(lo));
    e <= Math.ceil(Math.log10(hi));
    e++
  ) {
    const v = Math.pow(10, e);
    if (v >= lo / 1.001 && v <= hi * 1.001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) return String(Number(v.toPrecision(4)));
  return v.toExponential(0);
}

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render curves to a standalone SVG document string. */
export function renderFigure(curves: Curve[], opts: FigureOptions): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 440;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const pts = curves.flatMap((c) => c.points);
  if (pts.length === 0) {
    throw new Error("nothing to plot: no points in any curve");
  }
  const xs = pts.map((p) => p.x);
  let ys = pts.flatMap((p) =>
    [p.y, p.yLow, p.yHigh].filter((v): v is number => v !== undefined),
  );
  if (opts.logY) ys = ys.filter((v) => v > 0);
  if (ys.length === 0) {
    throw new Error("log-scale figure has no positive values");
  }
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (opts.logY) {
    yLo /= 1.5;
    yHi *= 1.5;
  } else {
    const pad = 0.05 * (yHi - yLo || 1);
    yLo = Math.max(0, yLo - pad);
    yHi += pad;
  }
  const sx = (x: number) =>
    MARGIN.left + ((x - xLo) / (xHi - xLo || 1)) * plotW;
  const sy = (y: number) => {
    const t = opts.logY
      ? (Math.log10(y) - Math.log10(yLo)) /
        (Math.log10(yHi) - Math.log10(yLo) || 1)
      : (y - yLo) / (yHi - yLo || 1);
    return MARGIN.top + (1 - t) * plotH;
  };

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  out.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  out.push(
    `<text x="${width / 2}" y="22" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`,
  );

  const xTicks = niceTicks(xLo, xHi);
  const yTicks = opts.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of xTicks) {
    const x = sx(t);
    out.push(
      `<line x1="${x.toFixed(1)}" y1="${MARGIN.top}" x2="${x.toFixed(1)}" y2="${MARGIN.top + plotH}" stroke="#eee"/>`,
    );
    out.push(
      `<text x="${x.toFixed(1)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const y = sy(t);
    out.push(
      `<line x1="${MARGIN.left}" y1="${y.toFixed(1)}" x2="${MARGIN.left + plotW}" y2="${y.toFixed(1)}" stroke="#eee"/>`,
    );
    out.push(
      `<text x="${MARGIN.left - 6}" y="${(y + 4).toFixed(1)}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
    );
  }
  out.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333"/>`,
  );
  out.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 12}" text-anchor="middle" font-size="13">${esc(opts.xLabel)}</text>`,
  );
  out.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${esc(opts.yLabel)}</text>`,
  );

  curves.forEach((curve, ci) => {
    const color = COLORS[ci % COLORS.length];
    const sorted = [...curve.points].sort((a, b) => a.x - b.x);
    const usable = opts.logY ? sorted.filter((p) => p.y > 0) : sorted;
    const path = usable
      .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(1)},${sy(p.y).toFixed(1)}`)
      .join(" ");
    if (path) {
      out.push(
        `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`,
      );
    }
    for (const p of usable) {
      const x = sx(p.x);
      out.push(
        `<circle cx="${x.toFixed(1)}" cy="${sy(p.y).toFixed(1)}" r="3" fill="${color}"/>`,
      );
      if (p.yLow !== undefined && p.yHigh !== undefined) {
        const lo = opts.logY && p.yLow <= 0 ? p.y : p.yLow;
        out.push(
          `<line x1="${x.toFixed(1)}" y1="${sy(lo).toFixed(1)}" x2="${x.toFixed(1)}" y2="${sy(p.yHigh).toFixed(1)}" stroke="${color}" stroke-width="1.2"/>`,
        );
      }
    }
    const lx = MARGIN.left + plotW - 130;
    const ly = MARGIN.top + 16 + 18 * ci;
    out.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`,
    );
    out.push(
      `<text x="${lx + 28}" y="${ly}" font-size="12">${esc(curve.label)}</text>`,
    );
  });
  out.push("</svg>");
  return out.join("\n");
}
