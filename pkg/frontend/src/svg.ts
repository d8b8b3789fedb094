/**
 * Deterministic SVG plotting primitives: line charts (linear or log-y) and
 * grouped bar charts, composed into fixed-size panels. No timestamps, no
 * randomness; identical inputs render byte-identical files.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dash?: string;
  width?: number;
}

export interface BarGroup {
  label: string; // tick label under the group
  values: number[]; // one per series
  errors?: number[]; // optional symmetric error bars
}

export interface PanelOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
  yMin?: number;
  yMax?: number;
}

const W = 480;
const H = 320;
const MARGIN = { left: 62, right: 14, top: 30, bottom: 44 };

function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  return Number(v.toPrecision(6)).toString();
}

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => span / c <= n) ?? candidates[candidates.length - 1];
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) ticks.push(Number(v.toPrecision(12)));
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let p = Math.ceil(Math.log10(lo)); p <= Math.floor(Math.log10(hi)); p++) {
    ticks.push(Math.pow(10, p));
  }
  return ticks.length ? ticks : [lo];
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function linePanel(series: Series[], opts: PanelOpts): string {
  const xs = series.flatMap((s) => s.x);
  const ysAll = series.flatMap((s) => s.y);
  const ys = opts.logY ? ysAll.filter((v) => v > 0) : ysAll;
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  if (!(xHi > xLo)) xHi = xLo + 1;
  let yLo = opts.yMin ?? Math.min(...ys);
  let yHi = opts.yMax ?? Math.max(...ys);
  if (opts.logY) {
    yLo = Math.pow(10, Math.floor(Math.log10(yLo)));
    yHi = Math.pow(10, Math.ceil(Math.log10(yHi)));
    if (!(yHi > yLo)) yHi = yLo * 10;
  } else {
    if (!(yHi > yLo)) {
      yHi = yLo + 1;
    }
    const pad = 0.05 * (yHi - yLo);
    yLo -= pad;
    yHi += pad;
  }
  const px = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * (W - MARGIN.left - MARGIN.right);
  const py = (y: number) => {
    const f = opts.logY
      ? (Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
      : (y - yLo) / (yHi - yLo);
    return H - MARGIN.bottom - f * (H - MARGIN.top - MARGIN.bottom);
  };

  const parts: string[] = [];
  parts.push(`<rect x="0" y="0" width="${W}" height="${H}" fill="white"/>`);
  const xticks = niceTicks(xLo, xHi);
  const yticks = opts.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of yticks) {
    const y = py(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${W - MARGIN.right}" y2="${fmt(y)}" stroke="#dddddd" stroke-width="1"/>`);
    const label = opts.logY ? `1e${Math.round(Math.log10(t))}` : fmt(t);
    parts.push(`<text x="${MARGIN.left - 6}" y="${fmt(y + 4)}" font-size="11" text-anchor="end" fill="#333333">${label}</text>`);
  }
  for (const t of xticks) {
    const x = px(t);
    parts.push(`<line x1="${fmt(x)}" y1="${H - MARGIN.bottom}" x2="${fmt(x)}" y2="${H - MARGIN.bottom + 4}" stroke="#333333"/>`);
    parts.push(`<text x="${fmt(x)}" y="${H - MARGIN.bottom + 17}" font-size="11" text-anchor="middle" fill="#333333">${fmt(t)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${W - MARGIN.left - MARGIN.right}" height="${H - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#333333"/>`);
  for (const s of series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      const y = s.y[i];
      if (opts.logY && !(y > 0)) continue;
      pts.push(`${fmt(px(s.x[i]))},${fmt(py(y))}`);
    }
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="${s.width ?? 1.5}"${dash}/>`);
  }
  // Legend, top-right inside the frame.
  series.forEach((s, i) => {
    const y = MARGIN.top + 14 + i * 15;
    const x = W - MARGIN.right - 120;
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    parts.push(`<line x1="${x}" y1="${y - 4}" x2="${x + 22}" y2="${y - 4}" stroke="${s.color}" stroke-width="2"${dash}/>`);
    parts.push(`<text x="${x + 27}" y="${y}" font-size="11" fill="#333333">${esc(s.label)}</text>`);
  });
  parts.push(`<text x="${(MARGIN.left + W - MARGIN.right) / 2}" y="${MARGIN.top - 10}" font-size="13" text-anchor="middle" fill="#111111">${esc(opts.title)}</text>`);
  parts.push(`<text x="${(MARGIN.left + W - MARGIN.right) / 2}" y="${H - 8}" font-size="12" text-anchor="middle" fill="#333333">${esc(opts.xLabel)}</text>`);
  parts.push(`<text x="14" y="${(MARGIN.top + H - MARGIN.bottom) / 2}" font-size="12" text-anchor="middle" fill="#333333" transform="rotate(-90 14 ${(MARGIN.top + H - MARGIN.bottom) / 2})">${esc(opts.yLabel)}</text>`);
  return parts.join("\n");
}

export function barPanel(groups: BarGroup[], seriesLabels: string[], colors: string[], opts: PanelOpts): string {
  const values = groups.flatMap((g) => g.values);
  const errs = groups.flatMap((g) => g.errors ?? g.values.map(() => 0));
  let yHi = opts.yMax ?? Math.max(...values.map((v, i) => v + errs[i]), 0) * 1.1;
  if (!(yHi > 0)) yHi = 1;
  const yLo = 0;
  const py = (y: number) => H - MARGIN.bottom - ((y - yLo) / (yHi - yLo)) * (H - MARGIN.top - MARGIN.bottom);
  const plotW = W - MARGIN.left - MARGIN.right;
  const groupW = plotW / groups.length;
  const barW = (groupW * 0.72) / seriesLabels.length;

  const parts: string[] = [];
  parts.push(`<rect x="0" y="0" width="${W}" height="${H}" fill="white"/>`);
  for (const t of niceTicks(yLo, yHi)) {
    const y = py(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${W - MARGIN.right}" y2="${fmt(y)}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${fmt(y + 4)}" font-size="11" text-anchor="end" fill="#333333">${fmt(t)}</text>`);
  }
  groups.forEach((g, gi) => {
    const x0 = MARGIN.left + gi * groupW + groupW * 0.14;
    g.values.forEach((v, si) => {
      const x = x0 + si * barW;
      const y = py(v);
      parts.push(`<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(barW * 0.92)}" height="${fmt(H - MARGIN.bottom - y)}" fill="${colors[si]}"/>`);
      const err = g.errors?.[si] ?? 0;
      if (err > 0) {
        const cx = x + barW * 0.46;
        parts.push(`<line x1="${fmt(cx)}" y1="${fmt(py(v - err))}" x2="${fmt(cx)}" y2="${fmt(py(v + err))}" stroke="#222222" stroke-width="1.2"/>`);
        parts.push(`<line x1="${fmt(cx - 3)}" y1="${fmt(py(v + err))}" x2="${fmt(cx + 3)}" y2="${fmt(py(v + err))}" stroke="#222222" stroke-width="1.2"/>`);
        parts.push(`<line x1="${fmt(cx - 3)}" y1="${fmt(py(v - err))}" x2="${fmt(cx + 3)}" y2="${fmt(py(v - err))}" stroke="#222222" stroke-width="1.2"/>`);
      }
    });
    parts.push(`<text x="${fmt(MARGIN.left + gi * groupW + groupW / 2)}" y="${H - MARGIN.bottom + 17}" font-size="11" text-anchor="middle" fill="#333333">${esc(g.label)}</text>`);
  });
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${H - MARGIN.top - MARGIN.bottom}" fill="none" stroke="#333333"/>`);
  seriesLabels.forEach((label, i) => {
    const y = MARGIN.top + 14 + i * 15;
    const x = W - MARGIN.right - 110;
    parts.push(`<rect x="${x}" y="${y - 9}" width="11" height="11" fill="${colors[i]}"/>`);
    parts.push(`<text x="${x + 16}" y="${y}" font-size="11" fill="#333333">${esc(label)}</text>`);
  });
  parts.push(`<text x="${(MARGIN.left + W - MARGIN.right) / 2}" y="${MARGIN.top - 10}" font-size="13" text-anchor="middle" fill="#111111">${esc(opts.title)}</text>`);
  parts.push(`<text x="${(MARGIN.left + W - MARGIN.right) / 2}" y="${H - 8}" font-size="12" text-anchor="middle" fill="#333333">${esc(opts.xLabel)}</text>`);
  parts.push(`<text x="14" y="${(MARGIN.top + H - MARGIN.bottom) / 2}" font-size="12" text-anchor="middle" fill="#333333" transform="rotate(-90 14 ${(MARGIN.top + H - MARGIN.bottom) / 2})">${esc(opts.yLabel)}</text>`);
  return parts.join("\n");
}

export function compose(panels: string[], cols: number): string {
  const rows = Math.ceil(panels.length / cols);
  const body = panels
    .map((p, i) => {
      const x = (i % cols) * W;
      const y = Math.floor(i / cols) * H;
      return `<g transform="translate(${x} ${y})">\n${p}\n</g>`;
    })
    .join("\n");
  const width = cols * W;
  const height = rows * H;
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">\n${body}\n</svg>\n`;
}

export const PANEL_WIDTH = W;
export const PANEL_HEIGHT = H;
