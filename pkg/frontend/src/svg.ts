/**
 * Deterministic SVG assembly: fixed-precision numbers, no timestamps, no
 * randomness, so repeated renders of the same inputs are byte-identical.
 */

export const WIDTH = 640;
export const HEIGHT = 480;
const MARGIN = { left: 56, right: 16, top: 36, bottom: 44 };

export function fmt(x: number): string {
  if (!Number.isFinite(x)) return "0";
  const s = x.toFixed(3);
  return s === "-0.000" ? "0.000" : s;
}

export interface Scale {
  x(v: number): number;
  y(v: number): number;
}

export function linearScale(
  xDomain: [number, number],
  yDomain: [number, number],
  width = WIDTH,
  height = HEIGHT,
): Scale {
  const xSpan = xDomain[1] - xDomain[0] || 1;
  const ySpan = yDomain[1] - yDomain[0] || 1;
  const innerW = width - MARGIN.left - MARGIN.right;
  const innerH = height - MARGIN.top - MARGIN.bottom;
  return {
    x: (v) => MARGIN.left + ((v - xDomain[0]) / xSpan) * innerW,
    y: (v) => height - MARGIN.bottom - ((v - yDomain[0]) / ySpan) * innerH,
  };
}

export function polyline(
  pts: Array<[number, number]>,
  scale: Scale,
  stroke: string,
  opacity: number,
  width = 1.5,
): string {
  const d = pts
    .map(([x, y]) => `${fmt(scale.x(x))},${fmt(scale.y(y))}`)
    .join(" ");
  return `<polyline points="${d}" fill="none" stroke="${stroke}" ` +
    `stroke-opacity="${fmt(opacity)}" stroke-width="${fmt(width)}"/>`;
}

export function circle(
  x: number,
  y: number,
  scale: Scale,
  r: number,
  fill: string,
): string {
  return `<circle cx="${fmt(scale.x(x))}" cy="${fmt(scale.y(y))}" ` +
    `r="${fmt(r)}" fill="${fill}"/>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  anchor = "middle",
  size = 12,
): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ` +
    `font-family="sans-serif" font-size="${size}">${escapeXml(content)}</text>`;
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const span = hi - lo || 1;
  const step = span / (n - 1);
  return Array.from({ length: n }, (_, i) => lo + i * step);
}

export function axes(
  scale: Scale,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
  height = HEIGHT,
): string {
  const parts: string[] = [];
  const x0 = scale.x(xDomain[0]);
  const x1 = scale.x(xDomain[1]);
  const y0 = scale.y(yDomain[0]);
  const y1 = scale.y(yDomain[1]);
  parts.push(
    `<line x1="${fmt(x0)}" y1="${fmt(y0)}" x2="${fmt(x1)}" y2="${fmt(y0)}" stroke="#333"/>`,
    `<line x1="${fmt(x0)}" y1="${fmt(y0)}" x2="${fmt(x0)}" y2="${fmt(y1)}" stroke="#333"/>`,
  );
  for (const t of ticks(xDomain[0], xDomain[1])) {
    parts.push(text(scale.x(t), y0 + 18, trimNum(t)));
  }
  for (const t of ticks(yDomain[0], yDomain[1])) {
    parts.push(text(x0 - 8, scale.y(t) + 4, trimNum(t), "end"));
  }
  parts.push(text((x0 + x1) / 2, height - 8, xLabel));
  parts.push(
    `<text x="14" y="${fmt((y0 + y1) / 2)}" text-anchor="middle" ` +
    `font-family="sans-serif" font-size="12" ` +
    `transform="rotate(-90 14 ${fmt((y0 + y1) / 2)})">${yLabel}</text>`,
  );
  return parts.join("\n");
}

function trimNum(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a < 1e-3 || a >= 1e4)) return v.toExponential(1);
  const s = v.toPrecision(3);
  return String(Number(s));
}

export function document(
  body: string,
  title: string,
  configHash: string,
  width = WIDTH,
  height = HEIGHT,
): string {
  return [
    `<?xml version="1.0" encoding="UTF-8"?>`,
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<metadata>config-sha256:${configHash}</metadata>`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    text(width / 2, 20, title, "middle", 14),
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
