/**
 * Figure renderers. Each returns file name -> SVG text for one run
 * directory; rendering is pure, so output bytes are stable across calls.
 *
 * snapshots    rod outlines at six instants per dumped iteration, earlier
 *              instants in fade-in purple, the final instant in green, the
 *              target as an orange marker
 * controls     spatial profiles of the final control: early window in
 *              orange, late window in blue, transparency ordered by time
 * wave-compare late-window couple profiles (green fade); with chi1_* /
 *              E*_rho* subdirectories one panel per run
 * convergence  cost versus iteration
 */

import { existsSync, readdirSync } from "node:fs";
import { join } from "node:path";

import {
  loadConfig,
  loadControl,
  loadLog,
  loadSnapshots,
  RunData,
} from "./data.js";
import {
  axes,
  circle,
  document,
  linearScale,
  polyline,
  text,
  HEIGHT,
  WIDTH,
} from "./svg.js";

export type FigureKind = "snapshots" | "controls" | "wave-compare" | "convergence";

const PURPLE = "#7b2d8b";
const GREEN = "#1a7f3c";
const ORANGE = "#e08214";
const BLUE = "#2166ac";

export function render(dir: string, kind: FigureKind): Map<string, string> {
  switch (kind) {
    case "snapshots":
      return renderSnapshots(loadConfig(dir));
    case "controls":
      return renderControls(loadConfig(dir));
    case "wave-compare":
      return renderWaveCompare(dir);
    case "convergence":
      return renderConvergence(loadConfig(dir));
  }
}

function renderSnapshots(run: RunData): Map<string, string> {
  const snaps = loadSnapshots(run.dir);
  const [tx, ty] = run.config.target;
  const L = run.config.L0;
  const xDom: [number, number] = [Math.min(-0.1 * L, tx - 0.2 * L), Math.max(1.05 * L, tx + 0.2 * L)];
  const yDom: [number, number] = [Math.min(-0.6 * L, ty - 0.2 * L), Math.max(0.9 * L, ty + 0.2 * L)];
  const scale = linearScale(xDom, yDom);
  const out = new Map<string, string>();
  const iters = [...snaps.byIteration.keys()].sort((a, b) => a - b);
  for (const it of iters) {
    const frames = snaps.byIteration.get(it)!;
    const parts: string[] = [];
    parts.push(axes(scale, xDom, yDom, "x [m]", "y [m]"));
    frames.forEach((f, i) => {
      const last = i === frames.length - 1;
      const fade = 0.25 + 0.75 * (i / Math.max(1, frames.length - 1));
      const pts = f.xs.map((x, j) => [x, f.ys[j]] as [number, number]);
      parts.push(polyline(pts, scale, last ? GREEN : PURPLE,
        last ? 1.0 : fade, last ? 2.5 : 1.5));
    });
    parts.push(circle(tx, ty, scale, 6, ORANGE));
    parts.push(text(WIDTH - 20, 36, `iter ${it}`, "end"));
    out.set(
      `snapshots_iter${String(it).padStart(3, "0")}.svg`,
      document(parts.join("\n"), `rod snapshots, iteration ${it}`, run.configHash),
    );
  }
  return out;
}

function profilePanel(
  times: number[],
  profiles: number[][],
  L: number,
  T: number,
  label: string,
  run: RunData,
): string {
  let lo = Infinity;
  let hi = -Infinity;
  for (const p of profiles) {
    for (const v of p) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!(lo < hi)) {
    lo = -1;
    hi = 1;
  }
  const xDom: [number, number] = [0, L];
  const yDom: [number, number] = [lo, hi];
  const scale = linearScale(xDom, yDom);
  const parts: string[] = [axes(scale, xDom, yDom, "s [m]", label)];
  const split = 0.8 * T;
  const early = times.filter((t) => t < split);
  const late = times.filter((t) => t >= split);
  times.forEach((t, i) => {
    const prof = profiles[i];
    const n = prof.length;
    const pts = prof.map(
      (v, j) => [((j + 0.5) / n) * L, v] as [number, number],
    );
    const isLate = t >= split;
    const group = isLate ? late : early;
    const rank = group.indexOf(t);
    const fade = 0.15 + 0.85 * (rank / Math.max(1, group.length - 1));
    parts.push(polyline(pts, scale, isLate ? BLUE : ORANGE, fade, 1.2));
  });
  return document(parts.join("\n"), label, run.configHash);
}

function renderControls(run: RunData): Map<string, string> {
  const ctl = loadControl(run.dir);
  const out = new Map<string, string>();
  const L = run.config.L0;
  const T = run.config.T;
  out.set("control_uC.svg",
    profilePanel(ctl.times, ctl.uC, L, T, "couple control uC [N m]", run));
  out.set("control_uFx.svg",
    profilePanel(ctl.times, ctl.uFx, L, T, "force control uF_x [N]", run));
  out.set("control_uFy.svg",
    profilePanel(ctl.times, ctl.uFy, L, T, "force control uF_y [N]", run));
  return out;
}

function lateWindowPanel(run: RunData, title: string): string {
  const ctl = loadControl(run.dir, 200);
  const T = run.config.T;
  const L = run.config.L0;
  const idx = ctl.times
    .map((t, i) => [t, i] as [number, number])
    .filter(([t]) => t >= 0.9 * T);
  const sel = idx.filter((_, j) => j % Math.max(1, Math.floor(idx.length / 16)) === 0).slice(0, 16);
  let hi = 0;
  for (const [, i] of sel) {
    for (const v of ctl.uC[i]) hi = Math.max(hi, Math.abs(v));
  }
  if (hi === 0) hi = 1;
  const xDom: [number, number] = [0, L];
  const yDom: [number, number] = [-hi, hi];
  const scale = linearScale(xDom, yDom);
  const parts: string[] = [axes(scale, xDom, yDom, "s [m]", "uC [N m]")];
  sel.forEach(([, i], rank) => {
    const prof = ctl.uC[i];
    const n = prof.length;
    const pts = prof.map((v, j) => [((j + 0.5) / n) * L, v] as [number, number]);
    // most solid first, most transparent last in time
    const fade = 1.0 - 0.85 * (rank / Math.max(1, sel.length - 1));
    parts.push(polyline(pts, scale, GREEN, fade, 1.4));
  });
  return document(parts.join("\n"), title, run.configHash);
}

function renderWaveCompare(dir: string): Map<string, string> {
  const out = new Map<string, string>();
  const subdirs = existsSync(dir)
    ? readdirSync(dir, { withFileTypes: true })
        .filter((e) => e.isDirectory() && existsSync(join(dir, e.name, "config.json")))
        .map((e) => e.name)
        .sort()
    : [];
  if (subdirs.length > 0) {
    for (const name of subdirs) {
      const run = loadConfig(join(dir, name));
      out.set(`wave_${name}.svg`,
        lateWindowPanel(run, `late-window couple control (${name})`));
    }
  } else {
    const run = loadConfig(dir);
    out.set("wave_compare.svg",
      lateWindowPanel(run, "late-window couple control"));
  }
  return out;
}

function renderConvergence(run: RunData): Map<string, string> {
  const log = loadLog(run.dir);
  const xDom: [number, number] = [log.k[0], log.k[log.k.length - 1]];
  const lo = Math.min(...log.J);
  const hi = Math.max(...log.J);
  const yDom: [number, number] = [Math.min(0, lo), hi];
  const scale = linearScale(xDom, yDom);
  const parts: string[] = [axes(scale, xDom, yDom, "iteration k", "cost J")];
  parts.push(polyline(log.k.map((k, i) => [k, log.J[i]]), scale, BLUE, 1.0, 2.0));
  for (let i = 0; i < log.k.length; i++) {
    parts.push(circle(log.k[i], log.J[i], scale, 3, BLUE));
  }
  const out = new Map<string, string>();
  out.set("convergence.svg",
    document(parts.join("\n"), `cost per iteration (${run.config.case_})`,
      run.configHash));
  return out;
}
