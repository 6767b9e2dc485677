/** Typed loaders for the files an octoarm run directory contains. */

import { createHash } from "node:crypto";
import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";

import { numericColumns, readCsv, SchemaError, stringColumn } from "./csv.js";

export interface RunConfig {
  target: [number, number];
  L0: number;
  N: number;
  T: number;
  case_: string;
}

export interface RunData {
  dir: string;
  config: RunConfig;
  configHash: string;
}

export function loadConfig(dir: string): RunData {
  const path = join(dir, "config.json");
  if (!existsSync(path)) {
    throw new SchemaError(path, "file is missing");
  }
  const bytes = readFileSync(path);
  const raw = JSON.parse(bytes.toString("utf8"));
  for (const key of ["target", "L0", "N", "T", "case"]) {
    if (!(key in raw)) {
      throw new SchemaError(path, `missing key '${key}'`);
    }
  }
  const hash = createHash("sha256").update(bytes).digest("hex");
  return {
    dir,
    config: {
      target: [Number(raw.target[0]), Number(raw.target[1])],
      L0: Number(raw.L0),
      N: Number(raw.N),
      T: Number(raw.T),
      case_: String(raw.case),
    },
    configHash: hash,
  };
}

export interface SnapshotSet {
  /** iteration -> time -> node positions, times ascending */
  byIteration: Map<number, Array<{ t: number; xs: number[]; ys: number[] }>>;
}

export function loadSnapshots(dir: string): SnapshotSet {
  const path = join(dir, "snapshots.csv");
  const table = readCsv(path);
  const cols = numericColumns(path, table, ["iter", "t", "node", "x", "y"]);
  const iter = cols.get("iter")!;
  const t = cols.get("t")!;
  const node = cols.get("node")!;
  const x = cols.get("x")!;
  const y = cols.get("y")!;
  const byIteration = new Map<number, Map<number, { xs: number[]; ys: number[] }>>();
  for (let r = 0; r < iter.length; r++) {
    let times = byIteration.get(iter[r]);
    if (!times) {
      times = new Map();
      byIteration.set(iter[r], times);
    }
    let snap = times.get(t[r]);
    if (!snap) {
      snap = { xs: [], ys: [] };
      times.set(t[r], snap);
    }
    snap.xs[node[r]] = x[r];
    snap.ys[node[r]] = y[r];
  }
  const out = new Map<number, Array<{ t: number; xs: number[]; ys: number[] }>>();
  for (const [it, times] of byIteration) {
    const list = [...times.entries()]
      .sort((a, b) => a[0] - b[0])
      .map(([tt, v]) => ({ t: tt, xs: v.xs, ys: v.ys }));
    out.set(it, list);
  }
  return { byIteration: out };
}

export interface ControlProfiles {
  times: number[];
  /** per time: couple per element and force components per node */
  uC: number[][];
  uFx: number[][];
  uFy: number[][];
}

/**
 * Down-samples control_final.csv to at most `maxTimes` levels spread over
 * the horizon (the file holds every integrator step).
 */
export function loadControl(dir: string, maxTimes = 64): ControlProfiles {
  const path = join(dir, "control_final.csv");
  const table = readCsv(path);
  const cols = numericColumns(path, table, ["t", "index", "value"]);
  const kind = stringColumn(path, table, "kind");
  const t = cols.get("t")!;
  const index = cols.get("index")!;
  const value = cols.get("value")!;

  const timeSet: number[] = [];
  const seen = new Set<number>();
  for (const tt of t) {
    if (!seen.has(tt)) {
      seen.add(tt);
      timeSet.push(tt);
    }
  }
  timeSet.sort((a, b) => a - b);
  const stride = Math.max(1, Math.floor(timeSet.length / maxTimes));
  const kept = timeSet.filter((_, i) => i % stride === 0);
  const keep = new Set(kept);

  const uC = new Map<number, number[]>();
  const uFx = new Map<number, number[]>();
  const uFy = new Map<number, number[]>();
  for (const tt of kept) {
    uC.set(tt, []);
    uFx.set(tt, []);
    uFy.set(tt, []);
  }
  for (let r = 0; r < t.length; r++) {
    if (!keep.has(t[r])) continue;
    const k = kind[r];
    if (k === "C") uC.get(t[r])![index[r]] = value[r];
    else if (k === "Fx") uFx.get(t[r])![index[r]] = value[r];
    else if (k === "Fy") uFy.get(t[r])![index[r]] = value[r];
    else throw new SchemaError(path, `unknown kind '${k}' at row ${r + 2}`);
  }
  return {
    times: kept,
    uC: kept.map((tt) => uC.get(tt)!),
    uFx: kept.map((tt) => uFx.get(tt)!),
    uFy: kept.map((tt) => uFy.get(tt)!),
  };
}

export interface ConvergenceLog {
  k: number[];
  J: number[];
  tipDist: number[];
}

export function loadLog(dir: string): ConvergenceLog {
  const path = join(dir, "log.csv");
  const table = readCsv(path);
  const cols = numericColumns(path, table, ["k", "J", "tip_dist"]);
  return {
    k: cols.get("k")!,
    J: cols.get("J")!,
    tipDist: cols.get("tip_dist")!,
  };
}
