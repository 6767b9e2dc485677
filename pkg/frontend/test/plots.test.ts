import { mkdtempSync, readFileSync, writeFileSync, mkdirSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { SchemaError } from "../src/csv.js";
import { render } from "../src/plots.js";

let runDir: string;

function writeFixture(dir: string) {
  mkdirSync(dir, { recursive: true });
  writeFileSync(join(dir, "config.json"), JSON.stringify({
    case: "reach", L0: 0.2, N: 4, T: 0.01,
    target: [0.09, 0.09], dt: 1e-3,
  }));
  const snap: string[] = ["iter,t,node,x,y"];
  for (const it of [1, 2]) {
    for (let f = 0; f < 6; f++) {
      const t = (0.01 * f) / 5;
      for (let n = 0; n <= 4; n++) {
        snap.push(`${it},${t},${n},${0.05 * n},${0.001 * f * n * it}`);
      }
    }
  }
  writeFileSync(join(dir, "snapshots.csv"), snap.join("\n") + "\n");
  const theta: string[] = ["iter,t,element,theta"];
  for (const it of [1, 2]) {
    for (let f = 0; f < 6; f++) {
      for (let j = 0; j < 4; j++) {
        theta.push(`${it},${(0.01 * f) / 5},${j},${0.01 * f * it}`);
      }
    }
  }
  writeFileSync(join(dir, "theta.csv"), theta.join("\n") + "\n");
  const ctl: string[] = ["t,index,kind,value"];
  for (let k = 0; k < 10; k++) {
    const t = k * 1e-3;
    for (let n = 0; n <= 4; n++) {
      ctl.push(`${t},${n},Fx,${0.001 * k}`);
      ctl.push(`${t},${n},Fy,${-0.001 * k}`);
    }
    for (let j = 0; j < 4; j++) {
      ctl.push(`${t},${j},C,${0.0001 * (k - 5) * (j + 1)}`);
    }
  }
  writeFileSync(join(dir, "control_final.csv"), ctl.join("\n") + "\n");
  const log: string[] = ["k,J,J_running,J_terminal,du_max,tip_dist"];
  for (let k = 1; k <= 5; k++) {
    log.push(`${k},${200 / k},${0.01 * k},${200 / k - 0.01 * k},${0.01},${0.14 / k}`);
  }
  writeFileSync(join(dir, "log.csv"), log.join("\n") + "\n");
}

beforeAll(() => {
  runDir = mkdtempSync(join(tmpdir(), "octoarm-fixture-"));
  writeFixture(runDir);
});

describe("render", () => {
  it("produces all four figure kinds", () => {
    const kinds = ["snapshots", "controls", "wave-compare", "convergence"] as const;
    for (const kind of kinds) {
      const figures = render(runDir, kind);
      expect(figures.size).toBeGreaterThan(0);
      for (const [name, svg] of figures) {
        expect(name.endsWith(".svg")).toBe(true);
        expect(svg).toContain("<svg");
        expect(svg).toContain("config-sha256:");
      }
    }
  });

  it("is byte-idempotent", () => {
    for (const kind of ["snapshots", "controls", "wave-compare", "convergence"] as const) {
      const a = render(runDir, kind);
      const b = render(runDir, kind);
      expect([...a.keys()]).toEqual([...b.keys()]);
      for (const key of a.keys()) {
        expect(a.get(key)).toBe(b.get(key));
      }
    }
  });

  it("draws the target marker and per-iteration snapshot files", () => {
    const figures = render(runDir, "snapshots");
    expect([...figures.keys()]).toEqual([
      "snapshots_iter001.svg",
      "snapshots_iter002.svg",
    ]);
    for (const svg of figures.values()) {
      expect(svg).toContain('fill="#e08214"'); // target marker
      expect(svg).toContain('stroke="#1a7f3c"'); // final-instant outline
    }
  });

  it("embeds the config hash from the config bytes", () => {
    const figures = render(runDir, "convergence");
    const svg = figures.get("convergence.svg")!;
    const m = svg.match(/config-sha256:([0-9a-f]{64})/);
    expect(m).not.toBeNull();
  });

  it("names the file and column on schema errors", () => {
    const bad = mkdtempSync(join(tmpdir(), "octoarm-bad-"));
    writeFixture(bad);
    const log = readFileSync(join(bad, "log.csv"), "utf8")
      .replace("k,J,J_running", "k,cost,J_running");
    writeFileSync(join(bad, "log.csv"), log);
    try {
      render(bad, "convergence");
      expect.unreachable("should have thrown");
    } catch (e) {
      expect(e).toBeInstanceOf(SchemaError);
      expect(String(e)).toContain("log.csv");
      expect(String(e)).toContain("'J'");
    }
  });

  it("rejects missing run directories", () => {
    expect(() => render(join(runDir, "nope"), "convergence"))
      .toThrow(SchemaError);
  });

  it("renders one panel per subrun for wave-compare on sweep dirs", () => {
    const sweep = mkdtempSync(join(tmpdir(), "octoarm-sweep-"));
    writeFixture(join(sweep, "chi1_1"));
    writeFixture(join(sweep, "chi1_150"));
    const figures = render(sweep, "wave-compare");
    expect([...figures.keys()].sort()).toEqual([
      "wave_chi1_1.svg",
      "wave_chi1_150.svg",
    ]);
  });
});
