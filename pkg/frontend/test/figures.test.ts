/**
 * End-to-end figure checks. The fixture CSVs are generated once per run by
 * invoking the analysis CLI (python3 -m twoway_cvqkd), which must be
 * installed; the figures consume nothing but those CSVs.
 */
import { execFileSync, spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it } from "vitest";

import { CsvError, numberColumn, parseCsv } from "../src/csv.js";
import { FIGURE_IDS, renderFigure } from "../src/figures.js";

const FRONTEND_ROOT = join(dirname(fileURLToPath(import.meta.url)), "..");
const FIXTURES = mkdtempSync(join(tmpdir(), "cvqkd-figures-"));
const SLACK = 1e-12;

function analysisCli(args: string[]): void {
  execFileSync("python3", ["-m", "twoway_cvqkd", ...args], {
    stdio: ["ignore", "pipe", "pipe"],
  });
}

function sweep(out: string, sets: string[]): void {
  analysisCli(["sweep", "--out", out, ...sets.flatMap((s) => ["--set", s])]);
}

const csvPath: Record<string, string> = {
  fig6a: join(FIXTURES, "hom_eps0p005.csv"),
  fig6b: join(FIXTURES, "hom_eps0p02.csv"),
  fig6c: join(FIXTURES, "hom_eps0p2.csv"),
  fig7a: join(FIXTURES, "het_eps0p005.csv"),
  fig7b: join(FIXTURES, "het_eps0p02.csv"),
  fig7c: join(FIXTURES, "het_eps0p2.csv"),
  fig8a: join(FIXTURES, "noise_cut.csv"),
  fig8b: join(FIXTURES, "noise_surface.csv"),
};

function csvText(figureId: string): string {
  return readFileSync(csvPath[figureId], "utf8");
}

beforeAll(() => {
  const homEps = { fig6a: "0.005", fig6b: "0.02", fig6c: "0.2" } as const;
  for (const [id, eps] of Object.entries(homEps)) {
    sweep(csvPath[id], [`channel.excess_noise=${eps}`]);
  }
  const hetEps = { fig7a: "0.005", fig7b: "0.02", fig7c: "0.2" } as const;
  for (const [id, eps] of Object.entries(hetEps)) {
    sweep(csvPath[id], ["detector.kind=heterodyne", `channel.excess_noise=${eps}`]);
  }
  // rate against amplifier noise at the headline operating point
  sweep(csvPath.fig8a, [
    "detector.kind=heterodyne",
    "channel.distance_km=60",
    "reconciliation.beta=0.95",
    "sweep.variable=inherent_noise",
    "sweep.start=1",
    "sweep.stop=4",
    "sweep.step=0.05",
    "configs.noamp=none",
    "configs.pia_g15=pia g=15",
  ]);
  // a small (gain, distance) grid reaching past the amplified range so the
  // CSV carries NA cells
  analysisCli([
    "surface",
    "--out",
    csvPath.fig8b,
    "--set", "detector.kind=heterodyne",
    "--set", "amplifier.kind=pia",
    "--set", "reconciliation.beta=0.95",
    "--set", "surface.gain_start=5",
    "--set", "surface.gain_stop=15",
    "--set", "surface.gain_step=5",
    "--set", "surface.distance_start=50",
    "--set", "surface.distance_stop=74",
    "--set", "surface.distance_step=3",
  ]);
});

describe("rendering", () => {
  it.each(FIGURE_IDS)("%s renders a nonempty SVG naming its series", (id) => {
    const svg = renderFigure(id, csvText(id));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.length).toBeGreaterThan(2000);
    if (id.startsWith("fig6")) {
      for (const name of ["no amplifier (g=1)", "PSA g=2", "PSA g=15", "perfect detector"]) {
        expect(svg).toContain(name);
      }
    }
    if (id.startsWith("fig7")) {
      for (const name of ["PIA g=2, N=1", "PIA g=15, N=1.5", "perfect detector"]) {
        expect(svg).toContain(name);
      }
    }
    if (id === "fig8a") {
      expect(svg).toContain("PIA g=15");
      expect(svg).toContain("no amplifier (reference)");
    }
    if (id === "fig8b") {
      expect(svg).toContain("plateau edge");
      expect(svg).toContain("N_tol");
    }
  });

  it("is deterministic for a fixed CSV", () => {
    const first = renderFigure("fig6b", csvText("fig6b"));
    const second = renderFigure("fig6b", csvText("fig6b"));
    expect(second).toBe(first);
  });
});

describe("reference-line crossing", () => {
  it("the amplified curve crosses the bare-receiver rate inside [2.6, 2.76]", () => {
    const table = parseCsv(csvText("fig8a"));
    const noise = numberColumn(table, "inherent_noise");
    const amplified = numberColumn(table, "pia_g15.K");
    const bare = numberColumn(table, "noamp.K");

    // the bare receiver does not feel the swept amplifier noise, so its
    // column is the horizontal reference line
    for (const value of bare) expect(value).toBe(bare[0]);
    const reference = bare[0];
    expect(reference).not.toBeNull();
    expect(reference!).toBeGreaterThan(0);

    let crossing: number | null = null;
    for (let i = 0; i + 1 < noise.length; i++) {
      const hi = amplified[i];
      const lo = amplified[i + 1];
      if (hi === null || lo === null) continue;
      if (hi >= reference! && lo < reference!) {
        const t = (hi - reference!) / (hi - lo);
        crossing = noise[i]! + t * (noise[i + 1]! - noise[i]!);
        break;
      }
    }
    expect(crossing).not.toBeNull();
    expect(crossing!).toBeGreaterThanOrEqual(2.6);
    expect(crossing!).toBeLessThanOrEqual(2.76);
  });
});

describe("series orderings", () => {
  it("homodyne: larger gain never hurts, perfect detection tops, at every noise level", () => {
    for (const id of ["fig6a", "fig6b", "fig6c"] as const) {
      const table = parseCsv(csvText(id));
      const bare = numberColumn(table, "noamp.K");
      const g2 = numberColumn(table, "psa_g2.K");
      const g15 = numberColumn(table, "psa_g15.K");
      const perfect = numberColumn(table, "perfect.K");
      let checked = 0;
      for (let i = 0; i < bare.length; i++) {
        const values = [bare[i], g2[i], g15[i], perfect[i]];
        if (values.some((v) => v === null || v <= 0)) continue;
        expect(perfect[i]!).toBeGreaterThanOrEqual(g15[i]! - SLACK);
        expect(g15[i]!).toBeGreaterThanOrEqual(g2[i]! - SLACK);
        expect(g2[i]!).toBeGreaterThanOrEqual(bare[i]! - SLACK);
        checked++;
      }
      expect(checked).toBeGreaterThan(0);
    }
  });

  it("heterodyne: quieter amplifier wins, amplifier beats bare where bare still works", () => {
    const table = parseCsv(csvText("fig7b"));
    const bare = numberColumn(table, "noamp.K");
    const g2n1 = numberColumn(table, "pia_g2_n1.K");
    const g15n1 = numberColumn(table, "pia_g15_n1.K");
    const g15n1p5 = numberColumn(table, "pia_g15_n1p5.K");
    let noiseChecked = 0;
    let gainChecked = 0;
    for (let i = 0; i < bare.length; i++) {
      const clean = g15n1[i];
      const noisy = g15n1p5[i];
      if (clean !== null && noisy !== null && (clean > 0 || noisy > 0)) {
        expect(clean).toBeGreaterThanOrEqual(noisy - SLACK);
        noiseChecked++;
      }
      if (bare[i] !== null && g2n1[i] !== null && bare[i]! > 0) {
        expect(g2n1[i]!).toBeGreaterThanOrEqual(bare[i]! - SLACK);
        gainChecked++;
      }
    }
    expect(noiseChecked).toBeGreaterThan(0);
    expect(gainChecked).toBeGreaterThan(0);
  });
});

describe("failure modes", () => {
  it("names a missing column when the CSV is for the other receiver", () => {
    expect(() => renderFigure("fig6a", csvText("fig7a"))).toThrow(CsvError);
    expect(() => renderFigure("fig6a", csvText("fig7a"))).toThrow(/missing column psa_g2\.K/);
  });

  it("refuses an empty CSV", () => {
    expect(() => renderFigure("fig6a", "")).toThrow(/no data/);
    expect(() => renderFigure("fig8b", "gain,distance_km,n_tol\n")).toThrow(/no data/);
  });

  it("refuses a series with nothing left to draw on a log axis", () => {
    const text =
      "distance_km,noamp.K,psa_g2.K,psa_g15.K,perfect.K\n" +
      "1,0.5,-0.1,0.6,0.7\n" +
      "2,0.4,-0.2,0.5,0.6\n";
    expect(() => renderFigure("fig6a", text)).toThrow(/psa_g2.*no drawable points/);
  });

  it("refuses a surface whose cells are all NA", () => {
    const text = "gain,distance_km,n_tol\n5,50,NA\n5,53,NA\n";
    expect(() => renderFigure("fig8b", text)).toThrow(/every n_tol cell/);
  });

  it("rejects an unknown figure id", () => {
    expect(() => renderFigure("fig9z", "x\n1\n")).toThrow(/unknown figure id fig9z/);
  });
});

describe("command line script", () => {
  beforeAll(() => {
    execFileSync("npx", ["tsc", "-p", "."], { cwd: FRONTEND_ROOT });
  });

  it("renders a figure end to end", () => {
    const out = join(FIXTURES, "fig6b.svg");
    const stdout = execFileSync(
      "node",
      ["dist/cli.js", "--csv", csvPath.fig6b, "--figure", "fig6b", "--out", out],
      { cwd: FRONTEND_ROOT, encoding: "utf8" },
    );
    expect(stdout).toContain("wrote fig6b");
    expect(readFileSync(out, "utf8").startsWith("<svg")).toBe(true);
  });

  it("exits 1 with the column error and writes no image", () => {
    const out = join(FIXTURES, "mismatched.svg");
    const result = spawnSync(
      "node",
      ["dist/cli.js", "--csv", csvPath.fig7a, "--figure", "fig6a", "--out", out],
      { cwd: FRONTEND_ROOT, encoding: "utf8" },
    );
    expect(result.status).toBe(1);
    expect(result.stderr).toMatch(/missing column psa_g2\.K/);
    expect(existsSync(out)).toBe(false);
  });

  it("exits 2 on incomplete arguments", () => {
    const result = spawnSync("node", ["dist/cli.js", "--figure", "fig6a"], {
      cwd: FRONTEND_ROOT,
      encoding: "utf8",
    });
    expect(result.status).toBe(2);
    expect(result.stderr).toMatch(/usage:/);
  });
});
