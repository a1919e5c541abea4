/**
 * Figure recipes over the analysis CLI's CSV outputs.
 *
 * Each recipe maps CSV columns to plot series and carries the axis scales;
 * rendering does no arithmetic on the data beyond dropping NA cells and,
 * on log axes, nonpositive rates. Output is a standalone SVG string
 * (echarts in server-side rendering mode), deterministic for a given
 * (CSV, recipe) pair.
 */
import * as echarts from "echarts";

import { CsvError, Table, cleanSeries, numberColumn, parseCsv } from "./csv.js";

export interface SeriesSpec {
  column: string;
  name: string;
}

/** Key rate against the swept variable, one curve per receiver config, log-y. */
export interface RateCurvesRecipe {
  kind: "rate-curves";
  title: string;
  xColumn: string;
  xLabel: string;
  series: SeriesSpec[];
}

/** Key rate against amplifier inherent noise with a no-amplifier reference line. */
export interface NoiseCutRecipe {
  kind: "noise-cut";
  title: string;
  xColumn: string;
  xLabel: string;
  amplified: SeriesSpec;
  reference: SeriesSpec;
}

/** Tolerable noise over the (gain, distance) grid as a heatmap. */
export interface NoiseSurfaceRecipe {
  kind: "noise-surface";
  title: string;
}

export type FigureRecipe = RateCurvesRecipe | NoiseCutRecipe | NoiseSurfaceRecipe;

const KM = "distance (km)";
const RATE = "secret key rate (bits/pulse)";

function rateCurves(title: string, series: SeriesSpec[]): RateCurvesRecipe {
  return { kind: "rate-curves", title, xColumn: "distance_km", xLabel: KM, series };
}

const HOMODYNE_SERIES: SeriesSpec[] = [
  { column: "noamp.K", name: "no amplifier (g=1)" },
  { column: "psa_g2.K", name: "PSA g=2" },
  { column: "psa_g15.K", name: "PSA g=15" },
  { column: "perfect.K", name: "perfect detector" },
];

const HETERODYNE_SERIES: SeriesSpec[] = [
  { column: "noamp.K", name: "no amplifier (g=1)" },
  { column: "pia_g2_n1.K", name: "PIA g=2, N=1" },
  { column: "pia_g2_n1p5.K", name: "PIA g=2, N=1.5" },
  { column: "pia_g15_n1.K", name: "PIA g=15, N=1" },
  { column: "pia_g15_n1p5.K", name: "PIA g=15, N=1.5" },
  { column: "perfect.K", name: "perfect detector" },
];

export const RECIPES: Record<string, FigureRecipe> = {
  fig6a: rateCurves("Homodyne with PSA, excess noise 0.005", HOMODYNE_SERIES),
  fig6b: rateCurves("Homodyne with PSA, excess noise 0.02", HOMODYNE_SERIES),
  fig6c: rateCurves("Homodyne with PSA, excess noise 0.2", HOMODYNE_SERIES),
  fig7a: rateCurves("Heterodyne with PIA, excess noise 0.005", HETERODYNE_SERIES),
  fig7b: rateCurves("Heterodyne with PIA, excess noise 0.02", HETERODYNE_SERIES),
  fig7c: rateCurves("Heterodyne with PIA, excess noise 0.2", HETERODYNE_SERIES),
  fig8a: {
    kind: "noise-cut",
    title: "Key rate against PIA inherent noise (g=15, d=60 km)",
    xColumn: "inherent_noise",
    xLabel: "inherent noise N",
    amplified: { column: "pia_g15.K", name: "PIA g=15" },
    reference: { column: "noamp.K", name: "no amplifier (reference)" },
  },
  fig8b: {
    kind: "noise-surface",
    title: "Tolerable PIA noise over gain and distance",
  },
};

export const FIGURE_IDS = Object.keys(RECIPES);

const WIDTH = 800;
const HEIGHT = 560;

const BASE_OPTION = {
  animation: false,
  backgroundColor: "#ffffff",
  textStyle: { fontFamily: "sans-serif" },
};

function grabSeries(
  table: Table,
  xColumn: string,
  spec: SeriesSpec,
  positiveOnly: boolean,
): Array<[number, number]> {
  const xs = numberColumn(table, xColumn);
  const ys = numberColumn(table, spec.column);
  const points = cleanSeries(xs, ys, positiveOnly);
  if (points.length === 0) {
    throw new CsvError(`series "${spec.name}" (${spec.column}) has no drawable points`);
  }
  return points;
}

function rateCurvesOption(recipe: RateCurvesRecipe, table: Table): echarts.EChartsOption {
  const series = recipe.series.map((spec) => ({
    type: "line" as const,
    name: spec.name,
    showSymbol: false,
    // log-scale curve: nonpositive rates fall off the plot by contract
    data: grabSeries(table, recipe.xColumn, spec, true),
  }));
  return {
    ...BASE_OPTION,
    title: { text: recipe.title, left: "center" },
    legend: { bottom: 0, data: recipe.series.map((s) => s.name) },
    grid: { left: 70, right: 30, top: 50, bottom: 80 },
    xAxis: { type: "value", name: recipe.xLabel, nameLocation: "middle", nameGap: 28 },
    yAxis: { type: "log", name: RATE, nameLocation: "middle", nameGap: 52 },
    series,
  };
}

function noiseCutOption(recipe: NoiseCutRecipe, table: Table): echarts.EChartsOption {
  const amplified = grabSeries(table, recipe.xColumn, recipe.amplified, false);
  const reference = grabSeries(table, recipe.xColumn, recipe.reference, false);
  return {
    ...BASE_OPTION,
    title: { text: recipe.title, left: "center" },
    legend: { bottom: 0, data: [recipe.amplified.name, recipe.reference.name] },
    grid: { left: 70, right: 30, top: 50, bottom: 80 },
    xAxis: {
      type: "value",
      name: recipe.xLabel,
      nameLocation: "middle",
      nameGap: 28,
      min: "dataMin",
      max: "dataMax",
    },
    yAxis: { type: "value", name: RATE, nameLocation: "middle", nameGap: 52 },
    series: [
      {
        type: "line",
        name: recipe.amplified.name,
        showSymbol: false,
        data: amplified,
      },
      {
        // horizontal line at the bare-receiver rate; the data is constant
        // across the sweep, so drawing it point for point gives the line
        type: "line",
        name: recipe.reference.name,
        showSymbol: false,
        lineStyle: { type: "dashed" },
        data: reference,
      },
    ],
  };
}

/** Distinct values in first-appearance order (the CSV is written in grid order). */
function categories(values: Array<number | null>): number[] {
  const seen: number[] = [];
  for (const v of values) {
    if (v !== null && !seen.includes(v)) seen.push(v);
  }
  return seen;
}

function noiseSurfaceOption(recipe: NoiseSurfaceRecipe, table: Table): echarts.EChartsOption {
  const gains = numberColumn(table, "gain");
  const distances = numberColumn(table, "distance_km");
  const tolerable = numberColumn(table, "n_tol");
  const gainTicks = categories(gains);
  const distanceTicks = categories(distances);

  const cells: Array<[number, number, number]> = [];
  for (let i = 0; i < tolerable.length; i++) {
    const g = gains[i];
    const d = distances[i];
    const n = tolerable[i];
    if (g === null || d === null || n === null) continue;
    cells.push([gainTicks.indexOf(g), distanceTicks.indexOf(d), n]);
  }
  if (cells.length === 0) {
    throw new CsvError("no data: every n_tol cell in the CSV is NA");
  }
  const nMax = Math.max(...cells.map((c) => c[2]));

  // plateau edge: for each gain, the last distance whose cell still sits
  // within 1e-3 of that gain's plateau value (the shortest-distance cell)
  const edge: Array<[number, number]> = [];
  for (let gi = 0; gi < gainTicks.length; gi++) {
    const column = cells.filter((c) => c[0] === gi).sort((a, b) => a[1] - b[1]);
    if (column.length === 0) continue;
    const plateau = column[0][2];
    let last = column[0][1];
    for (const [, di, n] of column) {
      if (n >= plateau - 1e-3) last = di;
    }
    edge.push([gi, last]);
  }

  return {
    ...BASE_OPTION,
    title: { text: recipe.title, left: "center" },
    legend: { bottom: 0, data: ["plateau edge"] },
    grid: { left: 70, right: 90, top: 50, bottom: 80 },
    xAxis: {
      type: "category",
      name: "gain",
      nameLocation: "middle",
      nameGap: 28,
      data: gainTicks.map(String),
    },
    yAxis: {
      type: "category",
      name: KM,
      nameLocation: "middle",
      nameGap: 45,
      data: distanceTicks.map(String),
    },
    visualMap: {
      min: 1,
      max: nMax,
      seriesIndex: 0,
      orient: "vertical",
      right: 0,
      top: "middle",
      text: ["N_tol", ""],
    },
    series: [
      { type: "heatmap", name: "tolerable noise", data: cells },
      {
        type: "line",
        name: "plateau edge",
        data: edge,
        showSymbol: true,
        symbolSize: 6,
        lineStyle: { type: "dashed", color: "#222" },
        itemStyle: { color: "#222" },
      },
    ],
  };
}

export function buildOption(recipe: FigureRecipe, table: Table): echarts.EChartsOption {
  switch (recipe.kind) {
    case "rate-curves":
      return rateCurvesOption(recipe, table);
    case "noise-cut":
      return noiseCutOption(recipe, table);
    case "noise-surface":
      return noiseSurfaceOption(recipe, table);
  }
}

/** Render one figure id from CSV text to a standalone SVG string. */
export function renderFigure(figureId: string, csvText: string): string {
  const recipe = RECIPES[figureId];
  if (!recipe) {
    throw new CsvError(`unknown figure id ${figureId}; known: ${FIGURE_IDS.join(", ")}`);
  }
  const option = buildOption(recipe, parseCsv(csvText));
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: WIDTH,
    height: HEIGHT,
  });
  try {
    chart.setOption(option);
    return canonicalizeSvg(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/**
 * The renderer allocates class and clip-path names from process-wide
 * counters, so the same drawing gets different names depending on what
 * rendered before it. Renumber them in order of first appearance so the
 * bytes depend only on (CSV, recipe).
 */
function canonicalizeSvg(svg: string): string {
  const renumber = (text: string, family: RegExp, prefix: string): string => {
    const seen = new Map<string, string>();
    return text.replace(family, (token) => {
      let mapped = seen.get(token);
      if (mapped === undefined) {
        mapped = `${prefix}${seen.size}`;
        seen.set(token, mapped);
      }
      return mapped;
    });
  };
  let out = renumber(svg, /zr\d+-cls-\d+/g, "zr0-cls-");
  out = renumber(out, /zr\d+-c\d+/g, "zr0-c");
  return out;
}
