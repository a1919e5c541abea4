/**
 * Render one figure from a CSV produced by the analysis CLI.
 *
 *   node dist/cli.js --csv sweep.csv --figure fig6b --out fig6b.svg
 */
import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { CsvError } from "./csv.js";
import { FIGURE_IDS, renderFigure } from "./figures.js";

export function runCli(argv: string[]): number {
  let csv: string | undefined;
  let figure: string | undefined;
  let out: string | undefined;
  try {
    const { values } = parseArgs({
      args: argv,
      options: {
        csv: { type: "string" },
        figure: { type: "string" },
        out: { type: "string" },
      },
    });
    csv = values.csv;
    figure = values.figure;
    out = values.out;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  if (!csv || !figure || !out) {
    console.error(`usage: cli --csv PATH --figure {${FIGURE_IDS.join("|")}} --out PATH.svg`);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(csv, "utf8");
  } catch (err) {
    console.error(`error: cannot read ${csv}: ${(err as NodeJS.ErrnoException).code}`);
    return 1;
  }
  try {
    const svg = renderFigure(figure, text);
    writeFileSync(out, svg);
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.log(`wrote ${figure} to ${out}`);
  return 0;
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? "").href) {
  process.exit(runCli(process.argv.slice(2)));
}
