/**
 * Strict reader for the analysis CLI's CSV output.
 *
 * The format is deliberately narrow: comma-separated, first line is the
 * header, no quoting, "NA" marks an absent value, everything else must be
 * a finite number. Anything off-contract is an error, never a guess.
 */

export class CsvError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n");
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) throw new CsvError("no data: the CSV is empty");
  const header = lines[0].split(",");
  if (lines.length === 1) {
    throw new CsvError("no data: the CSV has a header but no rows");
  }
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new CsvError(
        `row ${i + 2} has ${cells.length} cells but the header has ${header.length}`,
      );
    }
    return cells;
  });
  return { header, rows };
}

/** Column values in row order; "NA" becomes null, anything non-numeric throws. */
export function numberColumn(table: Table, name: string): Array<number | null> {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(`missing column ${name}; the CSV has: ${table.header.join(", ")}`);
  }
  return table.rows.map((row, i) => {
    const cell = row[idx];
    if (cell === "NA") return null;
    const value = Number(cell);
    if (cell.trim() === "" || !Number.isFinite(value)) {
      throw new CsvError(`row ${i + 2}, column ${name}: cannot read ${JSON.stringify(cell)} as a number`);
    }
    return value;
  });
}

/** Pair x with y, dropping rows where either is null (or, optionally, y <= 0). */
export function cleanSeries(
  xs: Array<number | null>,
  ys: Array<number | null>,
  positiveOnly = false,
): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i < ys.length; i++) {
    const x = xs[i];
    const y = ys[i];
    if (x === null || y === null) continue;
    if (positiveOnly && y <= 0) continue;
    out.push([x, y]);
  }
  return out;
}
