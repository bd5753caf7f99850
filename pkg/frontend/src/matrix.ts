/** Editable 6x6 log-cost grid for the what-if explorer.
 *
 * Cells hold exponents (the only representation that crosses the wire);
 * the linear cost 10^x is derived for display. The diagonal is locked at
 * "no cost" and rendered as a dash.
 */

import type { MatrixResponse } from "./types.js";
import { MAX_EXPONENT } from "./severity.js";

export const CLASS_NAMES = [
  "drivable",
  "nondrivable",
  "static",
  "info",
  "human",
  "dynamic",
] as const;

const POW10_NAMES = ["1", "10", "100", "1k", "10k", "100k", "1M"] as const;

export function linearDisplay(exponent: number): string {
  if (Number.isInteger(exponent) && exponent >= 0 && exponent <= 6) {
    return POW10_NAMES[exponent]!;
  }
  return `10^${exponent}`;
}

export interface CellError {
  row: number;
  col: number;
  reason: string;
}

export class MatrixModel {
  /** exponents[row][col]; row = predicted class, col = true class. */
  readonly exponents: (number | null)[][];

  constructor(
    public readonly n: number = CLASS_NAMES.length,
    entries?: (number | null)[][],
  ) {
    this.exponents = [];
    for (let j = 0; j < n; j++) {
      const row: (number | null)[] = [];
      for (let k = 0; k < n; k++) {
        row.push(j === k ? null : (entries?.[j]?.[k] ?? 0));
      }
      this.exponents.push(row);
    }
  }

  static fromResponse(body: MatrixResponse): MatrixModel {
    return new MatrixModel(body.n_classes, body.entries);
  }

  /** Validate one edit; returns null and applies it, or the rejection. */
  setCell(row: number, col: number, value: number): CellError | null {
    if (row === col) {
      return { row, col, reason: "diagonal is fixed at no cost" };
    }
    if (!Number.isFinite(value)) {
      return { row, col, reason: "cost exponent must be a number" };
    }
    if (value < 0 || value > MAX_EXPONENT) {
      return {
        row,
        col,
        reason: `cost exponent must lie in 0..${MAX_EXPONENT}`,
      };
    }
    this.exponents[row]![col] = value;
    return null;
  }

  cell(row: number, col: number): number | null {
    return this.exponents[row]?.[col] ?? null;
  }

  /** Display string of the linear cost for a cell ("-" on the diagonal). */
  cellDisplay(row: number, col: number): string {
    const value = this.cell(row, col);
    return value === null ? "-" : linearDisplay(value);
  }

  /** Entries ready for the what-if request body (exponent-only wire). */
  toEntries(): (number | null)[][] {
    return this.exponents.map((row) => [...row]);
  }
}
