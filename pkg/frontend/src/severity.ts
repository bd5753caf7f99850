/** The seven-detent severity scale: exponents 0..6 for costs 10^0 .. 10^6
 * relative to the reference mistake. Only the exponent ever crosses the
 * wire. */

export interface SeverityLevel {
  exponent: number;
  /** Compact cost figure shown on the detent. */
  cost: string;
  label: string;
}

// Wording of the four anchor detents (1, 10, 100, 1M) is fixed; the three
// intermediate labels are provisional.
export const SEVERITY_LEVELS: readonly SeverityLevel[] = [
  { exponent: 0, cost: "1", label: "marginal" },
  { exponent: 1, cost: "10", label: "nearly harmless" },
  { exponent: 2, cost: "100", label: "fairly harmless" },
  { exponent: 3, cost: "1k", label: "serious" },
  { exponent: 4, cost: "10k", label: "very serious" },
  { exponent: 5, cost: "100k", label: "grave" },
  { exponent: 6, cost: "1M", label: "fatal" },
];

export const MAX_EXPONENT = 6;

export function detentText(level: SeverityLevel): string {
  return `${level.cost} (${level.label})`;
}

/** "1M (fatal)" -> 6; also accepts the bare cost figure ("1M"). */
export function exponentForDetent(text: string): number {
  const wanted = text.trim().toLowerCase();
  for (const level of SEVERITY_LEVELS) {
    if (
      wanted === detentText(level).toLowerCase() ||
      wanted === level.cost.toLowerCase() ||
      wanted === level.label.toLowerCase()
    ) {
      return level.exponent;
    }
  }
  throw new Error(`unknown severity detent: ${text}`);
}

export function isValidExponent(value: number): boolean {
  return Number.isInteger(value) && value >= 0 && value <= MAX_EXPONENT;
}
