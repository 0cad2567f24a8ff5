/** Display helpers. Formatting only; the numbers themselves are always
 * taken verbatim from API responses. */

/** Compact thousands display: 11684.286 -> "11.68K", -520.19 -> "-0.52K". */
export function formatThousands(value: number): string {
  return `${(value / 1000).toFixed(2)}K`;
}

export function formatMoney(value: number, currency: string): string {
  return `${value.toFixed(2)} ${currency}`.trim();
}

export function formatDelta(value: number): string {
  const sign = value > 0 ? "+" : "";
  return `${sign}${value.toFixed(4)}`;
}

/** Debounce an async trigger; used to bound what-if request rate while a
 * slider drags. Only the trailing call in each window fires. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs = 300,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      fn(...args);
    }, waitMs);
  };
}
