/**
 * Four-significant-digit display of the faithfulness distance, matching the
 * engine CLI's formatting for the value ranges it emits.
 */
export function formatDistance(d: number): string {
  if (d === 0) return "0";
  return String(Number(d.toPrecision(4)));
}

export function edgeKey(u: number, v: number): string {
  return u < v ? `${u}-${v}` : `${v}-${u}`;
}

export function parseEdgeKey(key: string): [number, number] {
  const [u, v] = key.split("-").map(Number);
  return [u, v];
}
