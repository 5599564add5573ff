// Deterministic force-directed layout.  Positions depend only on the seed
// string and the graph, so the same session always renders the same picture.

export interface Point {
  x: number;
  y: number;
}

function hashString(text: string): number {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutGraph(
  nodeIds: number[],
  edges: [number, number][],
  seed: string,
  width = 640,
  height = 480,
  iterations = 150,
): Map<number, Point> {
  const rng = mulberry32(hashString(seed));
  const n = nodeIds.length;
  const pos = new Map<number, Point>();
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) / 3;
  nodeIds.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(1, n);
    pos.set(id, {
      x: cx + radius * Math.cos(angle) + (rng() - 0.5) * 20,
      y: cy + radius * Math.sin(angle) + (rng() - 0.5) * 20,
    });
  });
  if (n <= 1) return pos;

  const k = Math.sqrt((width * height) / n);
  for (let it = 0; it < iterations; it++) {
    const temp = 0.1 * Math.min(width, height) * (1 - it / iterations) + 1;
    const disp = new Map<number, Point>(nodeIds.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const a = pos.get(nodeIds[i])!;
        const b = pos.get(nodeIds[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dist = Math.hypot(dx, dy);
        if (dist < 1e-6) {
          dx = 1e-3;
          dy = 1e-3;
          dist = Math.hypot(dx, dy);
        }
        const force = (k * k) / dist / dist;
        disp.get(nodeIds[i])!.x += dx * force;
        disp.get(nodeIds[i])!.y += dy * force;
        disp.get(nodeIds[j])!.x -= dx * force;
        disp.get(nodeIds[j])!.y -= dy * force;
      }
    }
    for (const [u, v] of edges) {
      const a = pos.get(u)!;
      const b = pos.get(v)!;
      const dx = a.x - b.x;
      const dy = a.y - b.y;
      const dist = Math.max(1e-6, Math.hypot(dx, dy));
      const force = (dist * dist) / k / dist;
      disp.get(u)!.x -= dx * force;
      disp.get(u)!.y -= dy * force;
      disp.get(v)!.x += dx * force;
      disp.get(v)!.y += dy * force;
    }
    for (const id of nodeIds) {
      const p = pos.get(id)!;
      const d = disp.get(id)!;
      const len = Math.max(1e-6, Math.hypot(d.x, d.y));
      const step = Math.min(len, temp);
      p.x += (d.x / len) * step;
      p.y += (d.y / len) * step;
      // gentle pull to the center keeps components on screen
      p.x += (cx - p.x) * 0.01;
      p.y += (cy - p.y) * 0.01;
      p.x = Math.min(width - 10, Math.max(10, p.x));
      p.y = Math.min(height - 10, Math.max(10, p.y));
    }
  }
  return pos;
}
