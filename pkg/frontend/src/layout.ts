// Tiny force layout for the graph-pattern drawings. Patterns are small
// (tens of edges at most), so a few hundred naive iterations are plenty.

import { GraphEdge } from "./api.js";

export interface Point {
  x: number;
  y: number;
}

export interface GraphDrawing {
  nodes: { id: number; label: string; pos: Point }[];
  edges: { from: Point; to: Point; label: string }[];
}

export function forceLayout(
  nodeIds: number[],
  edges: [number, number][],
  width = 220,
  height = 160,
  iterations = 300,
): Map<number, Point> {
  const n = nodeIds.length;
  const index = new Map(nodeIds.map((id, i) => [id, i]));
  const pos: Point[] = nodeIds.map((_, i) => ({
    // deterministic start: spread around a circle
    x: width / 2 + (width / 3) * Math.cos((2 * Math.PI * i) / Math.max(1, n)),
    y: height / 2 + (height / 3) * Math.sin((2 * Math.PI * i) / Math.max(1, n)),
  }));
  if (n <= 1) {
    return new Map(nodeIds.map((id) => [id, { x: width / 2, y: height / 2 }]));
  }
  const spring = Math.min(width, height) / Math.max(2, Math.sqrt(n) + 1);
  for (let step = 0; step < iterations; step++) {
    const cool = 1 - step / iterations;
    const force: Point[] = pos.map(() => ({ x: 0, y: 0 }));
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = pos[i].x - pos[j].x;
        const dy = pos[i].y - pos[j].y;
        const dist = Math.max(1e-3, Math.hypot(dx, dy));
        const push = (spring * spring) / dist / dist;
        force[i].x += dx * push;
        force[i].y += dy * push;
        force[j].x -= dx * push;
        force[j].y -= dy * push;
      }
    }
    for (const [a, b] of edges) {
      const i = index.get(a)!;
      const j = index.get(b)!;
      const dx = pos[i].x - pos[j].x;
      const dy = pos[i].y - pos[j].y;
      const dist = Math.max(1e-3, Math.hypot(dx, dy));
      const pull = (dist - spring) / dist / 2;
      force[i].x -= dx * pull;
      force[i].y -= dy * pull;
      force[j].x += dx * pull;
      force[j].y += dy * pull;
    }
    for (let i = 0; i < n; i++) {
      pos[i].x += Math.max(-8, Math.min(8, force[i].x)) * cool;
      pos[i].y += Math.max(-8, Math.min(8, force[i].y)) * cool;
      pos[i].x = Math.max(12, Math.min(width - 12, pos[i].x));
      pos[i].y = Math.max(12, Math.min(height - 12, pos[i].y));
    }
  }
  return new Map(nodeIds.map((id) => [id, pos[index.get(id)!]]));
}

export function drawingFromEdges(edges: GraphEdge[], width = 220, height = 160): GraphDrawing {
  const labels = new Map<number, string>();
  for (const e of edges) {
    labels.set(e.u, e.u_label);
    labels.set(e.v, e.v_label);
  }
  const nodeIds = [...labels.keys()].sort((a, b) => a - b);
  const layout = forceLayout(nodeIds, edges.map((e) => [e.u, e.v]), width, height);
  return {
    nodes: nodeIds.map((id) => ({ id, label: labels.get(id)!, pos: layout.get(id)! })),
    edges: edges.map((e) => ({ from: layout.get(e.u)!, to: layout.get(e.v)!, label: e.label })),
  };
}
