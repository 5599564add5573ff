// Pure HTML/SVG builders; main.ts injects the strings and binds events.

import { formatDistance } from "./format";
import { layoutGraph } from "./layout";
import type { ViewState } from "./state";
import type { CandidatePayload, NeighborhoodPayload } from "./types";

const BAR_COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1"];

function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderBeliefBar(dist: number[], width = 120): string {
  const cells = dist
    .map((p, i) => {
      const w = Math.max(0, Math.round(p * width));
      const color = BAR_COLORS[i % BAR_COLORS.length];
      return `<span class="bar-cell" style="display:inline-block;width:${w}px;` +
        `background:${color}" title="class ${i + 1}: ${p.toFixed(4)}"></span>`;
    })
    .join("");
  return `<span class="belief-bar">${cells}</span>`;
}

export function renderCandidateList(
  candidates: CandidatePayload[],
  combined: CandidatePayload | null,
  selected: CandidatePayload | null,
): string {
  if (candidates.length === 0 && combined === null) {
    return `<p class="empty">No explanations yet. Pick a target node.</p>`;
  }
  const row = (cand: CandidatePayload, index: number, tag: string) => {
    const badge = cand.is_tree ? "" : ` <span class="badge cycle">cycle</span>`;
    const cls = cand === selected ? "candidate selected" : "candidate";
    return (
      `<li class="${cls}" data-candidate="${tag}${index}">` +
      `<span class="rank">${tag === "c" ? index + 1 : "comb"}</span> ` +
      `d=${formatDistance(cand.objective)} ` +
      `<span class="size">${cand.size} nodes</span>${badge}</li>`
    );
  };
  const items = candidates.map((c, i) => row(c, i, "c"));
  if (combined) items.push(row(combined, 0, "u"));
  return `<ul class="candidates">${items.join("")}</ul>`;
}

export function renderTargetPanel(state: ViewState): string {
  if (state.target === null || !state.beliefFull) {
    return `<p class="empty">No target selected.</p>`;
  }
  const parts = [
    `<h3>node ${state.target}</h3>`,
    `<div>full graph ${renderBeliefBar(state.beliefFull)}</div>`,
  ];
  if (state.lastWhatifBelief) {
    parts.push(`<div>subgraph ${renderBeliefBar(state.lastWhatifBelief)}</div>`);
  }
  if (state.displayD !== null) {
    const badge = state.lastWhatifIsTree === false
      ? ` <span class="badge cycle">cycle</span>` : "";
    parts.push(`<div class="distance">d = ${formatDistance(state.displayD)}${badge}</div>`);
  }
  if (state.error) {
    parts.push(`<div class="error">${escapeHtml(state.error)}` +
      (state.canRetry ? ` <button id="retry">retry</button>` : "") + `</div>`);
  }
  return parts.join("\n");
}

export function renderNeighborhoodSvg(
  hood: NeighborhoodPayload,
  selection: { nodes: Set<number>; edges: Set<string> } | null,
  seed: string,
  width = 640,
  height = 480,
): string {
  const ids = hood.nodes.map((n) => n.id);
  const pos = layoutGraph(ids, hood.edges, seed, width, height);
  const lines = hood.edges
    .map(([u, v]) => {
      const a = pos.get(u)!;
      const b = pos.get(v)!;
      const key = u < v ? `${u}-${v}` : `${v}-${u}`;
      const inSel = selection?.edges.has(key) ?? false;
      return `<line data-edge="${key}" x1="${a.x.toFixed(1)}" y1="${a.y.toFixed(1)}" ` +
        `x2="${b.x.toFixed(1)}" y2="${b.y.toFixed(1)}" ` +
        `stroke="${inSel ? "#d62728" : "#bbb"}" stroke-width="${inSel ? 3 : 1}"/>`;
    })
    .join("");
  const circles = hood.nodes
    .map((n) => {
      const p = pos.get(n.id)!;
      const inSel = selection?.nodes.has(n.id) ?? false;
      const fill = inSel ? "#d62728" : "#4e79a7";
      const r = n.id === hood.center ? 14 : 9;
      return `<g data-node="${n.id}">` +
        `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${r}" fill="${fill}"/>` +
        `<text x="${p.x.toFixed(1)}" y="${(p.y + 3).toFixed(1)}" ` +
        `text-anchor="middle" font-size="8" fill="#fff">${n.id}</text></g>`;
    })
    .join("");
  return `<svg viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">` +
    `${lines}${circles}</svg>`;
}
