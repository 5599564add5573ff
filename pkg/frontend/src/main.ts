import { ApiClient } from "./api";
import { renderCandidateList, renderNeighborhoodSvg, renderTargetPanel } from "./render";
import { ExplorerStore } from "./state";
import type { NeighborhoodPayload } from "./types";

const baseUrl =
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000";
const store = new ExplorerStore(new ApiClient(baseUrl));

const $ = (id: string) => document.getElementById(id)!;
let hood: NeighborhoodPayload | null = null;

function redraw() {
  const state = store.state;
  $("summary").textContent = state.summary
    ? `${state.summary.nodes} nodes / ${state.summary.edges} edges / ` +
      `${state.summary.classes} classes`
    : "no session";
  $("candidates").innerHTML = renderCandidateList(
    store.sortedCandidates(), state.combined, state.selectedCandidate);
  $("target-panel").innerHTML = renderTargetPanel(state);
  if (hood) {
    $("graph").innerHTML = renderNeighborhoodSvg(
      hood, state.selection, state.sessionId ?? "seed");
  }
  const retry = document.getElementById("retry");
  if (retry) retry.onclick = () => void store.retry();
}

async function refreshNeighborhood(target: number) {
  if (!store.state.sessionId) return;
  hood = await store.api.neighborhood(store.state.sessionId, target, 2);
  redraw();
}

function bind() {
  store.subscribe(redraw);

  $("open-session").onclick = async () => {
    await store.openSession({ preset: "karate" });
    redraw();
  };

  $("go-target").onclick = async () => {
    const target = Number(($("target-input") as HTMLInputElement).value);
    await store.selectTarget(target, { comb: true });
    await refreshNeighborhood(target);
  };

  $("sort-objective").onclick = () => store.setSortKey("objective");
  $("sort-size").onclick = () => store.setSortKey("size");

  $("candidates").addEventListener("click", (event) => {
    const item = (event.target as HTMLElement).closest("[data-candidate]");
    if (!item) return;
    const tag = item.getAttribute("data-candidate")!;
    const candidate = tag.startsWith("u")
      ? store.state.combined
      : store.sortedCandidates()[Number(tag.slice(1))];
    if (candidate) store.selectCandidate(candidate);
  });

  // Clicking a node in the viewport toggles it in the what-if selection:
  // selected nodes are removed, outside nodes attach through every edge
  // that connects them to the current selection.
  $("graph").addEventListener("click", (event) => {
    const nodeEl = (event.target as HTMLElement).closest("[data-node]");
    if (!nodeEl || !store.state.selection || !hood) return;
    const node = Number(nodeEl.getAttribute("data-node"));
    if (store.state.selection.nodes.has(node)) {
      void store.removeNode(node);
    } else {
      const attach = hood.edges.filter(
        ([u, v]) =>
          (u === node && store.state.selection!.nodes.has(v)) ||
          (v === node && store.state.selection!.nodes.has(u)),
      );
      void store.addNode(node, attach);
    }
  });
}

bind();
