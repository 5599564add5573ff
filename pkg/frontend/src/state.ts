import { ApiClient, ApiError } from "./api";
import { edgeKey, parseEdgeKey } from "./format";
import type { CandidatePayload, ExplainRequest, SessionSummary } from "./types";

export type SortKey = "objective" | "size";

export interface WhatifSelection {
  nodes: Set<number>;
  edges: Set<string>; // canonical "u-v" keys
}

/**
 * All state the explorer renders from.  Every number shown to the user
 * (beliefs, distances) is copied verbatim out of a service payload; the
 * client never computes probabilities itself.
 */
export interface ViewState {
  sessionId: string | null;
  summary: SessionSummary | null;
  target: number | null;
  candidates: CandidatePayload[];
  combined: CandidatePayload | null;
  beliefFull: number[] | null;
  sortKey: SortKey;
  selectedCandidate: CandidatePayload | null;
  selection: WhatifSelection | null;
  lastWhatifBelief: number[] | null;
  lastWhatifIsTree: boolean | null;
  displayD: number | null; // always the last service-reported distance
  error: string | null;
  explainInFlight: boolean;
  canRetry: boolean;
}

interface EditBatch {
  snapshot: WhatifSelection;
}

function cloneSelection(sel: WhatifSelection): WhatifSelection {
  return { nodes: new Set(sel.nodes), edges: new Set(sel.edges) };
}

export class ExplorerStore {
  readonly state: ViewState = {
    sessionId: null,
    summary: null,
    target: null,
    candidates: [],
    combined: null,
    beliefFull: null,
    sortKey: "objective",
    selectedCandidate: null,
    selection: null,
    lastWhatifBelief: null,
    lastWhatifIsTree: null,
    displayD: null,
    error: null,
    explainInFlight: false,
    canRetry: false,
  };

  private listeners: Array<() => void> = [];
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  private whatifSeq = 0;
  private batch: EditBatch | null = null;
  private retryEdit: (() => Promise<void>) | null = null;
  private queuedTarget: number | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    readonly api: ApiClient,
    private readonly debounceMs = 150,
  ) {}

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify() {
    for (const listener of this.listeners) listener();
  }

  /** Resolves once every in-flight request has settled. */
  async settle(): Promise<void> {
    let last;
    do {
      last = this.pending;
      await last;
    } while (last !== this.pending);
  }

  private track(work: Promise<void>) {
    this.pending = this.pending.then(() => work).catch(() => undefined);
  }

  async openSession(spec: Record<string, unknown>): Promise<void> {
    const summary = await this.api.createSession(spec);
    this.state.sessionId = summary.session_id;
    this.state.summary = summary;
    this.state.target = null;
    this.state.candidates = [];
    this.state.combined = null;
    this.state.selection = null;
    this.state.displayD = null;
    this.state.error = null;
    this.notify();
  }

  /**
   * Fetch explanations for a target.  At most one explain request is in
   * flight; a target picked while one is running is remembered and fetched
   * afterwards (latest wins).
   */
  selectTarget(target: number, options: Partial<ExplainRequest> = {}): Promise<void> {
    if (this.state.explainInFlight) {
      this.queuedTarget = target;
      return this.settle();
    }
    const work = this.fetchExplanations(target, options);
    this.track(work);
    return work;
  }

  private async fetchExplanations(
    target: number,
    options: Partial<ExplainRequest>,
  ): Promise<void> {
    if (!this.state.sessionId) throw new Error("no session open");
    this.state.explainInFlight = true;
    this.state.error = null;
    this.notify();
    try {
      const payload = await this.api.explain(this.state.sessionId, {
        target,
        beam: 3,
        ...options,
      });
      this.state.target = payload.target;
      this.state.beliefFull = payload.belief_full;
      this.state.candidates = payload.candidates;
      this.state.combined = payload.combined ?? null;
      this.state.sortKey = "objective";
      this.state.selectedCandidate = null;
      this.state.selection = null;
      this.state.displayD = null;
      this.state.lastWhatifBelief = null;
      this.state.lastWhatifIsTree = null;
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.state.explainInFlight = false;
      this.notify();
      if (this.queuedTarget !== null) {
        const next = this.queuedTarget;
        this.queuedTarget = null;
        const work = this.fetchExplanations(next, options);
        this.track(work);
      }
    }
  }

  /** Candidates in display order; sorting is stable and selection survives. */
  sortedCandidates(): CandidatePayload[] {
    const rows = [...this.state.candidates];
    if (this.state.sortKey === "size") {
      rows.sort((a, b) => a.size - b.size || a.objective - b.objective);
    } else {
      rows.sort((a, b) => a.objective - b.objective);
    }
    return rows;
  }

  setSortKey(key: SortKey) {
    this.state.sortKey = key;
    this.notify();
  }

  /** Open a candidate in the what-if panel; its service-reported distance
   * becomes the display value. */
  selectCandidate(candidate: CandidatePayload) {
    this.state.selectedCandidate = candidate;
    this.state.selection = {
      nodes: new Set(candidate.nodes),
      edges: new Set(candidate.edges.map(([u, v]) => edgeKey(u, v))),
    };
    this.state.displayD = candidate.objective;
    this.state.lastWhatifBelief = candidate.belief_sub;
    this.state.lastWhatifIsTree = candidate.is_tree;
    this.state.error = null;
    this.batch = null;
    this.notify();
  }

  removeNode(node: number): Promise<void> {
    return this.edit((sel) => {
      if (node === this.state.target) {
        throw new Error("the target cannot be removed");
      }
      sel.nodes.delete(node);
      for (const key of [...sel.edges]) {
        const [u, v] = parseEdgeKey(key);
        if (u === node || v === node) sel.edges.delete(key);
      }
    });
  }

  addNode(node: number, viaEdges: [number, number][]): Promise<void> {
    return this.edit((sel) => {
      sel.nodes.add(node);
      for (const [u, v] of viaEdges) sel.edges.add(edgeKey(u, v));
    });
  }

  addEdge(u: number, v: number): Promise<void> {
    return this.edit((sel) => {
      sel.edges.add(edgeKey(u, v));
    });
  }

  removeEdge(u: number, v: number): Promise<void> {
    return this.edit((sel) => {
      sel.edges.delete(edgeKey(u, v));
    });
  }

  /** Re-issue the most recent edit after a network failure. */
  retry(): Promise<void> {
    if (!this.retryEdit) return Promise.resolve();
    const again = this.retryEdit;
    this.retryEdit = null;
    this.state.canRetry = false;
    return again();
  }

  private edit(mutate: (sel: WhatifSelection) => void): Promise<void> {
    const doEdit = async () => {
      if (!this.state.selection || this.state.target === null) {
        throw new Error("select a candidate before editing");
      }
      if (this.batch === null) {
        this.batch = { snapshot: cloneSelection(this.state.selection) };
      }
      try {
        mutate(this.state.selection);
      } catch (err) {
        this.state.error = err instanceof Error ? err.message : String(err);
        this.notify();
        return;
      }
      this.notify();
      await this.scheduleEvaluate();
    };
    this.retryEdit = doEdit;
    const work = doEdit();
    this.track(work);
    return work;
  }

  private debounceWaiters: Array<() => void> = [];

  private scheduleEvaluate(): Promise<void> {
    // Edits landing inside the debounce window coalesce into one request;
    // every edit's promise resolves when that one evaluation settles.
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    return new Promise((resolve) => {
      this.debounceWaiters.push(resolve);
      this.debounceTimer = setTimeout(() => {
        this.debounceTimer = null;
        const waiters = this.debounceWaiters;
        this.debounceWaiters = [];
        const release = () => waiters.forEach((w) => w());
        const work = this.evaluateSelection();
        this.track(work);
        work.then(release, release);
      }, this.debounceMs);
    });
  }

  private async evaluateSelection(): Promise<void> {
    const { sessionId, target, selection } = this.state;
    if (!sessionId || target === null || !selection) return;
    const seq = ++this.whatifSeq;
    const body = {
      target,
      nodes: [...selection.nodes].sort((a, b) => a - b),
      edges: [...selection.edges].map(parseEdgeKey),
    };
    try {
      const payload = await this.api.whatif(sessionId, body);
      if (seq !== this.whatifSeq) return; // superseded: latest wins
      this.state.displayD = payload.objective;
      this.state.lastWhatifBelief = payload.belief_on_subgraph;
      this.state.lastWhatifIsTree = payload.is_tree;
      this.state.error = null;
      this.state.canRetry = false;
      this.batch = null;
      this.retryEdit = null;
    } catch (err) {
      if (seq !== this.whatifSeq) return;
      if (err instanceof ApiError) {
        // Rejected edit (disconnection etc): report and revert the batch.
        this.state.error = err.detail;
        if (this.batch) {
          this.state.selection = this.batch.snapshot;
          this.batch = null;
        }
        this.retryEdit = null;
      } else {
        // Network failure: revert, keep the edit available for retry.
        this.state.error = err instanceof Error ? err.message : String(err);
        if (this.batch) {
          this.state.selection = this.batch.snapshot;
          this.batch = null;
        }
        this.state.canRetry = true;
      }
    }
    this.notify();
  }
}
