// Payload shapes of the explanation service (field names match the wire).

export interface SessionSummary {
  session_id: string;
  nodes: number;
  edges: number;
  classes: number;
}

export interface CandidatePayload {
  objective: number;
  size: number;
  is_tree: boolean;
  nodes: number[];
  edges: [number, number][];
  closed: number[];
  method: string;
  belief_sub: number[];
  document: string;
}

export interface ExplainPayload {
  target: number;
  belief_full: number[];
  candidates: CandidatePayload[];
  combined?: CandidatePayload;
}

export interface WhatifPayload {
  belief_on_subgraph: number[];
  objective: number;
  is_tree: boolean;
}

export interface NeighborhoodNode {
  id: number;
  prior: number[];
  belief: number[];
}

export interface NeighborhoodPayload {
  center: number;
  radius: number;
  nodes: NeighborhoodNode[];
  edges: [number, number][];
}

export interface ExplainRequest {
  target: number;
  method?: string;
  capacity?: number;
  beam?: number;
  prune?: number;
  seed?: number;
  variant?: string;
  comb?: boolean;
}
