/** Wire types mirroring the engine's JSON API. */

export type PortKind = 'Text' | 'Image' | 'Number';

export interface ParamSpec {
  readonly kind: string;
  readonly default: unknown;
  readonly required: boolean;
}

/** One entry from GET /api/nodes. */
export interface NodeTypeSpec {
  readonly type: string;
  readonly inputs: Record<string, PortKind>;
  readonly outputs: Record<string, PortKind>;
  readonly params: Record<string, ParamSpec>;
}

/** Catalog keyed by type name for quick port lookups. */
export type Catalog = Map<string, NodeTypeSpec>;

export function catalogFromResponse(body: {nodes: NodeTypeSpec[]}): Catalog {
  return new Map(body.nodes.map((spec) => [spec.type, spec]));
}

/** A connection endpoint inside a workflow document. */
export interface PortRef {
  readonly node: string;
  readonly port: string;
}

export interface WorkflowNode {
  readonly id: string;
  readonly type: string;
  params: Record<string, unknown>;
  inputs: Record<string, PortRef>;
}

/** The canonical workflow document exchanged with the server. */
export interface WorkflowDocument {
  version: number;
  id: string;
  name: string;
  description?: string;
  tags?: string[];
  likes?: number;
  nodes: WorkflowNode[];
  [extra: string]: unknown;
}

/** One ranked card from POST /api/pilot/search. */
export interface ResultCard {
  readonly workflow_id: string;
  readonly name: string;
  readonly snippet: string;
  readonly similarity: number;
  readonly likes: number;
  readonly final_score: number;
  readonly rank: number;
}

export interface SearchResponse {
  readonly results: ResultCard[];
  readonly explored: boolean;
}

export type JobState = 'queued' | 'running' | 'done' | 'failed';

export interface ArtifactRef {
  readonly artifact_id: string;
  readonly workflow_id: string;
  readonly node: string;
  readonly port: string;
}

export interface Job {
  readonly id: string;
  readonly kind: 'execute' | 'resolve_install';
  readonly state: JobState;
  readonly result: {artifacts?: ArtifactRef[]; [key: string]: unknown} | null;
  readonly error: string | null;
}

export interface ValidationFinding {
  readonly code: string;
  readonly node: string | null;
  readonly detail: string;
}
