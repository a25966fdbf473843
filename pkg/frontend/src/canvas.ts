import type {Catalog, PortKind, PortRef, WorkflowDocument, WorkflowNode} from './types';

/** Horizontal/vertical spacing for the auto-layout grid, in pixels. */
const COLUMN_WIDTH = 220;
const ROW_HEIGHT = 140;

export interface CanvasNode {
  readonly id: string;
  readonly type: string;
  params: Record<string, unknown>;
  x: number;
  y: number;
}

/** A rendered connection: output port of `from` feeding input port of `to`. */
export interface Edge {
  readonly from: PortRef;
  readonly to: PortRef;
}

export interface ConnectCheck {
  readonly ok: boolean;
  readonly reason?: string;
}

/**
 * The editable canvas model. Connections always mirror the workflow
 * document's `inputs` maps: every edge corresponds to exactly one bound
 * input port, so serialization is lossless (positions excluded).
 */
export class CanvasState {
  private readonly nodes = new Map<string, CanvasNode>();
  private edges: Edge[] = [];
  private extras: Record<string, unknown> = {version: 1, id: 'untitled', name: 'untitled'};
  selection: string | null = null;
  dirty = false;

  static fromDocument(doc: WorkflowDocument): CanvasState {
    const canvas = new CanvasState();
    const {nodes, ...extras} = doc;
    canvas.extras = extras;
    for (const node of nodes) {
      canvas.nodes.set(node.id, {
        id: node.id,
        type: node.type,
        params: {...node.params},
        x: 0,
        y: 0,
      });
    }
    for (const node of nodes) {
      for (const [port, source] of Object.entries(node.inputs)) {
        canvas.edges.push({from: {...source}, to: {node: node.id, port}});
      }
    }
    canvas.autoLayout();
    canvas.dirty = false;
    return canvas;
  }

  toDocument(): WorkflowDocument {
    const nodes: WorkflowNode[] = [...this.nodes.values()].map((node) => {
      const inputs: Record<string, PortRef> = {};
      for (const edge of this.edges) {
        if (edge.to.node === node.id) {
          inputs[edge.to.port] = {...edge.from};
        }
      }
      return {id: node.id, type: node.type, params: {...node.params}, inputs};
    });
    return {...this.extras, nodes} as WorkflowDocument;
  }

  nodeList(): CanvasNode[] {
    return [...this.nodes.values()];
  }

  edgeList(): readonly Edge[] {
    return this.edges;
  }

  node(id: string): CanvasNode | undefined {
    return this.nodes.get(id);
  }

  addNode(id: string, type: string, params: Record<string, unknown> = {}): CanvasNode {
    if (this.nodes.has(id)) {
      throw new Error(`duplicate node id: ${id}`);
    }
    const column = this.nodes.size;
    const node: CanvasNode = {id, type, params, x: column * COLUMN_WIDTH, y: 0};
    this.nodes.set(id, node);
    this.dirty = true;
    return node;
  }

  removeNode(id: string): void {
    this.nodes.delete(id);
    this.edges = this.edges.filter((e) => e.from.node !== id && e.to.node !== id);
    if (this.selection === id) this.selection = null;
    this.dirty = true;
  }

  /**
   * Client-side drag feasibility: same-kind ports only, no self loops,
   * endpoints must exist. Types absent from the catalog cannot be checked
   * here and are left to the server's validation.
   */
  canConnect(catalog: Catalog, from: PortRef, to: PortRef): ConnectCheck {
    const fromNode = this.nodes.get(from.node);
    const toNode = this.nodes.get(to.node);
    if (!fromNode || !toNode) return {ok: false, reason: 'unknown node'};
    if (from.node === to.node) return {ok: false, reason: 'self loop'};
    const outKind = portKind(catalog, fromNode.type, from.port, 'outputs');
    const inKind = portKind(catalog, toNode.type, to.port, 'inputs');
    if (outKind === null) return {ok: false, reason: `no output port ${from.port}`};
    if (inKind === null) return {ok: false, reason: `no input port ${to.port}`};
    if (outKind !== undefined && inKind !== undefined && outKind !== inKind) {
      return {ok: false, reason: `${outKind} output cannot feed ${inKind} input`};
    }
    return {ok: true};
  }

  /** Bind an input port; rebinding an occupied port replaces the edge. */
  connect(catalog: Catalog, from: PortRef, to: PortRef): void {
    const check = this.canConnect(catalog, from, to);
    if (!check.ok) {
      throw new Error(`connection rejected: ${check.reason}`);
    }
    this.edges = this.edges.filter(
      (e) => !(e.to.node === to.node && e.to.port === to.port),
    );
    this.edges.push({from: {...from}, to: {...to}});
    this.dirty = true;
  }

  disconnect(to: PortRef): void {
    this.edges = this.edges.filter(
      (e) => !(e.to.node === to.node && e.to.port === to.port),
    );
    this.dirty = true;
  }

  /**
   * Left-to-right columns by topological depth (longest path from any
   * source), rows in insertion order within a column. Nodes on cycles are
   * left in column 0; the server rejects such documents anyway.
   */
  autoLayout(): void {
    const depth = this.topologicalDepths();
    const rows = new Map<number, number>();
    for (const node of this.nodes.values()) {
      const column = depth.get(node.id) ?? 0;
      const row = rows.get(column) ?? 0;
      rows.set(column, row + 1);
      node.x = column * COLUMN_WIDTH;
      node.y = row * ROW_HEIGHT;
    }
  }

  topologicalDepths(): Map<string, number> {
    const incoming = new Map<string, number>();
    const outgoing = new Map<string, string[]>();
    for (const id of this.nodes.keys()) {
      incoming.set(id, 0);
      outgoing.set(id, []);
    }
    for (const edge of this.edges) {
      incoming.set(edge.to.node, (incoming.get(edge.to.node) ?? 0) + 1);
      outgoing.get(edge.from.node)?.push(edge.to.node);
    }
    const depth = new Map<string, number>();
    const queue = [...this.nodes.keys()].filter((id) => incoming.get(id) === 0);
    for (const id of queue) depth.set(id, 0);
    while (queue.length > 0) {
      const id = queue.shift()!;
      for (const next of outgoing.get(id) ?? []) {
        depth.set(next, Math.max(depth.get(next) ?? 0, (depth.get(id) ?? 0) + 1));
        const remaining = (incoming.get(next) ?? 1) - 1;
        incoming.set(next, remaining);
        if (remaining === 0) queue.push(next);
      }
    }
    return depth;
  }
}

function portKind(
  catalog: Catalog,
  type: string,
  port: string,
  side: 'inputs' | 'outputs',
): PortKind | null | undefined {
  const spec = catalog.get(type);
  if (!spec) return undefined; // unknown type: cannot check client-side
  return spec[side][port] ?? null;
}
