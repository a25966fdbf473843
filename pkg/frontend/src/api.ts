import type {
  ArtifactRef,
  Catalog,
  Job,
  SearchResponse,
  ValidationFinding,
  WorkflowDocument,
} from './types';
import {catalogFromResponse} from './types';

/** Injected so tests can run against an in-memory server. */
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly findings: ValidationFinding[] = [],
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function raiseFor(response: Response): Promise<never> {
  let message = `HTTP ${response.status}`;
  let findings: ValidationFinding[] = [];
  try {
    const body = await response.json();
    const detail = body?.detail;
    if (typeof detail === 'string') {
      message = detail;
    } else if (detail && Array.isArray(detail.findings)) {
      findings = detail.findings;
      message = findings.map((f) => `${f.code}${f.node ? ` @${f.node}` : ''}`).join(', ');
    }
  } catch {
    // non-JSON error body: keep the status message
  }
  throw new ApiError(response.status, message, findings);
}

/** Thin typed client over the engine's HTTP surface; holds no state. */
export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.base + path);
    if (!response.ok) await raiseFor(response);
    return response.json() as Promise<T>;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method: 'POST',
      headers: {'Content-Type': 'application/json'},
      body: JSON.stringify(body),
    });
    if (!response.ok) await raiseFor(response);
    return response.json() as Promise<T>;
  }

  pilotSearch(query: string, k?: number): Promise<SearchResponse> {
    return this.post('/api/pilot/search', k === undefined ? {query} : {query, k});
  }

  getWorkflow(workflowId: string): Promise<WorkflowDocument> {
    return this.get(`/api/workflows/${encodeURIComponent(workflowId)}`);
  }

  storeWorkflow(document: WorkflowDocument): Promise<{workflow_id: string}> {
    return this.post('/api/workflows', document);
  }

  execute(body: {workflow: WorkflowDocument} | {id: string}): Promise<{job_id: string}> {
    return this.post('/api/execute', body);
  }

  resolve(
    body: ({workflow: WorkflowDocument} | {id: string}) & {mode?: string; install?: boolean},
  ): Promise<{job_id: string}> {
    return this.post('/api/resolve', body);
  }

  getJob(jobId: string): Promise<Job> {
    return this.get(`/api/jobs/${encodeURIComponent(jobId)}`);
  }

  async getCatalog(): Promise<Catalog> {
    return catalogFromResponse(await this.get('/api/nodes'));
  }

  getGallery(): Promise<{gallery: ArtifactRef[]}> {
    return this.get('/api/gallery');
  }

  artifactUrl(artifactId: string): string {
    return `${this.base}/api/artifacts/${encodeURIComponent(artifactId)}`;
  }
}
