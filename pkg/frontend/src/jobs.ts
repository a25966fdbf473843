import {ApiClient} from './api';
import type {Job, JobState} from './types';

export interface PollOptions {
  /** Initial polling interval. */
  intervalMs?: number;
  /** Multiplier applied after each poll, capped at maxIntervalMs. */
  backoff?: number;
  maxIntervalMs?: number;
  /** Called with every observed state, including repeats. */
  onState?: (state: JobState) => void;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

/**
 * Poll a job until it reaches a terminal state. Resolves with the final
 * job for both `done` and `failed`; callers inspect `job.error`.
 */
export async function pollJob(
  client: ApiClient,
  jobId: string,
  options: PollOptions = {},
): Promise<Job> {
  const backoff = options.backoff ?? 1.5;
  const maxInterval = options.maxIntervalMs ?? 2000;
  let interval = options.intervalMs ?? 100;
  for (;;) {
    const job = await client.getJob(jobId);
    options.onState?.(job.state);
    if (job.state === 'done' || job.state === 'failed') {
      return job;
    }
    await sleep(interval);
    interval = Math.min(interval * backoff, maxInterval);
  }
}

/**
 * Run a stored or inline workflow and wait for the outcome. Returns the
 * terminal job; throws ApiError on submission-time validation failures.
 */
export async function runWorkflow(
  client: ApiClient,
  body: Parameters<ApiClient['execute']>[0],
  options: PollOptions = {},
): Promise<Job> {
  const {job_id} = await client.execute(body);
  return pollJob(client, job_id, options);
}
