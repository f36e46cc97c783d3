/** Session orchestration: create or resume, then trial-by-trial loop.
 *
 * The session id persists in the key-value store; on reload the
 * controller asks the service for its cursor and continues from
 * there. A response posts exactly once per trial index; a 409
 * conflict (already recorded) is treated as success and the loop
 * refetches the next descriptor, so resume never duplicates records.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  KeyValueStore,
  SessionInfo,
  TrialDescriptor,
  TrialResult,
} from "./types.js";
import { TrialAborted } from "./types.js";
import type { TrialView } from "./trial.js";

const STORE_KEY = "contour-bench.session";

export type ImagePreloader = (urls: string[]) => Promise<boolean>;
export type TrialExecutor = (view: TrialView,
                             descriptor: TrialDescriptor) => Promise<TrialResult>;

export interface TrialOutcome {
  descriptor: TrialDescriptor;
  result: TrialResult;
  correct: boolean;
}

export class SessionController {
  session: SessionInfo | null = null;

  constructor(private api: ApiClient, private store: KeyValueStore,
              private preload: ImagePreloader,
              private executeTrial: TrialExecutor) {}

  /** Resume the stored session when possible, else create one. */
  async start(group?: string): Promise<SessionInfo> {
    const stored = this.store.get(STORE_KEY);
    if (stored) {
      try {
        this.session = await this.api.getSession(stored);
        return this.session;
      } catch (error) {
        if (!(error instanceof ApiError) || error.status !== 404) {
          throw error;
        }
        this.store.remove(STORE_KEY);  // stale id: start fresh
      }
    }
    this.session = await this.api.createSession(group);
    this.store.set(STORE_KEY, this.session.session_id);
    return this.session;
  }

  /** One trial; returns null when the session is complete. */
  async step(): Promise<TrialOutcome | null> {
    if (!this.session) {
      throw new Error("start() the session first");
    }
    const sid = this.session.session_id;
    const descriptor = await this.api.getTrial(sid);
    if (descriptor.done) {
      this.store.remove(STORE_KEY);
      return null;
    }
    const urls = [descriptor.stimulus_url!, descriptor.mask_url!];
    const ok = await this.preload(urls);
    if (!ok) {
      throw new TrialAborted(`preload failed for trial ${descriptor.trial_index}`);
    }
    const view: TrialView = {
      stimulusUrl: descriptor.stimulus_url!,
      maskUrl: descriptor.mask_url!,
      stimulusDurationMs: descriptor.stimulus_duration_ms ?? 200,
      maskDurationMs: descriptor.mask_duration_ms ?? 200,
      fixationMs: descriptor.fixation_ms ?? 500,
      labels: descriptor.labels ?? [],
      preloaded: true,
    };
    const result = await this.executeTrial(view, descriptor);
    try {
      const ack = await this.api.postResponse(
        sid, descriptor.trial_index, result.choice, result.rtMs);
      return { descriptor, result, correct: ack.correct };
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // already recorded (e.g. retried network call): not a duplicate
        return { descriptor, result, correct: false };
      }
      throw error;
    }
  }

  /** Run to completion; yields per-trial outcomes to the callback. */
  async runAll(onTrial?: (outcome: TrialOutcome) => void): Promise<number> {
    let completed = 0;
    for (;;) {
      const outcome = await this.step();
      if (outcome === null) {
        return completed;
      }
      completed += 1;
      onTrial?.(outcome);
    }
  }
}
