/** Shared types and the injectable environment seams.
 *
 * Everything timing- or IO-sensitive goes through these interfaces so
 * the trial logic runs identically under the real browser (rAF,
 * fetch, localStorage) and under the test harness's fake 60 Hz
 * scheduler.
 */

export interface SessionInfo {
  session_id: string;
  group: string;
  cursor: number;
  total_trials: number;
  status: string;
}

export interface TrialDescriptor {
  done: boolean;
  trial_index: number;
  total_trials: number;
  stimulus_url?: string;
  mask_url?: string;
  stimulus_duration_ms?: number;
  mask_duration_ms?: number;
  fixation_ms?: number;
  labels?: string[];
  condition?: string;
  level?: number | null;
  practice?: boolean;
}

export interface ResponseAck {
  correct: boolean;
  cursor: number;
  done: boolean;
}

export interface TrialResult {
  choice: string;
  rtMs: number;
  measuredStimulusMs: number;
  measuredMaskMs: number;
  stimulusFrames: number;
}

/** requestAnimationFrame seam; timestamps in ms. */
export interface FrameScheduler {
  request(callback: (timeMs: number) => void): number;
  cancel(id: number): void;
}

export interface Clock {
  now(): number;
}

/** What the runner tells the page to show; DOM-free in tests. */
export interface TrialDisplay {
  showFixation(): void;
  showStimulus(url: string): void;
  showMask(url: string): void;
  showWheel(labels: string[]): void;
  clear(): void;
}

/** Tiny persistence seam (localStorage in the browser). */
export interface KeyValueStore {
  get(key: string): string | null;
  set(key: string, value: string): void;
  remove(key: string): void;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<{ status: number; json(): Promise<unknown> }>;

export class TrialAborted extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TrialAborted";
  }
}
