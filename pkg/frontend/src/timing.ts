/** Frame-locked presentation helpers.
 *
 * Durations are rounded to the nearest display frame and realized by
 * counting scheduler callbacks; measured durations come from the
 * scheduler's own timestamps. Browsers cannot promise lab-grade
 * timing, so every trial logs what the display actually did.
 */

import type { FrameScheduler } from "./types.js";

export const DEFAULT_FRAME_RATE_HZ = 60;

export function msToFrames(durationMs: number,
                           frameRateHz: number = DEFAULT_FRAME_RATE_HZ): number {
  return Math.max(1, Math.round(durationMs / (1000 / frameRateHz)));
}

/** Timestamp of the next frame, when a just-issued display change lands. */
export function nextFrame(scheduler: FrameScheduler): Promise<number> {
  return new Promise((resolve) => scheduler.request(resolve));
}

/** Waits `count` frames; resolves with the last frame's timestamp. */
export async function waitFrames(scheduler: FrameScheduler,
                                 count: number): Promise<number> {
  let timestamp = 0;
  for (let i = 0; i < count; i += 1) {
    timestamp = await nextFrame(scheduler);
  }
  return timestamp;
}
