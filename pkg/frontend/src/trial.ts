/** One trial: fixation -> stimulus -> 1/f mask -> response wheel.
 *
 * Input is hard-gated: selections are ignored in every phase except
 * `response`, so no response can be entered before wheel onset.
 * Reaction time runs from wheel onset to the accepted selection.
 */

import { msToFrames, nextFrame, waitFrames } from "./timing.js";
import { assertWheelLabels, keyToSector } from "./wheel.js";
import type {
  Clock,
  FrameScheduler,
  TrialDisplay,
  TrialResult,
} from "./types.js";
import { TrialAborted } from "./types.js";

export type TrialPhase =
  | "idle" | "fixation" | "stimulus" | "mask" | "response" | "done";

export interface TrialView {
  stimulusUrl: string;
  maskUrl: string;
  stimulusDurationMs: number;
  maskDurationMs: number;
  fixationMs: number;
  labels: string[];
  preloaded: boolean;
}

export class TrialRunner {
  phase: TrialPhase = "idle";
  private labels: string[] = [];
  private wheelOnsetAt = 0;
  private settle: ((choice: { label: string; at: number }) => void) | null = null;

  constructor(private scheduler: FrameScheduler, private clock: Clock,
              private display: TrialDisplay,
              private frameRateHz = 60) {}

  /** Accepts a label during the response phase; ignored otherwise. */
  select(label: string): boolean {
    if (this.phase !== "response" || !this.labels.includes(label)) {
      return false;
    }
    const settle = this.settle;
    this.settle = null;
    this.phase = "done";
    settle?.({ label, at: this.clock.now() });
    return true;
  }

  /** Keyboard entry: 1-9, 0, -, = map to the 12 sectors in order. */
  keypress(key: string): boolean {
    const sector = keyToSector(key);
    if (sector === null || this.phase !== "response") {
      return false;
    }
    return this.select(this.labels[sector]);
  }

  async run(view: TrialView): Promise<TrialResult> {
    if (!view.preloaded) {
      throw new TrialAborted("trial images not preloaded");
    }
    assertWheelLabels(view.labels);
    this.labels = view.labels;
    const stimulusFrames = msToFrames(view.stimulusDurationMs, this.frameRateHz);
    const maskFrames = msToFrames(view.maskDurationMs, this.frameRateHz);
    const fixationFrames = msToFrames(view.fixationMs, this.frameRateHz);

    this.phase = "fixation";
    this.display.showFixation();
    await waitFrames(this.scheduler, fixationFrames);

    this.phase = "stimulus";
    this.display.showStimulus(view.stimulusUrl);
    const stimulusOnAt = await nextFrame(this.scheduler);
    await waitFrames(this.scheduler, stimulusFrames - 1);

    this.phase = "mask";
    this.display.showMask(view.maskUrl);
    const maskOnAt = await nextFrame(this.scheduler);
    await waitFrames(this.scheduler, maskFrames - 1);

    this.display.showWheel(view.labels);
    const wheelOnAt = await nextFrame(this.scheduler);
    this.wheelOnsetAt = this.clock.now();
    this.phase = "response";

    const choice = await new Promise<{ label: string; at: number }>(
      (resolve) => { this.settle = resolve; });
    this.display.clear();
    return {
      choice: choice.label,
      rtMs: choice.at - this.wheelOnsetAt,
      measuredStimulusMs: maskOnAt - stimulusOnAt,
      measuredMaskMs: wheelOnAt - maskOnAt,
      stimulusFrames,
    };
  }
}
