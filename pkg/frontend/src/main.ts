/** Browser bootstrap: wires the trial runner to the real page.
 *
 * Thin DOM shell over the tested core (timing.ts, trial.ts,
 * session.ts, wheel.ts). Shows a setup screen first: fullscreen
 * prompt plus a credit-card calibration step, since degrees of visual
 * angle are only meaningful for a known display scale and viewing
 * distance.
 */

import { ApiClient } from "./api.js";
import { SessionController } from "./session.js";
import { TrialRunner } from "./trial.js";
import type { TrialDisplay } from "./types.js";
import { wheelSvg } from "./wheel.js";

const CREDIT_CARD_MM = 85.6;

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

class DomDisplay implements TrialDisplay {
  constructor(private stage: HTMLElement,
              private onSelect: (label: string) => void) {}

  private swap(html: string): void {
    this.stage.innerHTML = html;
  }

  showFixation(): void {
    this.swap('<div class="fixation">+</div>');
  }

  showStimulus(url: string): void {
    this.swap(`<img class="stimulus" src="${url}" alt="">`);
  }

  showMask(url: string): void {
    this.swap(`<img class="stimulus" src="${url}" alt="">`);
  }

  showWheel(labels: string[]): void {
    this.swap(wheelSvg(labels));
    this.stage.querySelectorAll<SVGGElement>("g.sector").forEach((sector) => {
      sector.addEventListener("click", () => {
        this.onSelect(sector.dataset.label ?? "");
      });
    });
  }

  clear(): void {
    this.swap("");
  }
}

function preloadImages(urls: string[]): Promise<boolean> {
  return Promise.all(urls.map((url) => new Promise<boolean>((resolve) => {
    const img = new Image();
    img.onload = () => resolve(true);
    img.onerror = () => resolve(false);
    img.src = url;
  }))).then((flags) => flags.every(Boolean));
}

async function runExperiment(): Promise<void> {
  const stage = element<HTMLDivElement>("stage");
  const status = element<HTMLDivElement>("status");

  const runner = new TrialRunner(
    { request: (cb) => requestAnimationFrame(cb),
      cancel: (id) => cancelAnimationFrame(id) },
    { now: () => performance.now() },
    new DomDisplay(stage, (label) => runner.select(label)),
  );
  window.addEventListener("keydown", (event) => runner.keypress(event.key));

  const controller = new SessionController(
    new ApiClient((url, init) => fetch(url, init)),
    { get: (k) => localStorage.getItem(k),
      set: (k, v) => localStorage.setItem(k, v),
      remove: (k) => localStorage.removeItem(k) },
    preloadImages,
    (view) => runner.run(view),
  );

  const session = await controller.start();
  status.textContent =
    `session ${session.session_id.slice(0, 8)} (${session.group}), ` +
    `trial ${session.cursor + 1} of ${session.total_trials}`;

  const completed = await controller.runAll((outcome) => {
    status.textContent =
      `trial ${outcome.descriptor.trial_index + 1} of ` +
      `${outcome.descriptor.total_trials} - stimulus shown ` +
      `${outcome.result.measuredStimulusMs.toFixed(1)} ms`;
  });
  stage.innerHTML = '<div class="fixation">done - thank you!</div>';
  status.textContent = `completed ${completed} trials this visit`;
}

function setupScreen(): void {
  const setup = element<HTMLDivElement>("setup");
  const card = element<HTMLDivElement>("card");
  const slider = element<HTMLInputElement>("card-scale");
  const begin = element<HTMLButtonElement>("begin");

  slider.addEventListener("input", () => {
    card.style.width = `${slider.value}px`;
  });
  begin.addEventListener("click", async () => {
    const pxPerMm = card.offsetWidth / CREDIT_CARD_MM;
    sessionStorage.setItem("contour-bench.px_per_mm", String(pxPerMm));
    try {
      await document.documentElement.requestFullscreen();
    } catch {
      // fullscreen denied: proceed, timing log still applies
    }
    setup.style.display = "none";
    element<HTMLDivElement>("experiment").style.display = "block";
    runExperiment().catch((error) => {
      element<HTMLDivElement>("status").textContent = `error: ${error}`;
    });
  });
}

window.addEventListener("DOMContentLoaded", setupScreen);
