// Wiring: session setup form, the three screens, and metrics polling with
// backoff. All data flows through SessionFlow; this file only projects it.

import { ApiClient } from "./api.js";
import { renderCards, renderProgress, renderRecommendations, renderSummary, showCardError } from "./render.js";
import { Backoff, isConflict, isValidationError, Screen, SessionFlow } from "./state.js";

const $ = <T extends HTMLElement>(id: string): T => document.getElementById(id) as T;

const api = new ApiClient(
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000",
);
const flow = new SessionFlow(api);
const backoff = new Backoff();
let pollTimer: number | undefined;

function showScreen(name: Screen | "setup"): void {
  for (const id of ["setup", "rate", "progress", "recommendations"]) {
    $(`screen-${id}`).hidden = id !== name;
  }
  for (const btn of document.querySelectorAll<HTMLButtonElement>("nav button")) {
    btn.classList.toggle("active", btn.dataset.screen === name);
  }
}

async function loadRatingScreen(): Promise<void> {
  showScreen("rate");
  const cards = $("cards");
  const submit = $<HTMLButtonElement>("submit-batch");
  const gate = $("gate-message");
  const batch = await flow.loadBatch();
  if (!batch) {
    // terminal session: nothing left to rate, jump to the results
    renderSummary($("iteration-summary"), flow.lastSummary ?? ({ iteration: 0, theta_delta: 0, status: flow.terminalStatus ?? "done", feedback_count: 0 } as any));
    await loadRecommendationsScreen();
    return;
  }
  $("batch-title").textContent = `Iteration ${batch.request.iteration}: rate ${batch.items.length} patterns`;
  submit.disabled = true;
  gate.textContent = `0 of ${batch.items.length} rated`;
  renderCards(cards, batch, () => {
    submit.disabled = !batch.canSubmit();
    gate.textContent = batch.canSubmit()
      ? "all cards rated — ready to submit"
      : `${batch.ratedCount} of ${batch.items.length} rated`;
  });
  submit.onclick = async () => {
    submit.disabled = true; // double-submit is also rejected server-side
    try {
      const summary = await flow.submitBatch();
      renderSummary($("iteration-summary"), summary);
      await refreshMetrics();
      if (summary.status === "running") {
        await loadRatingScreen();
      } else {
        await loadRecommendationsScreen();
      }
    } catch (err) {
      if (isValidationError(err)) {
        const detail = err.detail as any;
        const missing: number[] = detail?.missing_pattern_ids ?? [];
        for (const pid of missing) {
          showCardError(cards, pid, "rating required");
        }
        gate.textContent = "the service rejected the submission; fix the cards and retry";
        submit.disabled = !flow.batch?.canSubmit();
      } else if (isConflict(err)) {
        gate.textContent = "this batch was already submitted";
      } else {
        gate.textContent = `submission failed: ${(err as Error).message}`;
        submit.disabled = !flow.batch?.canSubmit();
      }
    }
  };
}

async function refreshMetrics(): Promise<void> {
  try {
    const metrics = await flow.metrics();
    backoff.succeed();
    $("retry-banner").hidden = true;
    renderProgress($("progress-body"), metrics.history, metrics.status);
    $("progress-status").textContent =
      `status ${metrics.status} · ${metrics.feedback_count} ratings over ${metrics.iteration} iterations`;
  } catch {
    backoff.fail();
    $("retry-banner").hidden = false;
    $("retry-banner").textContent = `connection lost; retrying in ${Math.round(backoff.delay / 1000)}s`;
  }
  window.clearTimeout(pollTimer);
  pollTimer = window.setTimeout(refreshMetrics, backoff.delay);
}

async function loadRecommendationsScreen(): Promise<void> {
  showScreen("recommendations");
  const topN = Number($<HTMLInputElement>("top-n").value) || 10;
  try {
    const recs = await flow.recommendations(topN);
    $("rec-title").textContent = `Top ${topN} for rating class ${recs.interesting_class}`;
    renderRecommendations($("rec-body"), recs.items);
  } catch (err) {
    if (isConflict(err)) {
      $("rec-body").replaceChildren();
      $("rec-title").textContent = "No trained model yet: rate a batch first.";
    } else {
      throw err;
    }
  }
}

function wireNavigation(): void {
  for (const btn of document.querySelectorAll<HTMLButtonElement>("nav button")) {
    btn.addEventListener("click", () => {
      const screen = btn.dataset.screen as Screen;
      if (!flow.sessionId) return;
      if (screen === "rate") void loadRatingScreen();
      if (screen === "progress") {
        showScreen("progress");
        void refreshMetrics();
      }
      if (screen === "recommendations") void loadRecommendationsScreen();
    });
  }
  $<HTMLInputElement>("top-n").addEventListener("change", () => void loadRecommendationsScreen());
}

function wireSetup(): void {
  $<HTMLInputElement>("dataset-file").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    const kind = $<HTMLSelectElement>("dataset-kind").value;
    await api.uploadDataset(file.name, kind, await file.text());
    $("setup-message").textContent = `uploaded ${file.name}`;
  });

  $<HTMLButtonElement>("create-session").addEventListener("click", async () => {
    const dataset = $<HTMLInputElement>("dataset-name").value.trim();
    const minSupport = Number($<HTMLInputElement>("min-support").value);
    const classCount = Number($<HTMLInputElement>("class-count").value) || 3;
    const names: Record<string, string> = classCount === 3
      ? { "1": "dislike", "2": "not sure", "3": "like" }
      : {};
    try {
      const created = await flow.create(dataset, {
        min_support: Number.isFinite(minSupport) && minSupport > 0 ? minSupport : undefined,
        patterns: $<HTMLInputElement>("patterns-name").value.trim() || undefined,
        config: {
          class_count: classCount,
          interesting_class: classCount,
          rating_names: names,
        },
      });
      $("setup-message").textContent = `session ${created.session_id} over ${created.patterns} patterns`;
      await loadRatingScreen();
      void refreshMetrics();
    } catch (err) {
      $("setup-message").textContent = (err as Error).message;
    }
  });

  $<HTMLButtonElement>("attach-session").addEventListener("click", async () => {
    const sid = $<HTMLInputElement>("session-id").value.trim();
    if (!sid) return;
    flow.attach(sid);
    await loadRatingScreen();
    void refreshMetrics();
  });
}

if (typeof document !== "undefined" && document.getElementById("screen-setup")) {
  wireNavigation();
  wireSetup();
  showScreen("setup");
}
