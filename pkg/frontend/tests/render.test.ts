// @vitest-environment happy-dom

import { describe, expect, it } from "vitest";

import { FeedbackRequest } from "../src/api.js";
import { patternView, renderCards, renderProgress, renderRecommendations } from "../src/render.js";
import { RatingBatch } from "../src/state.js";

function request(): FeedbackRequest {
  return {
    session_id: "s",
    status: "awaiting_feedback",
    iteration: 1,
    items: [
      { pattern_id: 1, rendering: "{milk, bread}", kind: "set", support: 12, edges: [] },
      { pattern_id: 2, rendering: "a -> b -> c", kind: "sequence", support: 7, edges: [] },
      {
        pattern_id: 3,
        rendering: "vertices[...]",
        kind: "graph",
        support: 3,
        edges: [{ u: 0, v: 1, label: "1", u_label: "C", v_label: "N" }],
      },
    ],
    allowed_ratings: [1, 2, 3],
    rating_names: { "1": "dislike", "2": "not sure", "3": "like" },
  };
}

describe("pattern views", () => {
  it("renders sets as chips, sequences as chains, graphs as svg", () => {
    const [setItem, seqItem, graphItem] = request().items;
    const chips = patternView(setItem).querySelectorAll(".chip");
    expect([...chips].map((c) => c.textContent)).toEqual(["milk", "bread"]);
    const chain = patternView(seqItem);
    expect(chain.querySelectorAll(".chip.chain")).toHaveLength(3);
    expect(chain.querySelectorAll(".arrow")).toHaveLength(2);
    const svg = patternView(graphItem).querySelector("svg");
    expect(svg).not.toBeNull();
    expect(svg!.querySelectorAll("circle")).toHaveLength(2);
    expect(svg!.querySelectorAll("line")).toHaveLength(1);
  });
});

describe("rating cards", () => {
  it("enables submission only after every card is rated", () => {
    const batch = new RatingBatch(request());
    const container = document.createElement("div");
    let canSubmit = false;
    renderCards(container, batch, () => {
      canSubmit = batch.canSubmit();
    });
    const cards = container.querySelectorAll(".card");
    expect(cards).toHaveLength(3);
    // each card shows the display names
    expect(container.textContent).toContain("not sure");

    const radios = container.querySelectorAll<HTMLInputElement>("input[type=radio]");
    expect(radios).toHaveLength(9);
    // rate two of three cards
    radios[0].dispatchEvent(new Event("change"));
    radios[5].dispatchEvent(new Event("change"));
    expect(canSubmit).toBe(false);
    radios[8].dispatchEvent(new Event("change"));
    expect(canSubmit).toBe(true);
    expect(container.querySelectorAll(".card.rated")).toHaveLength(3);
  });
});

describe("progress and recommendations", () => {
  it("plots one point per iteration and marks convergence", () => {
    const container = document.createElement("div");
    const history = [
      { iteration: 1, theta_delta: 2.0, status: "running", feedback_count: 10, weighted_f_score: 0.7 },
      { iteration: 2, theta_delta: 0.5, status: "running", feedback_count: 20, weighted_f_score: 0.9 },
      { iteration: 3, theta_delta: 0.00005, status: "converged", feedback_count: 30, weighted_f_score: 0.95 },
    ];
    renderProgress(container, history, "converged");
    const rows = container.querySelectorAll("table.metrics tr");
    expect(rows).toHaveLength(4); // header + 3 iterations
    expect(container.querySelector(".converged-marker")).not.toBeNull();
    const deltaPoints = container
      .querySelector(".line.delta")!
      .getAttribute("points")!
      .split(" ");
    expect(deltaPoints).toHaveLength(3);
  });

  it("shows an explanatory empty state", () => {
    const container = document.createElement("div");
    renderRecommendations(container, []);
    expect(container.textContent).toContain("rate at least one batch");
    renderProgress(container, [], "running");
    expect(container.textContent).toContain("No iterations yet");
  });
});
