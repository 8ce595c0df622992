// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import {
  renderClipOptions,
  renderHistory,
  renderRoundCard,
  renderScoreMeter,
  renderWeightBar,
} from "../src/render.js";
import type { RoundCard, SessionTab } from "../src/state.js";

function card(n: number, extra: Partial<RoundCard> = {}): RoundCard {
  return {
    round: n,
    question: `question ${n} ?`,
    answer: `answer ${n}`,
    keywordHit: false,
    r: 0.85,
    mode: "estimator-calibrate",
    ...extra,
  };
}

function tab(cards: RoundCard[], historyWindow = 3): SessionTab {
  return {
    sessionId: "s1",
    clipId: "clip0000",
    caption: "cap",
    historyWindow,
    cards,
    pending: false,
    error: null,
    draft: "",
  };
}

describe("score meter", () => {
  it("shows the exact server value and the 0.7 marker", () => {
    const meter = renderScoreMeter(0.912345);
    expect(meter.dataset.r).toBe("0.912345"); // byte-for-byte server value
    const label = meter.querySelector(".r-meter-label")!;
    expect(label.textContent).toBe("r = 0.912345");
    const fill = meter.querySelector(".r-meter-fill") as HTMLElement;
    expect(fill.style.width).toBe("91.2345%");
    const marker = meter.querySelector(".r-meter-marker") as HTMLElement;
    expect(marker.style.left).toBe("70%");
  });
});

describe("weight bar", () => {
  it("splits audio vs video as r against 1 - r", () => {
    const bar = renderWeightBar(0.25);
    const audio = bar.querySelector(".weight-audio") as HTMLElement;
    const video = bar.querySelector(".weight-video") as HTMLElement;
    expect(audio.style.width).toBe("25%");
    expect(video.style.width).toBe("75%");
  });
});

describe("round card", () => {
  it("renders question, answer, badge and meter for a scored round", () => {
    const node = renderRoundCard(card(1, { keywordHit: true, r: 0.99 }), false);
    expect(node.querySelector(".question")!.textContent).toBe("question 1 ?");
    expect(node.querySelector(".answer")!.textContent).toBe("answer 1");
    expect(node.querySelector(".keyword-badge")).not.toBeNull();
    expect(node.querySelector(".r-meter")).not.toBeNull();
    expect(node.querySelector(".gating-mode")!.textContent)
      .toBe("estimator-calibrate");
  });

  it("omits badge and meter when the server sent none", () => {
    const node = renderRoundCard(
      card(2, { keywordHit: false, r: null, mode: "none" }), false);
    expect(node.querySelector(".keyword-badge")).toBeNull();
    expect(node.querySelector(".r-meter")).toBeNull();
    expect(node.querySelector(".weight-bar")).toBeNull();
  });

  it("marks in-context rounds", () => {
    const node = renderRoundCard(card(3), true);
    expect(node.classList.contains("in-context")).toBe(true);
    expect(node.querySelector(".context-tag")).not.toBeNull();
  });
});

describe("history panel", () => {
  it("renders one card per server round and flags the window", () => {
    const cards = [card(1), card(2), card(3), card(4)];
    const panel = renderHistory(tab(cards));
    expect(panel.dataset.rounds).toBe("4");
    const nodes = Array.from(panel.querySelectorAll(".round-card"));
    expect(nodes).toHaveLength(4);
    const flagged = nodes
      .filter((n) => n.classList.contains("in-context"))
      .map((n) => (n as HTMLElement).dataset.round);
    expect(flagged).toEqual(["2", "3", "4"]);
  });

  it("appends an error card when the tab carries an error", () => {
    const t = tab([card(1)]);
    t.error = "network error - retry";
    const panel = renderHistory(t);
    expect(panel.querySelector(".error-card")).not.toBeNull();
    expect(panel.querySelector(".error-text")!.textContent)
      .toMatch(/network error/);
  });
});

describe("clip selector", () => {
  it("lists clips as options", () => {
    const node = renderClipOptions([
      { clip_id: "clip0000", length: 24, caption: "a" },
      { clip_id: "clip0001", length: 24, caption: "b" },
    ]);
    const options = node.querySelectorAll("option");
    expect(options).toHaveLength(2);
    expect(options[0].value).toBe("clip0000");
  });

  it("guides toward the data CLI when no clips exist", () => {
    const node = renderClipOptions([]);
    expect(node.classList.contains("clips-empty")).toBe(true);
    expect(node.textContent).toContain("hear synth-data");
  });
});
