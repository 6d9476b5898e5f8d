import { expect, test } from "vitest";
import type { Board } from "../src/api.js";
import { newEntries, renderBoard, winnerRole } from "../src/board.js";

function board(partial: Partial<Board> = {}): Board {
  return {
    id: "s1",
    name: "demo",
    version: 0,
    turn: "opponent",
    human_role: "player",
    engine: "greedy",
    engine_role: "opponent",
    u: [],
    v: [],
    a: [],
    fresh_count: 0,
    closed: false,
    outcome: { kind: "ongoing", reason: "", steps: 0 },
    ...partial,
  };
}

test("newEntries flags additions multiset-style, not survivors", () => {
  expect(newEntries(null, ["x"])).toEqual(new Set([0]));
  expect(newEntries(["x"], ["x"])).toEqual(new Set());
  expect(newEntries(["x"], ["x", "x"])).toEqual(new Set([1]));
  expect(newEntries(["x", "y"], ["y", "z"])).toEqual(new Set([1]));
});

test("winnerRole reads the outcome kind", () => {
  expect(winnerRole(board())).toBeNull();
  expect(
    winnerRole(
      board({ outcome: { kind: "player-wins", reason: "v-empty", steps: 6 } }),
    ),
  ).toBe("player");
  expect(
    winnerRole(
      board({
        outcome: { kind: "opponent-wins-at-cap", reason: "budget", steps: 9 },
      }),
    ),
  ).toBe("opponent");
});

test("renders exactly the fetched formulas, in order, in three columns", () => {
  const el = document.createElement("div");
  renderBoard(
    el,
    board({ u: ["A -> B", "C"], v: ["D"], a: ["false", "E"] }),
    null,
  );
  const texts = (sel: string) =>
    [...el.querySelectorAll(`${sel} li`)].map((li) => li.textContent);
  expect(texts(".col-u")).toEqual(["A -> B", "C"]);
  expect(texts(".col-v")).toEqual(["D"]);
  expect(texts(".col-a")).toEqual(["false", "E"]);
});

test("entries that appeared since the previous paint get the highlight", () => {
  const el = document.createElement("div");
  const before = board({ a: ["false"] });
  const after = board({ a: ["false", "P(a)"], version: 1 });
  renderBoard(el, after, before);
  const items = [...el.querySelectorAll(".col-a li")];
  expect(items[0]!.classList.contains("new")).toBe(false);
  expect(items[1]!.classList.contains("new")).toBe(true);
});

test("turn banner tracks whose move it is", () => {
  const el = document.createElement("div");
  renderBoard(el, board({ turn: "player" }), null);
  expect(el.querySelector(".banner")!.textContent).toBe("your turn");
  renderBoard(el, board({ turn: "opponent" }), null);
  expect(el.querySelector(".banner")!.textContent).toBe("engine to move");
});

test("closed sessions show a win or loss banner for the human side", () => {
  const el = document.createElement("div");
  renderBoard(
    el,
    board({
      closed: true,
      outcome: { kind: "player-wins", reason: "v-empty", steps: 6 },
    }),
    null,
  );
  const win = el.querySelector(".banner-win")!;
  expect(win.textContent).toContain("you win");
  expect(win.textContent).toContain("v-empty");

  renderBoard(
    el,
    board({
      closed: true,
      human_role: "opponent",
      outcome: { kind: "player-wins", reason: "v-empty", steps: 6 },
    }),
    null,
  );
  expect(el.querySelector(".banner-loss")!.textContent).toContain("engine wins");
});

test("role badge names the human side by what it does", () => {
  const el = document.createElement("div");
  renderBoard(el, board(), null);
  expect(el.querySelector(".role-badge")!.textContent).toBe(
    "you play the receiver",
  );
  renderBoard(el, board({ human_role: "opponent" }), null);
  expect(el.querySelector(".role-badge")!.textContent).toBe(
    "you play the sender",
  );
});
