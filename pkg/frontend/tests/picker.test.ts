import { expect, test } from "vitest";
import type { MoveListing, MoveView } from "../src/api.js";
import {
  describeValues,
  groupMoves,
  renderNotice,
  renderPicker,
} from "../src/picker.js";

function move(partial: Partial<MoveView> = {}): MoveView {
  return {
    token: "tok",
    formula: "P(a)",
    values: [],
    annotation: "send P(a)",
    kind: "Send",
    loses_immediately: false,
    ...partial,
  };
}

test("groups moves by kind, preserving first-seen order", () => {
  const groups = groupMoves([
    move({ kind: "CloseRequest", token: "a" }),
    move({ kind: "Send", token: "b" }),
    move({ kind: "Send", token: "c" }),
  ]);
  expect(groups.map((g) => g.kind)).toEqual(["CloseRequest", "Send"]);
  expect(groups[1]!.moves.map((m) => m.token)).toEqual(["b", "c"]);
});

test("unknown kinds fall back to the raw kind as the label", () => {
  const groups = groupMoves([move({ kind: "SomethingNew" })]);
  expect(groups[0]!.label).toBe("SomethingNew");
});

test("value choices render with the fresh marker and integer literals", () => {
  expect(describeValues(move())).toBe("");
  expect(
    describeValues(
      move({
        values: [
          { sort: "ack", value: "#1", display: "fresh", fresh: true },
          { sort: "int", value: 2, display: "2" },
        ],
      }),
    ),
  ).toBe("with fresh, 2");
});

test("picker shows formula, values, and annotation on each button", () => {
  const el = document.createElement("div");
  const listing: MoveListing = {
    version: 4,
    turn: "opponent",
    closed: false,
    moves: [
      move({
        formula: "forall y. (P(#0) -> P(y))",
        values: [{ sort: "ack", value: "#1", display: "fresh", fresh: true }],
        annotation: "send P(#1)",
      }),
    ],
  };
  renderPicker(el, listing, () => {});
  const btn = el.querySelector("button.move")!;
  expect(btn.textContent).toContain("forall y. (P(#0) -> P(y))");
  expect(btn.textContent).toContain("fresh");
  expect(btn.textContent).toContain("send P(#1)");
  expect(el.dataset.version).toBe("4");
});

test("clicking a move hands back exactly that move", () => {
  const el = document.createElement("div");
  const picked: MoveView[] = [];
  const listing: MoveListing = {
    version: 1,
    turn: "player",
    closed: false,
    moves: [move({ token: "first" }), move({ token: "second", kind: "Close" })],
  };
  renderPicker(el, listing, (m) => picked.push(m));
  const buttons = [...el.querySelectorAll<HTMLButtonElement>("button.move")];
  buttons[1]!.click();
  expect(picked.map((m) => m.token)).toEqual(["second"]);
});

test("a forfeiting move is marked so the human sees the trap", () => {
  const el = document.createElement("div");
  const listing: MoveListing = {
    version: 1,
    turn: "opponent",
    closed: false,
    moves: [move({ kind: "OpponentForfeit", loses_immediately: true })],
  };
  renderPicker(el, listing, () => {});
  expect(el.querySelector("button.move.forfeits")).not.toBeNull();
});

test("renderNotice keeps at most one notice line", () => {
  const el = document.createElement("div");
  renderNotice(el, "first warning");
  renderNotice(el, "second warning");
  const notices = el.querySelectorAll(".picker-notice");
  expect(notices.length).toBe(1);
  expect(notices[0]!.textContent).toBe("second warning");
  renderNotice(el, null);
  expect(el.querySelector(".picker-notice")).toBeNull();
});
