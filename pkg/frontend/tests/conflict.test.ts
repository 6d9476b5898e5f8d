/** The stale-token path, driven against an in-memory fake service:
 * a submit that answers 409 must make the app refresh the board,
 * re-render the picker from a fresh listing, and prompt for a re-pick,
 * and the human's next pick must go through.
 */

import { expect, test } from "vitest";
import { createApp } from "../src/app.js";
import { waitFor } from "./helpers.js";

interface FakeState {
  version: number;
  closed: boolean;
  submits: number;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function fakeService(state: FakeState) {
  const board = () => ({
    id: "fake1",
    name: "demo",
    version: state.version,
    turn: "player",
    human_role: "player",
    engine: "greedy",
    engine_role: "opponent",
    u: ["P(a)"],
    v: state.closed ? [] : ["P(a)"],
    a: ["false", "P(a)"],
    fresh_count: 0,
    closed: state.closed,
    outcome: state.closed
      ? { kind: "player-wins", reason: "v-empty", steps: 2 }
      : { kind: "ongoing", reason: "", steps: 1 },
  });
  const listing = () => ({
    version: state.version,
    turn: "player",
    closed: false,
    moves: [
      {
        token: `tok-${state.version}`,
        formula: "P(a)",
        values: [],
        annotation: "close P(a)",
        kind: "Close",
        loses_immediately: false,
      },
    ],
  });

  return async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    if (input.endsWith("/api/formulas")) {
      return jsonResponse({
        formulas: [
          {
            name: "demo",
            file: "examples.lp",
            description: "one packet handed over and handed back",
            source: "P(a) -> P(a)",
            expected: "Valid",
            omega: false,
          },
        ],
      });
    }
    if (input.endsWith("/api/sessions") && method === "POST") {
      return jsonResponse(board(), 201);
    }
    if (input.endsWith("/moves") && method === "POST") {
      state.submits += 1;
      if (state.submits === 1) {
        // pretend the board advanced between listing and submit
        state.version += 1;
        return jsonResponse(
          { error: "token matches no currently legal move" },
          409,
        );
      }
      state.closed = true;
      return jsonResponse(board());
    }
    if (input.endsWith("/moves")) {
      return jsonResponse(listing());
    }
    if (input.includes("/api/sessions/")) {
      return jsonResponse(board());
    }
    return jsonResponse({ error: `no route for ${method} ${input}` }, 404);
  };
}

test("a stale pick refreshes the picker, prompts a re-pick, and the retry lands", async () => {
  const state: FakeState = { version: 1, closed: false, submits: 0 };
  const root = document.createElement("div");
  document.body.append(root);
  const app = createApp(root, { fetchFn: fakeService(state), pollMs: 10 });
  await app.start();

  (await waitFor(() => root.querySelector<HTMLButtonElement>("button.start"))).click();

  const firstPick = await waitFor(() =>
    root.querySelector<HTMLButtonElement>('button.move[data-token="tok-1"]'),
  );
  firstPick.click();

  // conflict: notice appears and the picker now carries the fresh token
  const notice = await waitFor(() => root.querySelector(".picker-notice"));
  expect(notice.textContent).toContain("pick again");
  const secondPick = await waitFor(() =>
    root.querySelector<HTMLButtonElement>('button.move[data-token="tok-2"]'),
  );
  expect(root.dataset.humanMoves).toBe("0");

  secondPick.click();
  await waitFor(() => root.querySelector(".banner-win"));
  expect(root.dataset.humanMoves).toBe("1");
  expect(state.submits).toBe(2);

  app.stop();
  root.remove();
});
