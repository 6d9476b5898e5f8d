/** Board rendering: the three formula columns plus the status banners.
 *
 * The board is drawn strictly from the last state fetched over the
 * wire.  The only computation here is a display diff against the
 * previously rendered board so entries that just appeared get a
 * highlight class.
 */

import type { Board, Role } from "./api.js";

export const ROLE_WORDS: Record<Role, string> = {
  player: "receiver",
  opponent: "sender",
};

const COLUMNS: Array<{ field: "u" | "v" | "a"; title: string; detail: string }> = [
  { field: "u", title: "U", detail: "receiver may transmit" },
  { field: "v", title: "V", detail: "receiver still owes" },
  { field: "a", title: "A", detail: "sender has conceded" },
];

/** Indexes in `next` that were not already present in `prev` (multiset view). */
export function newEntries(prev: string[] | null, next: string[]): Set<number> {
  const fresh = new Set<number>();
  const budget = new Map<string, number>();
  for (const s of prev ?? []) {
    budget.set(s, (budget.get(s) ?? 0) + 1);
  }
  next.forEach((s, i) => {
    const left = budget.get(s) ?? 0;
    if (left > 0) {
      budget.set(s, left - 1);
    } else {
      fresh.add(i);
    }
  });
  return fresh;
}

export function winnerRole(board: Board): Role | null {
  if (board.outcome.kind === "player-wins") return "player";
  if (board.outcome.kind === "opponent-wins-at-cap") return "opponent";
  return null;
}

function banner(board: Board): HTMLElement {
  const el = document.createElement("div");
  if (board.closed) {
    const winner = winnerRole(board);
    const humanWon = winner !== null && winner === board.human_role;
    el.className = humanWon ? "banner banner-win" : "banner banner-loss";
    const who = winner === null ? "nobody" : ROLE_WORDS[winner];
    const tag = humanWon ? "you win" : "engine wins";
    el.textContent = `${tag}: the ${who} takes the session (${board.outcome.reason})`;
  } else if (board.turn === board.human_role) {
    el.className = "banner banner-turn";
    el.textContent = "your turn";
  } else {
    el.className = "banner banner-wait";
    el.textContent = "engine to move";
  }
  return el;
}

function roleBadge(board: Board): HTMLElement {
  const el = document.createElement("span");
  el.className = "role-badge";
  el.textContent = `you play the ${ROLE_WORDS[board.human_role]}`;
  return el;
}

function column(
  spec: (typeof COLUMNS)[number],
  board: Board,
  prev: Board | null,
): HTMLElement {
  const sec = document.createElement("section");
  sec.className = `col col-${spec.field}`;
  const h = document.createElement("h3");
  h.textContent = spec.title;
  const hint = document.createElement("small");
  hint.textContent = ` ${spec.detail}`;
  h.append(hint);
  sec.append(h);
  const list = document.createElement("ol");
  const fresh = newEntries(prev ? prev[spec.field] : null, board[spec.field]);
  board[spec.field].forEach((formula, i) => {
    const li = document.createElement("li");
    li.textContent = formula;
    if (fresh.has(i)) li.classList.add("new");
    list.append(li);
  });
  sec.append(list);
  return sec;
}

/** Replace `el`'s content with the rendered board. */
export function renderBoard(el: HTMLElement, board: Board, prev: Board | null): void {
  el.replaceChildren();
  const head = document.createElement("div");
  head.className = "board-head";
  const name = document.createElement("span");
  name.className = "session-name";
  name.textContent = board.name;
  head.append(name, roleBadge(board), banner(board));
  el.append(head);

  const cols = document.createElement("div");
  cols.className = "columns";
  for (const spec of COLUMNS) {
    cols.append(column(spec, board, prev));
  }
  el.append(cols);
  el.dataset.version = String(board.version);
}
