/** Move picker: the legal moves fetched from the service, grouped into
 * classes by their wire-event kind, one button per concrete move.
 *
 * The picker never invents a move.  Every button carries a token the
 * service minted for the current board version, and picking just sends
 * the token back.
 */

import type { MoveListing, MoveView } from "./api.js";

export interface MoveClass {
  kind: string;
  label: string;
  moves: MoveView[];
}

const KIND_LABELS: Record<string, string> = {
  Open: "open the session",
  HeaderOffer: "offer a header",
  Send: "send a packet",
  Ack: "acknowledge a packet",
  AckLoss: "let an acknowledgement go missing",
  Reinit: "restart the session",
  CloseRequest: "request a close",
  Close: "close the session",
  OpponentForfeit: "break a guard and forfeit",
  Unclassified: "other",
};

export function classLabel(kind: string): string {
  return KIND_LABELS[kind] ?? kind;
}

/** Group moves by kind, preserving first-seen order. */
export function groupMoves(moves: MoveView[]): MoveClass[] {
  const classes = new Map<string, MoveClass>();
  for (const move of moves) {
    let cls = classes.get(move.kind);
    if (!cls) {
      cls = { kind: move.kind, label: classLabel(move.kind), moves: [] };
      classes.set(move.kind, cls);
    }
    cls.moves.push(move);
  }
  return [...classes.values()];
}

/** "with n := 2, x := fresh" for the move's quantifier choices. */
export function describeValues(move: MoveView): string {
  if (move.values.length === 0) return "";
  return "with " + move.values.map((v) => v.display).join(", ");
}

function moveButton(move: MoveView, onPick: (move: MoveView) => void): HTMLElement {
  const btn = document.createElement("button");
  btn.type = "button";
  btn.className = "move";
  btn.dataset.token = move.token;
  if (move.loses_immediately) btn.classList.add("forfeits");

  const formula = document.createElement("span");
  formula.className = "mv-formula";
  formula.textContent = move.formula;
  btn.append(formula);

  const values = describeValues(move);
  if (values) {
    const v = document.createElement("span");
    v.className = "mv-values";
    v.textContent = " " + values;
    btn.append(v);
  }

  const note = document.createElement("span");
  note.className = "mv-annotation";
  note.textContent = move.annotation;
  btn.append(note);

  btn.addEventListener("click", () => onPick(move));
  return btn;
}

/** Replace `el`'s content with the picker for `listing`. */
export function renderPicker(
  el: HTMLElement,
  listing: MoveListing,
  onPick: (move: MoveView) => void,
): void {
  el.replaceChildren();
  el.dataset.version = String(listing.version);
  for (const cls of groupMoves(listing.moves)) {
    const box = document.createElement("fieldset");
    box.className = "move-class";
    box.dataset.kind = cls.kind;
    const legend = document.createElement("legend");
    legend.textContent = cls.label;
    box.append(legend);
    for (const move of cls.moves) {
      box.append(moveButton(move, onPick));
    }
    el.append(box);
  }
}

/** One-line notice above the picker, e.g. after a stale-token conflict. */
export function renderNotice(el: HTMLElement, message: string | null): void {
  const old = el.querySelector(".picker-notice");
  if (old) old.remove();
  if (!message) return;
  const p = document.createElement("p");
  p.className = "picker-notice";
  p.textContent = message;
  el.prepend(p);
}
