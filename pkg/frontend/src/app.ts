/** Application wiring: session setup, the play loop, and the glue
 * between the board, the picker, and the wire client.
 *
 * One session is active per page.  The loop always repaints from a
 * fresh board fetch, drives the engine with auto calls when it is the
 * engine's turn, and otherwise idles on a slow poll until the human
 * picks a move.
 */

import {
  ApiError,
  Client,
  type Board,
  type CatalogEntry,
  type MoveView,
  type Role,
} from "./api.js";
import { ROLE_WORDS, renderBoard } from "./board.js";
import { renderNotice, renderPicker } from "./picker.js";

export interface AppOptions {
  base?: string;
  /** Delay between engine steps; the idle human-turn poll runs at 10x this. */
  pollMs?: number;
  fetchFn?: (input: string, init?: RequestInit) => Promise<Response>;
}

export class App {
  readonly root: HTMLElement;
  readonly client: Client;
  private readonly pollMs: number;

  private setupEl!: HTMLElement;
  private boardEl!: HTMLElement;
  private pickerEl!: HTMLElement;
  private hintLine!: HTMLElement;

  private sessionId: string | null = null;
  private lastBoard: Board | null = null;
  private humanMoves = 0;
  private conflictNote: string | null = null;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private busy = false;
  private stopped = false;

  constructor(root: HTMLElement, opts: AppOptions = {}) {
    this.root = root;
    this.client = new Client(opts.base ?? "", opts.fetchFn);
    this.pollMs = opts.pollMs ?? 400;
  }

  /** Fetch the catalog and show the setup panel (or the retry banner). */
  async start(): Promise<void> {
    this.stopped = false;
    this.root.replaceChildren();
    this.setupEl = el("div", "setup");
    this.boardEl = el("div", "board-area");
    this.pickerEl = el("div", "picker");
    const controls = el("div", "controls");
    this.hintLine = el("span", "hint-line");
    const hintBtn = el("button", "hint", "hint") as HTMLButtonElement;
    hintBtn.type = "button";
    hintBtn.addEventListener("click", () => void this.showHint());
    const newBtn = el("button", "new-session", "new session") as HTMLButtonElement;
    newBtn.type = "button";
    newBtn.addEventListener("click", () => void this.start());
    controls.append(hintBtn, this.hintLine, newBtn);
    this.root.append(this.setupEl, this.boardEl, controls, this.pickerEl);

    this.sessionId = null;
    this.lastBoard = null;
    this.humanMoves = 0;
    this.root.dataset.humanMoves = "0";
    if (this.timer) clearTimeout(this.timer);
    this.timer = null;

    try {
      const catalog = await this.client.formulas();
      this.renderSetup(catalog);
    } catch (err) {
      this.renderRetry(err);
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.timer) clearTimeout(this.timer);
    this.timer = null;
  }

  // -- setup panel ---------------------------------------------------

  private renderRetry(err: unknown): void {
    this.setupEl.replaceChildren();
    const banner = el("div", "banner banner-retry");
    banner.textContent = `cannot reach the session service: ${message(err)}`;
    const retry = el("button", "retry", "retry") as HTMLButtonElement;
    retry.type = "button";
    retry.addEventListener("click", () => void this.start());
    banner.append(retry);
    this.setupEl.append(banner);
  }

  private renderSetup(catalog: CatalogEntry[]): void {
    this.setupEl.replaceChildren();
    const form = el("form", "session-setup");
    form.addEventListener("submit", (ev) => ev.preventDefault());

    const formula = document.createElement("select");
    formula.className = "formula";
    for (const entry of catalog) {
      const opt = document.createElement("option");
      opt.value = entry.name;
      opt.textContent = `${entry.name}  (${entry.description})`;
      formula.append(opt);
    }

    const roles = el("span", "roles");
    for (const role of ["player", "opponent"] as Role[]) {
      const label = document.createElement("label");
      const radio = document.createElement("input");
      radio.type = "radio";
      radio.name = "role";
      radio.value = role;
      radio.checked = role === "player";
      label.append(radio, ` ${ROLE_WORDS[role]}`);
      roles.append(label);
    }

    const engine = document.createElement("select");
    engine.className = "engine";
    for (const name of ["greedy", "scripted"]) {
      const opt = document.createElement("option");
      opt.value = name;
      opt.textContent = `${name} engine`;
      engine.append(opt);
    }

    const startBtn = el("button", "start", "start session") as HTMLButtonElement;
    startBtn.type = "submit";
    startBtn.addEventListener("click", () => void this.createSession(form));

    const note = el("p", "setup-notice");
    form.append(formula, roles, engine, startBtn, note);
    this.setupEl.append(form);
  }

  private async createSession(form: HTMLElement): Promise<void> {
    const formula = (form.querySelector("select.formula") as HTMLSelectElement).value;
    const role = (
      form.querySelector('input[name="role"]:checked') as HTMLInputElement
    ).value as Role;
    const engine = (form.querySelector("select.engine") as HTMLSelectElement)
      .value as "greedy" | "scripted";
    const note = form.querySelector(".setup-notice") as HTMLElement;
    note.textContent = "";
    try {
      const board = await this.client.create({
        formula,
        human_role: role,
        engine,
      });
      this.sessionId = board.id;
      this.humanMoves = 0;
      this.root.dataset.humanMoves = "0";
      this.setupEl.replaceChildren();
      this.paint(board);
      this.schedule(0);
    } catch (err) {
      note.textContent = message(err);
    }
  }

  // -- play loop -------------------------------------------------------

  private paint(board: Board): void {
    renderBoard(this.boardEl, board, this.lastBoard);
    this.lastBoard = board;
    this.root.dispatchEvent(new CustomEvent("board-painted", { detail: board }));
  }

  private schedule(ms: number): void {
    if (this.stopped) return;
    if (this.timer) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.run();
    }, ms);
  }

  private async run(): Promise<void> {
    if (this.busy || this.stopped || !this.sessionId) return;
    this.busy = true;
    try {
      await this.step();
    } catch (err) {
      renderNotice(this.pickerEl, message(err));
      this.schedule(this.pollMs * 10);
    } finally {
      this.busy = false;
    }
  }

  private async step(): Promise<void> {
    const id = this.sessionId;
    if (!id) return;
    const board = await this.client.board(id);
    this.paint(board);
    if (board.closed) {
      this.pickerEl.replaceChildren();
      return;
    }
    if (board.turn === board.engine_role) {
      try {
        await this.client.auto(id);
      } catch (err) {
        if (!(err instanceof ApiError && err.status === 409)) throw err;
      }
      this.schedule(this.pollMs);
      return;
    }
    const listing = await this.client.moves(id);
    if (this.pickerEl.dataset.version !== String(listing.version)) {
      renderPicker(this.pickerEl, listing, (move) => void this.pick(move));
      if (this.conflictNote) {
        renderNotice(this.pickerEl, this.conflictNote);
        this.conflictNote = null;
      }
      this.root.dispatchEvent(new CustomEvent("picker-painted", { detail: listing }));
    }
    this.schedule(this.pollMs * 10);
  }

  private async pick(move: MoveView): Promise<void> {
    const id = this.sessionId;
    if (!id) return;
    try {
      await this.client.submit(id, move.token);
      this.humanMoves += 1;
      this.root.dataset.humanMoves = String(this.humanMoves);
      this.hintLine.textContent = "";
      this.pickerEl.replaceChildren();
      delete this.pickerEl.dataset.version;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale token: the board advanced under us; refresh and re-pick
        this.conflictNote = `the board has moved on, pick again (${err.message})`;
        delete this.pickerEl.dataset.version;
      } else {
        renderNotice(this.pickerEl, message(err));
      }
    }
    this.schedule(0);
  }

  private async showHint(): Promise<void> {
    const id = this.sessionId;
    if (!id) return;
    try {
      const hint = await this.client.hint(id);
      this.hintLine.textContent = `suggestion: ${hint.annotation}`;
    } catch (err) {
      this.hintLine.textContent = message(err);
    }
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export function createApp(root: HTMLElement, opts: AppOptions = {}): App {
  return new App(root, opts);
}
