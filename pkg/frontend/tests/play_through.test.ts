/** Wire tests: the full client running against a live service process.
 *
 * The first test plays the single-packet session as the human receiver
 * against the scripted sender and must reach the win banner in exactly
 * three human moves (offer a header, acknowledge the packet, close).
 * The second takes the sender's seat and checks the picker after the
 * engine's header offer: exactly two ways to go, echo the offered
 * header as a close request or send a fresh packet.
 */

import { afterAll, afterEach, beforeAll, expect, test } from "vitest";
import { App, createApp } from "../src/app.js";
import { startService, waitFor, type Service } from "./helpers.js";

let svc: Service;
const mounted: Array<{ root: HTMLElement; app: App }> = [];

beforeAll(async () => {
  svc = await startService();
});

afterAll(() => {
  svc?.stop();
});

afterEach(() => {
  for (const { root, app } of mounted.splice(0)) {
    app.stop();
    root.remove();
  }
});

function mount(): { root: HTMLElement; app: App } {
  const root = document.createElement("div");
  document.body.append(root);
  const app = createApp(root, { base: svc.base, pollMs: 25 });
  mounted.push({ root, app });
  return { root, app };
}

async function openSession(
  root: HTMLElement,
  app: App,
  formula: string,
  role: "player" | "opponent",
  engine: "greedy" | "scripted",
): Promise<void> {
  await app.start();
  const select = await waitFor(() =>
    root.querySelector<HTMLSelectElement>("select.formula"),
  );
  select.value = formula;
  const radio = root.querySelector<HTMLInputElement>(
    `input[name="role"][value="${role}"]`,
  );
  radio!.checked = true;
  root.querySelector<HTMLSelectElement>("select.engine")!.value = engine;
  root.querySelector<HTMLButtonElement>("button.start")!.click();
}

test("human receiver reaches the win banner in three moves against the scripted sender", async () => {
  const { root, app } = mount();
  await openSession(root, app, "drinker", "player", "scripted");

  for (const kind of ["HeaderOffer", "Ack", "Close"]) {
    const btn = await waitFor(() =>
      root.querySelector<HTMLButtonElement>(
        `.move-class[data-kind="${kind}"] button.move`,
      ),
    );
    btn.click();
  }

  const banner = await waitFor(() => root.querySelector(".banner-win"));
  expect(banner.textContent).toContain("you win");
  expect(banner.textContent).toContain("v-empty");
  expect(root.dataset.humanMoves).toBe("3");
});

test("sender picker after the engine's header offer shows exactly two move classes", async () => {
  const { root, app } = mount();
  await openSession(root, app, "drinker", "opponent", "greedy");

  const openBtn = await waitFor(() =>
    root.querySelector<HTMLButtonElement>(
      '.move-class[data-kind="Open"] button.move',
    ),
  );
  openBtn.click();

  await waitFor(() =>
    root.querySelector('.move-class[data-kind="CloseRequest"]'),
  );
  const classes = [...root.querySelectorAll<HTMLElement>(".move-class")];
  expect(classes.map((c) => c.dataset.kind).sort()).toEqual([
    "CloseRequest",
    "Send",
  ]);

  const send = root.querySelector('.move-class[data-kind="Send"] button.move');
  expect(send!.textContent).toContain("fresh");
  const close = root.querySelector(
    '.move-class[data-kind="CloseRequest"] button.move',
  );
  expect(close!.textContent).toContain("echoes an offered header");
});

test("the hint line carries the engine's suggestion on the human's turn", async () => {
  const { root, app } = mount();
  await openSession(root, app, "p_implies_p", "player", "greedy");

  await waitFor(() => root.querySelector(".move-class"));
  root.querySelector<HTMLButtonElement>("button.hint")!.click();
  const line = await waitFor(() => {
    const el = root.querySelector<HTMLElement>(".hint-line");
    return el && el.textContent ? el : null;
  });
  expect(line.textContent).toContain("suggestion:");
});
