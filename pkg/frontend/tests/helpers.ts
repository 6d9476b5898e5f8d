/** Shared test plumbing: spawn the real session service as a child
 * process for wire tests, and poll-based waiting for DOM conditions.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

export interface Service {
  base: string;
  stop: () => void;
}

const repoRoot = path.resolve(
  path.dirname(fileURLToPath(import.meta.url)),
  "..",
  "..",
);

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function ready(base: string, proc: ChildProcess): Promise<boolean> {
  for (let i = 0; i < 100; i++) {
    if (proc.exitCode !== null) return false;
    try {
      const res = await fetch(`${base}/api/formulas`);
      if (res.ok) return true;
    } catch {
      // not listening yet
    }
    await sleep(150);
  }
  return false;
}

export async function startService(): Promise<Service> {
  for (let attempt = 0; attempt < 5; attempt++) {
    const port = 18000 + Math.floor(Math.random() * 4000);
    const store = mkdtempSync(path.join(tmpdir(), "play-ui-"));
    const proc = spawn(
      "python3",
      [
        "-m",
        "lproto.cli",
        "serve",
        "--host",
        "127.0.0.1",
        "--port",
        String(port),
        "--store",
        store,
      ],
      { cwd: repoRoot, stdio: ["ignore", "ignore", "pipe"] },
    );
    const base = `http://127.0.0.1:${port}`;
    if (await ready(base, proc)) {
      return {
        base,
        stop: () => {
          proc.kill("SIGKILL");
        },
      };
    }
    proc.kill("SIGKILL");
  }
  throw new Error("could not start the session service on any port");
}

export async function waitFor<T>(
  probe: () => T | null | undefined | false,
  timeoutMs = 20_000,
  stepMs = 25,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = probe();
    if (got) return got;
    if (Date.now() > deadline) {
      throw new Error("timed out waiting for a DOM condition");
    }
    await sleep(stepMs);
  }
}
