/** Typed client for the session service wire API.
 *
 * Every request goes over HTTP to the Python engine; the client holds
 * no rule logic of its own.  Non-2xx responses become ApiError with the
 * service's message, and network failures become ApiError with status 0
 * so callers can tell "service said no" from "service unreachable".
 */

export type Role = "player" | "opponent";

export interface ValueView {
  sort: "ack" | "int";
  value: string | number;
  display: string;
  fresh?: boolean;
}

export interface MoveView {
  token: string;
  formula: string;
  values: ValueView[];
  annotation: string;
  kind: string;
  loses_immediately: boolean;
}

export interface MoveListing {
  version: number;
  turn: Role;
  closed: boolean;
  moves: MoveView[];
}

export interface Outcome {
  kind: string;
  reason: string;
  steps: number;
}

export interface Board {
  id: string;
  name: string;
  version: number;
  turn: Role;
  human_role: Role;
  engine: string;
  engine_role: Role;
  u: string[];
  v: string[];
  a: string[];
  fresh_count: number;
  closed: boolean;
  outcome: Outcome;
}

export interface CatalogEntry {
  name: string;
  file: string;
  description: string;
  source: string;
  expected: string | null;
  omega: boolean;
}

export interface SessionRequest {
  formula: string;
  human_role: Role;
  engine: "greedy" | "scripted";
  limits?: Record<string, number>;
}

export interface TranscriptView {
  table: unknown;
  records: unknown[];
  timeline: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Client {
  private readonly fetchFn: FetchLike;

  constructor(readonly base: string = "", fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async call<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const text = await res.text();
    let data: unknown = null;
    if (text) {
      try {
        data = JSON.parse(text);
      } catch {
        data = null;
      }
    }
    if (!res.ok) {
      const message =
        data && typeof data === "object" && "error" in data
          ? String((data as { error: unknown }).error)
          : `${res.status} ${res.statusText}`;
      throw new ApiError(res.status, message);
    }
    return data as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.call<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async formulas(): Promise<CatalogEntry[]> {
    const res = await this.call<{ formulas: CatalogEntry[] }>("/api/formulas");
    return res.formulas;
  }

  create(req: SessionRequest): Promise<Board> {
    return this.post("/api/sessions", req);
  }

  board(id: string): Promise<Board> {
    return this.call(`/api/sessions/${id}`);
  }

  moves(id: string): Promise<MoveListing> {
    return this.call(`/api/sessions/${id}/moves`);
  }

  submit(id: string, token: string): Promise<Board> {
    return this.post(`/api/sessions/${id}/moves`, { token });
  }

  auto(id: string): Promise<Board> {
    return this.post(`/api/sessions/${id}/auto`, {});
  }

  hint(id: string): Promise<MoveView> {
    return this.call(`/api/sessions/${id}/hint`);
  }

  transcript(id: string): Promise<TranscriptView> {
    return this.call(`/api/sessions/${id}/transcript`);
  }
}
