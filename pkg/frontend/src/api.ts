/** Thin typed client for the charla HTTP API.
 *
 * The fetch implementation is injectable so tests can run without a
 * network and the browser build can pass the real one.
 */

export interface BotEvent {
  seq: number;
  at: string;
  type: string;
  engine: string;
  text: string;
  keyboard: string[] | null;
}

export interface EventsPage {
  events: BotEvent[];
  cursor: number;
}

export interface AlertRow {
  alias: string;
  pattern: string;
  excerpt: string;
  at: string;
  delivered: boolean;
}

export interface AlertsPage {
  alerts: AlertRow[];
  cursor: number;
}

export interface RankingRow {
  alias: string;
  messages: number;
}

export interface Stats {
  sessions: number;
  turns_logged: number;
  alerts_total: number;
  profiles: number;
  phases: Record<string, number>;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  private readonly doFetch: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
    private readonly opsToken?: string,
  ) {
    const impl = fetchImpl ?? globalThis.fetch;
    if (!impl) throw new Error("no fetch implementation available");
    this.doFetch = impl.bind(globalThis);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.doFetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, `${init?.method ?? "GET"} ${path} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  private opsInit(): RequestInit {
    if (!this.opsToken) return {};
    return { headers: { Authorization: `Bearer ${this.opsToken}` } };
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ session_id: string }>("/api/sessions", { method: "POST" });
    return body.session_id;
  }

  async sendMessage(sessionId: string, text: string, kind = "text"): Promise<void> {
    await this.request(`/api/sessions/${encodeURIComponent(sessionId)}/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text, kind }),
    });
  }

  async events(sessionId: string, since = 0, timeout = 0): Promise<EventsPage> {
    const query = `since=${since}&timeout=${timeout}`;
    return this.request<EventsPage>(
      `/api/sessions/${encodeURIComponent(sessionId)}/events?${query}`,
    );
  }

  async opsAlerts(since = 0): Promise<AlertsPage> {
    return this.request<AlertsPage>(`/api/ops/alerts?since=${since}`, this.opsInit());
  }

  async opsRanking(n = 10): Promise<RankingRow[]> {
    const body = await this.request<{ ranking: RankingRow[] }>(
      `/api/ops/ranking?n=${n}`,
      this.opsInit(),
    );
    return body.ranking;
  }

  async opsStats(): Promise<Stats> {
    return this.request<Stats>("/api/ops/stats", this.opsInit());
  }

  async health(): Promise<boolean> {
    try {
      const body = await this.request<{ ok: boolean }>("/healthz");
      return body.ok === true;
    } catch {
      return false;
    }
  }
}
