import { ApiClient, BotEvent, FetchLike } from "../src/api.js";

/** In-memory backend good enough to exercise the view-models offline. */
export class ScriptedBackend {
  seq = 0;
  events: BotEvent[] = [];
  posts: string[] = [];
  responder: (text: string) => void = () => {};

  pushBot(text: string, keyboard: string[] | null = null, engine = "onboarding"): void {
    this.seq += 1;
    this.events.push({
      seq: this.seq,
      at: "2026-01-05T00:00:00+00:00",
      type: "bot_message",
      engine,
      text,
      keyboard,
    });
  }

  fetch: FetchLike = async (url, init) => {
    const respond = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "Content-Type": "application/json" },
      });

    if (url.endsWith("/api/sessions") && init?.method === "POST") {
      return respond({ session_id: "s-test" }, 201);
    }
    if (url.includes("/messages") && init?.method === "POST") {
      const { text } = JSON.parse(String(init.body)) as { text: string };
      this.posts.push(text);
      this.responder(text);
      return respond({ accepted: true }, 202);
    }
    const eventsMatch = url.match(/\/events\?since=(\d+)/);
    if (eventsMatch) {
      const since = Number(eventsMatch[1]);
      const fresh = this.events.filter((e) => e.seq > since);
      const cursor = fresh.length > 0 ? fresh[fresh.length - 1].seq : since;
      return respond({ events: fresh, cursor });
    }
    return respond({ detail: "not found" }, 404);
  };

  client(): ApiClient {
    return new ApiClient("", this.fetch);
  }
}
