/** Chat pane view-model: transcript, reply keyboard, long-poll cursor.
 *
 * Holds no DOM references; the browser entry point subscribes to
 * `onChange` and renders. Tests drive it directly.
 */

import { ApiClient, BotEvent } from "./api.js";

export interface TranscriptLine {
  from: "bot" | "me";
  text: string;
  engine?: string;
  seq?: number;
}

export class ChatController {
  sessionId: string | null = null;
  cursor = 0;
  transcript: TranscriptLine[] = [];
  keyboard: string[] | null = null;
  onChange: () => void = () => {};

  private polling = false;
  private seen = 0; // highest seq appended; survives cursor rewinds

  constructor(private readonly api: ApiClient) {}

  /** Create a fresh session and pick up the greeting. */
  async start(): Promise<void> {
    this.sessionId = await this.api.createSession();
    this.cursor = 0;
    this.seen = 0;
    this.transcript = [];
    this.keyboard = null;
    await this.poll(0);
  }

  /** Re-attach to an existing session, replaying everything past `cursor`.
   * Reloading the page resumes the conversation instead of restarting it. */
  async resume(sessionId: string, cursor = 0): Promise<void> {
    this.sessionId = sessionId;
    this.cursor = cursor;
    this.seen = cursor;
    this.transcript = [];
    this.keyboard = null;
    await this.poll(0);
  }

  /** One events fetch; appends new bot messages and advances the cursor. */
  async poll(timeout = 0): Promise<BotEvent[]> {
    if (!this.sessionId) throw new Error("no session");
    const page = await this.api.events(this.sessionId, this.cursor, timeout);
    for (const event of page.events) {
      if (event.seq <= this.seen) continue; // defensive de-dupe
      this.seen = event.seq;
      this.transcript.push({
        from: "bot",
        text: event.text,
        engine: event.engine,
        seq: event.seq,
      });
      this.keyboard = event.keyboard ? [...event.keyboard] : null;
    }
    if (page.events.length > 0) {
      this.cursor = page.cursor;
      this.onChange();
    }
    return page.events;
  }

  /** Keep long-polling until `stop` resolves; used by the browser entry. */
  async pollLoop(timeout: number, shouldStop: () => boolean): Promise<void> {
    if (this.polling) return;
    this.polling = true;
    try {
      while (!shouldStop()) {
        await this.poll(timeout);
      }
    } finally {
      this.polling = false;
    }
  }

  /** Send free text typed by the user. */
  async say(text: string): Promise<void> {
    if (!this.sessionId) throw new Error("no session");
    const trimmed = text.trim();
    if (!trimmed) return;
    this.transcript.push({ from: "me", text: trimmed });
    this.keyboard = null;
    this.onChange();
    await this.api.sendMessage(this.sessionId, trimmed);
  }

  /** Tap one of the offered reply-keyboard options. */
  async clickOption(index: number): Promise<string> {
    if (!this.keyboard || index < 0 || index >= this.keyboard.length) {
      throw new Error(`no keyboard option ${index}`);
    }
    const option = this.keyboard[index];
    await this.say(option);
    return option;
  }

  /** Convenience for scripted flows: tap an option by its label. */
  async clickLabel(label: string): Promise<void> {
    const options = this.keyboard ?? [];
    const index = options.indexOf(label);
    if (index === -1) {
      throw new Error(`keyboard has no option ${JSON.stringify(label)}: ${options.join(", ")}`);
    }
    await this.clickOption(index);
  }

  lastBotText(): string | null {
    for (let i = this.transcript.length - 1; i >= 0; i--) {
      if (this.transcript[i].from === "bot") return this.transcript[i].text;
    }
    return null;
  }
}
