/** End-to-end console test against a real backend process.
 *
 * Spawns the API server with a config overlay that shrinks the inbound
 * debounce so the scripted conversation runs in seconds, then walks the
 * whole guided flow through the chat controller, always answering via the
 * offered reply keyboards where one is shown.
 */

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ChatController } from "../src/chat.js";
import { OpsController, rankingChart } from "../src/ops.js";

const PORT = 30000 + Math.floor(Math.random() * 2000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let serverLog = "";

async function waitForHealth(api: ApiClient, ms = 20000): Promise<void> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (await api.health()) return;
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error(`backend did not come up on ${BASE}\n${serverLog}`);
}

async function waitForBot(
  chat: ChatController,
  predicate: () => boolean,
  what: string,
  ms = 20000,
): Promise<void> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    await chat.poll(2);
    if (predicate()) return;
  }
  throw new Error(
    `timed out waiting for ${what}; transcript tail: ` +
      chat.transcript.slice(-4).map((l) => `${l.from}: ${l.text.slice(0, 60)}`).join(" | "),
  );
}

beforeAll(async () => {
  const root = mkdtempSync(join(tmpdir(), "charla-console-"));
  const overlay = join(root, "overlay.json");
  writeFileSync(overlay, JSON.stringify({ timing: { debounce_seconds: 0.05 } }));
  server = spawn(
    "charla",
    ["--config", overlay, "serve", "--logs", join(root, "logs"), "--port", String(PORT)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stdout?.on("data", (chunk) => (serverLog += String(chunk)));
  server.stderr?.on("data", (chunk) => (serverLog += String(chunk)));
  await waitForHealth(new ApiClient(BASE));
}, 30000);

afterAll(() => {
  server?.kill("SIGTERM");
});

describe("console against a live backend", () => {
  const api = new ApiClient(BASE);
  const chat = new ChatController(api);
  const ops = new OpsController(api);

  it("walks the full guided flow answering through keyboards", async () => {
    await chat.start();
    await waitForBot(chat, () => chat.keyboard !== null, "persona keyboard");
    expect(chat.transcript[0].text).toContain("confidencial");
    expect(chat.keyboard).toContain("/Ada");

    await chat.clickLabel("/Ada");
    await waitForBot(chat, () => (chat.lastBotText() ?? "").includes("alias"), "login prompt");

    await chat.say("consola13");
    await waitForBot(
      chat,
      () => (chat.lastBotText() ?? "").includes("años tienes"),
      "age question",
    );

    await chat.say("14");
    await waitForBot(chat, () => chat.keyboard?.includes("Femenino") === true, "gender keyboard");
    await chat.clickLabel("Femenino");
    await waitForBot(chat, () => chat.keyboard?.includes("/Tema12") === true, "topic menu");

    await chat.clickLabel("/Tema12");
    await waitForBot(chat, () => chat.keyboard?.includes("Sí") === true, "first triage question");
    await chat.clickLabel("No");
    await waitForBot(
      chat,
      () => chat.keyboard?.includes("Sí") === true,
      "second triage question",
    );
    await chat.clickLabel("No");
    await waitForBot(chat, () => chat.keyboard?.includes("8") === true, "scale question");
    await chat.clickLabel("1");
    await waitForBot(chat, () => chat.keyboard === null, "topic opener");

    const freeMessages = [
      "pues juego bastante por las tardes con mis amigos",
      "sobre todo cuando me aburro o estoy solo en casa",
      "a veces se me pasa la hora de cenar jugando",
      "mis padres se enfadan un poco pero no mucho",
      "me gustaria controlarlo mejor la verdad que si",
    ];
    for (const [i, message] of freeMessages.entries()) {
      const before = chat.transcript.filter((l) => l.from === "bot").length;
      await chat.say(message);
      await waitForBot(
        chat,
        () => chat.transcript.filter((l) => l.from === "bot").length > before,
        `reply to free message ${i + 1}`,
      );
    }
    expect(chat.keyboard).toContain("/cambioTema"); // the checkpoint after five

    await chat.clickLabel("/cambioTema");
    await waitForBot(chat, () => chat.keyboard?.includes("/Tema8") === true, "menu again");
    await chat.clickLabel("/Tema8");
    await waitForBot(
      chat,
      () => chat.keyboard?.includes("Sí") === true,
      "triage for the second topic",
    );

    const botCount = chat.transcript.filter((l) => l.from === "bot").length;
    expect(botCount).toBeGreaterThanOrEqual(18);
  }, 120000);

  it("shows a risk alert in the ops pane within one poll", async () => {
    await chat.say("es que a veces no quiero vivir");
    const stats = async () => (await api.opsStats()).alerts_total;
    const deadline = Date.now() + 20000;
    while ((await stats()) < 1 && Date.now() < deadline) {
      await new Promise((r) => setTimeout(r, 250));
    }
    expect(await stats()).toBe(1); // processed server-side

    const fresh = new OpsController(api);
    const arrived = await fresh.pollAlerts(); // a single poll must surface it
    expect(arrived).toHaveLength(1);
    expect(arrived[0].alias).toBe("consola13");
    expect(arrived[0].pattern).toBe("no quiero vivir");
  }, 60000);

  it("the ranking pane mirrors the ranking endpoint", async () => {
    await ops.refreshRanking(5);
    const raw = await fetch(`${BASE}/api/ops/ranking?n=5`);
    const { ranking } = (await raw.json()) as { ranking: { alias: string; messages: number }[] };
    expect(ops.ranking).toEqual(ranking);
    expect(ranking[0].alias).toBe("consola13");
    expect(ranking[0].messages).toBeGreaterThanOrEqual(10);
    const svg = rankingChart(ops.ranking);
    expect(svg).toContain("consola13");
  }, 60000);
});
