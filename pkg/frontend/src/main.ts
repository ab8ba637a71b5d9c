/** Browser entry point: wires the view-models to the DOM. */

import { ApiClient } from "./api.js";
import { ChatController } from "./chat.js";
import { OpsController, phasesChart, rankingChart } from "./ops.js";

const POLL_TIMEOUT_SECONDS = 20;
const OPS_REFRESH_MS = 3000;
const SESSION_KEY = "charla.session";
const CURSOR_KEY = "charla.cursor";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function renderChat(chat: ChatController): void {
  const log = el<HTMLDivElement>("chat-log");
  log.innerHTML = "";
  for (const line of chat.transcript) {
    const bubble = document.createElement("div");
    bubble.className = `bubble ${line.from === "me" ? "me" : "bot"}`;
    bubble.textContent = line.text;
    if (line.engine) bubble.dataset.engine = line.engine;
    log.appendChild(bubble);
  }
  log.scrollTop = log.scrollHeight;

  const keys = el<HTMLDivElement>("chat-keyboard");
  keys.innerHTML = "";
  (chat.keyboard ?? []).forEach((option, index) => {
    const button = document.createElement("button");
    button.className = "key";
    button.textContent = option;
    button.addEventListener("click", () => void chat.clickOption(index));
    keys.appendChild(button);
  });

  if (chat.sessionId) {
    sessionStorage.setItem(SESSION_KEY, chat.sessionId);
    sessionStorage.setItem(CURSOR_KEY, String(chat.cursor));
  }
}

function renderOps(ops: OpsController): void {
  const alertsNode = el<HTMLDivElement>("ops-alerts");
  alertsNode.innerHTML = "";
  if (ops.alerts.length === 0) {
    alertsNode.innerHTML = '<p class="muted">Sin alertas.</p>';
  }
  for (const alert of ops.alerts) {
    const row = document.createElement("div");
    row.className = `alert-row ${alert.delivered ? "delivered" : "pending"}`;
    row.innerHTML =
      `<span class="alert-alias"></span>` +
      `<span class="alert-pattern"></span>` +
      `<span class="alert-excerpt"></span>` +
      `<span class="alert-at"></span>`;
    (row.querySelector(".alert-alias") as HTMLElement).textContent = alert.alias;
    (row.querySelector(".alert-pattern") as HTMLElement).textContent = alert.pattern;
    (row.querySelector(".alert-excerpt") as HTMLElement).textContent = alert.excerpt;
    (row.querySelector(".alert-at") as HTMLElement).textContent = alert.at;
    alertsNode.appendChild(row);
  }

  el<HTMLDivElement>("ops-ranking").innerHTML = rankingChart(ops.ranking);
  el<HTMLDivElement>("ops-phases").innerHTML = phasesChart(ops.stats);

  const stats = ops.stats;
  el<HTMLDivElement>("ops-stats").textContent = stats
    ? `sesiones ${stats.sessions} · turnos ${stats.turns_logged} · ` +
      `alertas ${stats.alerts_total} · perfiles ${stats.profiles}`
    : "";
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const chat = new ChatController(api);
  const ops = new OpsController(api);
  chat.onChange = () => renderChat(chat);
  ops.onChange = () => renderOps(ops);

  const savedSession = sessionStorage.getItem(SESSION_KEY);
  const savedCursor = Number(sessionStorage.getItem(CURSOR_KEY) ?? "0");
  try {
    if (savedSession) {
      await chat.resume(savedSession, 0);
      chat.cursor = Math.max(chat.cursor, savedCursor);
    } else {
      await chat.start();
    }
  } catch {
    await chat.start(); // stale session id: start over
  }
  renderChat(chat);

  const form = el<HTMLFormElement>("chat-form");
  const input = el<HTMLInputElement>("chat-input");
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = "";
    void chat.say(text);
  });

  el<HTMLButtonElement>("chat-restart").addEventListener("click", () => {
    sessionStorage.removeItem(SESSION_KEY);
    sessionStorage.removeItem(CURSOR_KEY);
    void chat.start().then(() => renderChat(chat));
  });

  void chat.pollLoop(POLL_TIMEOUT_SECONDS, () => false);

  const refreshOps = (): void => {
    void ops.refreshAll().catch(() => {
      el<HTMLDivElement>("ops-stats").textContent = "panel de operador no disponible";
    });
  };
  refreshOps();
  setInterval(refreshOps, OPS_REFRESH_MS);
}

void boot();
