/** Operator pane view-model plus dependency-free SVG chart builders. */

import { AlertRow, ApiClient, RankingRow, Stats } from "./api.js";

export class OpsController {
  alerts: AlertRow[] = [];
  alertCursor = 0;
  ranking: RankingRow[] = [];
  stats: Stats | null = null;
  onChange: () => void = () => {};

  constructor(private readonly api: ApiClient) {}

  /** One alerts fetch past the cursor; new rows land at the top. */
  async pollAlerts(): Promise<AlertRow[]> {
    const page = await this.api.opsAlerts(this.alertCursor);
    if (page.alerts.length > 0) {
      this.alerts = [...page.alerts.slice().reverse(), ...this.alerts];
      this.onChange();
    }
    this.alertCursor = page.cursor;
    return page.alerts;
  }

  async refreshRanking(n = 10): Promise<void> {
    this.ranking = await this.api.opsRanking(n);
    this.onChange();
  }

  async refreshStats(): Promise<void> {
    this.stats = await this.api.opsStats();
    this.onChange();
  }

  async refreshAll(): Promise<void> {
    await Promise.all([this.pollAlerts(), this.refreshRanking(), this.refreshStats()]);
  }
}

// -- SVG helpers ---------------------------------------------------------

export interface BarDatum {
  label: string;
  value: number;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Horizontal bar chart as an SVG string; no chart library needed. */
export function hbarChart(data: BarDatum[], width = 420, barHeight = 22): string {
  if (data.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="24"><text x="4" y="16" class="chart-empty">sin datos</text></svg>`;
  }
  const max = Math.max(...data.map((d) => d.value), 1);
  const labelWidth = 120;
  const gap = 4;
  const height = data.length * (barHeight + gap);
  const rows = data
    .map((d, i) => {
      const y = i * (barHeight + gap);
      const w = Math.max(1, Math.round(((width - labelWidth - 40) * d.value) / max));
      return (
        `<text x="0" y="${y + barHeight - 6}" class="chart-label">${escapeXml(d.label)}</text>` +
        `<rect x="${labelWidth}" y="${y}" width="${w}" height="${barHeight}" rx="3" class="chart-bar"></rect>` +
        `<text x="${labelWidth + w + 6}" y="${y + barHeight - 6}" class="chart-value">${d.value}</text>`
      );
    })
    .join("");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" role="img">${rows}</svg>`;
}

/** Vertical bars keyed by category, used for the phase distribution. */
export function vbarChart(data: BarDatum[], width = 420, height = 140): string {
  if (data.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="24"><text x="4" y="16" class="chart-empty">sin datos</text></svg>`;
  }
  const max = Math.max(...data.map((d) => d.value), 1);
  const slot = width / data.length;
  const barWidth = Math.max(6, Math.floor(slot * 0.6));
  const plotHeight = height - 30;
  const bars = data
    .map((d, i) => {
      const h = Math.max(1, Math.round((plotHeight * d.value) / max));
      const x = Math.round(i * slot + (slot - barWidth) / 2);
      const y = plotHeight - h;
      return (
        `<rect x="${x}" y="${y}" width="${barWidth}" height="${h}" rx="2" class="chart-bar"></rect>` +
        `<text x="${x + barWidth / 2}" y="${height - 16}" text-anchor="middle" class="chart-label">${escapeXml(d.label)}</text>` +
        `<text x="${x + barWidth / 2}" y="${y - 4}" text-anchor="middle" class="chart-value">${d.value}</text>`
      );
    })
    .join("");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" role="img">${bars}</svg>`;
}

export function rankingChart(rows: RankingRow[]): string {
  return hbarChart(rows.map((r) => ({ label: r.alias, value: r.messages })));
}

export function phasesChart(stats: Stats | null): string {
  if (!stats) return vbarChart([]);
  const data = Object.entries(stats.phases)
    .sort((a, b) => b[1] - a[1])
    .map(([label, value]) => ({ label: label.replace(/_/g, " "), value }));
  return vbarChart(data);
}
