"""Figure rendering for the analysis report (headless Agg backend)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> str:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def render_figures(report: dict, out_dir: str | Path) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    per_day = report["usage"]["messages_per_day"]
    if per_day:
        fig, ax = plt.subplots(figsize=(8, 4))
        days = list(per_day)
        ax.bar(range(len(days)), [per_day[d] for d in days], color="#4878a8")
        ax.set_xticks(range(len(days)))
        ax.set_xticklabels(days, rotation=45, ha="right", fontsize=8)
        ax.set_ylabel("user messages")
        ax.set_title("Messages per day")
        written.append(_save(fig, out / "messages_per_day.png"))

    matrix = report["correlations"]["matrix"]
    names = list(matrix)
    if names:
        grid = [
            [
                (matrix[a][b] if matrix[a][b] is not None else math.nan)
                for b in names
            ]
            for a in names
        ]
        fig, ax = plt.subplots(figsize=(10, 9))
        image = ax.imshow(grid, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=90, fontsize=7)
        ax.set_yticks(range(len(names)))
        ax.set_yticklabels(names, fontsize=7)
        ax.set_title("Feature correlation matrix")
        fig.colorbar(image, ax=ax, shrink=0.8)
        written.append(_save(fig, out / "correlation_matrix.png"))

    rows = report["correlations"]["against_criterion"]
    if rows:
        fig, ax = plt.subplots(figsize=(8, max(3, 0.35 * len(rows))))
        labels = [row["feature"] for row in rows][::-1]
        values = [row["r"] for row in rows][::-1]
        colors = ["#b04848" if v < 0 else "#48a868" for v in values]
        ax.barh(range(len(labels)), values, color=colors)
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels, fontsize=8)
        ax.axvline(0.0, color="black", linewidth=0.8)
        ax.set_xlabel("Pearson r against screening outcome")
        ax.set_title("Features vs screening outcome")
        written.append(_save(fig, out / "criterion_correlations.png"))

    interactions = report["usage"]["topic_interactions"]
    if interactions:
        topics = sorted(interactions, key=int)
        groups = sorted({g for counts in interactions.values() for g in counts})
        fig, ax = plt.subplots(figsize=(9, 4))
        bottoms = [0.0] * len(topics)
        palette = {"healthy": "#48a868", "indicated": "#b04848", "unscreened": "#888888"}
        for group in groups:
            heights = [interactions[t].get(group, 0) for t in topics]
            ax.bar(
                range(len(topics)),
                heights,
                bottom=bottoms,
                label=group,
                color=palette.get(group, "#4878a8"),
            )
            bottoms = [b + h for b, h in zip(bottoms, heights)]
        ax.set_xticks(range(len(topics)))
        ax.set_xticklabels(topics)
        ax.set_xlabel("topic id")
        ax.set_ylabel("user messages")
        ax.set_title("Interactions per topic by screening outcome")
        ax.legend(fontsize=8)
        written.append(_save(fig, out / "topic_interactions.png"))

    return written
