"""End-to-end analysis: log directory in, report + features + figures out.

The report is written with sorted keys and no timestamps, so the same log
directory always produces byte-identical JSON; that property anchors the
reproducibility tests.
"""

from __future__ import annotations

import csv
import json
import sys
from collections import defaultdict
from pathlib import Path

from .. import commands
from ..config import Config
from ..model import SensitivityLevel, Speaker
from ..store import StoreBundle
from . import figures as figures_mod
from .correlation import correlation_matrix, criterion_correlations
from .textstats import FEATURE_NAMES, AnalysisLexicons, extract_features


def run_analysis(
    log_root: str | Path,
    out_dir: str | Path,
    cfg: Config,
    top_k: int = 10,
    with_figures: bool = True,
) -> dict:
    from .usage import usage_report

    stores = StoreBundle(log_root)
    records = list(stores.turns.iter_records())
    lex = AnalysisLexicons.from_config(cfg)

    texts_by_alias: dict[str, list[str]] = defaultdict(list)
    for record in records:
        if record.speaker is not Speaker.USER:
            continue
        if commands.is_command_text(record.text_original):
            continue
        texts_by_alias[record.alias].append(record.text_original)

    aliases = sorted(
        alias for alias in texts_by_alias if "\n".join(texts_by_alias[alias]).strip()
    )
    features_by_alias = {
        alias: extract_features("\n".join(texts_by_alias[alias]), lex)
        for alias in aliases
    }
    criterion_by_alias = {
        alias: stores.sensitivity.user_criterion(alias) for alias in aliases
    }

    columns: dict[str, list[float]] = {
        name: [features_by_alias[alias][name] for alias in aliases]
        for name in FEATURE_NAMES
    }

    screened = [alias for alias in aliases if criterion_by_alias[alias] is not None]
    criterion_values = [
        1.0 if criterion_by_alias[alias] == SensitivityLevel.INDICATED.value else 0.0
        for alias in screened
    ]
    screened_columns = {
        name: [features_by_alias[alias][name] for alias in screened]
        for name in FEATURE_NAMES
    }

    criterion_note = None
    try:
        against_criterion = criterion_correlations(screened_columns, criterion_values)
    except ValueError as exc:
        against_criterion = []
        criterion_note = str(exc)

    if not records:
        print("warning: log directory holds no turn records", file=sys.stderr)

    report = {
        "users": {
            "total": len(aliases),
            "screened": len(screened),
            "indicated": sum(1 for v in criterion_values if v == 1.0),
        },
        "usage": usage_report(
            records,
            stores.profiles.all(),
            stores.sensitivity,
            lex.stopwords,
            top_k=top_k,
        ),
        "correlations": {
            "matrix": correlation_matrix(columns),
            "against_criterion": against_criterion,
            "criterion_note": criterion_note,
        },
    }

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.json"
    report_path.write_text(
        json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    features_path = out / "features.csv"
    with features_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alias", "criterion", *FEATURE_NAMES])
        for alias in aliases:
            row = features_by_alias[alias]
            writer.writerow(
                [
                    alias,
                    criterion_by_alias[alias] or "",
                    *[row[name] for name in FEATURE_NAMES],
                ]
            )

    rendered: list[str] = []
    if with_figures:
        rendered = figures_mod.render_figures(report, out / "figures")

    return {
        "report_path": str(report_path),
        "features_path": str(features_path),
        "figures": rendered,
        "users": len(aliases),
    }
