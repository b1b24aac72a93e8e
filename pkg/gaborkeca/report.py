import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd

from utils import now_iso, save_json, save_text, sibling_path
from .evaluate import CSV_COLUMNS, EvalReport, format_percent, format_tau
from .features import FeatureVector

logger = logging.getLogger(__name__)


def _csv_text(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


class ReportGenerator:
    """Writes evaluation reports as CSV, a console table and a JSON summary."""

    # --- evaluation -------------------------------------------------------

    def report_csv(self, reports: Sequence[EvalReport]) -> str:
        frame = pd.DataFrame([r.as_row() for r in reports], columns=CSV_COLUMNS)
        return _csv_text(frame)

    def report_table(self, reports: Sequence[EvalReport]) -> str:
        header = f"{'measure':<12} {'tau':>14} {'TP':>6} {'FP':>6} {'TN':>6} {'FN':>6} " \
                 f"{'sens':>8} {'spec':>8} {'fpr':>8} {'fnr':>8} {'acc':>8}"
        lines = [header, "-" * len(header)]
        for r in reports:
            c = r.counts
            tau = format_tau(r.tau)
            if tau not in ("inf", "-inf", ""):
                tau = f"{r.tau:.6g}"
            lines.append(
                f"{r.measure or '':<12} {tau:>14} {c.tp:>6} {c.fp:>6} {c.tn:>6} {c.fn:>6} "
                f"{format_percent(r.sensitivity):>8} {format_percent(r.specificity):>8} "
                f"{format_percent(r.false_positive_rate):>8} {format_percent(r.false_negative_rate):>8} "
                f"{format_percent(r.accuracy):>8}"
            )
        return "\n".join(lines) + "\n"

    def summary(self, reports: Sequence[EvalReport], config: dict, recognition: dict, extra: Optional[dict] = None) -> dict:
        per_measure = {}
        for r in reports:
            per_measure.setdefault(r.measure, []).append({
                "tau": format_tau(r.tau),
                "counts": {"TP": r.counts.tp, "FP": r.counts.fp, "TN": r.counts.tn, "FN": r.counts.fn},
                "sensitivity": format_percent(r.sensitivity),
                "specificity": format_percent(r.specificity),
                "accuracy": format_percent(r.accuracy),
            })
        data = {
            "generated_at": now_iso(),
            "seed": config.get("seed"),
            "config": config,
            "recognition_rate": {m: format_percent(v) for m, v in recognition.items()},
            "measures": per_measure,
        }
        if extra:
            data.update(extra)
        return data

    def write_eval(
        self,
        reports: Sequence[EvalReport],
        config: dict,
        recognition: dict,
        csv_path: Optional[Union[str, Path]] = None,
        extra: Optional[dict] = None,
    ) -> Optional[str]:
        """Write the CSV (when a path is given) and the JSON summary next to it."""
        if csv_path is None:
            return None
        csv_path = Path(csv_path)
        save_text(self.report_csv(reports), csv_path)
        summary_path = sibling_path(csv_path, "summary.json")
        save_json(self.summary(reports, config, recognition, extra), summary_path)
        logger.info(f"Report saved to: {csv_path} (summary {summary_path.name})")
        return str(csv_path)

    # --- features ---------------------------------------------------------

    def features_csv(self, features: List[FeatureVector], length: int) -> str:
        """One ``label, v1..vD`` row per feature vector; header only when empty."""
        columns = ["label"] + [f"v{i}" for i in range(1, length + 1)]
        rows = [[f.label or ""] + f.values.tolist() for f in features]
        return _csv_text(pd.DataFrame(rows, columns=columns))
