"""CSV and JSON formats shared by the command line tools.

Floats in CSV files are written with 17 significant digits so a
write/read round trip is lossless; missing values are empty cells.
"""
from __future__ import annotations

import csv
import io
import math
from typing import Iterable, List, Optional, Sequence, TextIO

import numpy as np

from .core import Hypothesis, TrainingSet, hypothesis_to_list
from .harness import Summary, TrialRecord
from .teachers import TeachingResult

RESULT_COLUMNS = ["task", "teacher", "n", "d", "trial", "seed", "risk_full", "risk_subset",
                  "ratio", "subset_size", "wall_ms", "error"]
MEDIAN_COLUMNS = ["n_or_d", "median_ratio", "median_subset_fraction", "median_time_s"]


class SchemaError(ValueError):
    pass


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".17g")


def data_header(d: int, labeled: bool) -> List[str]:
    return [f"x{j}" for j in range(d)] + (["y"] if labeled else [])


def write_data_csv(S: TrainingSet, stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(data_header(S.d, S.labeled))
    for i in range(S.n):
        row = [fmt(v) for v in S.X[i]]
        if S.labeled:
            row.append(fmt(S.y[i]))
        w.writerow(row)


def read_data_csv(stream: TextIO) -> TrainingSet:
    rows = list(csv.reader(stream))
    if not rows:
        raise SchemaError("data file is empty")
    header = [h.strip() for h in rows[0]]
    labeled = bool(header) and header[-1] == "y"
    d = len(header) - int(labeled)
    if d < 1 or header != data_header(d, labeled):
        raise SchemaError(f"expected header x0,...,x{{d-1}}[,y], got {','.join(header)}")
    try:
        values = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise SchemaError(f"non-numeric cell in data file: {exc}") from None
    if values.size == 0:
        values = values.reshape(0, len(header))
    if values.shape[1] != len(header):
        raise SchemaError("ragged data rows")
    if labeled:
        return TrainingSet(values[:, :d], values[:, d])
    return TrainingSet(values)


def teaching_json(result: TeachingResult) -> dict:
    return {
        "indices": [int(i) for i in result.indices],
        "theta_subset": hypothesis_to_list(result.theta_subset),
        "theta_full": hypothesis_to_list(result.theta_full),
        "risk_subset": float(result.risk_subset),
        "risk_full": float(result.risk_full),
        "ratio": None if result.ratio is None else float(result.ratio),
        "evaluations": int(result.evaluations),
    }


def write_plot_csvs(S: TrainingSet, result: TeachingResult, theta_star: Hypothesis,
                    points: TextIO, lines: TextIO) -> None:
    """Points with a ``selected`` column, and one coefficient row per model."""
    w = csv.writer(points, lineterminator="\n")
    w.writerow(data_header(S.d, S.labeled) + ["selected"])
    bits = result.mask.bits
    for i in range(S.n):
        row = [fmt(v) for v in S.X[i]]
        if S.labeled:
            row.append(fmt(S.y[i]))
        row.append(fmt(bool(bits[i])))
        w.writerow(row)
    w = csv.writer(lines, lineterminator="\n")
    models = [("theta_full", result.theta_full), ("theta_subset", result.theta_subset), ("theta_star", theta_star)]
    width = max(len(hypothesis_to_list(t)) for _, t in models)
    w.writerow(["model"] + [f"c{j}" for j in range(width)])
    for name, theta in models:
        coef = hypothesis_to_list(theta)
        w.writerow([name] + [fmt(c) for c in coef] + [""] * (width - len(coef)))


def write_results_csv(records: Iterable[TrialRecord], stream: TextIO, timing: bool = True) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in records:
        w.writerow([r.task, r.teacher, r.n, r.d, r.trial_index, r.seed, fmt(r.risk_full), fmt(r.risk_subset),
                    fmt(r.ratio), r.subset_size, fmt(1000.0 * r.wall_time if timing else 0.0), r.error])


def _opt_float(cell: str) -> Optional[float]:
    return float(cell) if cell.strip() else None


def read_results_csv(stream: TextIO, required: Sequence[str] = RESULT_COLUMNS) -> List[TrialRecord]:
    reader = csv.DictReader(stream)
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"results file lacks column(s): {', '.join(missing)}")
    out = []
    for row in reader:
        try:
            rf, rs = _opt_float(row.get("risk_full", "")), _opt_float(row.get("risk_subset", ""))
            wall = _opt_float(row.get("wall_ms", "") or "")
            out.append(TrialRecord(
                task=row.get("task", ""), teacher=row.get("teacher", ""),
                n=int(row["n"]), d=int(row.get("d") or 1),
                trial_index=int(row.get("trial") or 0), seed=int(row.get("seed") or 0),
                risk_full=math.nan if rf is None else rf,
                risk_subset=math.nan if rs is None else rs,
                ratio=_opt_float(row.get("ratio", "") or ""),
                subset_size=int(row.get("subset_size") or 0),
                wall_time=0.0 if wall is None else wall / 1000.0,
                error=row.get("error", "") or ""))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad results row {row}: {exc}") from None
    return out


def write_medians_csv(summaries: Iterable[Summary], stream: TextIO) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(MEDIAN_COLUMNS)
    for s in summaries:
        w.writerow([s.key, fmt(s.median_ratio), fmt(s.median_subset_fraction), fmt(s.median_wall_time)])


def to_text(writer, *args, **kwargs) -> str:
    buf = io.StringIO()
    writer(*args, buf, **kwargs)
    return buf.getvalue()
