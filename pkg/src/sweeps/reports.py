# src/sweeps/reports.py
from __future__ import annotations

import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from src.numtheory.constants import FLOAT_FORMAT

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
SIGNIFICANT_DIGITS = 12


@dataclass(frozen=True)
class ReportFrame:
    df: pd.DataFrame
    columns: List[str]
    warnings: List[str]


def to_significant(value: float, digits: int = SIGNIFICANT_DIGITS) -> float:
    # Same rounding the CSV float format applies, so JSON carries identical values.
    if not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def coerce_numeric(series: pd.Series) -> pd.Series:
    """Float columns rounded to 12 significant digits; ints, bools and text untouched."""
    if pd.api.types.is_bool_dtype(series) or not pd.api.types.is_float_dtype(series):
        return series
    return series.map(lambda v: to_significant(v) if pd.notna(v) else v)


def coerce_bool(series: pd.Series) -> pd.Series:
    if pd.api.types.is_bool_dtype(series):
        return series
    return series.map(lambda v: bool(v) if pd.notna(v) else v)


def build_frame(rows: Iterable[Dict[str, Any]], columns: List[str], bool_columns: Iterable[str] = ()) -> ReportFrame:
    """
    One DataFrame per report, columns in the fixed order of the report type.

    Rows may carry extra keys (dropped with a warning); a missing column is an error.
    """
    rows = list(rows)
    df = pd.DataFrame(rows, columns=None if rows else columns)
    warnings: List[str] = []

    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ValueError(f"report rows are missing columns {missing}")
    extra = [c for c in df.columns if c not in columns]
    if extra:
        warnings.append(f"dropped columns not in the report schema: {extra}")

    df = df[columns].copy()
    for col in columns:
        if col in bool_columns:
            df[col] = coerce_bool(df[col])
        else:
            df[col] = coerce_numeric(df[col])
    return ReportFrame(df=df, columns=columns, warnings=warnings)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _records(df: pd.DataFrame) -> List[Dict[str, Any]]:
    records = df.to_dict(orient="records")
    for rec in records:
        for key, val in rec.items():
            if isinstance(val, float) and math.isnan(val):
                rec[key] = None
    return records


def render(report: ReportFrame, fmt: str = "csv") -> str:
    if fmt == "csv":
        return report.df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    if fmt == "json":
        return json.dumps(_records(report.df), indent=2, default=_json_default) + "\n"
    raise ValueError(f"--format must be one of {FORMATS}, got {fmt!r}")


def write_report(report: ReportFrame, fmt: str = "csv", output: Optional[str | Path] = None) -> None:
    for warning in report.warnings:
        logger.warning(warning)
    text = render(report, fmt)
    if output is None or str(output) == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def fingerprint_report(report: ReportFrame) -> str:
    # sha256 of the CSV rendering; stable across processes, unlike hash().
    return hashlib.sha256(render(report, "csv").encode("utf-8")).hexdigest()
