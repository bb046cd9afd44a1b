"""Convergence records and their CSV form"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.postprocess import ErrorReport, observed_orders

ERROR_FIELDS = ("err_u", "err_div", "err_p", "err_proj0", "err_post")

CSV_COLUMNS = [
    "h", "dof_u", "dof_p",
    "err_u", "eoc_u",
    "err_p", "eoc_p",
    "err_proj0", "eoc_proj0",
    "err_post", "eoc_post",
]


@dataclass
class ConvergenceRecord:
    level: int
    report: ErrorReport
    eoc: Dict[str, Optional[float]] = field(default_factory=dict)
    iterations: int = 0
    residual: float = 0.0
    conservation: float = 0.0
    processing_time: float = 0.0

    @property
    def h(self) -> float:
        return self.report.h

    @property
    def dof_u(self) -> int:
        return self.report.dof_u

    @property
    def dof_p(self) -> int:
        return self.report.dof_p


def build_records(levels: Sequence[int], reports: Sequence[ErrorReport],
                  iterations: Optional[Sequence[int]] = None,
                  residuals: Optional[Sequence[float]] = None,
                  conservation: Optional[Sequence[float]] = None,
                  times: Optional[Sequence[float]] = None) -> List[ConvergenceRecord]:
    """Attach observed orders (against the previous level) to per-level reports"""
    orders = observed_orders(reports, ERROR_FIELDS)
    records = []
    for k, (level, report) in enumerate(zip(levels, reports)):
        records.append(ConvergenceRecord(
            level=level,
            report=report,
            eoc={name[len("err_"):]: orders[name][k] for name in ERROR_FIELDS},
            iterations=iterations[k] if iterations else 0,
            residual=residuals[k] if residuals else 0.0,
            conservation=conservation[k] if conservation else 0.0,
            processing_time=times[k] if times else 0.0,
        ))
    return records


def _number(value) -> float:
    return np.nan if value is None else float(value)


def records_frame(records: Sequence[ConvergenceRecord]) -> pd.DataFrame:
    rows = []
    for record in records:
        report = record.report
        rows.append({
            "h": float(report.h),
            "dof_u": int(report.dof_u),
            "dof_p": int(report.dof_p),
            "err_u": _number(report.err_u),
            "eoc_u": _number(record.eoc.get("u")),
            "err_p": _number(report.err_p),
            "eoc_p": _number(record.eoc.get("p")),
            "err_proj0": _number(report.err_proj0),
            "eoc_proj0": _number(record.eoc.get("proj0")),
            "err_post": _number(report.err_post),
            "eoc_post": _number(record.eoc.get("post")),
        })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def emit_csv(records: Sequence[ConvergenceRecord]) -> str:
    """Deterministic CSV; eoc cells of the first level (and missing values) are empty"""
    return records_frame(records).to_csv(
        index=False, float_format="%.5e", na_rep="", lineterminator="\n"
    )
