"""Error norms between predicted and exact solution values on a point set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ErrorReport", "error_report", "format_value", "grid_csv_row"]


@dataclass(frozen=True)
class ErrorReport:
    """L2, relative L2, max, and RMS error over one evaluation set."""

    l2: float
    rel_l2: float
    linf: float
    rms: float
    n_points: int
    point_set_id: str = ""


def error_report(u_exact, u_pred, point_set_id: str = "") -> ErrorReport:
    u = np.asarray(u_exact, dtype=float).ravel()
    v = np.asarray(u_pred, dtype=float).ravel()
    if u.size != v.size:
        raise ValueError(f"length mismatch: {u.size} exact vs {v.size} predicted")
    if u.size == 0:
        raise ValueError("empty value lists")
    diff = u - v
    l2 = float(np.sqrt(np.sum(diff * diff)))
    norm_u = float(np.sqrt(np.sum(u * u)))
    if norm_u == 0.0:
        raise ValueError("relative L2 undefined: exact values have zero norm")
    return ErrorReport(
        l2=l2,
        rel_l2=l2 / norm_u,
        linf=float(np.max(np.abs(diff))),
        rms=l2 / np.sqrt(u.size),
        n_points=int(u.size),
        point_set_id=point_set_id,
    )


def format_value(x: float) -> str:
    """17-significant-digit, locale-independent number formatting for CSVs."""
    return f"{x:.17g}"


def grid_csv_row(method: str, report: ErrorReport) -> str:
    """Row in the norm-table layout: method, Linf, L2, RMS."""
    return ",".join(
        [method, format_value(report.linf), format_value(report.l2), format_value(report.rms)]
    )
