"""Distribution metrics over measurement outcomes."""
from __future__ import annotations

import numpy as np

SUM_TOL = 1e-9


def check_distribution(p: dict, tol: float = SUM_TOL) -> None:
    total = 0.0
    for key, value in p.items():
        if value < -tol:
            raise ValueError(f"negative probability {value} for outcome {key!r}")
        total += value
    if abs(total - 1.0) > tol:
        raise ValueError(f"probabilities sum to {total}, not 1")


def counts_to_distribution(counts: dict) -> dict:
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("empty counts")
    return {key: value / total for key, value in counts.items()}


def tvd(p: dict, q: dict) -> float:
    """Total variational distance 1/2 sum |p_j - q_j|; missing keys read as 0."""
    check_distribution(p)
    check_distribution(q)
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def stability_statistic(member_tvds) -> tuple[float, float]:
    """Mean and interquartile spread of per-member TVDs."""
    values = np.asarray(list(member_tvds), dtype=float)
    if values.size < 2:
        raise ValueError("need at least two members")
    q75, q25 = np.percentile(values, [75.0, 25.0])
    return float(values.mean()), float(q75 - q25)
