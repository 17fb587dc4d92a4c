"""Ranking-quality metrics: AUROC, average precision, and fraction of effort.

FoE compares the position of the k-th recovered issue in a ranking against the
exact without-replacement expectation for a random reviewer, k(N+1)/(P+1).
Values below 1 mean the ranking saves review effort.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import ConsistencyError, UndefinedMetricError
from .indicators import RankedList

# Fig. 1-style recall grid: 0.05, 0.10, ..., 1.00.
DEFAULT_RECALL_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))


def auroc(scores: np.ndarray, positives: np.ndarray) -> float:
    """Probability a random positive outscores a random negative, ties = 1/2.

    Computed with the rank-sum identity, which is exact for the pair-counting
    definition.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = int((~positives).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUROC needs at least one positive and one negative")
    ranks = rankdata(scores, method="average")
    pos_rank_sum = float(ranks[positives].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def average_precision(scores: np.ndarray, positives: np.ndarray) -> float:
    """Mean precision at each positive's rank in descending-score order.

    Ties are broken by ascending input position, matching the ranked-list
    tie-break (score descending, then id ascending) when inputs arrive in
    id order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    if n_pos == 0:
        raise UndefinedMetricError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    hits = positives[order]
    positions = np.nonzero(hits)[0] + 1  # 1-based ranks of the positives
    found = np.arange(1, n_pos + 1)
    return float((found / positions).mean())


def evaluate_ranked_list(ranked: RankedList, positive_ids: set) -> tuple[float, float]:
    """AUROC and AP computed on the ranked order itself.

    Consumes the list's own tie-break so metrics match what a reviewer walks
    through. Subjects absent from ``positive_ids`` count as negatives.
    """
    n = len(ranked)
    flags = np.array([s in positive_ids for s in ranked.subjects()], dtype=bool)
    # Descending synthetic scores encode the realized order.
    order_scores = np.arange(n, 0, -1, dtype=np.float64)
    return auroc(order_scores, flags), average_precision(order_scores, flags)


def foe_curve(
    ranked: RankedList, positive_ids: set, recalls: tuple[float, ...] = DEFAULT_RECALL_GRID
) -> list[tuple[float, float]]:
    """Fraction of effort at each recall level.

    For recall r with k = ceil(r * P), foe(r) is the 1-based position of the
    k-th positive divided by the random-reviewer expectation k(N+1)/(P+1).
    """
    subjects = ranked.subjects()
    n = len(subjects)
    present = set(subjects)
    missing = positive_ids - present
    if missing:
        raise ConsistencyError(f"positives absent from ranking, e.g. {sorted(missing)[:3]}")
    if not positive_ids:
        raise UndefinedMetricError("FoE needs at least one positive")
    p = len(positive_ids)
    positions = sorted(
        pos for pos, subj in enumerate(subjects, start=1) if subj in positive_ids
    )
    curve = []
    for r in recalls:
        if not 0.0 < r <= 1.0:
            raise ConsistencyError(f"recall {r} outside (0, 1]")
        k = math.ceil(r * p)
        baseline = k * (n + 1) / (p + 1)
        curve.append((float(r), positions[k - 1] / baseline))
    return curve


def effort_summary(curve: list[tuple[float, float]]) -> tuple[float, float]:
    """(mean savings, speed-up) over a FoE curve: 1 - mean(foe) and 1/mean(foe)."""
    if not curve:
        raise UndefinedMetricError("effort summary of an empty curve")
    mean_foe = float(np.mean([foe for _, foe in curve]))
    return 1.0 - mean_foe, 1.0 / mean_foe


@dataclass(frozen=True)
class EvaluationReport:
    """Scores of one ranking against ledger ground truth."""

    issue_type: str
    alpha: float
    auroc: float
    ap: float
    foe_curve: list[tuple[float, float]]
    mean_savings: float
    speedup: float
    n_samples: int
    n_positives: int
    seed: int | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.auroc <= 1.0 and 0.0 <= self.ap <= 1.0):
            raise ConsistencyError("AUROC and AP must lie in [0, 1]")
        if any(foe <= 0 for _, foe in self.foe_curve):
            raise ConsistencyError("FoE values must be positive")
        mean_foe = float(np.mean([foe for _, foe in self.foe_curve]))
        if abs(self.speedup - 1.0 / mean_foe) > 1e-9:
            raise ConsistencyError("speedup must equal 1/mean(FoE)")

    def to_dict(self) -> dict:
        return {
            "issue_type": self.issue_type,
            "alpha": self.alpha,
            "seed": self.seed,
            "auroc": self.auroc,
            "ap": self.ap,
            "foe_curve": [[r, f] for r, f in self.foe_curve],
            "mean_savings": self.mean_savings,
            "speedup": self.speedup,
            "n_samples": self.n_samples,
            "n_positives": self.n_positives,
            "provenance": self.provenance,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def evaluate_ranking(
    ranked: RankedList,
    positive_ids: set,
    alpha: float,
    seed: int | None = None,
    recalls: tuple[float, ...] = DEFAULT_RECALL_GRID,
    provenance: dict | None = None,
) -> EvaluationReport:
    """Full report for one ranking: AUROC, AP, FoE curve, and effort summary."""
    roc, ap = evaluate_ranked_list(ranked, positive_ids)
    curve = foe_curve(ranked, positive_ids, recalls)
    savings, speedup = effort_summary(curve)
    return EvaluationReport(
        issue_type=ranked.issue_type,
        alpha=alpha,
        auroc=roc,
        ap=ap,
        foe_curve=curve,
        mean_savings=savings,
        speedup=speedup,
        n_samples=len(ranked),
        n_positives=len(positive_ids),
        seed=seed,
        provenance=provenance or {},
    )


def write_foe_csv(
    curve: list[tuple[float, float]], path: str | Path, provenance: dict | None = None
) -> None:
    """CSV of (recall, foe) rows, with provenance as a leading # comment."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if provenance:
            fh.write("# " + json.dumps(provenance, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["recall", "foe"])
        for r, foe in curve:
            writer.writerow([r, repr(foe)])
