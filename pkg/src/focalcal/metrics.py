"""Evaluation metrics: equal-mass ECE, NLL, error rate, reliability tables.

Confidence is the maximum predicted probability; correctness compares the
argmax (ties broken by lowest class index) against the label.  Equal-mass
bins are formed by sorting instances by (confidence, correctness, original
index) and splitting at floor(b*N/K) boundaries, so bin counts differ by
at most one and the bin table's weighted gap sum reproduces the ECE
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataError, clamp_prob


@dataclass(frozen=True)
class PredictionBatch:
    """Predicted probability rows with integer labels."""

    probabilities: np.ndarray  # (N, n)
    labels: np.ndarray  # (N,)

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        y = np.asarray(self.labels)
        if p.ndim != 2 or p.shape[0] == 0:
            raise DataError("probabilities must be a non-empty (N, n) array")
        if y.shape != (p.shape[0],):
            raise DataError("labels length must match probability rows")
        if not np.all(np.isfinite(p)):
            raise DataError("probabilities must be finite")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise DataError("probabilities must lie in [0, 1]")
        if np.any((y < 0) | (y >= p.shape[1])):
            raise DataError(f"labels out of range for {p.shape[1]} classes")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "labels", np.asarray(y, dtype=int))

    @property
    def n_classes(self) -> int:
        return self.probabilities.shape[1]

    def __len__(self) -> int:
        return self.probabilities.shape[0]


@dataclass(frozen=True)
class BinRow:
    """One equal-mass reliability bin."""

    bin_index: int
    count: int
    mean_confidence: float
    accuracy: float
    abs_gap: float


@dataclass(frozen=True)
class BinTable:
    """Reliability-diagram table; weighted gap sum equals the ECE."""

    rows: tuple[BinRow, ...]
    total: int

    def ece(self) -> float:
        return float(
            sum(r.count / self.total * r.abs_gap for r in self.rows)
        )

    def to_csv_rows(self) -> list[list]:
        header = ["bin_index", "count", "mean_confidence", "accuracy", "abs_gap"]
        body = [
            [r.bin_index, r.count, r.mean_confidence, r.accuracy, r.abs_gap]
            for r in self.rows
        ]
        return [header] + body


def _confidence_correctness(batch: PredictionBatch):
    conf = batch.probabilities.max(axis=1)
    pred = batch.probabilities.argmax(axis=1)  # argmax takes the lowest index on ties
    correct = (pred == batch.labels).astype(float)
    return conf, correct


def reliability_table(batch: PredictionBatch, n_bins: int = 15) -> BinTable:
    """Equal-mass reliability bins sorted by confidence.

    Sort keys are (confidence, correctness, original index); bin b holds
    sorted positions [floor(bN/K), floor((b+1)N/K)).  Empty bins (N < K)
    are omitted from the table.
    """
    if n_bins < 1:
        raise DataError("n_bins must be at least 1")
    conf, correct = _confidence_correctness(batch)
    N = len(batch)
    order = np.lexsort((np.arange(N), correct, conf))
    conf_s = conf[order]
    correct_s = correct[order]
    edges = (np.arange(n_bins + 1) * N) // n_bins
    rows = []
    for b in range(n_bins):
        lo, hi = int(edges[b]), int(edges[b + 1])
        if hi == lo:
            continue
        mc = float(conf_s[lo:hi].mean())
        acc = float(correct_s[lo:hi].mean())
        rows.append(BinRow(b, hi - lo, mc, acc, abs(acc - mc)))
    return BinTable(tuple(rows), N)


def ece_equal_mass(batch: PredictionBatch, n_bins: int = 15) -> float:
    """Equal-mass expected calibration error over n_bins bins."""
    return reliability_table(batch, n_bins).ece()


def nll(batch: PredictionBatch) -> float:
    """Mean negative log-likelihood of the true class."""
    p = clamp_prob(
        batch.probabilities[np.arange(len(batch)), batch.labels]
    )
    return float(-np.log(p).mean())


def error_rate(batch: PredictionBatch) -> float:
    """Fraction of instances whose argmax prediction misses the label."""
    _, correct = _confidence_correctness(batch)
    return float(1.0 - correct.mean())
