"""Classification metrics, ROC curves, scale sweeps and pipeline reports.

Positives are phish (label 1). Metrics with an empty denominator are
defined as 0 so reports always total. The ROC sweep evaluates midpoints
between consecutive distinct confidences plus sentinels outside the
observed range; AUC is the trapezoid integral of that curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import AlexaRanks, extract_features
from .gbm import DEFAULT_THRESHOLD, GbmModel
from .snapshot import PageSnapshot
from .target_id import (
    LEGITIMATE_CONFIRMED,
    PHISH_WITH_TARGETS,
    SUSPICIOUS_NO_TARGET,
    SearchClient,
    identify_target,
)
from .urlparts import SuffixList


class PoolExhausted(ValueError):
    """A sweep step asked for more rows than the pool holds."""


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def fpr(self) -> float:
        return self.fp / (self.fp + self.tn) if self.fp + self.tn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def accuracy(self) -> float:
        total = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / total if total else 0.0


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr), ascending
    auc: float


def metrics_from_confidences(confidences, labels, threshold) -> MetricsReport:
    conf = np.asarray(confidences, dtype=float)
    y = np.asarray(labels, dtype=int)
    pred = conf >= threshold
    return MetricsReport(
        tp=int(np.sum(pred & (y == 1))),
        fp=int(np.sum(pred & (y == 0))),
        tn=int(np.sum(~pred & (y == 0))),
        fn=int(np.sum(~pred & (y == 1))),
        threshold=float(threshold),
    )


def evaluate(
    model: GbmModel, rows, labels, threshold: float | None = None
) -> MetricsReport:
    """Confusion counts and derived metrics at one threshold."""
    if len(rows) == 0:
        raise ValueError("empty corpus")
    thr = model.threshold if threshold is None else threshold
    return metrics_from_confidences(model.predict_confidences(rows), labels, thr)


def roc_from_confidences(confidences, labels) -> RocCurve:
    conf = np.asarray(confidences, dtype=float)
    y = np.asarray(labels, dtype=int)
    if not (np.any(y == 0) and np.any(y == 1)):
        raise ValueError("ROC needs both classes")
    uniq = np.unique(conf)
    thresholds = np.concatenate(
        ([uniq[-1] + 1.0], (uniq[1:] + uniq[:-1])[::-1] / 2.0, [uniq[0] - 1.0])
    )
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    points = []
    for thr in thresholds:
        pred = conf >= thr
        tpr = float(np.sum(pred & (y == 1))) / n_pos
        fpr = float(np.sum(pred & (y == 0))) / n_neg
        points.append((fpr, tpr))
    auc = 0.0
    for (fx, ty), (fx2, ty2) in zip(points, points[1:]):
        auc += (fx2 - fx) * (ty + ty2) / 2.0
    return RocCurve(points=tuple(points), auc=float(auc))


def roc(model: GbmModel, rows, labels) -> RocCurve:
    """Threshold sweep of the model's confidences over a labeled corpus."""
    if len(rows) == 0:
        raise ValueError("empty corpus")
    return roc_from_confidences(model.predict_confidences(rows), labels)


def scalability_sweep(
    model: GbmModel,
    legit_rows,
    phish_rows,
    step_legit: int = 10_000,
    step_phish: int = 100,
    seed: int = 0,
    threshold: float | None = None,
) -> list[MetricsReport]:
    """Metrics on a cumulatively growing random test set.

    Each step draws step_legit legitimate and step_phish phish rows
    without replacement from the pools; the sweep runs as many full steps
    as both pools allow. Raises PoolExhausted when not even one step fits.
    """
    if step_legit < 1 or step_phish < 1:
        raise ValueError("step sizes must be >= 1")
    legit = np.asarray(legit_rows, dtype=float)
    phish = np.asarray(phish_rows, dtype=float)
    n_steps = min(len(legit) // step_legit, len(phish) // step_phish)
    if n_steps == 0:
        raise PoolExhausted(
            f"pools of {len(legit)}/{len(phish)} rows cannot supply a "
            f"{step_legit}/{step_phish} step"
        )
    rng = np.random.default_rng(seed)
    legit_order = rng.permutation(len(legit))
    phish_order = rng.permutation(len(phish))
    thr = model.threshold if threshold is None else threshold

    reports = []
    for step in range(1, n_steps + 1):
        li = legit_order[: step * step_legit]
        pi = phish_order[: step * step_phish]
        rows = np.concatenate([legit[li], phish[pi]])
        labels = np.concatenate([np.zeros(len(li), int), np.ones(len(pi), int)])
        reports.append(
            metrics_from_confidences(model.predict_confidences(rows), labels, thr)
        )
    return reports


@dataclass
class PipelinePageResult:
    name: str
    label: str | None
    confidence: float
    status: str
    top_targets: tuple[str, ...] = ()


@dataclass
class PipelineReport:
    """Second-stage triage of every detector-positive page."""

    n_pages: int = 0
    n_positive: int = 0
    legitimate_confirmed: int = 0
    phish_with_targets: int = 0
    suspicious_no_target: int = 0
    pages: list[PipelinePageResult] = field(default_factory=list)


def pipeline_eval(
    model: GbmModel,
    snapshots: list[tuple[str, PageSnapshot]],
    suffixes: SuffixList,
    alexa: AlexaRanks,
    client: SearchClient,
    threshold: float | None = None,
    n_keyterms: int = 5,
) -> PipelineReport:
    """Run target identification on every page the detector flags.

    A flagged page whose own domain is confirmed by search counts as
    rescued (legitimate_confirmed); the rest stay phish or suspicious.
    """
    thr = model.threshold if threshold is None else threshold
    report = PipelineReport(n_pages=len(snapshots))
    for name, snap in snapshots:
        vec = extract_features(snap, suffixes, alexa)
        confidence = model.predict_confidence(vec.values)
        if confidence < thr:
            continue
        report.n_positive += 1
        verdict = identify_target(snap, suffixes, client, n_keyterms=n_keyterms)
        if verdict.status == LEGITIMATE_CONFIRMED:
            report.legitimate_confirmed += 1
        elif verdict.status == PHISH_WITH_TARGETS:
            report.phish_with_targets += 1
        elif verdict.status == SUSPICIOUS_NO_TARGET:
            report.suspicious_no_target += 1
        report.pages.append(
            PipelinePageResult(
                name=name,
                label=snap.label,
                confidence=confidence,
                status=verdict.status,
                top_targets=verdict.top_k_targets(3),
            )
        )
    return report


def kfold_indices(n: int, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Simple shuffled k-fold split of range(n) into (train, test) pairs."""
    if k < 2 or k > n:
        raise ValueError("need 2 <= k <= n")
    order = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(order, k)
    out = []
    for i in range(k):
        test = folds[i]
        train = np.concatenate([folds[j] for j in range(k) if j != i])
        out.append((train, test))
    return out
