"""Benchmark protocols: MSE sweeps, feature ranking, ROC curves and AUROC."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, MimixError, ParameterError, validate_dataset
from .estimators import Estimator
from .synthgen import GeneratorSpec, child_seed, generate, ground_truth


@dataclass(frozen=True)
class SweepResult:
    estimator_name: str
    estimator_params: dict
    spec: dict
    ground_truth: float
    sample_sizes: list
    trials: int
    master_seed: int
    mse_per_size: list
    mean_bias_per_size: list
    estimates: np.ndarray = field(repr=False)  # sizes x trials

    def rows(self) -> list[dict]:
        return [
            {"estimator": self.estimator_name, "n": int(n), "trials": self.trials,
             "mse": float(mse), "bias": float(bias)}
            for n, mse, bias in zip(self.sample_sizes, self.mse_per_size, self.mean_bias_per_size)
        ]

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator_name,
            "estimator_params": dict(self.estimator_params),
            "spec": dict(self.spec),
            "ground_truth": float(self.ground_truth),
            "sample_sizes": [int(n) for n in self.sample_sizes],
            "trials": self.trials,
            "master_seed": int(self.master_seed),
            "mse_per_size": [float(v) for v in self.mse_per_size],
            "mean_bias_per_size": [float(v) for v in self.mean_bias_per_size],
        }


def trial_seeds(master_seed: int, n: int, trial: int) -> tuple[int, int]:
    """(data seed, estimator seed) for one trial at sample size n."""
    return child_seed(master_seed, n, trial, 0), child_seed(master_seed, n, trial, 1)


def _default_workers() -> int:
    env = os.environ.get("MIMIX_THREADS")
    if env:
        return max(1, int(env))
    return 1


def mse_sweep(estimator: Estimator, spec: GeneratorSpec, sizes, trials: int = 100, master_seed: int = 0,
              workers: int | None = None) -> SweepResult:
    """Mean squared error and bias against the ground truth at each sample size.

    Trial t at size n draws its data from ``child_seed(master_seed, n, t, 0)``,
    so the result does not depend on execution order or on the other sizes.
    Different estimators run with the same master seed see the same data.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise ParameterError("need at least one sample size")
    k = estimator.k
    if k is not None and any(n <= k for n in sizes):
        raise ParameterError(f"every sample size must exceed k={k}")
    if spec.name == "featsel":
        raise ParameterError("featsel has no scalar ground truth; use rank_features")
    truth = ground_truth(spec).value

    def run(job):
        n, t = job
        data_seed, est_seed = trial_seeds(master_seed, n, t)
        return estimator(generate(spec.with_seed(data_seed), n), est_seed).value

    jobs = [(n, t) for n in sizes for t in range(trials)]
    workers = workers or _default_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            flat = list(pool.map(run, jobs))
    else:
        flat = [run(job) for job in jobs]
    est = np.array(flat).reshape(len(sizes), trials)
    err = est - truth
    mse = [math.fsum((row * row).tolist()) / trials for row in err]
    bias = [math.fsum(row.tolist()) / trials for row in err]
    return SweepResult(estimator.name, dict(estimator.params), spec.to_dict(), truth, sizes, trials,
                       int(master_seed), mse, bias, est)


def count_inversions(values) -> int:
    """Number of adjacent increases in a sequence expected to be nonincreasing."""
    values = list(values)
    return sum(1 for a, b in zip(values, values[1:]) if b > a)


@dataclass(frozen=True)
class Ranking:
    order: np.ndarray
    scores: np.ndarray

    def to_rows(self) -> list[dict]:
        return [{"rank": r, "feature": int(i), "score": float(self.scores[i])} for r, i in enumerate(self.order)]


def rank_features(features, target, estimator: Estimator, seed: int = 0) -> Ranking:
    """Score every feature column by its estimated MI with ``target``.

    Sorted by descending score, ties by ascending feature index.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    if features.shape[1] < 1:
        raise ParameterError("need at least one feature")
    scores = np.empty(features.shape[1])
    for i in range(features.shape[1]):
        try:
            scores[i] = estimator(validate_dataset(features[:, i], target), child_seed(seed, i)).value
        except MimixError as exc:
            raise type(exc)(f"feature {i}: {exc}") from exc
    order = np.lexsort((np.arange(scores.shape[0]), -scores))
    return Ranking(order, scores)


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    # cumulative counts behind the rates, used for an exactly rounded area
    tp: np.ndarray | None = field(default=None, repr=False)
    fp: np.ndarray | None = field(default=None, repr=False)

    @property
    def points(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.fpr, self.tpr)]

    def to_dict(self) -> dict:
        return {"fpr": [float(v) for v in self.fpr], "tpr": [float(v) for v in self.tpr]}


def roc_curve(scores, labels) -> RocCurve:
    """ROC points from selecting the top-r scored items, r = 0..p.

    Items with equal scores are selected together, so a tie contributes a
    single (possibly diagonal) step.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ParameterError("scores and labels must be 1-D sequences of equal length")
    n_pos = int(labels.sum())
    n_neg = labels.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ParameterError("need at least one positive and one negative label")
    order = np.argsort(-scores, kind="stable")
    s, lab = scores[order], labels[order]
    tp = np.cumsum(lab)
    fp = np.cumsum(~lab)
    # keep only the last item of each run of equal scores
    last = np.r_[s[1:] != s[:-1], True]
    tp = np.r_[0, tp[last]]
    fp = np.r_[0, fp[last]]
    return RocCurve(fp / n_neg, tp / n_pos, tp, fp)


def auroc(curve: RocCurve) -> float:
    """Trapezoidal area under an ROC curve."""
    if curve.tp is not None:
        tp, fp = curve.tp, curve.fp
        twice_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
        return twice_area / (2 * int(tp[-1]) * int(fp[-1]))
    return math.fsum((np.diff(curve.fpr) * (curve.tpr[1:] + curve.tpr[:-1]) / 2).tolist())


def auroc_null_sd(n_pos: int, n_neg: int) -> float:
    """Standard deviation of the AUROC of a random ranking."""
    return math.sqrt((n_pos + n_neg + 1) / (12.0 * n_pos * n_neg))


@dataclass(frozen=True)
class PairScores:
    pairs: np.ndarray  # m x 2, i < j
    scores: np.ndarray

    def to_rows(self) -> list[dict]:
        return [{"gene_a": int(a), "gene_b": int(b), "score": float(s)}
                for (a, b), s in zip(self.pairs, self.scores)]


def score_gene_pairs(expression, estimator: Estimator, seed: int = 0, workers: int | None = None) -> PairScores:
    """Estimated MI for every unordered pair of columns of ``expression``."""
    expression = np.asarray(expression, dtype=np.float64)
    g = expression.shape[1]
    if g < 3:
        raise ParameterError("need at least 3 genes")
    pairs = np.array([(a, b) for a in range(g) for b in range(a + 1, g)])

    def run(idx):
        a, b = pairs[idx]
        ds: Dataset = validate_dataset(expression[:, a], expression[:, b])
        return estimator(ds, child_seed(seed, a, b)).value

    workers = workers or _default_workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            scores = list(pool.map(run, range(len(pairs))))
    else:
        scores = [run(i) for i in range(len(pairs))]
    return PairScores(pairs, np.array(scores))


def edge_labels(pairs: np.ndarray, edges, n_genes: int) -> np.ndarray:
    """Boolean label per unordered pair: True where (a, b) or (b, a) is an edge."""
    adj = np.zeros((n_genes, n_genes), dtype=bool)
    for a, b in edges:
        if not (0 <= a < n_genes and 0 <= b < n_genes):
            raise ParameterError(f"edge ({a}, {b}) references an unknown gene index")
        adj[a, b] = adj[b, a] = True
    return adj[pairs[:, 0], pairs[:, 1]]
