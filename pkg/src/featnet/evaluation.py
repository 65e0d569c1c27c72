"""Validation of selected features with a gradient-boosted-tree classifier.

Two feature pipelines are compared on the same stratified holdout split: the
named hub features, and a PCA projection of all features onto the top
principal components.  The classifier is a from-scratch gradient-boosted
ensemble of regression trees trained on the logistic loss with second-order
(Newton) leaf weights; features are quantile-binned once per fit so split
search works on integer bins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dataset import FeatureTable, LABEL_LEGITIMATE
from .errors import DegenerateLabels, RankDeficient

EPS = 1e-12


@dataclass(frozen=True)
class GBTParams:
    n_rounds: int = 200
    learning_rate: float = 0.1
    max_depth: int = 4
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    n_bins: int = 256

    def to_dict(self) -> dict:
        return {
            "n_rounds": self.n_rounds,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "reg_lambda": self.reg_lambda,
            "min_child_weight": self.min_child_weight,
            "n_bins": self.n_bins,
        }


class GradientBoostedTrees:
    """Binary classifier: boosted regression trees on the logistic loss.

    Split gain and leaf values come from the second-order expansion of the
    loss: for gradient sum G and hessian sum H, a leaf scores -G/(H+lambda)
    and a split gain is the usual GL^2/(HL+lambda) + GR^2/(HR+lambda)
    - G^2/(H+lambda).  ``loss_curve_`` records the training log-loss before
    each round plus the final value.
    """

    def __init__(self, params: GBTParams | None = None):
        self.params = params or GBTParams()
        self.bin_edges_: list[np.ndarray] | None = None
        self.trees_: list[tuple] = []
        self.base_score_: float = 0.0
        self.loss_curve_: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoostedTrees":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
        classes = np.unique(y)
        if not np.isin(classes, (0.0, 1.0)).all():
            raise ValueError("labels must be 0/1")
        if len(classes) < 2:
            raise DegenerateLabels("training labels contain a single class")

        self._fit_bins(X)
        binned = self._bin(X)
        p0 = float(np.clip(y.mean(), 1e-6, 1 - 1e-6))
        self.base_score_ = float(np.log(p0 / (1.0 - p0)))
        margin = np.full(len(y), self.base_score_)
        self.trees_ = []
        self.loss_curve_ = []
        for _ in range(self.params.n_rounds):
            prob = _sigmoid(margin)
            self.loss_curve_.append(_log_loss(y, prob))
            grad = prob - y
            hess = prob * (1.0 - prob)
            tree = self._grow_tree(binned, grad, hess)
            self.trees_.append(tree)
            margin += self.params.learning_rate * self._predict_tree(tree, binned)
        self.loss_curve_.append(_log_loss(y, _sigmoid(margin)))
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.bin_edges_ is None:
            raise ValueError("classifier is not fitted")
        binned = self._bin(np.asarray(X, dtype=np.float64))
        margin = np.full(len(binned), self.base_score_)
        for tree in self.trees_:
            margin += self.params.learning_rate * self._predict_tree(tree, binned)
        return _sigmoid(margin)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(np.int64)

    def _fit_bins(self, X: np.ndarray) -> None:
        self.bin_edges_ = []
        for j in range(X.shape[1]):
            uniq = np.unique(X[:, j])
            if len(uniq) > self.params.n_bins:
                qs = np.quantile(
                    X[:, j], np.linspace(0.0, 1.0, self.params.n_bins + 1)[1:-1]
                )
                uniq = np.unique(qs)
            edges = (uniq[:-1] + uniq[1:]) / 2.0 if len(uniq) > 1 else np.empty(0)
            self.bin_edges_.append(edges)

    def _bin(self, X: np.ndarray) -> np.ndarray:
        binned = np.empty(X.shape, dtype=np.int32)
        for j, edges in enumerate(self.bin_edges_):
            binned[:, j] = np.searchsorted(edges, X[:, j], side="left")
        return binned

    def _grow_tree(self, binned: np.ndarray, grad: np.ndarray, hess: np.ndarray):
        lam = self.params.reg_lambda
        mcw = self.params.min_child_weight

        def build(idx: np.ndarray, depth: int):
            g_sum, h_sum = float(grad[idx].sum()), float(hess[idx].sum())
            leaf = ("leaf", -g_sum / (h_sum + lam))
            if depth >= self.params.max_depth or len(idx) < 2:
                return leaf
            parent_score = g_sum * g_sum / (h_sum + lam)
            best_gain, best_feat, best_bin = EPS, -1, -1
            for j, edges in enumerate(self.bin_edges_):
                n_bins = len(edges) + 1
                if n_bins < 2:
                    continue
                bg = np.bincount(binned[idx, j], weights=grad[idx], minlength=n_bins)
                bh = np.bincount(binned[idx, j], weights=hess[idx], minlength=n_bins)
                g_left = np.cumsum(bg)[:-1]
                h_left = np.cumsum(bh)[:-1]
                ok = (h_left >= mcw) & ((h_sum - h_left) >= mcw)
                if not ok.any():
                    continue
                gain = (
                    g_left**2 / (h_left + lam)
                    + (g_sum - g_left) ** 2 / ((h_sum - h_left) + lam)
                    - parent_score
                )
                gain[~ok] = -np.inf
                b = int(np.argmax(gain))
                if gain[b] > best_gain:
                    best_gain, best_feat, best_bin = float(gain[b]), j, b
            if best_feat < 0:
                return leaf
            mask = binned[idx, best_feat] <= best_bin
            return (
                "split",
                best_feat,
                best_bin,
                build(idx[mask], depth + 1),
                build(idx[~mask], depth + 1),
            )

        return build(np.arange(len(grad)), 0)

    def _predict_tree(self, tree, binned: np.ndarray) -> np.ndarray:
        out = np.empty(len(binned))

        def walk(node, idx):
            if node[0] == "leaf":
                out[idx] = node[1]
                return
            _, feat, threshold, left, right = node
            mask = binned[idx, feat] <= threshold
            walk(left, idx[mask])
            walk(right, idx[~mask])

        walk(tree, np.arange(len(binned)))
        return out


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, EPS, 1.0 - EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def train_gbt(X: np.ndarray, y: np.ndarray, params: GBTParams | None = None) -> GradientBoostedTrees:
    return GradientBoostedTrees(params).fit(X, y)


class PowerIterationPCA:
    """Principal components via power iteration with deflation.

    The covariance matrix of the mean-centered data is decomposed one
    eigenvector at a time: power-iterate, re-orthogonalize against the
    components already found (Gram-Schmidt), deflate, repeat.  Start vectors
    come from a seeded generator so a given seed always yields the same
    components; each component is sign-normalized so its largest-magnitude
    entry is positive.
    """

    def __init__(self, n_components: int, seed: int = 0, tol: float = 1e-10, max_iter: int = 10000):
        self.n_components = n_components
        self.seed = seed
        self.tol = tol
        self.max_iter = max_iter
        self.mean_: np.ndarray | None = None
        self.components_: np.ndarray | None = None  # (d, k) orthonormal columns
        self.explained_variance_: np.ndarray | None = None
        self.explained_variance_ratio_: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "PowerIterationPCA":
        X = np.asarray(X, dtype=np.float64)
        n, d = X.shape
        if n < 2:
            raise ValueError("need at least 2 rows to fit PCA")
        if not 1 <= self.n_components <= d:
            raise ValueError(
                f"n_components must be in [1, {d}], got {self.n_components}"
            )
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / (n - 1)
        total_var = float(np.trace(cov))

        rng = np.random.default_rng(self.seed)
        components: list[np.ndarray] = []
        eigenvalues: list[float] = []
        work = cov.copy()
        for _ in range(self.n_components):
            vec = self._power_iterate(work, components, rng)
            value = float(vec @ work @ vec)
            if value <= max(self.tol, self.tol * (eigenvalues[0] if eigenvalues else 1.0)):
                raise RankDeficient(
                    f"only {len(components)} nonzero eigenvalues, "
                    f"{self.n_components} components requested"
                )
            # sign convention: largest-|entry| coordinate is positive
            lead = int(np.argmax(np.abs(vec)))
            if vec[lead] < 0:
                vec = -vec
            components.append(vec)
            eigenvalues.append(value)
            work = work - value * np.outer(vec, vec)

        self.components_ = np.column_stack(components)
        self.explained_variance_ = np.array(eigenvalues)
        self.explained_variance_ratio_ = (
            self.explained_variance_ / total_var if total_var > 0 else np.zeros(len(eigenvalues))
        )
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.components_ is None:
            raise ValueError("PCA is not fitted")
        return (np.asarray(X, dtype=np.float64) - self.mean_) @ self.components_

    def fit_transform(self, X: np.ndarray) -> np.ndarray:
        return self.fit(X).transform(X)

    def _power_iterate(
        self, matrix: np.ndarray, previous: list[np.ndarray], rng: np.random.Generator
    ) -> np.ndarray:
        d = matrix.shape[0]
        vec = rng.standard_normal(d)
        vec = self._orthonormalize(vec, previous)
        for _ in range(self.max_iter):
            nxt = matrix @ vec
            nxt = self._orthonormalize(nxt, previous)
            if min(np.linalg.norm(nxt - vec), np.linalg.norm(nxt + vec)) < self.tol:
                return nxt
            vec = nxt
        return vec

    @staticmethod
    def _orthonormalize(vec: np.ndarray, previous: list[np.ndarray]) -> np.ndarray:
        for p in previous:
            vec = vec - (vec @ p) * p
        norm = np.linalg.norm(vec)
        if norm <= 0:
            # matrix annihilated the iterate; restart direction is arbitrary
            # but deterministic
            vec = np.zeros_like(vec)
            vec[0] = 1.0
            for p in previous:
                vec = vec - (vec @ p) * p
            norm = np.linalg.norm(vec)
        return vec / norm


def project_pca(table: FeatureTable, k: int, seed: int = 0) -> np.ndarray:
    """Project the raw codes onto the top-k principal components."""
    pca = PowerIterationPCA(n_components=k, seed=seed).fit(
        table.rows.astype(np.float64)
    )
    return pca.transform(table.rows.astype(np.float64))


@dataclass(frozen=True)
class FeatureSubsetSpec:
    """Which inputs the classifier sees: named columns or PCA components."""

    mode: str  # "named_features" | "pca_components"
    names: tuple[str, ...] = ()
    k: int = 0

    @classmethod
    def named(cls, names: Sequence[str]) -> "FeatureSubsetSpec":
        return cls(mode="named_features", names=tuple(names))

    @classmethod
    def pca(cls, k: int) -> "FeatureSubsetSpec":
        return cls(mode="pca_components", k=int(k))

    def to_dict(self) -> dict:
        if self.mode == "named_features":
            return {"mode": self.mode, "features": list(self.names)}
        return {"mode": self.mode, "k": self.k}


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    subset: FeatureSubsetSpec
    train_fraction: float
    seed: int
    classifier_params: GBTParams
    n_train: int
    n_test: int
    per_class_accuracy: dict = field(default_factory=dict)
    confusion_matrix: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subset": self.subset.to_dict(),
            "split": {"train_fraction": self.train_fraction, "seed": self.seed},
            "params": self.classifier_params.to_dict(),
            "accuracy": self.accuracy,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "per_class_accuracy": self.per_class_accuracy,
            "confusion_matrix": self.confusion_matrix,
        }


def stratified_split(
    labels: np.ndarray, train_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-class shuffle split; returns (train_idx, test_idx)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for value in np.unique(labels):
        idx = np.flatnonzero(labels == value)
        rng.shuffle(idx)
        cut = int(round(train_fraction * len(idx)))
        train_parts.append(idx[:cut])
        test_parts.append(idx[cut:])
    return (
        np.sort(np.concatenate(train_parts)),
        np.sort(np.concatenate(test_parts)),
    )


def evaluate(
    table: FeatureTable,
    subset: FeatureSubsetSpec,
    split: tuple[float, int] = (0.8, 42),
    params: GBTParams | None = None,
) -> EvalReport:
    """Train on a stratified split and score accuracy on the holdout rows.

    In pca_components mode the projection is fitted on the training rows
    only and then applied to the test rows, so no holdout information leaks
    into the transform.
    """
    train_fraction, seed = split
    params = params or GBTParams()
    y01 = (table.labels == LABEL_LEGITIMATE).astype(np.float64)
    train_idx, test_idx = stratified_split(table.labels, train_fraction, seed)

    if subset.mode == "named_features":
        missing = [f for f in subset.names if f not in table.feature_names]
        if missing:
            raise ValueError(f"unknown features: {missing}")
        cols = [table.feature_names.index(f) for f in subset.names]
        data = table.rows[:, cols].astype(np.float64)
        x_train, x_test = data[train_idx], data[test_idx]
    elif subset.mode == "pca_components":
        raw = table.rows.astype(np.float64)
        pca = PowerIterationPCA(n_components=subset.k, seed=seed).fit(raw[train_idx])
        x_train, x_test = pca.transform(raw[train_idx]), pca.transform(raw[test_idx])
    else:
        raise ValueError(f"unknown subset mode {subset.mode!r}")

    model = GradientBoostedTrees(params).fit(x_train, y01[train_idx])
    predicted = model.predict(x_test).astype(np.float64)
    actual = y01[test_idx]
    accuracy = float((predicted == actual).mean())

    per_class = {}
    confusion = {}
    for label, name in ((0.0, "phishing"), (1.0, "legitimate")):
        mask = actual == label
        if mask.any():
            per_class[name] = float((predicted[mask] == label).mean())
        confusion[name] = {
            "predicted_phishing": int(((actual == label) & (predicted == 0.0)).sum()),
            "predicted_legitimate": int(((actual == label) & (predicted == 1.0)).sum()),
        }

    return EvalReport(
        accuracy=accuracy,
        subset=subset,
        train_fraction=train_fraction,
        seed=seed,
        classifier_params=params,
        n_train=len(train_idx),
        n_test=len(test_idx),
        per_class_accuracy=per_class,
        confusion_matrix=confusion,
    )
