"""One-vs-one RBF support vector machines trained by sequential minimal optimization."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Standardizer


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class SvmConfig:
    C: float = 25.0
    kernel_width: float = 1.0
    seed: int = 0  # the solver is deterministic; kept so run configs record it
    tol: float = 1e-3
    max_passes: int = 200


def rbf_kernel(a, b, width: float) -> np.ndarray:
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    d2 = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2 * a @ b.T
    return np.exp(-np.maximum(d2, 0.0) / (2 * width * width))


@dataclass
class BinaryMachine:
    """Decision function f(x) = Σ α_i y_i K(s_i, x) + b, positive for ``positive``."""

    positive: int
    negative: int
    support: np.ndarray
    coef: np.ndarray  # α_i y_i
    alpha: np.ndarray
    bias: float
    converged: bool = True

    def decision(self, kx) -> np.ndarray:
        return kx @ self.coef + self.bias


@dataclass
class SvmModel:
    machines: list
    kernel_width: float
    C: float
    scaler: Standardizer
    n_classes: int
    _stack: tuple = field(default=None, repr=False, compare=False)

    def _stacked(self):
        # all support vectors in one array and one coefficient column per machine,
        # so a query needs a single kernel evaluation and a single product
        if self._stack is None:
            sv = np.concatenate([m.support for m in self.machines], axis=0)
            coef = np.zeros((len(sv), len(self.machines)))
            start = 0
            for j, m in enumerate(self.machines):
                coef[start : start + len(m.support), j] = m.coef
                start += len(m.support)
            bias = np.array([m.bias for m in self.machines])
            pos = np.array([m.positive for m in self.machines])
            neg = np.array([m.negative for m in self.machines])
            self._stack = (sv, coef, bias, pos, neg)
        return self._stack

    @property
    def n_support(self) -> int:
        return sum(len(m.support) for m in self.machines)

    def decision_values(self, x) -> np.ndarray:
        x = self.scaler(np.atleast_2d(x))
        sv, coef, bias, _, _ = self._stacked()
        return rbf_kernel(x, sv, self.kernel_width) @ coef + bias

    def predict(self, x) -> np.ndarray:
        dec = self.decision_values(x)
        _, _, _, pos, neg = self._stacked()
        winners = np.where(dec > 0, pos, neg)
        votes = np.zeros((dec.shape[0], self.n_classes), dtype=int)
        np.add.at(votes, (np.arange(dec.shape[0])[:, None], winners), 1)
        # argmax returns the first maximum: ties go to the lower class index
        return np.argmax(votes, axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "svm",
            "n_classes": self.n_classes,
            "n_features": int(self.scaler.mean.shape[0]),
            "kernel_width": self.kernel_width,
            "C": self.C,
            "scaler": self.scaler.to_dict(),
            "machines": [
                {
                    "positive": m.positive,
                    "negative": m.negative,
                    "support": m.support.tolist(),
                    "coef": m.coef.tolist(),
                    "alpha": m.alpha.tolist(),
                    "bias": m.bias,
                    "converged": m.converged,
                }
                for m in self.machines
            ],
        }

    @classmethod
    def from_dict(cls, d) -> "SvmModel":
        machines = [
            BinaryMachine(
                m["positive"],
                m["negative"],
                np.asarray(m["support"], dtype=float).reshape(-1, d["n_features"]),
                np.asarray(m["coef"], dtype=float),
                np.asarray(m["alpha"], dtype=float),
                float(m["bias"]),
                bool(m["converged"]),
            )
            for m in d["machines"]
        ]
        return cls(machines, d["kernel_width"], d["C"], Standardizer.from_dict(d["scaler"]), d["n_classes"])


def smo(K, y, C, tol=1e-3, max_passes=200, tau=1e-12):
    """Sequential minimal optimization on a precomputed kernel matrix.

    Each step updates the pair chosen by the maximal-violation rule for the
    first index and the largest second-order objective decrease for the
    second, which guarantees convergence to the KKT tolerance.

    Parameters
    ----------
    K : (n, n) ndarray
        Kernel matrix.
    y : (n,) ndarray of ±1
    C : float
        Box constraint on the dual coefficients.
    tol : float
        Stop when the KKT gap max_{I_up} -y∇ - min_{I_low} -y∇ is below ``tol``.
    max_passes : int
        Step limit in units of n pair updates.

    Returns
    -------
    alpha, b, converged
        The decision function is Σ α_i y_i K(x_i, x) + b.
    """
    n = len(y)
    y = np.asarray(y, dtype=float)
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)  # ∇ of ½αᵀQα - Σα
    converged = False
    for _ in range(max_passes * n):
        score = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        m_up = score[i]
        if m_up - score[low].min() < tol:
            converged = True
            break
        cand = low & (score < m_up)
        b_it = m_up - score[cand]
        a_it = diag[i] + diag[cand] - 2 * K[i, cand]
        a_it = np.where(a_it > 0, a_it, tau)
        j = int(np.flatnonzero(cand)[np.argmax(b_it * b_it / a_it)])

        a_ij = max(diag[i] + diag[j] - 2 * K[i, j], tau)
        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / a_ij
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0 and aj < 0:
                aj, ai = 0.0, diff
            elif diff <= 0 and ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0 and ai > C:
                ai, aj = C, C - diff
            elif diff <= 0 and aj > C:
                aj, ai = C, C + diff
        else:
            delta = (grad[i] - grad[j]) / a_ij
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > C and ai > C:
                ai, aj = C, total - C
            elif total <= C and aj < 0:
                aj, ai = 0.0, total
            if total > C and aj > C:
                aj, ai = C, total - C
            elif total <= C and ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * (ai - old_i) + Q[:, j] * (aj - old_j)

    score = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(np.mean(score[free]))
    else:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        b = 0.5 * (score[up].max() + score[low].min())
    return alpha, b, converged


def svm_train(train: Dataset, config: SvmConfig | None = None, n_classes: int | None = None) -> SvmModel:
    """Standardize features, then fit one SMO machine per class pair."""
    config = config or SvmConfig()
    if config.C <= 0:
        raise ValueError("C must be positive")
    n_classes = n_classes or int(train.labels.max()) + 1
    scaler = Standardizer.fit(train.features)
    x = scaler(train.features)
    machines = []
    present = set(np.unique(train.labels).tolist())
    for lo_cls, hi_cls in itertools.combinations(range(n_classes), 2):
        if lo_cls not in present or hi_cls not in present:
            continue
        mask = (train.labels == lo_cls) | (train.labels == hi_cls)
        xs = x[mask]
        ys = np.where(train.labels[mask] == lo_cls, 1.0, -1.0)
        K = rbf_kernel(xs, xs, config.kernel_width)
        alpha, b, ok = smo(K, ys, config.C, config.tol, config.max_passes)
        if not ok:
            warnings.warn(
                f"SMO for classes ({lo_cls}, {hi_cls}) stopped after {config.max_passes} passes",
                ConvergenceWarning,
            )
        sv = alpha > 1e-10
        machines.append(
            BinaryMachine(lo_cls, hi_cls, xs[sv], alpha[sv] * ys[sv], alpha[sv], float(b), ok)
        )
    if not machines:
        raise ValueError("training needs at least two classes")
    return SvmModel(machines, config.kernel_width, config.C, scaler, n_classes)


def svm_predict(model: SvmModel, x) -> int:
    return int(model.predict(np.asarray(x, dtype=float)[None, :])[0])
