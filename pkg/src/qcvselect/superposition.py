"""Exhaustive classical emulation of training in superposition.

Every branch of the uniform superposition over (held-out fold, initial
weight code) is enumerated, trained deterministically on the other folds,
and scored on its held-out fold.  The branch performance vectors form the
memory that is probed with the all-ones input.

Initial weights come from a ``b``-bit grid: each weight's code is read as an
unsigned integer (most significant bit first) and mapped affinely onto
``2**b`` evenly spaced levels in ``[low, high]``.  Only the weight matrices
are gridded; biases start at zero, as in :func:`qcvselect.mlp.init_weights`.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from . import crossval, mlp
from .data import Dataset
from .pqm import PqmMemory, RetrievalDistribution, retrieve_analytic
from .statevector import CapacityError

DEFAULT_BRANCH_CAP = 1 << 16


@dataclass(frozen=True)
class WeightGrid:
    bits_per_weight: int
    weight_count: int
    low: float = -1.0
    high: float = 1.0

    def __post_init__(self):
        if self.bits_per_weight < 1 or self.weight_count < 1:
            raise ValueError("need at least one bit and one weight")
        if not self.low < self.high:
            raise ValueError("grid range must be increasing")

    @property
    def levels(self):
        return np.linspace(self.low, self.high, 1 << self.bits_per_weight)

    @property
    def code_length(self):
        return self.bits_per_weight * self.weight_count

    @property
    def size(self):
        """Number of weight codes |W|."""
        return 1 << self.code_length

    def decode(self, code):
        b = self.bits_per_weight
        if len(code) != self.code_length:
            raise ValueError(f"code must have {self.code_length} bits")
        return np.array([self.levels[int(code[i * b : (i + 1) * b], 2)] for i in range(self.weight_count)])


@dataclass
class BranchState:
    test_fold: int
    initial_code: str
    trained_model: mlp.MlpModel
    performance: crossval.PerformanceVector


def branch_count(grid, kappa):
    return kappa * grid.size


def enumerate_branches(grid, kappa, cap=DEFAULT_BRANCH_CAP, folds=None):
    """All (fold, code) pairs, fold-major then code in increasing binary order.

    ``folds`` restricts the fold values (default ``range(kappa)``).
    """
    fold_values = range(kappa) if folds is None else list(folds)
    total = len(fold_values) * grid.size
    if total > cap:
        raise CapacityError(f"{total} branches exceeds the cap of {cap}")
    width = grid.code_length
    return [(f, format(c, f"0{width}b")) for f in fold_values for c in range(grid.size)]


def initial_model(code, grid, n_features, n_hidden, n_classes, background=None):
    """Model whose first ``grid.weight_count`` weights (W1 row-major, then W2) come from ``code``.

    Weights beyond the gridded ones are copied from ``background``; biases are zero.
    """
    n_weights = n_hidden * n_features + n_classes * n_hidden
    if grid.weight_count > n_weights:
        raise ValueError(f"grid has {grid.weight_count} weights, network only {n_weights}")
    if background is None:
        weights = np.zeros(n_weights)
        if grid.weight_count < n_weights:
            raise ValueError("a background model is needed when only part of the weights is gridded")
    else:
        weights = np.concatenate([background.W1.ravel(), background.W2.ravel()])
    weights[: grid.weight_count] = grid.decode(code)
    W1 = weights[: n_hidden * n_features].reshape(n_hidden, n_features)
    W2 = weights[n_hidden * n_features :].reshape(n_classes, n_hidden)
    return mlp.MlpModel.from_layers(W1, np.zeros(n_hidden), W2, np.zeros(n_classes))


def run_branch(branch, dataset, folds, config, grid, background=None):
    """Train one branch in fixed data order (no shuffling, so no seed is involved)."""
    fold, code = branch
    model = initial_model(code, grid, dataset.n_features, config.hidden_neurons, dataset.class_count, background)
    idx = folds.train_indices(fold)
    trained, _ = mlp.train(model, dataset.features[idx], dataset.labels[idx], config, shuffle=False)
    perf = crossval.performance_vector(trained, dataset, folds, fold, seed=int(code, 2))
    return BranchState(fold, code, trained, perf)


def run_all(dataset, folds, config, grid, cap=DEFAULT_BRANCH_CAP, background=None, fold_values=None):
    branches = enumerate_branches(grid, folds.kappa, cap, fold_values)
    return [run_branch(b, dataset, folds, config, grid, background) for b in branches]


def evaluate_superposition(branches, d):
    """Retrieval law for the all-ones probe over every branch's performance vector."""
    if not branches:
        raise ValueError("no branches")
    memory = PqmMemory.from_patterns(b.performance.bits for b in branches)
    return retrieve_analytic(memory, (1,) * memory.k, d)


def mixture_oracle(branches, d):
    """Direct average of Binomial(d, sin^2(pi e / 2k)) over branches, via scipy's binomial pmf."""
    K = np.arange(d + 1)
    total = np.zeros(d + 1)
    for b in branches:
        k = len(b.performance.bits)
        e = k - sum(b.performance.bits)
        total += binom.pmf(K, d, math.sin(math.pi * e / (2 * k)) ** 2)
    return RetrievalDistribution(d, total / len(branches))


def xor_dataset(n_per_cluster=10, noise=0.25, seed=0):
    """Seeded XOR-style set: four Gaussian blobs at (+-1, +-1), label = xor of the signs."""
    rng = np.random.default_rng(seed)
    centers = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=float)
    labels = np.array([0, 1, 1, 0])
    X = np.repeat(centers, n_per_cluster, axis=0) + noise * rng.standard_normal((4 * n_per_cluster, 2))
    y = np.repeat(labels, n_per_cluster)
    perm = rng.permutation(len(y))
    return Dataset(np.ascontiguousarray(X[perm]), y[perm].astype(np.int64), 2, "xor")
