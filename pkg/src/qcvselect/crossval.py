"""Equal-size k-fold splits, per-fold ensemble training, performance bit vectors.

A performance vector has one bit per example of the held-out fold: 1 when
the network trained on the other folds classifies that example correctly.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import mlp
from .pqm import format_bits
from .statevector import parse_bits


@dataclass(frozen=True)
class FoldAssignment:
    kappa: int
    fold_size: int
    fold_members: tuple
    dropped: np.ndarray

    def train_indices(self, fold_id):
        """Members of every fold except ``fold_id`` (dropped examples are never used)."""
        return np.concatenate([m for f, m in enumerate(self.fold_members) if f != fold_id])


@dataclass(frozen=True)
class PerformanceVector:
    fold_id: int
    seed: int
    bits: tuple

    @property
    def accuracy(self):
        return sum(self.bits) / len(self.bits)


@dataclass
class EnsembleMember:
    fold_id: int
    replicate: int
    seed: int
    model: mlp.MlpModel


def make_folds(n_examples, kappa, seed):
    """Shuffle 0..N-1 with ``seed`` and deal ``floor(N/kappa)`` indices per fold.

    The last ``N mod kappa`` indices of the shuffled order are dropped.
    """
    if kappa < 2:
        raise ValueError("need at least two folds")
    if kappa > n_examples:
        raise ValueError(f"cannot make {kappa} folds from {n_examples} examples")
    perm = np.random.default_rng(seed).permutation(n_examples)
    size = n_examples // kappa
    members = tuple(perm[f * size : (f + 1) * size].copy() for f in range(kappa))
    return FoldAssignment(kappa, size, members, perm[kappa * size :].copy())


def derive_seed(master_seed, *keys):
    """Stable 63-bit task seed from ``master_seed`` and integer keys.

    Mixed by numpy's ``SeedSequence`` hash, so the value depends only on the
    inputs and not on scheduling order.
    """
    ss = np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def train_ensemble(dataset, folds, hidden_neurons, seeds_per_fold, master_seed,
                   config=None, jobs=1, train_fn=None):
    """Train ``seeds_per_fold`` networks per held-out fold.

    Task ``(f, r)`` initializes from ``derive_seed(master_seed, f, r, 0)`` and
    shuffles minibatches with ``derive_seed(master_seed, f, r, 1)``; it trains
    on every fold but ``f``.  Results come back ordered by ``(fold, r)``
    whatever ``jobs`` is.
    """
    if seeds_per_fold < 1:
        raise ValueError("seeds_per_fold must be >= 1")
    base = config or mlp.MlpConfig()
    cfg = mlp.MlpConfig(**{**base.__dict__, "hidden_neurons": hidden_neurons})
    train_fn = train_fn or mlp.train
    X, y = dataset.features, dataset.labels

    def task(key):
        f, r = key
        init_seed = derive_seed(master_seed, f, r, 0)
        idx = folds.train_indices(f)
        model = mlp.init_weights(cfg, dataset.n_features, dataset.class_count, init_seed)
        try:
            trained, _ = train_fn(model, X[idx], y[idx], cfg, seed=derive_seed(master_seed, f, r, 1))
        except mlp.TrainingError as exc:
            raise mlp.TrainingError(f"fold {f}, replicate {r}: {exc}") from exc
        return EnsembleMember(f, r, init_seed, trained)

    keys = [(f, r) for f in range(folds.kappa) for r in range(seeds_per_fold)]
    if jobs <= 1:
        return [task(k) for k in keys]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(task, keys))


def performance_vector(model, dataset, folds, fold_id, seed=0):
    if not 0 <= fold_id < folds.kappa:
        raise ValueError(f"fold {fold_id} out of range")
    members = folds.fold_members[fold_id]
    hits = mlp.predict(model, dataset.features[members]) == dataset.labels[members]
    return PerformanceVector(fold_id, seed, tuple(int(h) for h in hits))


def write_vectors(path, vectors, codes=None):
    """Text export: header then ``fold_id,seed,bits`` (plus ``code``) per line."""
    with open(path, "w") as fh:
        fh.write("fold_id,seed,bits" + (",code" if codes is not None else "") + "\n")
        for i, v in enumerate(vectors):
            line = f"{v.fold_id},{v.seed},{format_bits(v.bits)}"
            if codes is not None:
                line += f",{codes[i]}"
            fh.write(line + "\n")


def read_vectors(path):
    """Inverse of :func:`write_vectors`; returns (vectors, codes or None)."""
    vectors, codes = [], []
    with open(path) as fh:
        head = fh.readline().strip().split(",")
        if head[:3] != ["fold_id", "seed", "bits"]:
            raise ValueError(f"{path}: unexpected header {head}")
        with_code = len(head) == 4 and head[3] == "code"
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(head):
                raise ValueError(f"{path}:{lineno}: expected {len(head)} fields")
            vectors.append(PerformanceVector(int(parts[0]), int(parts[1]), parse_bits(parts[2])))
            if with_code:
                codes.append(parts[3])
    return vectors, (codes if with_code else None)
