"""One-hidden-layer relu classifier with a softmax output, trained by adam.

Parameters live in one flat float64 vector (W1 row-major, b1, W2 row-major,
b2) so a whole epoch of minibatch updates runs inside a single kernel call.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._fallback import loss_and_grad as _loss_and_grad


class TrainingError(RuntimeError):
    """Training could not run or diverged."""


@dataclass(frozen=True)
class MlpConfig:
    """Training hyperparameters.

    Defaults are the adam/relu settings of the reference experiments plus the
    early-stopping rule (``tol``, ``n_iter_no_change``).  Minibatch size is
    ``min(batch_size, N)``.
    """

    hidden_neurons: int = 10
    alpha: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_iter: int = 100
    learning_rate_init: float = 1e-3
    tol: float = 1e-4
    n_iter_no_change: int = 10
    batch_size: int = 200

    def __post_init__(self):
        if self.hidden_neurons < 1:
            raise ValueError("hidden_neurons must be >= 1")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.alpha < 0 or self.epsilon <= 0 or self.learning_rate_init <= 0:
            raise ValueError("alpha must be >= 0; epsilon and learning rate > 0")
        if self.max_iter < 0 or self.tol < 0 or self.n_iter_no_change < 1 or self.batch_size < 1:
            raise ValueError("invalid stopping or batch settings")


@dataclass
class MlpModel:
    n_features: int
    n_hidden: int
    n_classes: int
    theta: np.ndarray

    def __post_init__(self):
        F, H, C = self.n_features, self.n_hidden, self.n_classes
        if self.theta.shape != (H * F + H + C * H + C,):
            raise ValueError("parameter vector does not match layer sizes")

    @property
    def W1(self):
        F, H = self.n_features, self.n_hidden
        return self.theta[: H * F].reshape(H, F)

    @property
    def b1(self):
        o = self.n_hidden * self.n_features
        return self.theta[o : o + self.n_hidden]

    @property
    def W2(self):
        o = self.n_hidden * (self.n_features + 1)
        return self.theta[o : o + self.n_classes * self.n_hidden].reshape(self.n_classes, self.n_hidden)

    @property
    def b2(self):
        return self.theta[-self.n_classes :]

    def copy(self):
        return MlpModel(self.n_features, self.n_hidden, self.n_classes, self.theta.copy())

    @classmethod
    def from_layers(cls, W1, b1, W2, b2):
        W1, W2 = np.atleast_2d(W1), np.atleast_2d(W2)
        H, F = W1.shape
        C = W2.shape[0]
        theta = np.concatenate([W1.ravel(), np.ravel(b1), W2.ravel(), np.ravel(b2)]).astype(float)
        return cls(F, H, C, theta)


@dataclass
class TrainReport:
    epochs_run: int = 0
    loss_curve: list = field(default_factory=list)
    stop_reason: str = "max_iter"


def init_bounds(n_features, n_hidden, n_classes):
    """Uniform init half-widths for (W1, W2): sqrt(6 / (fan_in + fan_out))."""
    return math.sqrt(6.0 / (n_features + n_hidden)), math.sqrt(6.0 / (n_hidden + n_classes))


def init_weights(config, n_features, n_classes, seed):
    if n_features < 1 or n_classes < 1:
        raise ValueError("need at least one feature and one class")
    H = config.hidden_neurons
    rng = np.random.default_rng(seed)
    bound1, bound2 = init_bounds(n_features, H, n_classes)
    W1 = rng.uniform(-bound1, bound1, size=(H, n_features))
    W2 = rng.uniform(-bound2, bound2, size=(n_classes, H))
    return MlpModel.from_layers(W1, np.zeros(H), W2, np.zeros(n_classes))


def _as_batch(model, x):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {X.shape[1]}")
    return X, single


def forward(model, x):
    """Class probabilities for one feature vector or a batch (rows)."""
    X, single = _as_batch(model, x)
    hid = np.maximum(X @ model.W1.T + model.b1, 0.0)
    z = hid @ model.W2.T + model.b2
    z -= z.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    return p[0] if single else p


def predict(model, x):
    """Argmax class; ties resolve to the lowest index."""
    p = forward(model, x)
    return np.argmax(p, axis=-1)


def loss_and_grad(model, X, y, alpha):
    """Mean cross-entropy + alpha/2 * ||W||^2 and its gradient (packed like ``theta``)."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    return _loss_and_grad(model.theta, X, y, model.n_hidden, model.n_classes, alpha)


def train(model, X, y, config, seed=None, shuffle=True):
    """Minibatch adam on the regularized cross-entropy.

    Each epoch visits the examples in a fresh permutation drawn from
    ``default_rng(seed)`` (or in index order when ``shuffle`` is false).
    Training stops after ``max_iter`` epochs, or once the epoch loss has
    failed to beat the best loss by ``tol`` for ``n_iter_no_change``
    consecutive epochs.  The input model is not modified.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=np.int64)
    N = X.shape[0]
    if N == 0:
        raise TrainingError("empty training set")
    if X.shape[1] != model.n_features:
        raise TrainingError(f"expected {model.n_features} features, got {X.shape[1]}")
    if np.unique(y).size < 2:
        raise TrainingError("training set contains a single class")
    if y.max() >= model.n_classes:
        raise TrainingError("label exceeds the model's class count")

    out = model.copy()
    report = TrainReport()
    m = np.zeros_like(out.theta)
    v = np.zeros_like(out.theta)
    rng = np.random.default_rng(seed) if shuffle else None
    batch = min(config.batch_size, N)
    kern = _backend.kernels()
    step = 0
    best = math.inf
    stale = 0
    for _ in range(config.max_iter):
        order = rng.permutation(N) if shuffle else np.arange(N)
        loss, step = kern.adam_epoch(
            out.theta, m, v, step, X, y, order.astype(np.int64), batch,
            out.n_hidden, out.n_classes, config.learning_rate_init,
            config.beta1, config.beta2, config.epsilon, config.alpha,
        )
        loss = float(loss)
        if not math.isfinite(loss) or not np.isfinite(out.theta).all():
            raise TrainingError(f"training diverged at epoch {report.epochs_run + 1}")
        report.loss_curve.append(loss)
        report.epochs_run += 1
        stale = stale + 1 if loss > best - config.tol else 0
        best = min(best, loss)
        if stale >= config.n_iter_no_change:
            report.stop_reason = "no_improvement"
            break
    return out, report
