"""Architecture selection driven by the probabilistic quantum memory.

For each hidden-layer size the cross-validation ensemble is trained, every
network's performance vector is stored in one memory (with multiplicity),
and the memory is probed with the all-ones vector (100% accuracy).  The
number of ones on the control register (its expectation, or one sampled
measurement) scores the architecture; lower is better.
"""

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, crossval, mlp
from .data import normalize as _normalize
from .pqm import PqmMemory, RetrievalDistribution, expected_ones_closed_form, retrieve_analytic, sample_ones

REPORT_FORMAT = 1


@dataclass(frozen=True)
class SelectionConfig:
    kappa: int = 10
    seeds_per_fold: int = 100
    control_qubits: int = 100
    hidden_min: int = 1
    hidden_max: int = 20
    mode: str = "expect"
    master_seed: int = 0
    measurements: int = 1
    normalize: bool = False
    jobs: int = 1
    training: mlp.MlpConfig = field(default_factory=mlp.MlpConfig)

    def __post_init__(self):
        if self.control_qubits < 1:
            raise ValueError("control_qubits must be >= 1")
        if not 1 <= self.hidden_min <= self.hidden_max:
            raise ValueError("hidden range must be non-empty and start at >= 1")
        if self.mode not in ("expect", "sample"):
            raise ValueError(f"mode must be 'expect' or 'sample', not {self.mode!r}")
        if self.measurements < 1 or self.seeds_per_fold < 1 or self.kappa < 2:
            raise ValueError("measurements, seeds_per_fold >= 1 and kappa >= 2 required")

    @property
    def hidden_range(self):
        return range(self.hidden_min, self.hidden_max + 1)

    def echo(self):
        """Plain-dict view for manifests and JSON reports (``jobs`` excluded: it never changes results)."""
        out = asdict(self)
        out.pop("jobs")
        out["training"].pop("hidden_neurons")
        return out


@dataclass
class ArchitectureResult:
    hidden_neurons: int
    mean_accuracy: float
    expected_ones: float
    distribution: RetrievalDistribution
    sampled_ones: int | None = None
    fold_accuracy: tuple = ()
    fold_expected_ones: tuple = ()
    vectors: list = field(default_factory=list, repr=False)

    @property
    def criterion(self):
        return self.expected_ones if self.sampled_ones is None else self.sampled_ones


def all_ones(k):
    return (1,) * k


def evaluate_architecture(dataset, hidden_neurons, config, folds=None, train_fn=None):
    """Score one hidden-layer size.

    ``sampled_ones`` is filled in sample mode: with ``measurements = m`` it is
    the total count of ones over ``m`` single-use retrievals (``m = 1`` is a
    single measurement).
    """
    if config.normalize:
        dataset = _normalize(dataset)
    if folds is None:
        folds = crossval.make_folds(dataset.n_examples, config.kappa, config.master_seed)
    members = crossval.train_ensemble(
        dataset, folds, hidden_neurons, config.seeds_per_fold, config.master_seed,
        config=config.training, jobs=config.jobs, train_fn=train_fn,
    )
    vectors = [crossval.performance_vector(m.model, dataset, folds, m.fold_id, m.seed) for m in members]
    result = score_vectors(vectors, config.control_qubits, hidden_neurons)

    if config.mode == "sample":
        memory = PqmMemory.from_patterns(v.bits for v in vectors)
        rng = np.random.default_rng(crossval.derive_seed(config.master_seed, hidden_neurons, 2))
        probe = all_ones(folds.fold_size)
        result.sampled_ones = sum(
            sample_ones(memory, probe, config.control_qubits, rng) for _ in range(config.measurements)
        )
    return result


def score_vectors(vectors, d, hidden_neurons=0):
    """Pool performance vectors into one memory and read the all-ones retrieval law."""
    memory = PqmMemory.from_patterns(v.bits for v in vectors)
    probe = all_ones(memory.k)
    dist = retrieve_analytic(memory, probe, d)
    fold_ids = sorted({v.fold_id for v in vectors})
    fold_acc, fold_ex = [], []
    for f in fold_ids:
        sub = PqmMemory.from_patterns(v.bits for v in vectors if v.fold_id == f)
        fold_acc.append(float(np.mean([v.accuracy for v in vectors if v.fold_id == f])))
        fold_ex.append(expected_ones_closed_form(sub, probe, d))
    return ArchitectureResult(
        hidden_neurons=hidden_neurons,
        mean_accuracy=float(np.mean([v.accuracy for v in vectors])),
        expected_ones=dist.expected_ones(),
        distribution=dist,
        fold_accuracy=tuple(fold_acc),
        fold_expected_ones=tuple(fold_ex),
        vectors=list(vectors),
    )


def choose(results):
    """Smallest criterion wins; exact ties go to fewer hidden neurons."""
    if not results:
        raise ValueError("no architectures to choose from")
    return min(results, key=lambda r: (r.criterion, r.hidden_neurons)).hidden_neurons


def select(dataset, config, train_fn=None, progress=None):
    """Evaluate every hidden size in the configured range; return (chosen, results)."""
    if config.normalize:
        dataset = _normalize(dataset)
        config = SelectionConfig(**{**config.__dict__, "normalize": False})
    folds = crossval.make_folds(dataset.n_examples, config.kappa, config.master_seed)
    results = []
    for h in config.hidden_range:
        results.append(evaluate_architecture(dataset, h, config, folds=folds, train_fn=train_fn))
        if progress is not None:
            progress(results[-1])
    return choose(results), results


# -- reports -------------------------------------------------------------------


def _fmt(x):
    return repr(float(x))


def result_to_dict(r):
    return {
        "neurons": r.hidden_neurons,
        "mean_accuracy": r.mean_accuracy,
        "expected_ones": r.expected_ones,
        "sampled_ones": r.sampled_ones,
        "p_le_1": r.distribution.cumulative(1),
        "fold_accuracy": list(r.fold_accuracy),
        "fold_expected_ones": list(r.fold_expected_ones),
        "distribution": [float(p) for p in r.distribution.probs],
    }


def result_from_dict(d):
    probs = np.array(d["distribution"], dtype=float)
    return ArchitectureResult(
        hidden_neurons=int(d["neurons"]),
        mean_accuracy=float(d["mean_accuracy"]),
        expected_ones=float(d["expected_ones"]),
        distribution=RetrievalDistribution(len(probs) - 1, probs),
        sampled_ones=d["sampled_ones"],
        fold_accuracy=tuple(d.get("fold_accuracy", ())),
        fold_expected_ones=tuple(d.get("fold_expected_ones", ())),
    )


def report_dict(results, chosen, manifest):
    return {
        "format": REPORT_FORMAT,
        "version": __version__,
        "manifest": manifest,
        "chosen": chosen,
        "results": [result_to_dict(r) for r in sorted(results, key=lambda r: r.hidden_neurons)],
    }


def write_csv_reports(results, out_dir):
    """Write results.csv, table.csv, scatter.csv and distributions.csv into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ordered = sorted(results, key=lambda r: r.hidden_neurons)
    paths = {}

    paths["results"] = out / "results.csv"
    with open(paths["results"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["neurons", "mean_accuracy", "expected_ones", "sampled_ones"])
        for r in ordered:
            w.writerow([r.hidden_neurons, _fmt(r.mean_accuracy), _fmt(r.expected_ones),
                        "" if r.sampled_ones is None else r.sampled_ones])

    paths["table"] = out / "table.csv"
    with open(paths["table"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["neurons", "performance", "expected_ones", "p_le_1"])
        for r in ordered:
            w.writerow([r.hidden_neurons, f"{r.mean_accuracy:.4f}", f"{r.expected_ones:.4f}",
                        f"{r.distribution.cumulative(1):.4f}"])

    paths["scatter"] = out / "scatter.csv"
    with open(paths["scatter"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mean_accuracy", "expected_ones"])
        for r in ordered:
            w.writerow([_fmt(r.mean_accuracy), _fmt(r.expected_ones)])

    paths["distributions"] = out / "distributions.csv"
    with open(paths["distributions"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["neurons", "K", "probability"])
        for r in ordered:
            for K, p in enumerate(r.distribution.probs):
                w.writerow([r.hidden_neurons, K, _fmt(p)])
    return paths


def emit_report(results, out_dir, chosen=None, manifest=None):
    """Write the CSV reports plus ``results.json`` (which mirrors them and echoes the manifest)."""
    if not results:
        raise ValueError("no results to report")
    if chosen is None:
        chosen = choose(results)
    paths = write_csv_reports(results, out_dir)
    paths["json"] = Path(out_dir) / "results.json"
    with open(paths["json"], "w") as fh:
        json.dump(report_dict(results, chosen, manifest or {}), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def load_report(path):
    """Read ``results.json``; returns (results, chosen, manifest)."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != REPORT_FORMAT:
        raise ValueError(f"{path}: report format {doc.get('format')!r}, expected {REPORT_FORMAT}")
    return [result_from_dict(d) for d in doc["results"]], doc["chosen"], doc.get("manifest", {})
