"""Command-line entry point: ``qcvselect {select,score,pqm,superposition,report}``.

Exit codes: 0 success, 1 data/training/capacity errors, 2 usage errors.
All configuration comes from flags; output files are written next to a
``manifest.json`` that identifies the run.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, _backend, crossval, mlp, pqm, selection, superposition
from .data import DataError, bundled, fingerprint, load_csv, load_proben1, normalize
from .statevector import CapacityError, parse_bits

logger = logging.getLogger("qcvselect")


class UsageError(Exception):
    pass


def _bits(text):
    try:
        return parse_bits(text.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed bit string {text!r}") from None


def _bit_list(text):
    items = [t for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("no patterns given")
    return [_bits(t) for t in items]


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def resolve_dataset(name_or_path):
    """A filesystem path, or the name of a bundled dataset (``cancer``)."""
    path = Path(name_or_path)
    if path.exists():
        return path
    candidate = bundled(name_or_path)
    if candidate.is_file():
        return Path(str(candidate))
    raise DataError(f"dataset {name_or_path!r} not found")


def load_dataset(args):
    path = resolve_dataset(args.dataset)
    if args.format == "csv":
        ds = load_csv(path, args.label_column)
    else:
        ds = load_proben1(path)
    return ds, path


def manifest(command, config, master_seed, dataset_path=None):
    out = {
        "command": command,
        "config": config,
        "master_seed": master_seed,
        "version": __version__,
        "kernels": _backend.name(),
    }
    if dataset_path is not None:
        out["dataset_sha256"] = fingerprint(dataset_path)
    return out


def write_manifest(out_dir, data):
    path = Path(out_dir) / "manifest.json"
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _fmt_probs(probs):
    return " ".join(f"{p:.10g}" for p in probs)


# -- select ----------------------------------------------------------------------


def cmd_select(args):
    try:
        config = selection.SelectionConfig(
            kappa=args.folds,
            seeds_per_fold=args.seeds_per_fold,
            control_qubits=args.control_qubits,
            hidden_min=args.hidden_min,
            hidden_max=args.hidden_max,
            mode=args.mode,
            master_seed=args.seed,
            measurements=args.measurements,
            normalize=args.normalize,
            jobs=args.jobs,
            training=mlp.MlpConfig(max_iter=args.max_iter),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    ds, path = load_dataset(args)
    logger.info("dataset %s: N=%d F=%d classes=%d", ds.name, ds.n_examples, ds.n_features, ds.class_count)

    def progress(r):
        logger.info("hidden=%d mean_accuracy=%.4f E(X)=%.4f", r.hidden_neurons, r.mean_accuracy, r.expected_ones)

    chosen, results = selection.select(ds, config, progress=progress)
    out = Path(args.out)
    man = manifest("select", config.echo(), args.seed, path)
    selection.emit_report(results, out, chosen, man)
    write_manifest(out, man)
    if args.save_vectors:
        vec_dir = out / "vectors"
        vec_dir.mkdir(parents=True, exist_ok=True)
        for r in results:
            crossval.write_vectors(vec_dir / f"hidden_{r.hidden_neurons:02d}.csv", r.vectors)
    print(f"selected hidden_neurons={chosen}")
    return 0


def cmd_score(args):
    """Score previously exported performance vectors without retraining."""
    vectors, _ = crossval.read_vectors(args.vectors)
    if not vectors:
        raise DataError(f"{args.vectors}: no vectors")
    r = selection.score_vectors(vectors, args.control_qubits)
    print(f"vectors={len(vectors)} mean_accuracy={r.mean_accuracy:.10g}")
    print(f"distribution: {_fmt_probs(r.distribution.probs)}")
    print(f"E(X)={r.expected_ones:.10g}")
    print(f"P(y<=1)={r.distribution.cumulative(1):.10g}")
    return 0


# -- pqm -------------------------------------------------------------------------


def _patterns(args):
    if args.patterns_file:
        with open(args.patterns_file) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        try:
            return [parse_bits(ln) for ln in lines]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not args.patterns:
        raise UsageError("give --patterns or --patterns-file")
    return args.patterns


def cmd_pqm(args):
    patterns = _patterns(args)
    k = len(patterns[0])
    if any(len(p) != k for p in patterns) or len(args.input) != k:
        raise UsageError("patterns and input must all have the same length")
    d = args.control_qubits

    analytic = circuit = None
    if args.backend in ("analytic", "verify"):
        analytic = pqm.retrieve_analytic(pqm.PqmMemory.from_patterns(patterns), args.input, d)
    if args.backend in ("circuit", "verify"):
        if len(set(patterns)) != len(patterns):
            raise UsageError("the circuit backend stores distinct patterns only")
        state, layout = pqm.store_circuit(patterns, max_qubits=args.max_qubits)
        circuit = pqm.retrieve_circuit(state, layout, args.input, d)

    for name, dist in (("analytic", analytic), ("circuit", circuit)):
        if dist is not None:
            print(f"{name} distribution: {_fmt_probs(dist.probs)}")
            print(f"{name} E(X)={dist.expected_ones():.10g}")
    if args.backend == "verify":
        print(f"max_abs_deviation={np.abs(analytic.probs - circuit.probs).max():.3g}")
    return 0


# -- superposition ---------------------------------------------------------------


def cmd_superposition(args):
    if args.dataset:
        ds, path = load_dataset(args)
    else:
        ds, path = superposition.xor_dataset(seed=args.seed), None
    if args.normalize:
        ds = normalize(ds)
    n_weights = args.hidden * ds.n_features + ds.class_count * args.hidden
    weights = args.weights or n_weights
    try:
        grid = superposition.WeightGrid(args.bits, weights, args.low, args.high)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    count = superposition.branch_count(grid, args.folds)
    if count > args.cap:
        raise CapacityError(f"{count} branches exceeds the cap of {args.cap}")
    if weights > n_weights:
        raise UsageError(f"network has only {n_weights} weights, asked to grid {weights}")

    config = mlp.MlpConfig(hidden_neurons=args.hidden, max_iter=args.max_iter)
    folds = crossval.make_folds(ds.n_examples, args.folds, args.seed)
    background = None
    if weights < n_weights:
        background = mlp.init_weights(config, ds.n_features, ds.class_count, args.seed)
    branches = superposition.run_all(ds, folds, config, grid, args.cap, background)
    dist = superposition.evaluate_superposition(branches, args.control_qubits)
    oracle = superposition.mixture_oracle(branches, args.control_qubits)

    print(f"branches={len(branches)}")
    print(f"distribution: {_fmt_probs(dist.probs)}")
    print(f"E(X)={dist.expected_ones():.10g}")
    print(f"oracle_deviation={np.abs(dist.probs - oracle.probs).max():.3g}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        crossval.write_vectors(out / "branches.csv", [b.performance for b in branches],
                               codes=[b.initial_code for b in branches])
        cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "verbose")}
        write_manifest(out, manifest("superposition", cfg, args.seed, path))
    return 0


# -- report ----------------------------------------------------------------------


def cmd_report(args):
    src = Path(args.source)
    if not src.is_file():
        raise DataError(f"{src}: no such report")
    try:
        results, chosen, man = selection.load_report(src)
    except (KeyError, ValueError) as exc:
        raise DataError(f"{src}: unusable report ({exc})") from None
    if man.get("version") not in (None, __version__):
        raise DataError(f"{src}: written by version {man['version']}, this is {__version__}")
    out = Path(args.out)
    selection.write_csv_reports(results, out)
    write_manifest(out, man)
    print(f"selected hidden_neurons={chosen}")
    return 0


# -- parser ----------------------------------------------------------------------


def _add_dataset_flags(p, required):
    p.add_argument("--dataset", required=required, help="path, or a bundled name such as 'cancer'")
    p.add_argument("--format", choices=("proben1", "csv"), default="proben1")
    p.add_argument("--label-column", default="-1", help="CSV label column (name or index)")


def build_parser():
    parser = argparse.ArgumentParser(prog="qcvselect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="run architecture selection end to end")
    _add_dataset_flags(p, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seeds-per-fold", type=_positive, default=100)
    p.add_argument("--control-qubits", type=_positive, default=100)
    p.add_argument("--hidden-min", type=_positive, default=1)
    p.add_argument("--hidden-max", type=_positive, default=20)
    p.add_argument("--mode", choices=("expect", "sample"), default="expect")
    p.add_argument("--measurements", type=_positive, default=1,
                   help="sample mode: single-use retrievals summed into n_N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--normalize", action="store_true", help="z-score features before folding")
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--out", default="out")
    p.add_argument("--save-vectors", action="store_true", help="also export performance vectors")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("score", help="score exported performance vectors with the memory")
    p.add_argument("--vectors", required=True)
    p.add_argument("--control-qubits", type=_positive, default=100)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pqm", help="probabilistic quantum memory retrieval")
    p.add_argument("backend", choices=("analytic", "circuit", "verify"))
    p.add_argument("--patterns", type=_bit_list, help="comma-separated bit strings")
    p.add_argument("--patterns-file", help="one bit string per line")
    p.add_argument("--input", type=_bits, required=True)
    p.add_argument("--control-qubits", type=_positive, default=1)
    p.add_argument("--max-qubits", type=_positive, default=24)
    p.set_defaults(func=cmd_pqm)

    p = sub.add_parser("superposition", help="exhaustive superposition-training emulation")
    _add_dataset_flags(p, required=False)
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--hidden", type=_positive, default=1)
    p.add_argument("--bits", type=_positive, default=1)
    p.add_argument("--weights", type=_positive, default=None, help="number of gridded weights (default: all)")
    p.add_argument("--low", type=float, default=-1.0)
    p.add_argument("--high", type=float, default=1.0)
    p.add_argument("--control-qubits", type=_positive, default=100)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=_positive, default=superposition.DEFAULT_BRANCH_CAP)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_superposition)

    p = sub.add_parser("report", help="re-emit CSV reports from a results.json")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qcvselect: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, mlp.TrainingError, CapacityError, OSError, ValueError) as exc:
        print(f"qcvselect: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
