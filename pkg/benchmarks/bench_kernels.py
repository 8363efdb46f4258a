"""Compare the compiled kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from qcvselect import _backend, crossval, mlp
from qcvselect.data import bundled, load_proben1
from qcvselect.statevector import StateVector


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def gate_sweep(q=20):
    amps = np.zeros(1 << q, dtype=complex)
    amps[0] = 1

    def run():
        sv = StateVector(amps.copy())
        for t in range(q):
            sv.apply_h(t)
        for t in range(q - 1):
            sv.apply_cnot(t, t + 1)
        sv.exact_marginal(list(range(4)))

    return run


def adam_epochs(ds):
    cfg = mlp.MlpConfig(hidden_neurons=10, max_iter=100, tol=0.0, n_iter_no_change=10**6)
    model = mlp.init_weights(cfg, ds.n_features, ds.class_count, 0)
    return lambda: mlp.train(model, ds.features, ds.labels, cfg, seed=0)


def ensemble(ds):
    folds = crossval.make_folds(ds.n_examples, 10, 0)
    return lambda: crossval.train_ensemble(ds, folds, 5, 2, 0)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    ds = load_proben1(bundled("cancer"))
    cases = [
        ("20-qubit H+CNOT sweep + marginal", gate_sweep()),
        ("100 adam epochs, cancer, H=10", adam_epochs(ds)),
        ("ensemble 10 folds x 2 seeds, H=5", ensemble(ds)),
    ]
    backends = _backend.available()
    print(f"{'case':<36}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    previous = _backend.name()
    for label, fn in cases:
        row = []
        for b in backends:
            _backend.use(b)
            row.append(best_of(fn, args.repeat))
        line = f"{label:<36}" + "".join(f"{t * 1e3:>10.1f}ms" for t in row)
        if len(row) > 1:
            line += f"{row[1] / row[0]:>11.1f}x"
        print(line)
    _backend.use(previous)


if __name__ == "__main__":
    main()
