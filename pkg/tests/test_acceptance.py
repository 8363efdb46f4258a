"""End-to-end acceptance checks, one printed PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
happen; they are also repeated in the terminal summary.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
from scipy.stats import binom, spearmanr

from qcvselect import crossval, mlp, pqm, selection, superposition
from qcvselect.cli import main
from qcvselect.data import bundled, load_proben1

from .conftest import ACCEPTANCE_LINES


def report(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print("\n" + line, flush=True)
    assert ok, line


def _random_instance(rng):
    k = int(rng.integers(1, 5))
    n = int(rng.integers(1, min(4, 1 << k) + 1))
    chosen = rng.choice(1 << k, size=n, replace=False)
    pats = [tuple((int(c) >> i) & 1 for i in range(k)) for c in chosen]
    probe = tuple(int(b) for b in rng.integers(0, 2, size=k))
    return pats, probe, int(rng.integers(1, 4))


def _deviation(pats, probe, d):
    state, layout = pqm.store_circuit(pats)
    circ = pqm.retrieve_circuit(state, layout, probe, d)
    ana = pqm.retrieve_analytic(pqm.PqmMemory.from_patterns(pats), probe, d)
    return float(np.abs(circ.probs - ana.probs).max())


def test_backend_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    cases = [_random_instance(rng) for _ in range(250)]
    universe = list(itertools.product((0, 1), repeat=2))
    for n in range(1, 5):
        for pats in itertools.combinations(universe, n):
            cases += [(list(pats), probe, d) for probe in universe for d in (1, 2, 3)]
    worst = max(_deviation(*c) for c in cases)
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-9 and elapsed < 60,
           f"{len(cases)} instances, max |circuit - analytic| = {worst:.2e} (< 1e-9), {elapsed:.1f}s (< 60s)")


def test_storage_marginals():
    start = time.perf_counter()
    worst, count = 0.0, 0
    for k in (1, 2, 3):
        universe = list(itertools.product((0, 1), repeat=k))
        for n in range(1, min(4, len(universe)) + 1):
            for pats in itertools.combinations(universe, n):
                state, layout = pqm.store_circuit(pats)
                marg = state.exact_marginal(list(layout.memory))
                want = np.zeros(1 << k)
                for p in pats:
                    want[sum(b << i for i, b in enumerate(p))] = 1 / n
                worst = max(worst, float(np.abs(marg - want).max()))
                count += 1
    elapsed = time.perf_counter() - start
    report(2, worst < 1e-10, f"{count} pattern sets, max |marginal - 1/n| = {worst:.2e} (< 1e-10), {elapsed:.2f}s")


def test_closed_form_sanity():
    k, d = 8, 100
    half = pqm.retrieve_analytic(pqm.PqmMemory.from_patterns(["11110000"]), "1" * k, d)
    same = pqm.retrieve_analytic(pqm.PqmMemory.from_patterns(["1" * k]), "1" * k, d)
    far = pqm.retrieve_analytic(pqm.PqmMemory.from_patterns(["0" * k]), "1" * k, d)
    ok = (abs(half.expected_ones() - 50) < 1e-9 and same.probs[0] == 1.0 and same.probs[1:].sum() == 0
          and far.probs[d] == 1.0 and far.probs[:d].sum() == 0)
    report(3, ok, f"E(X) at d_H/k=1/2 is {half.expected_ones():.12f}; d_H=0 -> P(0)={same.probs[0]}; "
                  f"d_H=k -> P(d)={far.probs[d]}")


def _uniform_error_p_le_1(e, k, d):
    vectors = [tuple([0] * e + [1] * (k - e)), tuple([1] * (k - e) + [0] * e)]
    return pqm.retrieve_analytic(pqm.PqmMemory.from_patterns(vectors), (1,) * k, d).cumulative(1)


def test_mixture_separation():
    start = time.perf_counter()
    k, d = 69, 100
    results = {}
    for rate in (0.0225, 0.4731):
        # the rate times k is not an integer: check both neighbours through the memory,
        # and the binomial at the exact rate
        lo, hi = math.floor(rate * k), math.ceil(rate * k)
        exact = float(binom.cdf(1, d, math.sin(math.pi * rate / 2) ** 2))
        results[rate] = (_uniform_error_p_le_1(lo, k, d), _uniform_error_p_le_1(hi, k, d), exact)
    good, bad = results[0.0225], results[0.4731]
    elapsed = time.perf_counter() - start
    ok = min(good) >= 0.97 and max(bad) <= 0.20 and elapsed < 1
    report(4, ok, "P(y<=1) at rate 0.0225: e=1 {:.4f}, e=2 {:.4f}, exact {:.4f} (>= 0.97); "
                  "at rate 0.4731: e=32 {:.2e}, e=33 {:.2e}, exact {:.2e} (<= 0.20); {:.2f}s".format(*good, *bad, elapsed))


@pytest.fixture(scope="module")
def cancer_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("cancer")
    start = time.perf_counter()
    code = main(["select", "--dataset", "cancer", "--folds", "10", "--seeds-per-fold", "10",
                 "--hidden-min", "1", "--hidden-max", "20", "--control-qubits", "100", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "results.json").read_text())
    return doc, time.perf_counter() - start


def test_cancer_dimensions():
    ds = load_proben1(bundled("cancer"))
    dims = (ds.n_examples, ds.n_features, ds.class_count)
    report("5 (dims)", dims == (699, 9, 2), f"cancer N, F, classes = {dims} (expected (699, 9, 2))")


def test_cancer_rank_correlation(cancer_run):
    doc, elapsed = cancer_run
    acc = [r["mean_accuracy"] for r in doc["results"]]
    ex = [r["expected_ones"] for r in doc["results"]]
    rho = spearmanr(acc, [-x for x in ex]).statistic
    report("5a", len(acc) == 20 and rho >= 0.95,
           f"Spearman(mean accuracy, -E(X)) = {rho:.4f} over {len(acc)} architectures (>= 0.95), run {elapsed:.0f}s")


def test_cancer_selection_gap(cancer_run):
    doc, _ = cancer_run
    by_h = {r["neurons"]: r for r in doc["results"]}
    best = max(r["mean_accuracy"] for r in doc["results"])
    chosen = by_h[doc["chosen"]]["mean_accuracy"]
    report("5b", best - chosen <= 0.01,
           f"chosen hidden={doc['chosen']} accuracy {chosen:.4f}, best {best:.4f}, gap {best - chosen:.4f} (<= 0.01)")


def test_cancer_expected_ones_span(cancer_run):
    doc, _ = cancer_run
    ex = [r["expected_ones"] for r in doc["results"]]
    span = max(ex) / min(ex) if min(ex) > 0 else math.inf
    report("5c", span >= 100,
           f"E(X) ranges {min(ex):.4f} .. {max(ex):.4f}, ratio {span:.1f} (>= 100)")


def test_training_call_count():
    ds = load_proben1(bundled("cancer"))
    calls = []

    def counting(model, X, y, config, seed=None):
        calls.append(seed)
        return mlp.train(model, X, y, config, seed=seed)

    cfg = selection.SelectionConfig(kappa=10, seeds_per_fold=10)
    selection.evaluate_architecture(ds, 2, cfg, train_fn=counting)
    real = len(calls)

    calls.clear()

    def stub(model, X, y, config, seed=None):
        calls.append(seed)
        return model, mlp.TrainReport()

    selection.evaluate_architecture(ds, 2, selection.SelectionConfig(), train_fn=stub)
    report(6, real == 100 and len(calls) == 1000,
           f"training calls: {real} for kappa=10 x 10 seeds, {len(calls)} for the default 10 x 100")


def test_superposition_oracle():
    start = time.perf_counter()
    ds = superposition.xor_dataset()
    folds = crossval.make_folds(ds.n_examples, 2, 0)
    cfg = mlp.MlpConfig(hidden_neurons=1)
    grid = superposition.WeightGrid(1, ds.n_features * 1 + ds.class_count * 1)
    branches = superposition.run_all(ds, folds, cfg, grid)
    dist = superposition.evaluate_superposition(branches, 100)
    oracle = superposition.mixture_oracle(branches, 100)
    dev = float(np.abs(dist.probs - oracle.probs).max())
    expected = folds.kappa * grid.size
    report(7, dev <= 1e-12 and len(branches) == expected,
           f"{len(branches)} branches (kappa*|W| = {expected}), max |memory - oracle| = {dev:.2e} (<= 1e-12), "
           f"{time.perf_counter() - start:.1f}s")


def _fd_rel_error(rng):
    F, H, C = (int(x) for x in rng.integers(1, 5, size=3))
    C = max(C, 2)
    model = mlp.MlpModel(F, H, C, rng.normal(scale=0.8, size=H * F + H + C * H + C))
    X = rng.normal(size=(6, F))
    for _ in range(100):
        near = (np.abs(X @ model.W1.T + model.b1) < 1e-3).any(axis=1)
        if not near.any():
            break
        X[near] = rng.normal(size=(near.sum(), F))
    y = rng.integers(0, C, size=6)
    alpha = float(rng.choice([0.0, 1e-4, 0.1]))
    _, g = mlp.loss_and_grad(model, X, y, alpha)
    num = np.zeros_like(g)
    for i in range(g.size):
        p, m = model.copy(), model.copy()
        p.theta[i] += 1e-5
        m.theta[i] -= 1e-5
        num[i] = (mlp.loss_and_grad(p, X, y, alpha)[0] - mlp.loss_and_grad(m, X, y, alpha)[0]) / 2e-5
    return np.linalg.norm(g - num) / max(np.linalg.norm(g), np.linalg.norm(num), 1e-12)


def test_mlp_hygiene(tmp_path):
    rng = np.random.default_rng(8)
    worst = max(_fd_rel_error(rng) for _ in range(50))

    x = np.concatenate([np.linspace(-2, -0.2, 10), np.linspace(0.2, 2, 10)])
    X, y = x[:, None], (x > 0).astype(np.int64)
    cfg = mlp.MlpConfig(hidden_neurons=3, max_iter=2000)
    trained, _ = mlp.train(mlp.init_weights(cfg, 1, 2, 0), X, y, cfg, seed=0)
    toy_acc = float((mlp.predict(trained, X) == y).mean())

    base = ["select", "--dataset", "cancer", "--folds", "5", "--seeds-per-fold", "3",
            "--hidden-min", "1", "--hidden-max", "4", "--control-qubits", "100"]
    outputs = []
    for jobs in ("1", "2", "4"):
        out = tmp_path / f"jobs{jobs}"
        assert main(base + ["--jobs", jobs, "--out", str(out)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()})
    identical = all(o == outputs[0] for o in outputs[1:])

    report(8, worst < 1e-4 and toy_acc == 1.0 and identical,
           f"worst gradient rel. error {worst:.2e} over 50 models (< 1e-4); separable toy accuracy {toy_acc}; "
           f"reports byte-identical across --jobs 1/2/4: {identical}")
