"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``; the lines are also
repeated in the terminal summary.
"""

import csv
import math
import statistics
import time
from collections import Counter

import numpy as np
import pytest
import yaml

from conftest import PAGIE_SET, random_programs, recursive_eval
from stackgp import cli
from stackgp.data import pagie_grid
from stackgp.engine import fit, large_scale_config, pagie_config, predict_classification
from stackgp.fitness import Metric, rank_vector, raw_fitness
from stackgp.interpreter import eval_batch
from stackgp.mutation import MutationConfig, MutationKind, choose_mutation
from stackgp.program import Program, validate_prefix
from stackgp.rng import Domain, RngStream
from stackgp.selection import adjusted_fitness

pytestmark = pytest.mark.slow

SEEDS = range(10)


def test_criterion_1_oracle_equivalence(criterion):
    rng = np.random.default_rng(1)
    n_programs, n_rows = 1000, 10
    t0 = time.perf_counter()
    progs = random_programs(n_programs, seed=11, max_depth=10, function_set=PAGIE_SET,
                            n_features=3)
    X = rng.uniform(-5, 5, size=(n_rows, 3))
    out = eval_batch(progs, X)
    worst, bad = 0.0, 0
    for j, p in enumerate(progs):
        for i, row in enumerate(X):
            want = recursive_eval(p.nodes, row)
            got = out[i, j]
            if got != want:
                rel = abs(got - want) / abs(want) if want else math.inf
                worst = max(worst, rel)
                bad += rel > 1e-12
    elapsed = time.perf_counter() - t0
    pairs = n_programs * n_rows
    max_depth = max(p.depth for p in progs)
    ok = bad == 0 and elapsed < 30 and max_depth <= 10 and pairs >= 10_000
    criterion(1, ok, f"{pairs} pairs, depth<={max_depth}, {bad} mismatches "
                     f"(worst rel {worst:.2e}), {elapsed:.2f}s")
    assert ok


def test_criterion_2_structural_safety(criterion):
    violations, audited = 0, 0

    def audit(gen, population):
        nonlocal violations, audited
        for p in population:
            audited += 1
            try:
                validate_prefix(p.nodes)
            except ValueError:
                violations += 1
                continue
            violations += p.depth > cfg.stack_capacity - 1

    data = pagie_grid(64)
    generations = 0
    for seed in range(5):
        cfg = pagie_config(seed=seed)
        result = fit(data.X, data.targets, data.weights, cfg, callback=audit)
        generations += len(result.stats)
    ok = violations == 0 and generations == 5 * 50
    criterion(2, ok, f"{audited} programs over {generations} generations, "
                     f"{violations} violations")
    assert ok


# (raw, length, c, higher_is_better, expected)
PARSIMONY_CASES = [
    (2.0, 5, 0.01, False, 2.05),
    (2.0, 5, 0.0, False, 2.0),
    (1.0, 10, 0.01, False, 1.1),
    (0.5, 3, 0.1, False, 0.8),
    (3.0, 7, 0.001, False, 3.007),
    (0.0, 1, 0.5, False, 0.5),
    (1.5, 4, 0.25, False, 2.5),
    (10.0, 100, 0.01, False, 11.0),
    (0.25, 8, 0.125, False, 1.25),
    (-1.0, 2, 0.5, False, 0.0),
    (4.0, 15, 0.0, False, 4.0),
    (7.5, 2, 1.0, False, 9.5),
    (0.1, 1, 0.0, False, 0.1),
    (100.0, 50, 0.02, False, 101.0),
    (0.75, 6, 0.25, False, 2.25),
    (1.0, 4, 0.25, True, 0.0),
    (0.9, 5, 0.02, True, 0.8),
    (0.5, 2, 0.125, True, 0.25),
    (1.0, 1, 0.0, True, 1.0),
    (-0.5, 4, 0.5, True, -2.5),
]


def _program_of_length(n):
    # Chain of unary functions over one variable
    if n == 1:
        return Program.from_dict({"nodes": [{"var": 0}]})
    return Program.from_dict({"nodes": [{"op": "sin"}] * (n - 1) + [{"var": 0}]})


def test_criterion_3_parsimony(criterion):
    failures = []
    for raw, length, c, hib, want in PARSIMONY_CASES:
        metric = "pearson" if hib else "rmse"
        p = _program_of_length(length).with_fitness(raw, metric)
        assert p.length == length
        got = adjusted_fitness(p, c, hib)
        if got != want:
            failures.append((raw, length, c, hib, want, got))
    ok = not failures and len(PARSIMONY_CASES) == 20
    criterion(3, ok, f"{len(PARSIMONY_CASES)} hand cases, exact equality, "
                     f"{len(failures)} failures {failures}")
    assert ok


def _naive_ranks(v):
    order = sorted(range(len(v)), key=lambda i: v[i])
    ranks = [0.0] * len(v)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and v[order[j + 1]] == v[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _naive_pearson(x, y, w):
    sw = sum(w)
    mx = sum(wi * xi for wi, xi in zip(w, x)) / sw
    my = sum(wi * yi for wi, yi in zip(w, y)) / sw
    cov = sum(wi * (xi - mx) * (yi - my) for wi, xi, yi in zip(w, x, y)) / sw
    vx = sum(wi * (xi - mx) ** 2 for wi, xi in zip(w, x)) / sw
    vy = sum(wi * (yi - my) ** 2 for wi, yi in zip(w, y)) / sw
    return cov / math.sqrt(vx * vy)


def _naive(metric, y, p, w):
    sw = sum(w)
    if metric == "mae":
        return sum(wi * abs(a - b) for wi, a, b in zip(w, y, p)) / sw
    if metric == "mse":
        return sum(wi * (a - b) ** 2 for wi, a, b in zip(w, y, p)) / sw
    if metric == "rmse":
        return math.sqrt(_naive("mse", y, p, w))
    if metric == "logloss":
        total = 0.0
        for wi, a, b in zip(w, y, p):
            q = min(max(1.0 / (1.0 + math.exp(-b)), 1e-15), 1 - 1e-15)
            total += -wi * (a * math.log(q) + (1 - a) * math.log(1 - q))
        return total / sw
    if metric == "pearson":
        return _naive_pearson(y, p, w)
    return _naive_pearson(_naive_ranks(y), _naive_ranks(p), w)


def test_criterion_4_metric_oracles(criterion):
    rng = np.random.default_rng(2024)
    worst, bad, identity_breaks = 0.0, 0, 0
    n_vectors = 1000
    for k in range(n_vectors):
        n = int(rng.integers(2, 60))
        y = rng.normal(size=n)
        p = rng.normal(size=n)
        if k % 3 == 0:
            # Coarse values force rank ties
            y, p = np.round(y), np.round(p)
        w = rng.uniform(0.05, 2.0, size=n)
        labels = (rng.random(n) < 0.5).astype(float)
        for metric in Metric:
            target = labels if metric is Metric.LOGLOSS else y
            if not metric.elementwise and (np.ptp(target) == 0 or np.ptp(p) == 0):
                continue
            got = raw_fitness(metric, target, p, w)
            want = _naive(metric.value, list(target), list(p), list(w))
            rel = abs(got - want) / abs(want) if want else abs(got)
            worst = max(worst, rel)
            bad += rel > 1e-10
        if np.ptp(y) and np.ptp(p):
            s = raw_fitness("spearman", y, p, w)
            pr = raw_fitness("pearson", rank_vector(y), rank_vector(p), w)
            identity_breaks += s != pr
    ok = bad == 0 and identity_breaks == 0
    criterion(4, ok, f"{n_vectors} weighted vectors x 6 metrics, worst rel {worst:.2e}, "
                     f"{bad} over 1e-10; spearman identity breaks {identity_breaks}")
    assert ok


def test_criterion_5_pagie_protocol(criterion):
    data = pagie_grid(64)
    monotone, gen0, final, times = True, [], [], []
    for seed in SEEDS:
        cfg = pagie_config(seed=seed)
        assert cfg.function_set == PAGIE_SET
        t0 = time.perf_counter()
        result = fit(data.X, data.targets, data.weights, cfg)
        times.append(time.perf_counter() - t0)
        bsf = result.best_so_far()
        monotone &= all(b <= a for a, b in zip(bsf, bsf[1:]))
        gen0.append(bsf[0])
        final.append(bsf[-1])
    med0, med_final = statistics.median(gen0), statistics.median(final)
    ok_a, ok_b, ok_c = monotone, med_final < med0, max(times) < 60
    ok = data.n_rows == 4096 and ok_a and ok_b and ok_c
    criterion(5, ok, f"(a) monotone={ok_a} (b) median RMSE {med0:.4f} -> {med_final:.4f} "
                     f"(c) slowest run {max(times):.2f}s")
    assert ok


def test_criterion_6_determinism(criterion, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "run.yaml"
    config.write_text(yaml.safe_dump(dict(
        pagie_side=64, population_size=50, n_generations=50, metric="rmse",
        parsimony_coefficient=0.001, seed=7)))
    outputs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 8)):
        assert cli.main(["fit", str(config), "--no-timings", "--workers", str(workers),
                         "--stats-out", f"{tag}.csv", "--model-out", f"{tag}.json"]) == 0
        outputs.append((tmp_path / f"{tag}.csv").read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2] and len(outputs[0]) > 0
    criterion(6, ok, "stats CSV byte-identical across 2 runs and workers {1, 8}: "
                     f"{outputs[0] == outputs[1]}, {outputs[0] == outputs[2]}")
    assert ok


def test_criterion_7_mutation_distribution(criterion):
    mcfg = pagie_config().mutation
    n = 100_000
    counts = Counter(choose_mutation(RngStream(3, 1, i, Domain.MUTATION), mcfg)
                     for i in range(n))
    expected = {MutationKind.CROSSOVER: 0.7, MutationKind.SUBTREE: 0.1,
                MutationKind.POINT: 0.1, MutationKind.HOIST: 0.05,
                MutationKind.REPRODUCTION: 0.05}
    observed = {k: counts[k] / n for k in expected}
    dev = max(abs(observed[k] - p) for k, p in expected.items())
    ok = dev <= 0.01 and mcfg == MutationConfig()
    shown = ", ".join(f"{k.value} {v:.4f}" for k, v in observed.items())
    criterion(7, ok, f"{n} draws: {shown}; max deviation {dev:.4f}")
    assert ok


def test_criterion_8_classification(criterion):
    rng = np.random.default_rng(0)
    X = rng.uniform(-1, 1, size=(10_000, 2))
    y = (X[:, 0] + 0.5 * X[:, 1] - 0.2 > 0).astype(float)
    improved, accuracies = 0, []
    for seed in SEEDS:
        result = fit(X, y, cfg=large_scale_config("logloss", seed=seed, n_generations=50))
        improved += result.stats[-1].best_raw_fitness < result.stats[0].best_raw_fitness
        _, classes = predict_classification(result.best, X)
        accuracies.append(float(np.mean(classes == y)))
    ok = improved >= 8 and min(accuracies) > 0.5
    criterion(8, ok, f"{improved}/10 seeds improved log loss; accuracy "
                     f"min {min(accuracies):.3f} max {max(accuracies):.3f}")
    assert ok


def test_criterion_9_scaling_smoke(criterion, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code = cli.main(["benchmark", "--sides", "64", "128", "256", "--runs", "1",
                     "--out", "bench.csv"])
    with open(tmp_path / "bench.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    reported = [r["rows"] for r in rows]
    ok = code == 0 and reported == ["4096", "16384", "65536"]
    criterion(9, ok, f"benchmark exit {code}, reported rows {reported}")
    assert ok
