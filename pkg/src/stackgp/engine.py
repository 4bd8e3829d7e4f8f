"""The generational loop and estimator-style front ends."""

import dataclasses
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .fitness import Metric, population_fitness, raw_fitness, sigmoid
from .functions import DEFAULT_FUNCTION_SET, resolve_function_set
from .generate import Primitives, ramped_init
from .interpreter import DEFAULT_STACK_CAPACITY, eval_batch
from .mutation import (
    MutationConfig,
    MutationKind,
    choose_mutation,
    hoist_mutation,
    hoisted_crossover,
    point_mutation,
    reproduction,
    subtree_mutation,
)
from .program import Program
from .rng import Domain, RngStream
from .selection import SelectionConfig, adjusted_fitness, run_selection

__all__ = [
    "EngineConfig",
    "FitResult",
    "GenerationStats",
    "best_index",
    "fit",
    "large_scale_config",
    "pagie_config",
    "predict_classification",
    "predict_regression",
    "score",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngineConfig:
    population_size: int = 50
    n_generations: int = 50
    tournament_size: int = 4
    parsimony_coefficient: float = 0.01
    metric: str = "mae"
    p_crossover: float = 0.7
    p_subtree: float = 0.1
    p_point: float = 0.1
    p_hoist: float = 0.05
    p_reproduction: float = 0.05
    p_point_replace: float = 0.05
    init_depth: Tuple[int, int] = (2, 6)
    const_range: Optional[Tuple[float, float]] = (-1.0, 1.0)
    function_set: Tuple[str, ...] = DEFAULT_FUNCTION_SET
    stack_capacity: int = DEFAULT_STACK_CAPACITY
    seed: int = 0
    stopping_threshold: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "metric", Metric.parse(self.metric).value)
        set_(self, "function_set", resolve_function_set(self.function_set))
        set_(self, "init_depth", tuple(int(d) for d in self.init_depth))
        if self.const_range is not None:
            set_(self, "const_range", tuple(float(c) for c in self.const_range))
        for name in ("population_size", "n_generations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be in [0, 2**64)")
        d_min, d_max = self.init_depth
        if not 1 <= d_min <= d_max:
            raise ValueError(f"init_depth {self.init_depth} must satisfy 1 <= min <= max")
        if d_max > self.stack_capacity - 1:
            raise ValueError(
                f"init_depth max {d_max} exceeds stack bound {self.stack_capacity - 1}"
            )
        # sub-configs validate the remaining fields
        self.selection
        self.mutation
        self.primitives(1)

    @property
    def selection(self) -> SelectionConfig:
        return SelectionConfig.for_metric(self.metric, self.tournament_size,
                                          self.parsimony_coefficient)

    @property
    def mutation(self) -> MutationConfig:
        return MutationConfig(self.p_crossover, self.p_subtree, self.p_point, self.p_hoist,
                              self.p_reproduction, self.p_point_replace, self.stack_capacity)

    @property
    def higher_is_better(self) -> bool:
        return Metric(self.metric).higher_is_better

    def primitives(self, n_features: int) -> Primitives:
        return Primitives(self.function_set, n_features, self.const_range)

    def to_dict(self) -> Dict[str, Any]:
        d = dataclasses.asdict(self)
        d["init_depth"] = list(self.init_depth)
        d["function_set"] = list(self.function_set)
        if self.const_range is not None:
            d["const_range"] = list(self.const_range)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EngineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**d)

    def replace(self, **changes) -> "EngineConfig":
        return dataclasses.replace(self, **changes)


def pagie_config(**overrides) -> EngineConfig:
    """Synthetic-benchmark settings (population 50, 50 generations, RMSE).

    The 0.25 mutation share is split 0.1 subtree / 0.1 point / 0.05 hoist.
    """
    base = dict(population_size=50, n_generations=50, metric="rmse", p_crossover=0.7,
                p_subtree=0.1, p_point=0.1, p_hoist=0.05, p_reproduction=0.05,
                tournament_size=4, parsimony_coefficient=0.001)
    base.update(overrides)
    return EngineConfig(**base)


def large_scale_config(metric: str = "rmse", **overrides) -> EngineConfig:
    """Large-dataset settings: population 35, tournament 4, parsimony 0.01."""
    base = dict(population_size=35, n_generations=50, tournament_size=4, metric=metric,
                p_crossover=0.7, p_subtree=0.1, p_point=0.1, p_hoist=0.05,
                p_reproduction=0.05, parsimony_coefficient=0.01)
    base.update(overrides)
    return EngineConfig(**base)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_raw_fitness: float
    best_adjusted_fitness: float
    best_len: int
    best_depth: int
    mean_raw_fitness: float
    seconds: float
    n_tournaments: int = 0
    mutation_counts: Dict[str, int] = field(default_factory=dict)


@dataclass
class FitResult:
    population: List[Program]
    stats: List[GenerationStats]
    best: Program
    best_per_generation: List[Program]
    config: EngineConfig

    def best_so_far(self) -> List[float]:
        pick = max if self.config.higher_is_better else min
        out, cur = [], None
        for s in self.stats:
            cur = s.best_raw_fitness if cur is None else pick(cur, s.best_raw_fitness)
            out.append(cur)
        return out


def best_index(population: Sequence[Program], higher_is_better: bool) -> int:
    """Index of the directionally best raw fitness; first wins ties."""
    values = np.array([p.raw_fitness for p in population])
    return int(np.argmax(values) if higher_is_better else np.argmin(values))


def _evaluate(programs: List[Program], X, y, w, cfg: EngineConfig) -> List[Program]:
    preds = eval_batch(programs, X, cfg.stack_capacity, cfg.workers)
    scores = population_fitness(cfg.metric, y, preds, w)
    return [p.with_fitness(float(s), cfg.metric) for p, s in zip(programs, scores)]


def _audit(programs: Sequence[Program], cfg: EngineConfig) -> None:
    limit = cfg.stack_capacity - 1
    for p in programs:
        # Program construction already validated the prefix encoding
        assert p.depth <= limit, f"depth {p.depth} exceeds {limit}"


def _stats(gen: int, pop: List[Program], cfg: EngineConfig, seconds: float,
           n_tournaments: int = 0, counts: Optional[Dict[str, int]] = None) -> GenerationStats:
    b = pop[best_index(pop, cfg.higher_is_better)]
    return GenerationStats(
        generation=gen,
        best_raw_fitness=b.raw_fitness,
        best_adjusted_fitness=adjusted_fitness(b, cfg.parsimony_coefficient, cfg.higher_is_better),
        best_len=b.length,
        best_depth=b.depth,
        mean_raw_fitness=float(np.mean([p.raw_fitness for p in pop])),
        seconds=seconds,
        n_tournaments=n_tournaments,
        mutation_counts=dict(counts or {}),
    )


def _threshold_met(value: float, cfg: EngineConfig) -> bool:
    t = cfg.stopping_threshold
    if t is None:
        return False
    return value > t if cfg.higher_is_better else value < t


def _next_generation(gen: int, pop: List[Program], cfg: EngineConfig, prims: Primitives):
    mcfg = cfg.mutation
    streams = [RngStream(cfg.seed, gen, i, Domain.MUTATION) for i in range(cfg.population_size)]
    kinds = [choose_mutation(s, mcfg) for s in streams]
    n_tournaments = sum(k.n_parents for k in kinds)
    winners = run_selection(cfg.seed, gen, n_tournaments, pop, cfg.selection)
    children = []
    cursor = 0
    for stream, kind in zip(streams, kinds):
        parent = pop[winners[cursor]]
        cursor += 1
        if kind is MutationKind.CROSSOVER:
            donor = pop[winners[cursor]]
            cursor += 1
            child = hoisted_crossover(stream, parent, donor, cfg.stack_capacity)
        elif kind is MutationKind.SUBTREE:
            child = subtree_mutation(stream, parent, prims, cfg.init_depth, cfg.stack_capacity)
        elif kind is MutationKind.POINT:
            child = point_mutation(stream, parent, cfg.p_point_replace, prims)
        elif kind is MutationKind.HOIST:
            child = hoist_mutation(stream, parent)
        else:
            child = reproduction(parent)
        children.append(child)
    assert cursor == n_tournaments
    counts = Counter(k.value for k in kinds)
    return children, n_tournaments, counts


def fit(X, y, weights=None, cfg: EngineConfig = None,
        callback: Optional[Callable[[int, List[Program]], None]] = None) -> FitResult:
    """Evolve a population of programs against ``(X, y)``.

    Generation 0 is the evaluated initial population; every later
    generation is fully replaced by mutated tournament winners. Runs
    ``cfg.n_generations`` generations unless the best raw fitness crosses
    ``cfg.stopping_threshold`` first.

    Parameters
    ----------
    X : array-like of shape (n_rows, n_features)
    y : array-like of shape (n_rows,)
    weights : array-like of shape (n_rows,), optional
    cfg : EngineConfig
    callback : callable, optional
        Called as ``callback(generation, population)`` after each
        generation is evaluated.

    Returns
    -------
    FitResult
    """
    cfg = cfg or EngineConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"X {X.shape} and y {y.shape} disagree on row count")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)
    prims = cfg.primitives(X.shape[1])

    t0 = time.perf_counter()
    init_stream = RngStream(cfg.seed, 0, 0, Domain.INIT)
    pop = _evaluate(ramped_init(init_stream, cfg.population_size, cfg.init_depth, prims),
                    X, y, w, cfg)
    _audit(pop, cfg)
    if callback:
        callback(0, pop)
    stats = [_stats(0, pop, cfg, time.perf_counter() - t0)]
    history = [pop[best_index(pop, cfg.higher_is_better)]]
    log.debug("gen 0 best %.6g", stats[-1].best_raw_fitness)

    for gen in range(1, cfg.n_generations):
        if _threshold_met(stats[-1].best_raw_fitness, cfg):
            break
        t0 = time.perf_counter()
        children, n_t, counts = _next_generation(gen, pop, cfg, prims)
        pop = _evaluate(children, X, y, w, cfg)
        _audit(pop, cfg)
        if callback:
            callback(gen, pop)
        stats.append(_stats(gen, pop, cfg, time.perf_counter() - t0, n_t, counts))
        history.append(pop[best_index(pop, cfg.higher_is_better)])
        log.debug("gen %d best %.6g", gen, stats[-1].best_raw_fitness)

    return FitResult(pop, stats, history[-1], history, cfg)


def predict_regression(program: Program, X, stack_capacity: int = DEFAULT_STACK_CAPACITY) -> np.ndarray:
    return eval_batch([program], X, stack_capacity)[:, 0]


def predict_classification(program: Program, X, threshold: float = 0.5,
                           stack_capacity: int = DEFAULT_STACK_CAPACITY):
    """Sigmoid probabilities and 0/1 classes (1 iff probability >= threshold)."""
    proba = sigmoid(predict_regression(program, X, stack_capacity))
    return proba, (proba >= threshold).astype(np.int64)


def score(program: Program, X, y, weights=None, metric="rmse", task: str = "regression",
          threshold: float = 0.5, stack_capacity: int = DEFAULT_STACK_CAPACITY) -> float:
    """Regression: the weighted metric. Classification: weighted accuracy."""
    y = np.asarray(y, dtype=np.float64)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)
    if task == "regression":
        return raw_fitness(metric, y, predict_regression(program, X, stack_capacity), w)
    if task == "classification":
        _, cls = predict_classification(program, X, threshold, stack_capacity)
        return float(np.sum(w * (cls == y)) / np.sum(w))
    raise ValueError(f"unknown task {task!r}; expected regression or classification")
