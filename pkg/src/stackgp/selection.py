"""Tournament selection on parsimony-adjusted fitness."""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .fitness import Metric
from .program import Program
from .rng import Domain, RngStream

__all__ = ["SelectionConfig", "adjusted_fitness", "run_selection", "tournament"]


@dataclass(frozen=True)
class SelectionConfig:
    tournament_size: int = 4
    parsimony_coefficient: float = 0.01
    higher_is_better: bool = False

    def __post_init__(self):
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be >= 1")
        if not self.parsimony_coefficient >= 0:
            raise ValueError("parsimony_coefficient must be >= 0")

    @classmethod
    def for_metric(cls, metric, tournament_size=4, parsimony_coefficient=0.01):
        return cls(tournament_size, parsimony_coefficient, Metric.parse(metric).higher_is_better)


def adjusted_fitness(program: Program, c: float, higher_is_better: bool = False) -> float:
    """Raw fitness with a length penalty ``c * len`` pushed toward "worse".

    >>> from stackgp.program import Program, var
    >>> adjusted_fitness(Program((var(0),), raw_fitness=2.0), 0.5)
    2.5
    """
    if program.raw_fitness is None:
        raise ValueError("program has no raw fitness")
    penalty = c * program.length
    if higher_is_better:
        return program.raw_fitness - penalty
    return program.raw_fitness + penalty


def _adjusted_array(population: Sequence[Program], cfg: SelectionConfig) -> np.ndarray:
    return np.array([adjusted_fitness(p, cfg.parsimony_coefficient, cfg.higher_is_better)
                     for p in population])


def _winner(stream: RngStream, adjusted: np.ndarray, cfg: SelectionConfig) -> int:
    drawn = stream.integers(len(adjusted), cfg.tournament_size)
    best = int(drawn[0])
    for idx in drawn[1:]:
        idx = int(idx)
        a, b = adjusted[idx], adjusted[best]
        better = a > b if cfg.higher_is_better else a < b
        if better or (a == b and idx < best):
            best = idx
    return best


def tournament(stream: RngStream, population: Sequence[Program], cfg: SelectionConfig) -> int:
    """Index of the best of ``k`` programs drawn uniformly with replacement.

    Ties go to the smallest population index.
    """
    if not population:
        raise ValueError("empty population")
    return _winner(stream, _adjusted_array(population, cfg), cfg)


def run_selection(seed: int, generation: int, n_tournaments: int,
                  population: Sequence[Program], cfg: SelectionConfig) -> List[int]:
    """Winner indices of ``n_tournaments`` independent tournaments.

    Tournament ``t`` draws from stream ``(seed, generation, t)``, so the
    result is a pure function of the arguments.
    """
    if n_tournaments < 1:
        raise ValueError("n_tournaments must be >= 1")
    if not population:
        raise ValueError("empty population")
    adjusted = _adjusted_array(population, cfg)
    return [_winner(RngStream(seed, generation, t, Domain.SELECTION), adjusted, cfg)
            for t in range(n_tournaments)]
