"""Random program generation: Full, Grow and ramped half-and-half."""

from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .functions import CATALOG, resolve_function_set
from .program import Node, Program, const, func, var
from .rng import RngStream

__all__ = ["InitMethod", "Primitives", "random_program", "ramped_init", "random_terminal"]


class InitMethod(str, Enum):
    FULL = "full"
    GROW = "grow"
    RAMPED_HALF_AND_HALF = "half and half"


@dataclass(frozen=True)
class Primitives:
    """The building blocks programs are drawn from.

    ``const_range`` of ``None`` disables constants, leaving only variables
    as terminals.
    """

    function_set: Tuple[str, ...]
    n_features: int
    const_range: Optional[Tuple[float, float]] = (-1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "function_set", resolve_function_set(self.function_set))
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.const_range is not None:
            lo, hi = self.const_range
            if not lo <= hi:
                raise ValueError(f"const_range {self.const_range} is not ordered")
            object.__setattr__(self, "const_range", (float(lo), float(hi)))

    def by_arity(self, arity: int) -> List[str]:
        return [f for f in self.function_set if CATALOG[f].arity == arity]

    @property
    def n_terminals(self) -> int:
        return self.n_features + (self.const_range is not None)


def random_terminal(stream: RngStream, prims: Primitives) -> Node:
    """One of ``n_features`` variables or a constant, each slot equally likely."""
    k = stream.integer(prims.n_terminals)
    if k < prims.n_features:
        return var(k)
    lo, hi = prims.const_range
    return const(stream.uniform(lo, hi))


def random_program(stream: RngStream, method: InitMethod, max_depth: int,
                   prims: Primitives) -> Program:
    """Grow a random tree directly as a prefix list.

    Full places every terminal at exactly ``max_depth``. Grow picks,
    at each node above ``max_depth``, a function with probability
    ``|functions| / (|functions| + |terminals|)``.
    """
    method = InitMethod(method)
    if method is InitMethod.RAMPED_HALF_AND_HALF:
        raise ValueError("random_program takes FULL or GROW; use ramped_init")
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    n_funcs = len(prims.function_set)
    p_func = n_funcs / (n_funcs + prims.n_terminals)
    nodes: List[Node] = []
    pending = [0]
    while pending:
        d = pending.pop()
        if d < max_depth and (method is InitMethod.FULL or stream.random() < p_func):
            node = func(stream.choice(prims.function_set))
            pending.extend([d + 1] * node.arity)
        else:
            node = random_terminal(stream, prims)
        nodes.append(node)
    return Program(tuple(nodes))


def ramped_init(stream: RngStream, pop_size: int, depth_range: Sequence[int],
                prims: Primitives) -> List[Program]:
    """Ramped half-and-half population.

    The first ``pop_size // 2`` programs use Full, the rest Grow; the
    maximum depth of program ``i`` is ``d_min + i mod (d_max - d_min + 1)``.
    """
    d_min, d_max = depth_range
    if pop_size < 1:
        raise ValueError("pop_size must be >= 1")
    if not 1 <= d_min <= d_max:
        raise ValueError(f"invalid depth range {tuple(depth_range)}")
    n_full = pop_size // 2
    span = d_max - d_min + 1
    out = []
    for i in range(pop_size):
        method = InitMethod.FULL if i < n_full else InitMethod.GROW
        out.append(random_program(stream, method, d_min + i % span, prims))
    return out
