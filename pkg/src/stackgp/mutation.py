"""Genetic operators producing children from tournament winners.

All operators are pure given their stream: replaying a stream with the
same inputs yields the same child.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

from .generate import InitMethod, Primitives, random_program, random_terminal
from .interpreter import DEFAULT_STACK_CAPACITY
from .program import Node, Program, depth, func, subtree_span
from .rng import RngStream

__all__ = [
    "MutationConfig",
    "MutationKind",
    "choose_mutation",
    "crossover",
    "hoist_mutation",
    "hoisted_crossover",
    "pick_subtree",
    "point_mutation",
    "reproduction",
    "subtree_mutation",
]

#: Share of subtree-root picks landing on function nodes when both kinds exist.
FUNCTION_PICK_MASS = 0.9


class MutationKind(str, Enum):
    CROSSOVER = "crossover"
    SUBTREE = "subtree"
    POINT = "point"
    HOIST = "hoist"
    REPRODUCTION = "reproduction"

    @property
    def n_parents(self) -> int:
        return 2 if self is MutationKind.CROSSOVER else 1


@dataclass(frozen=True)
class MutationConfig:
    p_crossover: float = 0.7
    p_subtree: float = 0.1
    p_point: float = 0.1
    p_hoist: float = 0.05
    p_reproduction: float = 0.05
    p_point_replace: float = 0.05
    stack_capacity: int = DEFAULT_STACK_CAPACITY

    def __post_init__(self):
        probs = self.probabilities
        for kind, p in probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p_{kind.value}={p} outside [0, 1]")
        if sum(p for _, p in probs) > 1.0 + 1e-9:
            raise ValueError("mutation probabilities sum to more than 1")
        if not 0.0 <= self.p_point_replace <= 1.0:
            raise ValueError("p_point_replace outside [0, 1]")
        if self.stack_capacity < 2:
            raise ValueError("stack_capacity must be >= 2")

    @property
    def probabilities(self) -> Tuple[Tuple[MutationKind, float], ...]:
        return (
            (MutationKind.CROSSOVER, self.p_crossover),
            (MutationKind.SUBTREE, self.p_subtree),
            (MutationKind.POINT, self.p_point),
            (MutationKind.HOIST, self.p_hoist),
            (MutationKind.REPRODUCTION, self.p_reproduction),
        )

    @property
    def max_depth(self) -> int:
        return self.stack_capacity - 1


def choose_mutation(stream: RngStream, cfg: MutationConfig) -> MutationKind:
    """Sample an operator; probability mass left over goes to reproduction."""
    u = stream.random()
    acc = 0.0
    for kind, p in cfg.probabilities:
        acc += p
        if u < acc:
            return kind
    return MutationKind.REPRODUCTION


def pick_subtree(stream: RngStream, nodes: Sequence[Node], lo: int = 0, hi: int = None) -> Tuple[int, int]:
    """Span of a random subtree rooted inside ``nodes[lo:hi]``.

    Function roots share 90% of the probability, terminals 10%, unless
    only one kind is present.
    """
    hi = len(nodes) if hi is None else hi
    funcs = [i for i in range(lo, hi) if nodes[i].arity]
    terms = [i for i in range(lo, hi) if not nodes[i].arity]
    if funcs and terms:
        pool = funcs if stream.random() < FUNCTION_PICK_MASS else terms
    else:
        pool = funcs or terms
    return subtree_span(nodes, stream.choice(pool))


def reproduction(parent: Program) -> Program:
    return Program(parent.nodes, metric=parent.metric)


def point_mutation(stream: RngStream, parent: Program, p_replace: float,
                   prims: Primitives) -> Program:
    """Replace each node with probability ``p_replace``, keeping its arity."""
    nodes = list(parent.nodes)
    hits = stream.randoms(len(nodes)) < p_replace
    for i in map(int, hits.nonzero()[0]):
        node = nodes[i]
        if node.arity:
            options = prims.by_arity(node.arity)
            if options:
                nodes[i] = func(stream.choice(options))
        else:
            nodes[i] = random_terminal(stream, prims)
    return Program(tuple(nodes), metric=parent.metric)


def hoist_mutation(stream: RngStream, parent: Program) -> Program:
    """Replace a random subtree by one of its own subtrees."""
    nodes = parent.nodes
    start, end = pick_subtree(stream, nodes)
    sub_start, sub_end = pick_subtree(stream, nodes, start, end)
    return Program(nodes[:start] + nodes[sub_start:sub_end] + nodes[end:], metric=parent.metric)


def _splice(stream: RngStream, parent: Program, donor: Program):
    start, end = pick_subtree(stream, parent.nodes)
    d_start, d_end = pick_subtree(stream, donor.nodes)
    inserted = donor.nodes[d_start:d_end]
    return parent.nodes[:start], inserted, parent.nodes[end:]


def crossover(stream: RngStream, parent: Program, donor: Program) -> Program:
    """Replace a random parent subtree with a random donor subtree."""
    head, inserted, tail = _splice(stream, parent, donor)
    return Program(head + inserted + tail, metric=parent.metric)


def hoisted_crossover(stream: RngStream, parent: Program, donor: Program,
                      stack_capacity: int = DEFAULT_STACK_CAPACITY) -> Program:
    """Crossover that keeps the child evaluable on a fixed stack.

    While the child is deeper than ``stack_capacity - 1``, the inserted
    donor subtree is replaced by a uniformly chosen proper subtree of
    itself. Each step strictly shrinks the insertion, and a terminal
    insertion cannot exceed the parent's depth, so the loop terminates.
    """
    limit = stack_capacity - 1
    if parent.depth > limit:
        raise ValueError(f"parent depth {parent.depth} exceeds bound {limit}")
    head, inserted, tail = _splice(stream, parent, donor)
    while depth(head + inserted + tail) > limit:
        j = 1 + stream.integer(len(inserted) - 1)
        s, e = subtree_span(inserted, j)
        inserted = inserted[s:e]
    return Program(head + inserted + tail, metric=parent.metric)


def subtree_mutation(stream: RngStream, parent: Program, prims: Primitives,
                     depth_range: Tuple[int, int],
                     stack_capacity: int = DEFAULT_STACK_CAPACITY) -> Program:
    """Hoisted crossover against a freshly grown random donor."""
    d_min, d_max = depth_range
    max_depth = d_min + stream.integer(d_max - d_min + 1)
    donor = random_program(stream, InitMethod.GROW, max_depth, prims)
    return hoisted_crossover(stream, parent, donor, stack_capacity)
