"""Prefix-list program representation.

A program is a flat sequence of nodes in prefix (Polish) order. Structural
checks use a single "needed operands" counter: it starts at 1, every token
consumes one slot and opens ``arity`` new ones.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .functions import CATALOG, resolve_function_set

__all__ = [
    "DanglingError",
    "Node",
    "PrefixError",
    "Program",
    "UnderflowError",
    "const",
    "depth",
    "func",
    "subtree_span",
    "validate_prefix",
    "var",
]

FUNCTION = "function"
VARIABLE = "variable"
CONSTANT = "constant"


class PrefixError(ValueError):
    """Raised for node sequences that are not a single prefix-encoded tree."""


class UnderflowError(PrefixError):
    pass


class DanglingError(PrefixError):
    pass


@dataclass(frozen=True, slots=True)
class Node:
    kind: str
    value: Union[str, int, float]
    arity: int = 0

    @property
    def is_function(self) -> bool:
        return self.kind == FUNCTION

    @property
    def is_terminal(self) -> bool:
        return self.kind != FUNCTION

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == FUNCTION:
            return {"op": self.value}
        if self.kind == VARIABLE:
            return {"var": self.value}
        return {"const": self.value}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Node":
        if len(d) != 1:
            raise ValueError(f"node must have exactly one key, got {sorted(d)}")
        if "op" in d:
            return func(d["op"])
        if "var" in d:
            return var(d["var"])
        if "const" in d:
            return const(d["const"])
        raise ValueError(f"unknown node {d!r}")

    def __str__(self) -> str:
        if self.kind == FUNCTION:
            return str(self.value)
        if self.kind == VARIABLE:
            return f"x{self.value}"
        return repr(self.value)


def func(opcode: str) -> Node:
    name = resolve_function_set([opcode])[0]
    return Node(FUNCTION, name, CATALOG[name].arity)


def var(index: int) -> Node:
    if isinstance(index, bool) or not isinstance(index, int) or index < 0:
        raise ValueError(f"feature index must be a non-negative int, got {index!r}")
    return Node(VARIABLE, index)


def const(value: float) -> Node:
    return Node(CONSTANT, float(value))


def validate_prefix(nodes: Sequence[Node]) -> None:
    """Check that ``nodes`` encodes exactly one tree in prefix order.

    Raises
    ------
    UnderflowError
        All operands were satisfied before the last token.
    DanglingError
        Tokens ran out with operands still outstanding.
    """
    if len(nodes) == 0:
        raise PrefixError("empty node sequence")
    needed = 1
    last = len(nodes) - 1
    for i, node in enumerate(nodes):
        needed += node.arity - 1
        if needed == 0 and i != last:
            raise UnderflowError(f"tree complete at index {i}, {last - i} trailing node(s)")
    if needed > 0:
        raise DanglingError(f"{needed} operand(s) missing at end of program")


def subtree_span(nodes: Sequence[Node], start: int) -> Tuple[int, int]:
    """Half-open index range of the subtree rooted at ``start``."""
    if not 0 <= start < len(nodes):
        raise IndexError(f"start {start} out of range for {len(nodes)} nodes")
    needed = 1
    end = start
    while needed:
        needed += nodes[end].arity - 1
        end += 1
    return start, end


def depth(nodes: Sequence[Node]) -> int:
    """Depth of the encoded tree; a lone terminal has depth 0."""
    validate_prefix(nodes)
    pending: List[int] = [0]
    deepest = 0
    for node in nodes:
        d = pending.pop()
        if d > deepest:
            deepest = d
        pending.extend([d + 1] * node.arity)
    return deepest


@dataclass(frozen=True)
class Program:
    """An immutable prefix-encoded program plus fitness bookkeeping.

    ``length`` and ``depth`` are derived from ``nodes`` on construction,
    which also validates the encoding.
    """

    nodes: Tuple[Node, ...]
    raw_fitness: Optional[float] = None
    metric: Optional[str] = None
    length: int = field(init=False)
    depth: int = field(init=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "depth", depth(nodes))
        object.__setattr__(self, "length", len(nodes))

    def __len__(self) -> int:
        return self.length

    def with_fitness(self, raw_fitness: Optional[float], metric: Optional[str] = None) -> "Program":
        return replace(self, raw_fitness=raw_fitness, metric=metric or self.metric)

    def max_feature(self) -> int:
        """Largest referenced feature index, or -1 when none."""
        return max((n.value for n in self.nodes if n.kind == VARIABLE), default=-1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "len": self.length,
            "depth": self.depth,
            "raw_fitness": self.raw_fitness,
            "metric": self.metric,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Program":
        prog = cls(
            tuple(Node.from_dict(n) for n in d["nodes"]),
            raw_fitness=d.get("raw_fitness"),
            metric=d.get("metric"),
        )
        for key, actual in (("len", prog.length), ("depth", prog.depth)):
            if key in d and d[key] != actual:
                raise ValueError(f"stored {key}={d[key]} disagrees with nodes ({actual})")
        return prog

    def __str__(self) -> str:
        return to_infix(self.nodes)


def program(nodes: Iterable[Node]) -> Program:
    return Program(tuple(nodes))


def to_infix(nodes: Sequence[Node]) -> str:
    """Readable nested-call rendering, e.g. ``add(x0, sin(x1))``."""
    out: List[str] = []
    for node in reversed(nodes):
        if node.is_function:
            args = [out.pop() for _ in range(node.arity)]
            out.append(f"{node.value}({', '.join(args)})")
        else:
            out.append(str(node))
    return out[0]
