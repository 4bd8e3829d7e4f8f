"""Function catalog used by programs.

Every entry is vectorized over numpy arrays and total: for finite inputs
the output is finite. Singular points are protected with fixed fallbacks
and every result is clamped to ``[-BOUND, BOUND]``.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Tuple

import numpy as np

__all__ = [
    "BOUND",
    "EPSILON",
    "CATALOG",
    "DEFAULT_FUNCTION_SET",
    "Function",
    "UnknownFunctionError",
    "apply_function",
    "arity",
    "resolve_function_set",
]

#: Magnitude cap applied to every function output.
BOUND = 1e30

#: Inputs with magnitude below this are treated as singular by protected ops.
EPSILON = 1e-3


class UnknownFunctionError(KeyError):
    pass


@dataclass(frozen=True)
class Function:
    name: str
    arity: int
    impl: Callable[..., np.ndarray]

    def __call__(self, *args: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            out = self.impl(*args)
        return np.clip(out, -BOUND, BOUND)


def _protected_div(a, b):
    small = np.abs(b) < EPSILON
    return np.where(small, 1.0, a / np.where(small, 1.0, b))


def _protected_log(x):
    ax = np.abs(x)
    small = ax < EPSILON
    return np.where(small, 0.0, np.log(np.where(small, 1.0, ax)))


def _protected_inv(x):
    small = np.abs(x) < EPSILON
    return np.where(small, 1.0, 1.0 / np.where(small, 1.0, x))


def _protected_fmod(a, b):
    small = np.abs(b) < EPSILON
    return np.where(small, 1.0, np.fmod(a, np.where(small, 1.0, b)))


def _protected_pow(a, b):
    # |a| ** b; 0 ** negative overflows to inf and is clamped by Function.
    return np.power(np.abs(a), b)


def _clamped_unit(fn):
    return lambda x: fn(np.clip(x, -1.0, 1.0))


_ENTRIES: List[Tuple[str, int, Callable[..., np.ndarray]]] = [
    # binary
    ("add", 2, np.add),
    ("sub", 2, np.subtract),
    ("mul", 2, np.multiply),
    ("div", 2, _protected_div),
    ("pow", 2, _protected_pow),
    ("min", 2, np.minimum),
    ("max", 2, np.maximum),
    ("atan2", 2, np.arctan2),
    ("hypot", 2, np.hypot),
    ("fmod", 2, _protected_fmod),
    # unary
    ("abs", 1, np.abs),
    ("neg", 1, np.negative),
    ("sqrt", 1, lambda x: np.sqrt(np.abs(x))),
    ("cbrt", 1, np.cbrt),
    ("log", 1, _protected_log),
    ("exp", 1, np.exp),
    ("inv", 1, _protected_inv),
    ("square", 1, np.square),
    ("cube", 1, lambda x: x * x * x),
    ("sin", 1, np.sin),
    ("cos", 1, np.cos),
    ("tan", 1, np.tan),
    ("asin", 1, _clamped_unit(np.arcsin)),
    ("acos", 1, _clamped_unit(np.arccos)),
    ("atan", 1, np.arctan),
    ("sinh", 1, np.sinh),
    ("cosh", 1, np.cosh),
    ("tanh", 1, np.tanh),
    ("asinh", 1, np.arcsinh),
    ("acosh", 1, lambda x: np.arccosh(np.maximum(np.abs(x), 1.0))),
    ("atanh", 1, lambda x: np.arctanh(np.clip(x, -1.0 + EPSILON, 1.0 - EPSILON))),
    ("ceil", 1, np.ceil),
    ("floor", 1, np.floor),
]

CATALOG: Dict[str, Function] = {name: Function(name, a, f) for name, a, f in _ENTRIES}
assert len(CATALOG) <= 33

_ALIASES = {"+": "add", "-": "sub", "*": "mul", "/": "div", "÷": "div"}

DEFAULT_FUNCTION_SET: Tuple[str, ...] = ("add", "sub", "mul", "div", "sin", "cos", "tan")


def _lookup(opcode: str) -> Function:
    try:
        return CATALOG[_ALIASES.get(opcode, opcode)]
    except KeyError:
        raise UnknownFunctionError(
            f"unknown function {opcode!r}; known: {', '.join(CATALOG)}"
        ) from None


def arity(opcode: str) -> int:
    return _lookup(opcode).arity


def resolve_function_set(names: Iterable[str]) -> Tuple[str, ...]:
    """Canonicalize a user-supplied function set.

    Symbol aliases (``+ - * /``) map to catalog names; duplicates are
    dropped keeping first occurrence. Raises ``ValueError`` when empty.
    """
    out: List[str] = []
    for name in names:
        canon = _lookup(name).name
        if canon not in out:
            out.append(canon)
    if not out:
        raise ValueError("function set is empty")
    return tuple(out)


def apply_function(opcode: str, *operands: float) -> float:
    """Apply a catalog function to scalar operands.

    Examples
    --------
    >>> apply_function("div", 1.0, 0.0)
    1.0
    """
    fn = _lookup(opcode)
    if len(operands) != fn.arity:
        raise ValueError(f"{fn.name} takes {fn.arity} operand(s), got {len(operands)}")
    args = [np.array([x], dtype=np.float64) for x in operands]
    return float(fn(*args)[0])
