"""Fixed-capacity stack evaluation of prefix programs.

Programs are walked in reverse: terminals push, functions pop their
operands (first pop is the first operand) and push the result. Each stack
slot holds a vector of rows, so one pass evaluates a program over a whole
block of the dataset; :func:`eval_row` is the same machine with a block of
width one, which keeps single-row and batch results bit-identical.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from .functions import CATALOG
from .program import CONSTANT, FUNCTION, Program

__all__ = [
    "DEFAULT_STACK_CAPACITY",
    "BatchEvaluationError",
    "EvalStack",
    "StackOverflowError",
    "StackUnderflowError",
    "VariableOutOfRangeError",
    "eval_batch",
    "eval_row",
]

DEFAULT_STACK_CAPACITY = 20

# rows evaluated per stack pass; bounds stack memory to capacity * block floats
ROW_BLOCK = 1 << 16


class StackOverflowError(RuntimeError):
    pass


class StackUnderflowError(RuntimeError):
    pass


class VariableOutOfRangeError(IndexError):
    pass


class BatchEvaluationError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"program {index}: {cause}")
        self.index = index
        self.cause = cause


class EvalStack:
    """Stack of ``capacity`` slots, each a float64 vector of ``width`` rows."""

    __slots__ = ("slots", "top", "high_water")

    def __init__(self, capacity: int, width: int = 1):
        if capacity < 1:
            raise ValueError("stack capacity must be >= 1")
        self.slots = np.empty((capacity, width), dtype=np.float64)
        self.top = 0
        self.high_water = 0

    @property
    def capacity(self) -> int:
        return self.slots.shape[0]

    def push(self, value) -> None:
        if self.top == self.capacity:
            raise StackOverflowError(f"push onto full stack (capacity {self.capacity})")
        self.slots[self.top] = value
        self.top += 1
        if self.top > self.high_water:
            self.high_water = self.top

    def pop(self) -> np.ndarray:
        if self.top == 0:
            raise StackUnderflowError("pop from empty stack")
        self.top -= 1
        return self.slots[self.top]


def _check(program: Program, n_cols: int, capacity: int) -> None:
    if program.depth > capacity - 1:
        raise StackOverflowError(
            f"program depth {program.depth} exceeds stack bound {capacity - 1}"
        )
    if program.max_feature() >= n_cols:
        raise VariableOutOfRangeError(
            f"program uses x{program.max_feature()} but data has {n_cols} column(s)"
        )


def _run(program: Program, columns: np.ndarray, stack: EvalStack) -> np.ndarray:
    # columns: (n_cols, width) view, one contiguous row per feature
    stack.top = 0
    stack.high_water = 0
    for node in reversed(program.nodes):
        kind = node.kind
        if kind == FUNCTION:
            fn = CATALOG[node.value]
            if fn.arity == 1:
                out = fn(stack.pop())
            else:
                a = stack.pop()
                b = stack.pop()
                out = fn(a, b)
            stack.push(out)
        elif kind == CONSTANT:
            stack.push(node.value)
        else:
            stack.push(columns[node.value])
    assert stack.high_water <= program.depth + 1
    if stack.top != 1:
        raise StackUnderflowError(f"{stack.top} values left on stack")
    return stack.slots[0]


def eval_row(program: Program, row: Sequence[float],
             stack_capacity: int = DEFAULT_STACK_CAPACITY) -> float:
    """Evaluate ``program`` on one feature vector.

    >>> from stackgp.program import Program, func, var
    >>> eval_row(Program((func("add"), var(0), var(1))), [2.0, 3.0])
    5.0
    """
    row = np.asarray(row, dtype=np.float64)
    _check(program, row.shape[0], stack_capacity)
    stack = EvalStack(stack_capacity, 1)
    with np.errstate(all="ignore"):
        return float(_run(program, row[:, None], stack)[0])


def _eval_program(program: Program, feats: np.ndarray, out: np.ndarray, capacity: int) -> None:
    m = feats.shape[1]
    width = min(m, ROW_BLOCK)
    stack = EvalStack(capacity, width)
    for lo in range(0, m, width):
        hi = min(lo + width, m)
        if hi - lo != stack.slots.shape[1]:
            stack = EvalStack(capacity, hi - lo)
        out[lo:hi] = _run(program, feats[:, lo:hi], stack)


def eval_batch(programs: Sequence[Program], X: np.ndarray,
               stack_capacity: int = DEFAULT_STACK_CAPACITY, workers: int = 1) -> np.ndarray:
    """Evaluate every program on every row.

    Parameters
    ----------
    programs : sequence of Program
    X : ndarray of shape (n_rows, n_cols)
    stack_capacity : int
    workers : int
        Threads to spread programs over; ``0`` means one per CPU. The
        result does not depend on this value.

    Returns
    -------
    ndarray of shape (n_rows, n_programs), Fortran-ordered
        Column ``j`` holds the predictions of ``programs[j]``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    m, n_cols = X.shape
    feats = np.ascontiguousarray(X.T)
    for j, prog in enumerate(programs):
        try:
            _check(prog, n_cols, stack_capacity)
        except (StackOverflowError, VariableOutOfRangeError) as exc:
            raise BatchEvaluationError(j, exc) from exc
    preds = np.empty((m, len(programs)), dtype=np.float64, order="F")

    def work(j):
        try:
            with np.errstate(all="ignore"):
                _eval_program(programs[j], feats, preds[:, j], stack_capacity)
        except Exception as exc:
            raise BatchEvaluationError(j, exc) from exc

    if workers == 1 or len(programs) <= 1:
        for j in range(len(programs)):
            work(j)
    else:
        with ThreadPoolExecutor(max_workers=workers or None) as pool:
            # list() re-raises the first failure in program order
            list(pool.map(work, range(len(programs))))
    return preds
