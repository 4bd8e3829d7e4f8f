import math

import numpy as np
import pytest

from stackgp.generate import InitMethod, Primitives, random_program
from stackgp.program import Program, const, func, var
from stackgp.rng import RngStream

PAGIE_SET = ("add", "sub", "mul", "div", "sin", "cos", "tan")


# Recursive tree-walk evaluator kept independent of the stack machine: its own
# traversal and protection rules. Elementary functions go through numpy scalar
# ufuncs because libm and numpy differ in the last ulp, which chaotic
# compositions (sin of a huge argument) amplify past any tight tolerance.
def _finite(v):
    return max(-1e30, min(1e30, v))


def _pdiv(a, b):
    return 1.0 if abs(b) < 1e-3 else a / b


def _plog(x):
    return 0.0 if abs(x) < 1e-3 else float(np.log(abs(x)))


def _pinv(x):
    return 1.0 if abs(x) < 1e-3 else 1.0 / x


def _pexp(x):
    return float(np.exp(x)) if x < 709 else math.inf


ORACLE_FUNCS = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": _pdiv,
    "min": min,
    "max": max,
    "sin": lambda x: float(np.sin(x)),
    "cos": lambda x: float(np.cos(x)),
    "tan": lambda x: float(np.tan(x)),
    "abs": abs,
    "neg": lambda x: -x,
    "sqrt": lambda x: math.sqrt(abs(x)),
    "log": _plog,
    "exp": _pexp,
    "inv": _pinv,
    "square": lambda x: x * x,
    "cube": lambda x: x * x * x,
}


def recursive_eval(nodes, row, funcs=ORACLE_FUNCS):
    def walk(i):
        node = nodes[i]
        if node.kind == "variable":
            return row[node.value], i + 1
        if node.kind == "constant":
            return node.value, i + 1
        args = []
        j = i + 1
        for _ in range(node.arity):
            v, j = walk(j)
            args.append(v)
        return _finite(funcs[node.value](*args)), j

    value, end = walk(0)
    assert end == len(nodes)
    return value


def random_programs(n, seed=0, max_depth=6, function_set=PAGIE_SET, n_features=2,
                    method=None):
    prims = Primitives(function_set, n_features, (-1.0, 1.0))
    stream = RngStream(seed, 0, 0)
    out = []
    for i in range(n):
        m = method or (InitMethod.FULL if i % 2 else InitMethod.GROW)
        d = 1 + i % max_depth
        out.append(random_program(stream, m, d, prims))
    return out


@pytest.fixture
def prims():
    return Primitives(PAGIE_SET, 2, (-1.0, 1.0))


@pytest.fixture
def pagie_tree():
    """1/(1 + x0^-4) + 1/(1 + x1^-4) built from catalog functions."""
    def term(i):
        return [func("div"), const(1.0), func("add"), const(1.0), func("pow"), var(i), const(-4.0)]

    return Program(tuple([func("add")] + term(0) + term(1)))


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; all lines are repeated in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip("]"))):
            terminalreporter.write_line(line)
