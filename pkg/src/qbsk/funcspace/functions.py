"""Test functions on [0, 1]: the built-in registry and parsed expressions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..errors import DomainError, MissingDerivative
from . import expr as _expr

SMOOTHNESS = ("C0", "Lipschitz", "C1", "C2")
_DOMAIN_SLACK = 0.0


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A real function on [0, 1].

    ``evaluator`` must accept numpy arrays. ``modulus`` is the analytic
    modulus of continuity when it is known in closed form. ``derivative``
    is itself a :class:`TestFunction` (so its own modulus travels with it).
    ``lipschitz`` is sup|f'| on [0, 1] when known. ``approximate`` marks
    values obtained by finite differences (noisy at the 1e-10 level).
    """

    name: str
    evaluator: Callable
    smoothness: str = "C0"
    lipschitz: Optional[float] = None
    modulus: Optional[Callable[[float], float]] = None
    derivative: Optional["TestFunction"] = field(default=None, repr=False)
    approximate: bool = False

    __test__ = False  # keep pytest from collecting this class

    def __call__(self, t):
        return self.evaluator(t)

    def d(self) -> "TestFunction":
        if self.derivative is None:
            raise MissingDerivative(f"{self.name} has no derivative")
        return self.derivative

    def d2(self) -> "TestFunction":
        return self.d().d()


def eval_func(f: TestFunction, t):
    """Evaluate ``f`` at ``t``; every point must lie in [0, 1]."""
    arr = np.asarray(t, dtype=float)
    if np.any((arr < -_DOMAIN_SLACK) | (arr > 1.0 + _DOMAIN_SLACK)) or np.any(np.isnan(arr)):
        raise DomainError(f"{f.name}: argument outside [0, 1]")
    out = f.evaluator(arr)
    out = np.broadcast_to(np.asarray(out, dtype=float), arr.shape)
    return float(out) if out.ndim == 0 else np.array(out)


def _const(c):
    return lambda t: np.full(np.shape(t), float(c)) if np.ndim(t) else float(c)


def _capped(fn, cap):
    """Modulus from a formula valid on (0, 1], clipped to ``cap``."""
    return lambda d: float(min(fn(min(d, 1.0)), cap)) if d > 0 else 0.0


def _fixed_point(tf):
    # a function that is its own derivative (0, exp)
    object.__setattr__(tf, "derivative", tf)
    return tf


def _constant(name, c, zero):
    return TestFunction(name, _const(c), "C2", 0.0, lambda d: 0.0, zero)


def _build_registry():
    pi = math.pi
    zero = _fixed_point(TestFunction("0", _const(0.0), "C2", 0.0, lambda d: 0.0))
    exp_t = _fixed_point(TestFunction("expt", lambda t: np.exp(np.asarray(t, dtype=float)), "C2",
                                      math.e, _capped(lambda d: math.e - math.exp(1.0 - d), math.e - 1.0)))
    six_t = TestFunction("6t", lambda t: 6.0 * np.asarray(t, dtype=float), "C2", 6.0,
                         _capped(lambda d: 6.0 * d, 6.0), _constant("6", 6.0, zero))
    two_t = TestFunction("2t", lambda t: 2.0 * np.asarray(t, dtype=float), "C2", 2.0,
                         _capped(lambda d: 2.0 * d, 2.0), _constant("2", 2.0, zero))
    three_t2 = TestFunction("3t^2", lambda t: 3.0 * np.asarray(t, dtype=float) ** 2, "C2", 6.0,
                            _capped(lambda d: 3.0 * (1.0 - (1.0 - d) ** 2), 3.0), six_t)
    d2_sin = TestFunction("-pi^2 sin(pi t)", lambda t: -pi ** 2 * np.sin(pi * np.asarray(t, dtype=float)),
                          "C2", pi ** 3, _capped(lambda d: pi ** 2 * (math.sin(pi * d) if d <= 0.5 else 1.0), pi ** 2))
    d1_sin = TestFunction("pi cos(pi t)", lambda t: pi * np.cos(pi * np.asarray(t, dtype=float)), "C2",
                          pi ** 2, _capped(lambda d: 2.0 * pi * math.sin(pi * d / 2.0), 2.0 * pi), d2_sin)
    return {
        "sq": TestFunction("sq", lambda t: np.asarray(t, dtype=float) ** 2, "C2", 2.0,
                           _capped(lambda d: 2.0 * d - d * d, 1.0), two_t),
        "cube": TestFunction("cube", lambda t: np.asarray(t, dtype=float) ** 3, "C2", 3.0,
                             _capped(lambda d: 1.0 - (1.0 - d) ** 3, 1.0), three_t2),
        "absmid": TestFunction("absmid", lambda t: np.abs(np.asarray(t, dtype=float) - 0.5),
                               "Lipschitz", 1.0, _capped(lambda d: d, 0.5)),
        "sinpi": TestFunction("sinpi", lambda t: np.sin(pi * np.asarray(t, dtype=float)), "C2", pi,
                              _capped(lambda d: math.sin(pi * d) if d <= 0.5 else 1.0, 1.0), d1_sin),
        "expt": exp_t,
        "id": TestFunction("id", lambda t: np.asarray(t, dtype=float) * 1.0, "C2", 1.0,
                           _capped(lambda d: d, 1.0), _constant("1", 1.0, zero)),
        "const1": _constant("const1", 1.0, zero),
    }


REGISTRY = _build_registry()


def get_function(name: str) -> TestFunction:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown function {name!r}; registry: {', '.join(sorted(REGISTRY))}") from None


def _central_difference(g, h):
    """Derivative of ``g`` on [0, 1]; one-sided near the ends so that no
    sample leaves the domain."""

    def dg(t):
        t = np.asarray(t, dtype=float)
        lo = np.clip(t - h, 0.0, 1.0)
        hi = np.clip(t + h, 0.0, 1.0)
        return (np.asarray(g(hi), dtype=float) - np.asarray(g(lo), dtype=float)) / (hi - lo)

    return dg


def from_expression(src: str, name: Optional[str] = None) -> TestFunction:
    """Wrap a parsed expression as a test function.

    Derivatives come from central differences (step 1e-6 for f', 1e-4
    for f''). Expressions containing ``abs`` are tagged C0, others C2.
    """
    ast = _expr.parse_expr(src)

    def f(t):
        return _expr.evaluate(ast, np.asarray(t, dtype=float))

    smooth = "C0" if _expr.contains_call(ast, ("abs",)) else "C2"
    d2 = TestFunction(f"({src})''", _central_difference(_central_difference(f, 1e-4), 1e-4), "C0",
                      approximate=True)
    d1 = TestFunction(f"({src})'", _central_difference(f, 1e-6), "C0", derivative=d2, approximate=True)
    return TestFunction(name or src, f, smooth, derivative=d1 if smooth != "C0" else None)


def resolve(name: Optional[str] = None, expression: Optional[str] = None) -> TestFunction:
    if expression is not None:
        return from_expression(expression)
    return get_function(name)
