"""Adaptive Simpson quadrature and L_p norms built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DepthExceeded


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    max_depth: int = 40

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if int(self.max_depth) < 1:
            raise ValueError("max_depth must be >= 1")


def _scalar(f, x):
    return float(np.asarray(f(x), dtype=float))


def adaptive_quad(f, A: float, B: float, spec: QuadratureSpec | None = None) -> float:
    """Integrate ``f`` over [A, B] by adaptive Simpson with Richardson
    correction. The error tolerance is split evenly between the two halves
    at every bisection; a panel is also accepted once its correction is
    below rounding level relative to the size of the integral, which keeps
    endpoint singularities such as sqrt(t) at 0 within ``max_depth``."""
    spec = spec or QuadratureSpec()
    if A > B:
        raise ValueError(f"adaptive_quad needs A <= B, got [{A}, {B}]")
    if A == B:
        return 0.0
    fa, fm, fb = _scalar(f, A), _scalar(f, 0.5 * (A + B)), _scalar(f, B)
    whole = (B - A) * (fa + 4.0 * fm + fb) / 6.0
    floor = 4.0 * np.finfo(float).eps * max(abs(whole), (B - A) * max(abs(fa), abs(fm), abs(fb)))
    # iterative DFS keeps Python's recursion limit out of the picture
    total = 0.0
    stack = [(A, B, fa, fm, fb, whole, spec.abs_tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = _scalar(f, lm), _scalar(f, rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if abs(delta) <= max(15.0 * tol, floor):
            total += left + right + delta / 15.0
            continue
        if depth + 1 >= spec.max_depth:
            raise DepthExceeded(
                f"adaptive Simpson reached depth {spec.max_depth} on [{a}, {b}]"
            )
        stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
        stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
    return total


def lp_norm(f, A: float, B: float, p: float, spec: QuadratureSpec | None = None) -> float:
    """(int_A^B |f|^p)^(1/p) for finite p >= 1."""
    p = float(p)
    if not math.isfinite(p):
        raise ValueError("lp_norm supports finite p only; use a grid maximum for p = inf")
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    value = adaptive_quad(lambda t: np.abs(np.asarray(f(t), dtype=float)) ** p, A, B, spec)
    return max(value, 0.0) ** (1.0 / p)
