"""Scalar q-calculus: q-integers, q-factorials, Gaussian binomials, shifted
q-products and the Jackson integral.

All routines accept either a :class:`QContext` or a bare float for ``q``.
``q == 1`` is always evaluated through the classical limit formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError, NonConvergent


@dataclass(frozen=True)
class QContext:
    q: float

    def __post_init__(self):
        q = float(self.q)
        if not (0.0 < q <= 1.0) or math.isnan(q):
            raise DomainError(f"q must satisfy 0 < q <= 1, got {self.q!r}")
        object.__setattr__(self, "q", q)

    @property
    def classical(self) -> bool:
        return self.q == 1.0


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for the Jackson series: geometric tail bound < ``tol``."""

    tol: float = 1e-14
    max_terms: int = 1_000_000

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be >= 1")


QLike = Union[QContext, float]


def as_context(q: QLike) -> QContext:
    return q if isinstance(q, QContext) else QContext(q)


def _q(q: QLike) -> float:
    return q.q if isinstance(q, QContext) else as_context(q).q


def q_number(ctx: QLike, theta: int) -> float:
    """[theta]_q = 1 + q + ... + q^(theta-1); [0]_q = 0."""
    q = _q(ctx)
    theta = int(theta)
    if theta < 0:
        raise DomainError("theta must be a nonnegative integer")
    if theta == 0:
        return 0.0
    if q == 1.0:
        return float(theta)
    # -expm1(theta*log q) keeps full relative accuracy as q -> 1
    return -math.expm1(theta * math.log1p(q - 1.0)) / (1.0 - q)


def q_factorial(ctx: QLike, n: int) -> float:
    n = int(n)
    if n < 0:
        raise DomainError("n must be a nonnegative integer")
    out = 1.0
    for k in range(1, n + 1):
        out *= q_number(ctx, k)
    return out


def q_binomial(ctx: QLike, r: int, s: int) -> float:
    """Gaussian binomial coefficient via prod_{i=1}^{s} [r-s+i]_q / [i]_q."""
    r, s = int(r), int(s)
    if s < 0 or s > r:
        raise DomainError(f"q_binomial needs 0 <= s <= r, got r={r}, s={s}")
    s = min(s, r - s)  # symmetric in s <-> r-s
    out = 1.0
    for i in range(1, s + 1):
        out *= q_number(ctx, r - s + i) / q_number(ctx, i)
    return out


def q_binomial_row(ctx: QLike, r: int) -> np.ndarray:
    """All coefficients [r s]_q for s = 0..r."""
    r = int(r)
    row = np.empty(r + 1)
    row[0] = 1.0
    for s in range(1, r + 1):
        row[s] = row[s - 1] * q_number(ctx, r - s + 1) / q_number(ctx, s)
    return row


def shifted_qproduct(x, a, ctx: QLike, m: int):
    """prod_{i=0}^{m-1} (x - q^i a). Broadcasts over array ``x`` or ``a``."""
    q = _q(ctx)
    m = int(m)
    if m < 0:
        raise DomainError("m must be nonnegative")
    out = np.ones(np.broadcast(np.asarray(x), np.asarray(a)).shape)
    qi = 1.0
    for _ in range(m):
        out = out * (x - qi * a)
        qi *= q
    return out if out.ndim else float(out)


def _jackson_from_zero(f: Callable, B: float, q: float, pol: TruncationPolicy) -> float:
    if B == 0.0:
        return 0.0
    total = 0.0
    fmax = 0.0
    start = 0
    chunk = 256
    while True:
        stop = min(start + chunk, pol.max_terms)
        k = np.arange(start, stop, dtype=float)
        w = np.power(q, k)
        fx = np.asarray(f(B * w), dtype=float)
        fx = np.broadcast_to(fx, w.shape)
        total += float(np.sum(fx * w))
        fmax = max(fmax, float(np.max(np.abs(fx))))
        # remaining terms: B(1-q) sum_{k>=stop} |f| q^k <= B * fmax * q^stop
        tail = abs(B) * fmax * q ** stop
        if tail < pol.tol:
            return B * (1.0 - q) * total
        if stop >= pol.max_terms:
            raise NonConvergent(
                f"Jackson series on [0, {B}] not converged after {stop} terms "
                f"(tail bound {tail:.3e} > tol {pol.tol:.1e})"
            )
        start = stop
        chunk *= 2


def jackson_integral(f: Callable, A: float, B: float, ctx: QLike,
                     pol: TruncationPolicy | None = None, quad=None) -> float:
    """Jackson q-integral of ``f`` over [A, B] as the difference of two
    integrals from 0. At q = 1 the classical integral is returned instead.

    ``f`` must accept numpy arrays.
    """
    q = _q(ctx)
    pol = pol or TruncationPolicy()
    if not (0.0 <= A <= B):
        raise DomainError(f"jackson_integral needs 0 <= A <= B, got [{A}, {B}]")
    if q == 1.0:
        from .funcspace.quadrature import QuadratureSpec, adaptive_quad
        return adaptive_quad(f, A, B, quad or QuadratureSpec())
    return _jackson_from_zero(f, B, q, pol) - _jackson_from_zero(f, A, q, pol)


def monomial_cell_integral(alpha: int, s: int, spec, printed: bool = False) -> float:
    """Closed-form Jackson integral of t^alpha over knot cell ``s`` of ``spec``.

    ``printed=True`` substitutes [r]_q for [s]_q, reproducing the misprinted
    form of the cell integral; it is kept only for the erratum audit.
    """
    alpha, s = int(alpha), int(s)
    r = spec.r
    if alpha not in (0, 1, 2):
        raise DomainError(f"alpha must be 0, 1 or 2, got {alpha}")
    if not 0 <= s <= r:
        raise DomainError(f"cell index must satisfy 0 <= s <= {r}, got {s}")
    ctx = spec.ctx
    q = ctx.q
    mu1, nu1 = spec.shifts.mu1, spec.shifts.nu1
    d1 = q_number(ctx, r + 1) + nu1
    n = q_number(ctx, r if printed else s)
    if alpha == 0:
        return 1.0 / d1
    if alpha == 1:
        return (1.0 + 2.0 * mu1 + 2.0 * q * n) / (q_number(ctx, 2) * d1 ** 2)
    num = (1.0 + 3.0 * mu1 + 3.0 * mu1 ** 2 + 3.0 * q * (1.0 + 2.0 * mu1) * n
           + 3.0 * q ** 2 * n ** 2)
    return num / (q_number(ctx, 3) * d1 ** 3)
