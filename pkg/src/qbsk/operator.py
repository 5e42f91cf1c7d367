"""Kantorovich-type q-Bernstein operator on the shifted interval J_r.

For degree r, q in (0, 1] and shifts 0 <= mu2 <= mu1 <= nu1 <= nu2, write
R = [r+1]_q, d1 = R + nu1, d2 = R + nu2, a = mu2/d2, b = (R + mu2)/d2.
The operator acts by

    B f(x) = d1 * prefactor * sum_s P_s(x) * I_s(f)

with basis P_s(x) = [r s]_q prod_{i<s}(x - q^i a) prod_{i<r-s}(b - q^i x),
and I_s(f) the (Jackson or Riemann) integral of f over the knot cell
[(q[s]_q + mu1)/d1, ([s+1]_q + mu1)/d1]. B is defined on J_r = [a, b].
See ``OperatorSpec.prefactor`` for the two normalisations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, NamedTuple, Tuple

import numpy as np

from .errors import DomainError
from .funcspace.quadrature import QuadratureSpec, adaptive_quad
from .qcalc import (QContext, TruncationPolicy, as_context, jackson_integral,
                    monomial_cell_integral, q_binomial_row, q_number)

ENDPOINT_SLACK = 1e-12
INTEGRAL_MODES = ("jackson", "riemann")
NORMALIZATIONS = ("qpower", "ordinary")


@dataclass(frozen=True)
class ShiftParams:
    mu1: float = 0.0
    nu1: float = 0.0
    mu2: float = 0.0
    nu2: float = 0.0

    def __post_init__(self):
        vals = (self.mu2, self.mu1, self.nu1, self.nu2)
        if any(v < 0 for v in vals):
            raise DomainError("shift parameters must be nonnegative")
        if not self.mu2 <= self.mu1:
            raise DomainError("mu2 <= mu1 violated")
        if not self.mu1 <= self.nu1:
            raise DomainError("mu1 <= nu1 violated")
        if not self.nu1 <= self.nu2:
            raise DomainError("nu1 <= nu2 violated")

    @classmethod
    def ordered(cls, mu2, mu1, nu1, nu2) -> "ShiftParams":
        """Build from the chain order (mu2, mu1, nu1, nu2) used on the command line."""
        return cls(mu1=float(mu1), nu1=float(nu1), mu2=float(mu2), nu2=float(nu2))

    def as_tuple(self):
        return (self.mu2, self.mu1, self.nu1, self.nu2)


DEFAULT_SHIFTS = ShiftParams.ordered(0.1, 0.2, 0.5, 1.0)
ZERO_SHIFTS = ShiftParams()


@dataclass(frozen=True)
class OperatorSpec:
    r: int
    ctx: QContext
    shifts: ShiftParams = ZERO_SHIFTS
    integral_mode: str = "jackson"
    normalization: str = "qpower"
    pol: TruncationPolicy = field(default_factory=TruncationPolicy, compare=True)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec, compare=True)

    def __post_init__(self):
        if int(self.r) < 1:
            raise DomainError(f"r must be >= 1, got {self.r}")
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "ctx", as_context(self.ctx))
        if self.integral_mode not in INTEGRAL_MODES:
            raise DomainError(f"integral_mode must be one of {INTEGRAL_MODES}")
        if self.normalization not in NORMALIZATIONS:
            raise DomainError(f"normalization must be one of {NORMALIZATIONS}")

    @classmethod
    def make(cls, r, q, shifts=ZERO_SHIFTS, mode="jackson", normalization="qpower",
             **kw) -> "OperatorSpec":
        return cls(int(r), as_context(q), shifts, mode, normalization, **kw)

    @property
    def q(self) -> float:
        return self.ctx.q

    @property
    def R(self) -> float:
        return q_number(self.ctx, self.r + 1)

    @property
    def d1(self) -> float:
        return self.R + self.shifts.nu1

    @property
    def d2(self) -> float:
        return self.R + self.shifts.nu2

    @property
    def a(self) -> float:
        return self.shifts.mu2 / self.d2

    @property
    def b(self) -> float:
        return (self.R + self.shifts.mu2) / self.d2

    @property
    def prefactor(self) -> float:
        """Normalising constant in front of the basis sum.

        "qpower": (d2/R) / (b - a)_q^r with (b - a)_q^r = prod_{i<r} (b - q^i a),
        the exact reciprocal of the basis partition sum, so that B(1) = d2/R.
        "ordinary": (d2/R)^(r+1). The two coincide when mu2 = 0 or q = 1.
        """
        if self.normalization == "ordinary":
            return (self.d2 / self.R) ** (self.r + 1)
        a, b, q = self.a, self.b, self.q
        part = float(np.prod(b - q ** np.arange(self.r) * a))
        return (self.d2 / self.R) / part

    @property
    def mass_scale(self) -> float:
        """R/d2, the factor turning B into D."""
        return self.R / self.d2

    @property
    def effective_mode(self) -> str:
        return "riemann" if self.ctx.classical else self.integral_mode


class DomainJr(NamedTuple):
    lo: float
    hi: float

    def contains(self, x, slack=ENDPOINT_SLACK):
        x = np.asarray(x)
        return (x >= self.lo - slack) & (x <= self.hi + slack)

    def grid(self, n: int) -> np.ndarray:
        """``n`` subintervals, i.e. n + 1 nodes including both ends."""
        return np.linspace(self.lo, self.hi, int(n) + 1)


class Cell(NamedTuple):
    s: int
    lower: float
    upper: float

    @property
    def width(self):
        return self.upper - self.lower


def domain(spec: OperatorSpec) -> DomainJr:
    d2 = spec.d2
    return DomainJr(spec.shifts.mu2 / d2, (spec.R + spec.shifts.mu2) / d2)


def cells(spec: OperatorSpec) -> List[Cell]:
    d1, q, mu1 = spec.d1, spec.q, spec.shifts.mu1
    return [Cell(s, (q * q_number(spec.ctx, s) + mu1) / d1, (q_number(spec.ctx, s + 1) + mu1) / d1)
            for s in range(spec.r + 1)]


def domain_and_cells(spec: OperatorSpec) -> Tuple[DomainJr, List[Cell]]:
    return domain(spec), cells(spec)


def _check_domain(spec, xi):
    dom = domain(spec)
    if not np.all(dom.contains(xi)):
        raise DomainError(f"evaluation point outside J_r = [{dom.lo:.17g}, {dom.hi:.17g}]")
    return dom


def basis_weights(spec: OperatorSpec, xi) -> np.ndarray:
    """P_s(xi) for s = 0..r; shape (r+1,) for scalar xi, (r+1, n) for arrays."""
    _check_domain(spec, xi)
    x = np.asarray(xi, dtype=float)
    r, q = spec.r, spec.q
    d2 = spec.d2
    a = spec.shifts.mu2 / d2
    b = (spec.R + spec.shifts.mu2) / d2
    qi = q ** np.arange(r)
    left = np.empty((r + 1,) + x.shape)     # prod_{i<s} (x - q^i a)
    right = np.empty((r + 1,) + x.shape)    # prod_{i<m} (b - q^i x)
    left[0] = 1.0
    right[0] = 1.0
    for i in range(r):
        left[i + 1] = left[i] * (x - qi[i] * a)
        right[i + 1] = right[i] * (b - qi[i] * x)
    binom = q_binomial_row(spec.ctx, r).reshape((r + 1,) + (1,) * x.ndim)
    return binom * left * right[::-1]


def _integrate_cell(spec, f, lower, upper):
    if spec.effective_mode == "jackson":
        return jackson_integral(f, lower, upper, spec.ctx, spec.pol, spec.quad)
    return adaptive_quad(f, lower, upper, spec.quad)


@lru_cache(maxsize=512)
def cell_integrals(spec: OperatorSpec, f) -> np.ndarray:
    """I_s(f) for every cell, using spec.integral_mode. Cached per (spec, f)."""
    out = np.array([_integrate_cell(spec, f, c.lower, c.upper) for c in cells(spec)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=512)
def monomial_integrals(spec: OperatorSpec, k: int) -> np.ndarray:
    """Cell integrals of t^k: closed form in Jackson mode, quadrature in Riemann mode."""
    if spec.effective_mode == "jackson" and k <= 2:
        out = np.array([monomial_cell_integral(k, s, spec) for s in range(spec.r + 1)])
    elif spec.effective_mode == "jackson":
        # Jackson integral of t^k over [A, B] is (B^(k+1) - A^(k+1)) / [k+1]_q
        den = q_number(spec.ctx, k + 1)
        out = np.array([(c.upper ** (k + 1) - c.lower ** (k + 1)) / den for c in cells(spec)])
    else:
        out = np.array([adaptive_quad(lambda t: t ** k, c.lower, c.upper, spec.quad)
                        for c in cells(spec)])
    out.setflags(write=False)
    return out


def combine(spec: OperatorSpec, xi, integrals) -> np.ndarray:
    """d1 * prefactor * sum_s P_s(xi) I_s for precomputed cell integrals."""
    w = basis_weights(spec, xi)
    I = np.asarray(integrals).reshape((-1,) + (1,) * np.ndim(xi))
    val = spec.d1 * spec.prefactor * np.sum(w * I, axis=0)
    return val if np.ndim(val) else float(val)


def apply_B(spec: OperatorSpec, f, xi):
    return combine(spec, xi, cell_integrals(spec, f))


def apply_D(spec: OperatorSpec, f, xi):
    return spec.mass_scale * apply_B(spec, f, xi)


def extend_C(spec: OperatorSpec, f, xi):
    """B f on J_r, f itself on the rest of [0, 1]."""
    x = np.asarray(xi, dtype=float)
    if np.any((x < 0.0) | (x > 1.0)):
        raise DomainError("extend_C is defined on [0, 1]")
    inside = domain(spec).contains(x)
    out = np.asarray(f(x), dtype=float).copy() if x.ndim else float(f(x))
    if x.ndim == 0:
        return apply_B(spec, f, float(x)) if inside else out
    if inside.any():
        out = np.broadcast_to(out, x.shape).copy()
        # clamp onto J_r so points inside the endpoint slack evaluate cleanly
        dom = domain(spec)
        out[inside] = apply_B(spec, f, np.clip(x[inside], dom.lo, dom.hi))
    return out


def min_basis_weight(spec: OperatorSpec, grid_n: int = 64) -> float:
    """Smallest P_s(x) over a J_r grid; negative values would break positivity."""
    return float(basis_weights(spec, domain(spec).grid(grid_n)).min())
