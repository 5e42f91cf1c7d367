"""Moments of the operator: the closed forms as printed, a brute-force
oracle, and the audit that compares them.

Notation: K = d2/R, a = mu2/d2, [n] = [n]_q. The oracle evaluates the
operator on monomials cell by cell; it is the reference for every
comparison here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .operator import (OperatorSpec, _check_domain, cells, combine, domain,
                       min_basis_weight, monomial_integrals)
from .qcalc import monomial_cell_integral, q_number


def _consts(spec: OperatorSpec):
    ctx, r, q = spec.ctx, spec.r, spec.q
    return dict(
        q=q, K=spec.d2 / spec.R, d1=spec.d1, d2=spec.d2,
        mu1=spec.shifts.mu1, mu2=spec.shifts.mu2, a=spec.shifts.mu2 / spec.d2,
        n=q_number(ctx, r), n1=q_number(ctx, r - 1),
        q2=q_number(ctx, 2), q3=q_number(ctx, 3),
    )


def closed_moments(spec: OperatorSpec, xi):
    """(m0, m1, m2) from the printed moment formulas, with
    (x - a)_q = x - a and (x - a)_q^2 = (x - a)(x - q a)."""
    _check_domain(spec, xi)
    x = np.asarray(xi, dtype=float)
    c = _consts(spec)
    q, K, d1, a, mu1 = c["q"], c["K"], c["d1"], c["a"], c["mu1"]
    n, n1, q2, q3 = c["n"], c["n1"], c["q2"], c["q3"]
    m0 = K * np.ones_like(x)
    m1 = 2 * q / q2 * n / d1 * K ** 2 * (x - a) + (1 + 2 * mu1) / (q2 * d1) * K
    m2 = (3 * q ** 3 / q3 * n * n1 / d1 ** 2 * K ** 3 * (x - a) * (x - q * a)
          + 3 * q * (q + 1 + 2 * mu1) / q3 * n / d1 ** 2 * K ** 2 * (x - a)
          + (1 + 3 * mu1 + 3 * mu1 ** 2) / (q3 * d1 ** 2) * K)
    return _out(m0), _out(m1), _out(m2)


def _out(v):
    return v if np.ndim(v) else float(v)


def closed_central_moments(spec: OperatorSpec, xi, leading_power: int = 4):
    """(c1, c2) transcribed from the printed central-moment polynomials.

    ``leading_power`` is the exponent of q in the x^2 coefficient of c2
    (printed: 4; the expansion of m2 gives 3).
    """
    _check_domain(spec, xi)
    x = np.asarray(xi, dtype=float)
    c = _consts(spec)
    q, K, d1, d2, mu1, mu2 = c["q"], c["K"], c["d1"], c["d2"], c["mu1"], c["mu2"]
    n, n1, q2, q3 = c["n"], c["n1"], c["q2"], c["q3"]

    c1 = ((2 * q / q2 * n / d1 * K ** 2 - K) * x
          + (1 + 2 * mu1) / (q2 * d1) * K - 2 * q * mu2 / q2 * n / (d1 * d2) * K ** 2)

    x2 = (3 * q ** leading_power / q3 * n * n1 / d1 ** 2 * K ** 3
          - 4 * q / q2 * n / d1 * K ** 2 + K)
    x1 = (3 * q * (q + 1 + 2 * mu1) / q3 * n / d1 ** 2 * K ** 2
          + 4 * q * mu2 / q2 * n / (d1 * d2) * K ** 2
          - 3 * q ** 3 * (1 + q) * mu2 / (q3 * d2) * n * n1 / d1 ** 2 * K ** 3
          - 2 * (1 + 2 * mu1) / (q2 * d1) * K)
    x0 = (3 * q ** 3 / q3 * n * n1 / d1 ** 2 * mu2 / d2 ** 2 * K ** 2
          - 3 * q * mu2 * (1 + q + 2 * mu1) / (q3 * d2) * n / d1 ** 2 * K ** 2
          + (1 + 3 * mu1 + 3 * mu1 ** 2) / (q3 * d1 ** 2) * K)
    c2 = x2 * x * x + x1 * x + x0
    return _out(c1), _out(c2)


def derived_central_moments(spec: OperatorSpec, xi):
    """Central moments expanded from the closed raw moments."""
    m0, m1, m2 = closed_moments(spec, xi)
    x = np.asarray(xi, dtype=float)
    return _out(m1 - x * m0), _out(m2 - 2 * x * m1 + x * x * m0)


def raw_moment(spec: OperatorSpec, xi, k: int):
    """B(t^k; xi) by direct summation over cells."""
    return combine(spec, xi, monomial_integrals(spec, k))


def central_moment(spec: OperatorSpec, xi, k: int):
    """B((t - xi)^k; xi) by binomial expansion of brute-force raw moments."""
    from math import comb
    x = np.asarray(xi, dtype=float)
    total = 0.0
    for j in range(k + 1):
        total = total + comb(k, j) * (-x) ** (k - j) * raw_moment(spec, xi, j)
    return _out(total)


def bruteforce_moments(spec: OperatorSpec, xi):
    """(b0, b1, b2, bc1, bc2): the operator applied to 1, t, t^2, (t - x), (t - x)^2."""
    x = np.asarray(xi, dtype=float)
    b0, b1, b2 = (raw_moment(spec, xi, k) for k in range(3))
    return b0, b1, b2, _out(b1 - x * b0), _out(b2 - 2 * x * b1 + x * x * b0)


def delta_tilde(spec: OperatorSpec, xi):
    """(R/d2) * B((t - x)^2; x), i.e. the second central moment of D."""
    return _out(spec.mass_scale * np.asarray(bruteforce_moments(spec, xi)[4]))


def D_central(spec: OperatorSpec, xi, k: int):
    return _out(spec.mass_scale * np.asarray(central_moment(spec, xi, k)))


DISCREPANCY_FIELDS = ("raw_m0", "raw_m1", "raw_m2", "central_c1", "central_c2")


@dataclass
class MomentReport:
    spec: OperatorSpec
    xi: np.ndarray
    closed: Dict[str, np.ndarray]
    central: Dict[str, np.ndarray]
    derived: Dict[str, np.ndarray]
    brute: Dict[str, np.ndarray]
    discrepancy: Dict[str, float]
    extra: Dict[str, float] = field(default_factory=dict)
    flags: Dict[str, str] = field(default_factory=dict)


def _maxabs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def cell_integral_erratum(spec: OperatorSpec) -> float:
    """max_s |printed - corrected| for the first- and second-order cell integrals."""
    return max(abs(monomial_cell_integral(k, s, spec, printed=True) - monomial_cell_integral(k, s, spec))
               for k in (1, 2) for s in range(spec.r + 1))


def audit_moments(spec: OperatorSpec, grid_n: int = 64, match_tol: float = 1e-10) -> MomentReport:
    if grid_n < 16:
        raise ValueError("grid_n must be >= 16")
    xi = domain(spec).grid(grid_n)
    m0, m1, m2 = closed_moments(spec, xi)
    c1, c2 = closed_central_moments(spec, xi)
    _, c2_q3 = closed_central_moments(spec, xi, leading_power=3)
    e1, e2 = derived_central_moments(spec, xi)
    b0, b1, b2, bc1, bc2 = bruteforce_moments(spec, xi)

    disc = {
        "raw_m0": _maxabs(m0, b0),
        "raw_m1": _maxabs(m1, b1),
        "raw_m2": _maxabs(m2, b2),
        "central_c1": _maxabs(c1, bc1),
        "central_c2": _maxabs(c2, bc2),
    }
    lead_q4 = disc["central_c2"]
    lead_q3 = _maxabs(c2_q3, bc2)
    extra = {
        "central_c1_vs_expansion": _maxabs(c1, e1),
        "central_c2_vs_expansion": _maxabs(c2, e2),
        "expansion_c2_vs_oracle": _maxabs(e2, bc2),
        "c2_leading_q4_vs_oracle": lead_q4,
        "c2_leading_q3_vs_oracle": lead_q3,
        "cell_integral_printed_vs_corrected": cell_integral_erratum(spec),
        "min_basis_weight": min_basis_weight(spec, grid_n),
    }
    if abs(lead_q4 - lead_q3) <= match_tol:
        lead = "indistinguishable"
    else:
        lead = "q^3" if lead_q3 < lead_q4 else "q^4"
    flags = {
        "c2_leading_coefficient": lead,
        "raw_closed_forms_exact": "yes" if max(disc["raw_m0"], disc["raw_m1"], disc["raw_m2"]) <= match_tol else "no",
        "cell_integral_uses": "[s]_q",
        "alt_cell_variant": "lower knot ([s]_q + mu1)/d1 not used; cells use (q[s]_q + mu1)/d1",
        "q_number_zero": "[0]_q = 0 (printed value 1 not used)",
    }
    return MomentReport(
        spec, xi,
        closed={"m0": m0, "m1": m1, "m2": m2},
        central={"c1": c1, "c2": c2},
        derived={"c1": e1, "c2": e2},
        brute={"b0": b0, "b1": b1, "b2": b2, "bc1": bc1, "bc2": bc2},
        discrepancy=disc, extra=extra, flags=flags,
    )
