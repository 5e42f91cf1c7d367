"""Error-bound certificates and the Voronovskaja residual study.

Each certificate evaluates a bound next to the observed error of the
operator. Moments come from the brute-force oracle, never from the closed
forms, so a verdict tests the inequality itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateWeight, DomainError
from .funcspace import (QuadratureSpec, grid_resolution, integral_modulus_1p, lipschitz_K_estimate,
                        lp_norm, modulus_continuity, omega)
from .moments import D_central, bruteforce_moments, delta_tilde
from .operator import OperatorSpec, apply_B, apply_D, domain
from .qcalc import q_number

NUM_TOL = 1e-10          # floor for integration / rounding error in observed values
APPROX_QUAD = QuadratureSpec(abs_tol=1e-8, max_depth=40)
DEFAULT_GRID = 64
KINDS = ("local_T5", "global_T6", "c1_T7", "lp_T8", "omega1p_T9", "lipschitz_T10")


@dataclass
class BoundCertificate:
    kind: str
    spec: OperatorSpec
    function: str
    xi: np.ndarray
    bound: np.ndarray
    observed: np.ndarray
    estimator_resolution: float = 0.0
    implied_constant: Optional[float] = None
    note: str = ""
    slack: np.ndarray = field(init=False)
    satisfied: Optional[bool] = field(init=False)

    def __post_init__(self):
        self.xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        self.bound = np.atleast_1d(np.asarray(self.bound, dtype=float))
        self.observed = np.atleast_1d(np.asarray(self.observed, dtype=float))
        self.slack = self.bound - self.observed
        if self.kind == "omega1p_T9":
            self.satisfied = None      # unknown constant: no verdict
        else:
            self.satisfied = bool(self.slack.min() >= -self.estimator_resolution)

    @property
    def min_slack(self) -> float:
        return float(self.slack.min())


def _grid(spec, grid_n):
    return domain(spec).grid(grid_n)


def _omega_and_resolution(f, delta, grid_n=4096):
    """omega(f; delta) and the amount by which it may understate the truth."""
    if getattr(f, "modulus", None) is not None:
        return np.array([omega(f, d) for d in np.atleast_1d(delta)]), 0.0
    vals = np.array([modulus_continuity(f, min(max(d, 1e-300), 1.0), grid_n) if d > 0 else 0.0
                     for d in np.atleast_1d(delta)])
    res = grid_resolution(f, grid_n)
    return vals, (0.0 if math.isnan(res) else 2.0 * res)


def _quad(spec, f):
    """Finite-difference functions cannot be integrated to 1e-12."""
    return APPROX_QUAD if getattr(f, "approximate", False) else spec.quad


def _abs_f(f, xi):
    return np.abs(np.asarray(f(np.asarray(xi, dtype=float)), dtype=float))


# ----------------------------------------------------------------- T5, T6

def local_bound_T5(spec: OperatorSpec, f, xi, delta_override=None):
    """(bound, observed) for the local modulus bound.

    bound = nu2/R |f(x)| + 2 (d2/R) omega(f; sqrt(delta~(x))).
    ``delta_override`` replaces delta~ (used to test monotonicity).
    """
    x = np.asarray(xi, dtype=float)
    dt = np.asarray(delta_tilde(spec, x) if delta_override is None else delta_override, dtype=float)
    w, _ = _omega_and_resolution(f, np.sqrt(np.clip(dt, 0.0, None)).ravel())
    bound = spec.shifts.nu2 / spec.R * _abs_f(f, x) + 2.0 * spec.d2 / spec.R * w.reshape(dt.shape)
    observed = np.abs(apply_B(spec, f, x) - np.asarray(f(x), dtype=float))
    return _squeeze(bound), _squeeze(observed)


def global_bound_T6(spec: OperatorSpec, f, grid_n: int = DEFAULT_GRID):
    """(bound, observed_sup) with R_r and delta~ maximised over the grid."""
    x = _grid(spec, grid_n)
    Rr = float(_abs_f(f, x).max())
    dmax = float(np.max(delta_tilde(spec, x)))
    w, _ = _omega_and_resolution(f, math.sqrt(max(dmax, 0.0)))
    bound = spec.shifts.nu2 / spec.R * Rr + 2.0 * spec.d2 / spec.R * float(w[0])
    observed = float(np.max(np.abs(apply_B(spec, f, x) - np.asarray(f(x), dtype=float))))
    return bound, observed


# ----------------------------------------------------------------- T7

def c1_bound_T7(spec: OperatorSpec, phi, xi):
    """(bound, observed) for C^1 functions.

    bound = nu2/R |phi| + |c1| |phi'| + 2 (d2/R) sqrt(delta~) omega(phi'; sqrt(delta~))
    with c1 = B(t - x; x) from the oracle.
    """
    dphi = phi.d()
    x = np.asarray(xi, dtype=float)
    _, _, _, bc1, bc2 = bruteforce_moments(spec, x)
    dt = np.clip(spec.mass_scale * np.asarray(bc2, dtype=float), 0.0, None)
    root = np.sqrt(dt)
    w, _ = _omega_and_resolution(dphi, root.ravel())
    bound = (spec.shifts.nu2 / spec.R * _abs_f(phi, x)
             + np.abs(bc1) * _abs_f(dphi, x)
             + 2.0 * spec.d2 / spec.R * root * w.reshape(root.shape))
    observed = np.abs(apply_B(spec, phi, x) - np.asarray(phi(x), dtype=float))
    return _squeeze(bound), _squeeze(observed)


def _squeeze(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


# ----------------------------------------------------------------- T8, T9

def knot_cell(spec: OperatorSpec, s: int):
    """The cell [([s]_q + mu1)/d1, ([s+1]_q + mu1)/d1] clipped to J_r, or None if
    it misses J_r."""
    if not 0 <= s <= spec.r:
        raise DomainError(f"cell index must lie in 0..{spec.r}")
    d1, mu1 = spec.d1, spec.shifts.mu1
    lo = (q_number(spec.ctx, s) + mu1) / d1
    hi = (q_number(spec.ctx, s + 1) + mu1) / d1
    dom = domain(spec)
    lo, hi = max(lo, dom.lo), min(hi, dom.hi)
    return (lo, hi) if hi > lo else None


def _check_p(p):
    if not p > 1:
        raise DomainError("requires p>1")
    if not math.isfinite(p):
        raise DomainError("requires finite p")


def _lp_error(spec, phi, lo, hi, p):
    """||D phi - phi||_{L_p[lo, hi]}."""
    err = lambda t: np.abs(apply_D(spec, phi, np.clip(t, lo, hi)) - np.asarray(phi(t), dtype=float))
    return lp_norm(err, lo, hi, p, spec.quad)


def _rho(spec, lo, hi, grid_n):
    x = np.linspace(lo, hi, grid_n + 1)
    return math.sqrt(max(float(np.max(D_central(spec, x, 2))), 0.0))


def lp_bound_T8(spec: OperatorSpec, phi, p: float, s: int, grid_n: int = DEFAULT_GRID):
    """(bound, observed) on knot cell s:
    2^(1/p) (1 + 1/(p-1)) max_cell(D central_2)^(1/2) ||phi'||_{L_p[0,1]}."""
    _check_p(p)
    dphi = phi.d()
    cell = knot_cell(spec, s)
    if cell is None:
        raise DomainError(f"cell {s} does not meet J_r")
    lo, hi = cell
    rho = _rho(spec, lo, hi, grid_n)
    bound = 2.0 ** (1.0 / p) * (1.0 + 1.0 / (p - 1.0)) * rho * lp_norm(dphi, 0.0, 1.0, p, _quad(spec, dphi))
    return bound, _lp_error(spec, phi, lo, hi, p)


def omega1p_bound_T9(spec: OperatorSpec, phi, p: float, grid_n: int = DEFAULT_GRID):
    """(bound_shape, observed) over J_r, with rho = max_grid (D central_2)^(1/2).

    The constant in front of the shape is unknown; callers report
    observed / bound_shape as an implied constant.
    """
    _check_p(p)
    dom = domain(spec)
    rho = _rho(spec, dom.lo, dom.hi, grid_n)
    shape = 2.0 * (1.0 + 2.0 ** ((1.0 - p) / p) * (1.0 + 1.0 / (p - 1.0))) * \
        integral_modulus_1p(phi, min(rho, 0.999), p, spec.quad)
    return shape, _lp_error(spec, phi, dom.lo, dom.hi, p)


# ----------------------------------------------------------------- T10

def _lip_weight(xi, alpha, beta):
    return alpha * xi * xi + beta * xi


def lipschitz_grid(spec: OperatorSpec, alpha, beta, grid_n: int = DEFAULT_GRID):
    """J_r grid without the points where alpha x^2 + beta x vanishes."""
    x = _grid(spec, grid_n)
    return x[_lip_weight(x, alpha, beta) > 0]


def lipschitz_bound_T10(spec: OperatorSpec, f, sigma, alpha, beta, K, xi):
    """(bound, observed): K (alpha x^2 + beta x)^(-sigma/2) (D central_2)^(sigma/2)."""
    if not 0.0 < sigma <= 1.0:
        raise DomainError(f"sigma must lie in (0, 1], got {sigma}")
    if alpha < 0 or beta < 0:
        raise DomainError("alpha, beta must be nonnegative")
    x = np.asarray(xi, dtype=float)
    wt = _lip_weight(x, alpha, beta)
    if np.any(wt <= 0):
        raise DegenerateWeight("alpha x^2 + beta x vanishes on the grid")
    dc2 = np.clip(np.asarray(D_central(spec, x, 2), dtype=float), 0.0, None)
    bound = K * wt ** (-sigma / 2.0) * dc2 ** (sigma / 2.0)
    observed = np.abs(apply_D(spec, f, x) - np.asarray(f(x), dtype=float))
    return _squeeze(bound), _squeeze(observed)


# ----------------------------------------------------------------- certificates

def certify(kind: str, spec: OperatorSpec, f, *, grid_n: int = DEFAULT_GRID, p: float = 2.0,
            sigma: float = 1.0, alpha: float = 0.0, beta: float = 1.0,
            K: Optional[float] = None) -> BoundCertificate:
    """Run one certificate on the default J_r grid."""
    x = _grid(spec, grid_n)
    if kind == "local_T5":
        b, o = local_bound_T5(spec, f, x)
        _, res = _omega_and_resolution(f, 0.5)
        return BoundCertificate(kind, spec, f.name, x, b, o, 2.0 * spec.d2 / spec.R * res + NUM_TOL)
    if kind == "global_T6":
        b, o = global_bound_T6(spec, f, grid_n)
        _, res = _omega_and_resolution(f, 0.5)
        return BoundCertificate(kind, spec, f.name, [np.nan], [b], [o],
                                2.0 * spec.d2 / spec.R * res + NUM_TOL)
    if kind == "c1_T7":
        b, o = c1_bound_T7(spec, f, x)
        _, res = _omega_and_resolution(f.d(), 0.5)
        root = math.sqrt(max(float(np.max(delta_tilde(spec, x))), 0.0))
        return BoundCertificate(kind, spec, f.name, x, b, o, 2.0 * spec.d2 / spec.R * root * res + NUM_TOL)
    if kind == "lp_T8":
        idx, bs, os_ = [], [], []
        for s in range(spec.r + 1):
            if knot_cell(spec, s) is None:
                continue
            b, o = lp_bound_T8(spec, f, p, s, grid_n)
            idx.append(s)
            bs.append(b)
            os_.append(o)
        return BoundCertificate(kind, spec, f.name, idx, bs, os_, NUM_TOL, note="xi column holds cell index s")
    if kind == "omega1p_T9":
        shape, o = omega1p_bound_T9(spec, f, p, grid_n)
        implied = o / shape if shape > 0 else (0.0 if o <= NUM_TOL else math.inf)
        return BoundCertificate(kind, spec, f.name, [np.nan], [shape], [o], 0.0, implied,
                                note="bound column holds the shape without its constant")
    if kind == "lipschitz_T10":
        xs = lipschitz_grid(spec, alpha, beta, grid_n)
        if K is None:
            K = lipschitz_K_estimate(f, sigma, alpha, beta)
            # lattice estimate from below: use the change under halving as its error
            dK = abs(K - lipschitz_K_estimate(f, sigma, alpha, beta, 256))
        else:
            dK = 0.0
        b, o = lipschitz_bound_T10(spec, f, sigma, alpha, beta, K, xs)
        scale = float(np.max(np.asarray(b) / K)) if K > 0 else 0.0
        return BoundCertificate(kind, spec, f.name, xs, b, o, dK * scale + NUM_TOL,
                                note=f"K={K:.6g}")
    raise ValueError(f"unknown certificate kind {kind!r}; expected one of {KINDS}")


# ----------------------------------------------------------------- Voronovskaja

@dataclass
class VoronovskajaReport:
    r: np.ndarray
    q: np.ndarray
    corrected: np.ndarray
    printed: np.ndarray
    slope: float

    def __post_init__(self):
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("r schedule must be strictly increasing")


def voronovskaja_terms(spec: OperatorSpec, f, xi):
    """(corrected, printed) residuals at xi, both from oracle moments.

    corrected = |Df - f - D(t - x) f' - f''/2 D((t - x)^2)|
    printed   = |Df - f - D(t - x) f' - f''/2 (D((t - x)^2) + D(1))|
    """
    x = np.asarray(xi, dtype=float)
    d1f, d2f = f.d(), f.d2()
    m = spec.mass_scale
    b0, _, _, bc1, bc2 = bruteforce_moments(spec, x)
    fx = np.asarray(f(x), dtype=float)
    core = apply_D(spec, f, x) - fx - m * np.asarray(bc1) * np.asarray(d1f(x)) \
        - 0.5 * np.asarray(d2f(x)) * m * np.asarray(bc2)
    printed = core - 0.5 * np.asarray(d2f(x)) * m * np.asarray(b0)
    return np.abs(core), np.abs(printed)


def loglog_slope(r, y) -> float:
    r, y = np.asarray(r, dtype=float), np.asarray(y, dtype=float)
    if np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(np.log(r), np.log(y), 1)[0])


def voronovskaja_residual(specs: Sequence[OperatorSpec], f, grid_n: int = DEFAULT_GRID) -> VoronovskajaReport:
    f.d2()  # MissingDerivative early
    corr, prin = [], []
    for spec in specs:
        c, p = voronovskaja_terms(spec, f, _grid(spec, grid_n))
        corr.append(float(np.max(c)))
        prin.append(float(np.max(p)))
    r = np.array([s.r for s in specs])
    return VoronovskajaReport(r, np.array([s.q for s in specs]), np.array(corr), np.array(prin),
                              loglog_slope(r, corr))
