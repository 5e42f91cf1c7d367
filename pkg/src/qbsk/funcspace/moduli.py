"""Grid estimators for moduli of continuity and smoothness.

Each estimator takes a maximum over finitely many points, so it returns a
lower estimate of the true supremum that increases towards it as the grid
is refined. ``grid_resolution`` is the matching slack bound.
"""

from __future__ import annotations

import math

import numpy as np

from .quadrature import QuadratureSpec, lp_norm

LADDER = (1.0, 0.5, 0.25, 0.125)


def _vals(f, t):
    return np.broadcast_to(np.asarray(f(t), dtype=float), np.shape(t))


def grid_resolution(f, grid_n: int) -> float:
    """max|f'| / grid_n when a Lipschitz constant is known, else ``nan``."""
    lip = getattr(f, "lipschitz", None)
    return float("nan") if lip is None else lip / grid_n


def modulus_continuity(f, delta: float, grid_n: int = 4096) -> float:
    """sup_{|t1 - t2| <= delta} |f(t1) - f(t2)|, from below."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if grid_n < 64:
        raise ValueError("grid_n must be >= 64")
    best = 0.0
    for frac in LADDER:
        h = delta * frac
        t = np.linspace(0.0, 1.0 - h, grid_n + 1)
        diff = np.abs(_vals(f, np.minimum(t + h, 1.0)) - _vals(f, t))
        best = max(best, float(diff.max()))
    return best


def omega(f, delta: float, grid_n: int = 4096) -> float:
    """Analytic modulus when the function carries one, estimator otherwise."""
    if delta <= 0:
        return 0.0
    known = getattr(f, "modulus", None)
    if known is not None:
        return float(known(delta))
    return modulus_continuity(f, min(delta, 1.0), grid_n)


def integral_modulus_1p(psi, t: float, p: float, spec: QuadratureSpec | None = None) -> float:
    """L_p integral modulus: sup_{lambda <= t} ||psi(. + lambda) - psi||_{L_p[0, 1 - lambda]}
    over the ladder lambda in {t, t/2, t/4, t/8}."""
    if not math.isfinite(p):
        raise ValueError("integral_modulus_1p needs a finite p")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    best = 0.0
    for frac in LADDER:
        lam = t * frac
        diff = lambda z, lam=lam: _vals(psi, np.minimum(np.asarray(z) + lam, 1.0)) - _vals(psi, z)
        best = max(best, lp_norm(diff, 0.0, 1.0 - lam, p, spec))
    return best


def modulus_smoothness_beta(f, delta: float, grid_n: int = 4096) -> float:
    """Weighted modulus with step rho*beta(x), beta(x) = sqrt(x - x^2);
    grid points whose stencil leaves [0, 1] are skipped."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    x = np.linspace(0.0, 1.0, grid_n + 1)
    half = 0.5 * np.sqrt(np.clip(x - x * x, 0.0, None))
    best = 0.0
    for frac in LADDER:
        rho = delta * frac
        lo, hi = x - rho * half, x + rho * half
        ok = (lo >= 0.0) & (hi <= 1.0)
        if not ok.any():
            continue
        diff = np.abs(_vals(f, hi[ok]) - _vals(f, lo[ok]))
        best = max(best, float(diff.max()))
    return best


def lipschitz_K_estimate(f, sigma: float, alpha: float, beta: float, grid_n: int = 512) -> float:
    """Smallest K with |f(t) - f(x)| <= K |t - x|^sigma / (alpha x^2 + beta x + t)^(sigma/2)
    on the lattice {1/n, ..., 1}^2."""
    if not 0.0 < sigma <= 1.0:
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    if alpha < 0 or beta < 0 or alpha + beta <= 0:
        raise ValueError("need alpha, beta >= 0 and alpha + beta > 0")
    g = np.arange(1, grid_n + 1) / grid_n
    fv = _vals(f, g)
    t, x = g[:, None], g[None, :]
    dist = np.abs(t - x)
    off = dist > 0
    weight = (alpha * x * x + beta * x + t) ** (sigma / 2.0)
    ratio = np.zeros_like(dist)
    ratio[off] = np.abs(fv[:, None] - fv[None, :])[off] * weight[off] / dist[off] ** sigma
    return float(ratio.max())
