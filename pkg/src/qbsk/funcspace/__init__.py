"""Test functions, expression parsing, quadrature and moduli of continuity."""

from .expr import parse_expr, unparse, evaluate
from .functions import REGISTRY, TestFunction, eval_func, from_expression, get_function, resolve
from .quadrature import QuadratureSpec, adaptive_quad, lp_norm
from .moduli import (
    LADDER,
    grid_resolution,
    integral_modulus_1p,
    lipschitz_K_estimate,
    modulus_continuity,
    modulus_smoothness_beta,
    omega,
)

__all__ = [
    "parse_expr", "unparse", "evaluate",
    "REGISTRY", "TestFunction", "eval_func", "from_expression", "get_function", "resolve",
    "QuadratureSpec", "adaptive_quad", "lp_norm",
    "LADDER", "grid_resolution", "omega", "modulus_continuity", "integral_modulus_1p", "modulus_smoothness_beta", "lipschitz_K_estimate",
]
