"""Shifted q-Bernstein-Kantorovich operators in numpy.

Covers q-calculus, the operator and its moments, error-bound certificates
and a CSV driver."""

from .errors import (ConfigError, DegenerateWeight, DepthExceeded, DomainError, EvalError,
                     MissingDerivative, NonConvergent, ParseError, QbskError)
from .qcalc import (QContext, TruncationPolicy, jackson_integral, monomial_cell_integral,
                    q_binomial, q_factorial, q_number, shifted_qproduct)
from .operator import (DEFAULT_SHIFTS, ZERO_SHIFTS, Cell, DomainJr, OperatorSpec, ShiftParams,
                       apply_B, apply_D, basis_weights, cells, domain, domain_and_cells, extend_C)
from .moments import MomentReport, audit_moments, bruteforce_moments, closed_central_moments, closed_moments
from .bounds import BoundCertificate, VoronovskajaReport, certify, voronovskaja_residual

__version__ = "0.1.0"
