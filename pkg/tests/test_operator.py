import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbsk.errors import DomainError
from qbsk.funcspace import get_function
from qbsk.operator import (DEFAULT_SHIFTS, ZERO_SHIFTS, OperatorSpec, ShiftParams, apply_B, apply_D,
                           basis_weights, cell_integrals, cells, domain, extend_C, min_basis_weight)
from qbsk.qcalc import q_number

# the Jackson series needs ~1/(1-q) terms, so keep q off the immediate left of 1
integrating_q = st.floats(0.3, 0.99) | st.just(1.0)

# antiderivatives, for direct implementations that share no code with the package
ANTI = {
    "const1": lambda t: t,
    "id": lambda t: t * t / 2,
    "sq": lambda t: t ** 3 / 3,
    "absmid": lambda t: np.where(t < 0.5, -(0.5 - t) ** 2 / 2, (t - 0.5) ** 2 / 2),
}


def direct_shifted(r, x, name, mu2, mu1, nu1, nu2):
    """q = 1 form with all four shifts."""
    F = ANTI[name]
    n = r + 1
    a, b = mu2 / (n + nu2), (n + mu2) / (n + nu2)
    total = 0.0
    for s in range(r + 1):
        lo, hi = (s + mu1) / (n + nu1), (s + 1 + mu1) / (n + nu1)
        total += math.comb(r, s) * (x - a) ** s * (b - x) ** (r - s) * (F(hi) - F(lo))
    return (n + nu1) * ((n + nu2) / n) ** (r + 1) * total


def direct_bernstein_kantorovich(r, x, name):
    F = ANTI[name]
    return (r + 1) * sum(math.comb(r, s) * x ** s * (1 - x) ** (r - s) * (F((s + 1) / (r + 1)) - F(s / (r + 1)))
                         for s in range(r + 1))


@pytest.mark.parametrize("r", [1, 2, 5, 12, 32])
@pytest.mark.parametrize("name", list(ANTI))
def test_classical_bernstein_kantorovich(r, name):
    spec = OperatorSpec.make(r, 1.0)
    x = domain(spec).grid(64)
    assert np.max(np.abs(apply_B(spec, get_function(name), x) - direct_bernstein_kantorovich(r, x, name))) < 1e-10


@pytest.mark.parametrize("r", [1, 3, 8, 20])
@pytest.mark.parametrize("name", list(ANTI))
@pytest.mark.parametrize("sh", [DEFAULT_SHIFTS, ShiftParams.ordered(0.0, 0.3, 0.7, 0.7),
                                ShiftParams.ordered(0.5, 0.5, 0.5, 2.0)])
def test_shifted_q1_reduction(r, name, sh):
    spec = OperatorSpec.make(r, 1.0, sh)
    x = domain(spec).grid(50)
    want = direct_shifted(r, x, name, sh.mu2, sh.mu1, sh.nu1, sh.nu2)
    assert np.max(np.abs(apply_B(spec, get_function(name), x) - want)) < 1e-10


def test_known_values():
    spec = OperatorSpec.make(4, 1.0)
    assert apply_B(spec, get_function("id"), 0.5) == pytest.approx(0.5, abs=1e-14)
    assert apply_B(spec, get_function("const1"), 0.3) == pytest.approx(1.0, abs=1e-14)
    dom = domain(OperatorSpec.make(2, 1.0, DEFAULT_SHIFTS))
    assert (dom.lo, dom.hi) == pytest.approx((0.025, 0.775))


# -- basis weights

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.sampled_from([0.5, 0.9, 0.97, 1.0]), st.floats(0, 1), st.data())
def test_partition_identity_unshifted_a(r, q, nu2, data):
    spec = OperatorSpec.make(r, q, ShiftParams.ordered(0.0, 0.0, 0.0, nu2))
    dom = domain(spec)
    x = data.draw(st.floats(dom.lo, dom.hi))
    assert basis_weights(spec, x).sum() == pytest.approx((spec.R / spec.d2) ** r, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 30), st.floats(0.3, 1.0), st.data())
def test_partition_identity_general(r, q, data):
    # sum_s [r s]_q (x - a)_q^s (b - x)_q^(r-s) = prod_{i<r} (b - q^i a), free of x
    spec = OperatorSpec.make(r, q, DEFAULT_SHIFTS)
    dom = domain(spec)
    x = data.draw(st.floats(dom.lo, dom.hi))
    want = np.prod(spec.b - q ** np.arange(r) * spec.a)
    assert basis_weights(spec, x).sum() == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("shifts", [ZERO_SHIFTS, DEFAULT_SHIFTS, ShiftParams.ordered(0.4, 0.5, 0.9, 2.0)])
@pytest.mark.parametrize("q", [0.3, 0.8, 0.99, 1.0])
def test_basis_nonnegative(shifts, q):
    # every factor x - q^i a and b - q^i x is >= 0 on J_r
    for r in (1, 5, 17, 40):
        assert min_basis_weight(OperatorSpec.make(r, q, shifts), 200) >= 0.0


@pytest.mark.parametrize("shifts", [ZERO_SHIFTS, DEFAULT_SHIFTS])
@pytest.mark.parametrize("q", [0.5, 0.8, 1.0])
def test_mass_and_D_normalisation(shifts, q):
    for r in (2, 9, 33):
        spec = OperatorSpec.make(r, q, shifts)
        x = domain(spec).grid(30)
        one = get_function("const1")
        assert np.allclose(apply_B(spec, one, x), spec.d2 / spec.R, rtol=1e-12)
        assert np.allclose(apply_D(spec, one, x), 1.0, rtol=1e-12)


def test_ordinary_normalisation_agrees_only_when_unshifted():
    for q in (0.6, 1.0):
        s0 = OperatorSpec.make(7, q, ShiftParams.ordered(0.0, 0.2, 0.5, 1.0))
        s1 = OperatorSpec.make(7, q, ShiftParams.ordered(0.0, 0.2, 0.5, 1.0), normalization="ordinary")
        assert s0.prefactor == pytest.approx(s1.prefactor, rel=1e-14)
    s0 = OperatorSpec.make(16, 0.8, DEFAULT_SHIFTS)
    s1 = OperatorSpec.make(16, 0.8, DEFAULT_SHIFTS, normalization="ordinary")
    mass = apply_B(s1, get_function("const1"), 0.5) / (s1.d2 / s1.R)
    # ordinary power leaves the factor (d2/R)^r (b - a)_q^r behind
    drift = (s1.d2 / s1.R) ** 16 * np.prod(s1.b - 0.8 ** np.arange(16) * s1.a)
    assert mass == pytest.approx(drift, rel=1e-12)
    assert mass > 1.2
    assert apply_B(s0, get_function("const1"), 0.5) == pytest.approx(s0.d2 / s0.R, rel=1e-12)


# -- structural properties

@pytest.mark.parametrize("q", [0.4, 0.9, 1.0])
def test_cell_width_constant(q):
    for r in (1, 10, 64):
        spec = OperatorSpec.make(r, q, DEFAULT_SHIFTS)
        widths = np.array([c.width for c in cells(spec)])
        assert np.max(np.abs(widths - 1 / spec.d1)) < 1e-14
        assert cells(spec)[0].lower == pytest.approx(spec.shifts.mu1 / spec.d1, abs=1e-16)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), integrating_q, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(r, q, alpha, beta):
    spec = OperatorSpec.make(r, q, DEFAULT_SHIFTS)
    f, g = get_function("sinpi"), get_function("expt")
    h = lambda t: alpha * f(t) + beta * g(t)
    x = domain(spec).grid(16)
    lhs = apply_B(spec, h, x)
    rhs = alpha * apply_B(spec, f, x) + beta * apply_B(spec, g, x)
    assert np.max(np.abs(lhs - rhs)) <= 2e-12 * (1 + abs(alpha) + abs(beta)) * 10


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 15), integrating_q, st.floats(0, 1))
def test_positivity_riemann_mode(r, q, c):
    spec = OperatorSpec.make(r, q, ShiftParams.ordered(0.0, 0.1, 0.3, 0.5), mode="riemann")
    f = lambda t: (t - c) ** 2 * np.abs(np.sin(5 * t))
    assert np.min(apply_B(spec, f, domain(spec).grid(40))) >= 0.0


def test_jackson_cell_integral_not_positive():
    # int_A^B f d_q t = int_0^B - int_0^A samples f on two different lattices,
    # so a nonnegative f can integrate to a negative number over a cell
    spec = OperatorSpec.make(2, 0.5, ShiftParams.ordered(0.0, 0.1, 0.3, 0.5))
    f = lambda t: (t - 0.875) ** 2 * np.abs(np.sin(5 * t))
    assert cell_integrals(spec, f)[2] < -1e-4
    assert apply_B(spec, f, domain(spec).hi) < 0
    assert min_basis_weight(spec) >= 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 15), integrating_q, st.sampled_from([0, 1, 2, 3]))
def test_jackson_positive_on_monomials(r, q, k):
    spec = OperatorSpec.make(r, q, DEFAULT_SHIFTS)
    assert np.min(apply_B(spec, lambda t: t ** k, domain(spec).grid(40))) >= 0.0


def test_riemann_mode_at_q1_matches_jackson_mode():
    s1 = OperatorSpec.make(6, 1.0, DEFAULT_SHIFTS, mode="jackson")
    s2 = OperatorSpec.make(6, 1.0, DEFAULT_SHIFTS, mode="riemann")
    x = domain(s1).grid(20)
    f = get_function("sinpi")
    assert np.allclose(apply_B(s1, f, x), apply_B(s2, f, x), atol=1e-12)


def test_riemann_and_jackson_differ_for_q_below_one():
    s1 = OperatorSpec.make(6, 0.7, mode="jackson")
    s2 = OperatorSpec.make(6, 0.7, mode="riemann")
    f = get_function("sq")
    assert abs(apply_B(s1, f, 0.4) - apply_B(s2, f, 0.4)) > 1e-4


def test_extend_C():
    spec = OperatorSpec.make(8, 0.9, DEFAULT_SHIFTS)
    f = get_function("sinpi")
    dom = domain(spec)
    x = np.array([0.0, dom.lo / 2, dom.lo, 0.5, dom.hi, (1 + dom.hi) / 2, 1.0])
    out = extend_C(spec, f, x)
    inside = (x >= dom.lo) & (x <= dom.hi)
    assert np.allclose(out[~inside], f(x[~inside]))
    assert np.allclose(out[inside], apply_B(spec, f, x[inside]))
    assert extend_C(spec, f, 0.0) == f(0.0)
    with pytest.raises(DomainError):
        extend_C(spec, f, 1.2)


def test_domain_checks():
    spec = OperatorSpec.make(5, 0.8, DEFAULT_SHIFTS)
    with pytest.raises(DomainError):
        apply_B(spec, get_function("sq"), 0.0)
    dom = domain(spec)
    apply_B(spec, get_function("sq"), dom.hi + 5e-13)   # within endpoint slack
    with pytest.raises(DomainError):
        OperatorSpec.make(0, 0.5)
    with pytest.raises(DomainError):
        OperatorSpec.make(3, 0.5, mode="simpson")


@pytest.mark.parametrize("args,msg", [((0.3, 0.2, 0.5, 1.0), "mu2 <= mu1"),
                                      ((0.1, 0.6, 0.5, 1.0), "mu1 <= nu1"),
                                      ((0.1, 0.2, 0.5, 0.4), "nu1 <= nu2"),
                                      ((-0.1, 0.2, 0.5, 1.0), "nonnegative")])
def test_shift_ordering(args, msg):
    with pytest.raises(DomainError, match=msg):
        ShiftParams.ordered(*args)


def test_schedule_q_numbers():
    spec = OperatorSpec.make(10, 1 - 1 / 11, DEFAULT_SHIFTS)
    assert spec.R == pytest.approx(q_number(spec.q, 11))
    assert spec.mass_scale == pytest.approx(spec.R / (spec.R + 1.0))
