"""End-to-end acceptance checks, one test per criterion.

Each test records a short detail string; conftest prints the PASS/FAIL lines.
"""

import math

import numpy as np
import pytest

from qbsk.bounds import certify, voronovskaja_residual
from qbsk.cli import load_config, run
from qbsk.errors import ParseError
from qbsk.funcspace import evaluate, get_function, parse_expr
from qbsk.moments import audit_moments, closed_central_moments, closed_moments
from qbsk.operator import DEFAULT_SHIFTS, ZERO_SHIFTS, OperatorSpec, ShiftParams, apply_B, basis_weights, cells, domain
from qbsk.qcalc import jackson_integral, monomial_cell_integral

ANTI = {
    "const1": lambda t: t,
    "id": lambda t: t * t / 2,
    "sq": lambda t: t ** 3 / 3,
    "absmid": lambda t: np.where(t < 0.5, -(0.5 - t) ** 2 / 2, (t - 0.5) ** 2 / 2),
}


def schedule(r, shifts=DEFAULT_SHIFTS):
    return OperatorSpec.make(r, 1 - 1 / (r + 1), shifts)


def bernstein_kantorovich(r, x, F):
    return (r + 1) * sum(math.comb(r, s) * x ** s * (1 - x) ** (r - s) * (F((s + 1) / (r + 1)) - F(s / (r + 1)))
                         for s in range(r + 1))


@pytest.mark.criterion(1)
def test_classical_reduction(record_property):
    worst = 0.0
    for r in range(1, 33):
        spec = OperatorSpec.make(r, 1.0, ZERO_SHIFTS)
        x = domain(spec).grid(64)
        assert x.size == 65
        for name, F in ANTI.items():
            worst = max(worst, float(np.max(np.abs(apply_B(spec, get_function(name), x) - bernstein_kantorovich(r, x, F)))))
        m0, m1, _ = closed_moments(spec, x)
        worst = max(worst, float(np.max(np.abs(m0 - 1))),
                    float(np.max(np.abs(m1 - (r * x / (r + 1) + 1 / (2 * (r + 1)))))))
    record_property("detail", f"max deviation {worst:.2e} (tol 1e-10)")
    assert worst <= 1e-10


@pytest.mark.criterion(2)
def test_partition_identity(record_property):
    rng = np.random.default_rng(2)
    worst = 0.0
    for sh in (ShiftParams.ordered(0.0, 0.2, 0.5, 1.0), ShiftParams.ordered(0.0, 0.0, 0.0, 0.7)):
        for q in (0.5, 0.9):
            for r in range(1, 21):
                spec = OperatorSpec.make(r, q, sh)
                dom = domain(spec)
                x = rng.uniform(dom.lo, dom.hi, 100)
                want = (spec.R / (spec.R + sh.nu2)) ** r
                worst = max(worst, float(np.max(np.abs(basis_weights(spec, x).sum(axis=0) - want))))
    record_property("detail", f"max deviation {worst:.2e} (tol 1e-12)")
    assert worst <= 1e-12


@pytest.mark.criterion(3)
def test_cell_integral_erratum(record_property):
    rng = np.random.default_rng(3)
    worst, printed_gap = 0.0, 0.0
    for _ in range(100):
        r = int(rng.integers(1, 17))
        s = int(rng.integers(0, r + 1))
        q = float(rng.uniform(0.3, 0.95))
        mu1 = float(rng.uniform(0, 1))
        nu1 = mu1 + float(rng.uniform(0, 1))
        spec = OperatorSpec.make(r, q, ShiftParams.ordered(0.0, mu1, nu1, nu1))
        c = cells(spec)[s]
        for alpha in (0, 1, 2):
            series = jackson_integral(lambda t, a=alpha: t ** a, c.lower, c.upper, spec.ctx, spec.pol)
            worst = max(worst, abs(monomial_cell_integral(alpha, s, spec) - series))
            if s != r:
                printed_gap = max(printed_gap, abs(monomial_cell_integral(alpha, s, spec, printed=True)
                                                   - monomial_cell_integral(alpha, s, spec)))
    record_property("detail", f"corrected vs series {worst:.2e} (tol 1e-12), printed gap {printed_gap:.2e} (> 1e-6)")
    assert worst <= 1e-12
    assert printed_gap > 1e-6


@pytest.mark.criterion(4)
def test_moment_audit(record_property):
    exact = 0.0
    for r in (8, 16, 32, 64):
        for spec in (OperatorSpec.make(r, 0.8, ShiftParams.ordered(0.0, 0.2, 0.5, 1.0)),
                     OperatorSpec.make(r, 1.0, DEFAULT_SHIFTS), schedule(r, ZERO_SHIFTS)):
            d = audit_moments(spec).discrepancy
            exact = max(exact, d["raw_m0"], d["raw_m1"], d["raw_m2"])
    c1_gap = 0.0
    for r in (3, 8, 40):
        for q in (0.4, 0.8, 1.0):
            spec = OperatorSpec.make(r, q, DEFAULT_SHIFTS)
            x = domain(spec).grid(64)
            m0, m1, _ = closed_moments(spec, x)
            c1, _ = closed_central_moments(spec, x)
            c1_gap = max(c1_gap, float(np.max(np.abs(c1 - (m1 - x * m0)))))
    lo = audit_moments(schedule(8)).discrepancy
    hi = audit_moments(schedule(64)).discrepancy
    worst8 = max(lo["raw_m0"], lo["raw_m1"], lo["raw_m2"])
    worst64 = max(hi["raw_m0"], hi["raw_m1"], hi["raw_m2"])
    record_property("detail", f"exact cases {exact:.2e} (tol 1e-10), c1 identity {c1_gap:.2e} (tol 1e-12), "
                              f"mu2=0.1 discrepancy r=8 {worst8:.2e} -> r=64 {worst64:.2e}")
    assert exact <= 1e-10
    assert c1_gap <= 1e-12
    assert worst64 < worst8
    assert hi["central_c2"] < lo["central_c2"]


@pytest.mark.criterion(5)
def test_bound_certificates(record_property):
    failures, checked, spread = [], 0, []
    for name in ("sq", "absmid", "sinpi"):
        f = get_function(name)
        for qsel in ("fixed", "schedule"):
            implied = []
            for r in (4, 8, 16):
                spec = OperatorSpec.make(r, 0.8, DEFAULT_SHIFTS) if qsel == "fixed" else schedule(r)
                for kind in ("local_T5", "global_T6", "c1_T7", "lp_T8", "lipschitz_T10"):
                    if kind in ("c1_T7", "lp_T8") and f.derivative is None:
                        continue
                    cert = certify(kind, spec, f)
                    checked += 1
                    if not cert.satisfied:
                        failures.append((name, qsel, r, kind, cert.min_slack))
                implied.append(certify("omega1p_T9", spec, f).implied_constant)
            assert all(math.isfinite(k) and k > 0 for k in implied)
            spread.append(max(implied) / min(implied))
    record_property("detail", f"{checked} certificates, {len(failures)} violated; "
                              f"T9 implied-constant spread <= x{max(spread):.2f} (limit x3)")
    assert not failures, failures
    assert max(spread) <= 3.0


def _converge(q, r):
    table, _ = run(load_config(["converge", "--function", "sq", "--q", q, "--r", ",".join(map(str, r))]))
    head = table.header
    return {row[0]: dict(zip(head, row)) for row in table.rows}


@pytest.mark.criterion(6)
def test_convergence(record_property):
    rows = _converge("schedule", [32, 64, 128, 256])
    s32, s256 = rows[32]["sup_err"], rows[256]["sup_err"]
    l32, l256 = rows[32]["lp_err"], rows[256]["lp_err"]
    sat = _converge("0.5", [128, 256])
    ratio = sat[256]["sup_ratio"]
    record_property("detail", f"sup {s32:.4f} -> {s256:.4f}, L2 {l32:.4f} -> {l256:.4f}; "
                              f"q=0.5 ratio r=256/r=128 {ratio:.4f}")
    assert s256 <= 0.5 * s32 and s256 <= 0.05
    assert l256 <= 0.5 * l32 and l256 <= 0.05
    assert ratio > 0.9 and sat[256]["saturated"] is True


@pytest.mark.criterion(7)
def test_voronovskaja(record_property):
    rs = (8, 16, 32, 64, 128)
    sq = get_function("sq")
    corrected, printed = [], []
    for sh in (ZERO_SHIFTS, ShiftParams.ordered(0.0, 0.2, 0.5, 1.0)):
        for specs in ([schedule(r, sh) for r in rs], [OperatorSpec.make(r, 1.0, sh) for r in rs]):
            rep = voronovskaja_residual(specs, sq)
            corrected.extend(rep.corrected)
            printed.extend(rep.printed)
    sin_rep = voronovskaja_residual([schedule(r) for r in rs], get_function("sinpi"))
    record_property("detail", f"t^2 corrected <= {max(corrected):.1e}, printed in "
                              f"[{min(printed):.3f}, {max(printed):.3f}], sin slope {sin_rep.slope:.3f}")
    assert max(corrected) <= 1e-9
    assert sin_rep.slope <= -0.8
    assert 0.9 <= min(printed) and max(printed) <= 1.1


VALUES = [
    ("1+2*3", 0.0, 7.0), ("(1+2)*3", 0.0, 9.0), ("2^3^2", 0.0, 512.0), ("-2^2", 0.0, -4.0),
    ("8/4/2", 0.0, 1.0), ("5-3-1", 0.0, 1.0), ("2*t^2", 0.5, 0.5), ("t*t", 0.5, 0.25),
    ("cos(0)+.5", 0.0, 1.5), ("sqrt(t)", 0.25, 0.5), ("abs(t-1)", 0.25, 0.75),
    ("exp(2*t)/exp(t)", 0.3, math.exp(0.3)), ("log(e)", 0.0, 1.0), ("sin(pi*t)", 0.5, 1.0),
]
ERRORS = [("t +", 4), ("2*(t+1", 7), ("foo(t)", 1), ("3 $ 4", 3), ("", 1), ("sin t", 5)]


@pytest.mark.criterion(8)
def test_parser_and_plumbing(record_property):
    bad = [src for src, t, v in VALUES if abs(evaluate(parse_expr(src), t) - v) > 1e-12]
    for src, col in ERRORS:
        try:
            parse_expr(src)
            bad.append(src)
        except ParseError as exc:
            if exc.column != col:
                bad.append(src)
    sin_half = abs(evaluate(parse_expr("sin(pi*t)"), 0.5) - 1.0)
    argv = ["bounds", "--r", "4,8", "--function", "sinpi", "--seed", "5"]
    first = run(load_config(argv))[0].render().encode()
    second = run(load_config(argv))[0].render().encode()
    record_property("detail", f"{len(VALUES) + len(ERRORS)} corpus cases, {len(bad)} wrong; "
                              f"sin(pi/2) error {sin_half:.1e}; CSV identical {first == second}")
    assert len(VALUES) + len(ERRORS) >= 20
    assert not bad, bad
    assert sin_half <= 1e-12
    assert first == second
