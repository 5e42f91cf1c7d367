"""Command-line driver: convergence tables, moment audit, bound certificates
and the Voronovskaja study, all written as CSV.

    qbsk converge --function sq --r 16,32,64,128,256
    qbsk audit --shifts 0.1,0.2,0.5,1.0 --q 0.8 --out audit.csv
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from . import bounds as _bounds
from .errors import ConfigError, ParseError, QbskError
from .funcspace import REGISTRY, QuadratureSpec, lp_norm, resolve
from .moments import audit_moments
from .operator import (INTEGRAL_MODES, OperatorSpec, ShiftParams, apply_B, cells, domain,
                       extend_C)
from .qcalc import jackson_integral, monomial_cell_integral

SUBCOMMANDS = ("converge", "moments", "audit", "bounds", "voronovskaja")
DEFAULT_R = {
    "converge": [16, 32, 64, 128, 256],
    "moments": [8, 16, 32, 64],
    "audit": [8, 16, 32, 64],
    "bounds": [4, 8, 16],
    "voronovskaja": [8, 16, 32, 64, 128],
}
SATURATION_RATIO = 0.9
AUDIT_SAMPLES = 20


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    r: Tuple[int, ...] = ()
    q: Union[str, float] = "schedule"
    shifts: Tuple[float, float, float, float] = (0.1, 0.2, 0.5, 1.0)   # mu2, mu1, nu1, nu2
    integral_mode: str = "jackson"
    function: Optional[str] = "sq"
    expr: Optional[str] = None
    p: float = 2.0
    grid_n: int = 64
    out: str = "-"
    seed: int = 0

    def q_for(self, r: int) -> float:
        return 1.0 - 1.0 / (r + 1) if self.q == "schedule" else float(self.q)

    def spec(self, r: int) -> OperatorSpec:
        return OperatorSpec.make(r, self.q_for(r), ShiftParams.ordered(*self.shifts), self.integral_mode)

    def test_function(self):
        return resolve(self.function, self.expr)


CONFIG_FIELDS = tuple(f.name for f in fields(RunConfig))


# ----------------------------------------------------------------- config parsing

def _parse_list(text, conv, name):
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).split(",") if s.strip()]
    try:
        return tuple(conv(v) for v in items)
    except (TypeError, ValueError):
        raise ConfigError(name, f"cannot parse {text!r}") from None


def _to_int(v):
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(v)
    return int(str(v).strip()) if not isinstance(v, (int, float)) else int(v)


def _normalize(raw: dict) -> RunConfig:
    unknown = set(raw) - set(CONFIG_FIELDS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], f"unknown field; expected one of {', '.join(CONFIG_FIELDS)}")
    sub = raw.get("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError("subcommand", f"must be one of {', '.join(SUBCOMMANDS)}")
    kw = dict(raw)

    r = _parse_list(kw.get("r") or DEFAULT_R[sub], _to_int, "r")
    if not r:
        raise ConfigError("r", "empty list")
    if min(r) < 1:
        raise ConfigError("r", "degrees must be >= 1")
    if any(b <= a for a, b in zip(r, r[1:])):
        raise ConfigError("r", "list must be strictly increasing")
    kw["r"] = r

    q = kw.get("q", "schedule")
    if str(q).strip().lower() == "schedule":
        kw["q"] = "schedule"
    else:
        try:
            qv = float(q)
        except (TypeError, ValueError):
            raise ConfigError("q", f"expected 'schedule' or a number, got {q!r}") from None
        if not 0.0 < qv <= 1.0:
            raise ConfigError("q", "must lie in (0, 1]")
        kw["q"] = qv

    shifts = _parse_list(kw.get("shifts", RunConfig.shifts), float, "shifts")
    if len(shifts) != 4:
        raise ConfigError("shifts", "expected four values mu2,mu1,nu1,nu2")
    try:
        ShiftParams.ordered(*shifts)
    except QbskError as exc:
        raise ConfigError("shifts", str(exc)) from None
    kw["shifts"] = shifts

    if kw.get("integral_mode", "jackson") not in INTEGRAL_MODES:
        raise ConfigError("integral_mode", f"must be one of {', '.join(INTEGRAL_MODES)}")

    if kw.get("expr") is not None:
        kw["function"] = None
        try:
            resolve(None, kw["expr"])
        except ParseError as exc:
            raise ConfigError("expr", str(exc)) from None
    else:
        name = kw.get("function") or "sq"
        if name not in REGISTRY:
            raise ConfigError("function", f"unknown function {name!r}; registry: {', '.join(sorted(REGISTRY))}")
        kw["function"] = name

    try:
        kw["p"] = float(kw.get("p", 2.0))
    except (TypeError, ValueError):
        raise ConfigError("p", "expected a real number") from None
    if not kw["p"] >= 1.0 or math.isinf(kw["p"]):
        raise ConfigError("p", "must be a finite real >= 1")
    try:
        kw["grid_n"] = _to_int(kw.get("grid_n", 64))
        kw["seed"] = _to_int(kw.get("seed", 0))
    except (TypeError, ValueError):
        raise ConfigError("grid_n", "expected an integer") from None
    if kw["grid_n"] < 16:
        raise ConfigError("grid_n", "must be >= 16")
    kw["out"] = str(kw.get("out", "-"))
    return RunConfig(**kw)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qbsk", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="flat JSON document with RunConfig field names")
    ap.add_argument("--r", help="comma-separated degrees, strictly increasing")
    ap.add_argument("--q", help="fixed q in (0, 1] or 'schedule' for q_r = 1 - 1/(r+1)")
    ap.add_argument("--shifts", help="mu2,mu1,nu1,nu2")
    ap.add_argument("--mode", dest="integral_mode", choices=INTEGRAL_MODES)
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--function", help="registry name: " + ", ".join(sorted(REGISTRY)))
    src.add_argument("--expr", help="expression in t, e.g. 'sin(pi*t)'")
    ap.add_argument("--p", type=float)
    ap.add_argument("--grid", dest="grid_n", type=int)
    ap.add_argument("--out", help="output path, '-' for stdout")
    ap.add_argument("--seed", type=int)
    return ap


def load_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Parse flags, merge over an optional JSON config file, validate."""
    ns = build_parser().parse_args(argv)
    raw = {}
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError("config", f"cannot read {ns.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")
    flags = {k: v for k, v in vars(ns).items() if v is not None and k != "config"}
    if "function" in flags:
        raw.pop("expr", None)
    if "expr" in flags:
        raw.pop("function", None)
    raw.update(flags)
    return _normalize(raw)


# ----------------------------------------------------------------- CSV

@dataclass
class CsvTable:
    header: List[str]
    rows: List[tuple] = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} cells, header has {len(self.header)}")
        self.rows.append(row)

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(_cell(v) for v in row) + "\n")
        return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".16e")
    s = str(v)
    if any(c in s for c in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def emit_csv(table: CsvTable, path: str) -> None:
    text = table.render()
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ----------------------------------------------------------------- subcommands

def _lp_error(spec, f, p, scale):
    dom = domain(spec)
    quad = QuadratureSpec(abs_tol=max(1e-14, 1e-9 * scale), max_depth=50)
    err = lambda t: apply_B(spec, f, np.clip(t, dom.lo, dom.hi)) - np.asarray(f(t), dtype=float)
    return lp_norm(err, dom.lo, dom.hi, p, quad)


def cmd_converge(cfg: RunConfig) -> CsvTable:
    f = cfg.test_function()
    t = CsvTable(["r", "q_r", "sup_err", "sup_err_ext", "lp_err", "sup_ratio", "lp_ratio", "saturated"])
    prev = None
    unit = np.linspace(0.0, 1.0, cfg.grid_n + 1)
    for r in cfg.r:
        spec = cfg.spec(r)
        x = domain(spec).grid(cfg.grid_n)
        sup_err = float(np.max(np.abs(apply_B(spec, f, x) - np.asarray(f(x), dtype=float))))
        ext = float(np.max(np.abs(extend_C(spec, f, unit) - np.asarray(f(unit), dtype=float))))
        lp_err = _lp_error(spec, f, cfg.p, sup_err ** cfg.p)
        if prev is None:
            sr = lr = float("nan")
            sat = False
        else:
            sr = sup_err / prev[0] if prev[0] > 0 else float("nan")
            lr = lp_err / prev[1] if prev[1] > 0 else float("nan")
            sat = bool(sr > SATURATION_RATIO)
        t.add(r, spec.q, sup_err, max(sup_err, ext), lp_err, sr, lr, sat)
        prev = (sup_err, lp_err)
    return t


def cmd_moments(cfg: RunConfig) -> CsvTable:
    t = CsvTable(["r", "q", "xi", "m0", "m1", "m2", "b0", "b1", "b2", "c1", "c2", "bc1", "bc2"])
    for r in cfg.r:
        rep = audit_moments(cfg.spec(r), cfg.grid_n)
        c, b = rep.closed, rep.brute
        for i, x in enumerate(rep.xi):
            t.add(r, rep.spec.q, x, c["m0"][i], c["m1"][i], c["m2"][i],
                  b["b0"][i], b["b1"][i], b["b2"][i],
                  rep.central["c1"][i], rep.central["c2"][i], b["bc1"][i], b["bc2"][i])
    return t


def _random_cell_check(cfg: RunConfig, r: int, rng) -> Tuple[float, float]:
    """Corrected cell integrals vs. the Jackson series, and printed vs. corrected,
    over random (s, mu1, nu1) at this r and q."""
    q = cfg.q_for(r)
    worst_c = worst_p = 0.0
    for _ in range(AUDIT_SAMPLES):
        s = int(rng.integers(0, r + 1))
        mu1 = float(rng.uniform(0.0, 1.0))
        nu1 = mu1 + float(rng.uniform(0.0, 1.0))
        spec = OperatorSpec.make(r, q, ShiftParams.ordered(0.0, mu1, nu1, nu1))
        alpha = int(rng.integers(1, 3))
        c = cells(spec)[s]
        series = jackson_integral(lambda t, a=alpha: t ** a, c.lower, c.upper, spec.ctx, spec.pol, spec.quad)
        corrected = monomial_cell_integral(alpha, s, spec)
        worst_c = max(worst_c, abs(corrected - series))
        worst_p = max(worst_p, abs(monomial_cell_integral(alpha, s, spec, printed=True) - corrected))
    return worst_c, worst_p


def cmd_audit(cfg: RunConfig) -> CsvTable:
    t = CsvTable(["r", "q", "quantity", "value", "flag"])
    rng = np.random.default_rng(cfg.seed)
    for r in cfg.r:
        rep = audit_moments(cfg.spec(r), cfg.grid_n)
        q = rep.spec.q
        for k, v in rep.discrepancy.items():
            t.add(r, q, k, v, "")
        for k, v in rep.extra.items():
            t.add(r, q, k, v, "")
        for k, v in rep.flags.items():
            t.add(r, q, k, None, v)
        wc, wp = _random_cell_check(cfg, r, rng)
        t.add(r, q, "cell_integral_random_corrected_vs_series", wc, "")
        t.add(r, q, "cell_integral_random_printed_vs_corrected", wp, "")
    return t


BOUND_HEADER = ["kind", "r", "q_r", "function", "xi_at_min", "bound", "observed", "slack",
                "estimator_resolution", "satisfied", "must_satisfy", "implied_constant", "reason"]


def _bound_rows(t: CsvTable, spec, f, kind, p):
    base = (kind, spec.r, spec.q, f.name)
    must = getattr(f, "modulus", None) is not None
    try:
        if kind in ("c1_T7", "lp_T8") and f.derivative is None:
            raise _Skip("requires a C1 function with a derivative")
        if kind in ("lp_T8", "omega1p_T9") and not p > 1:
            raise _Skip("requires p>1")
        cert = _bounds.certify(kind, spec, f, p=p)
    except _Skip as why:
        t.add(*base, None, None, None, None, None, None, must, None, str(why))
        return None
    i = int(np.argmin(cert.slack))
    t.add(*base, cert.xi[i], cert.bound[i], cert.observed[i], cert.slack[i],
          cert.estimator_resolution, cert.satisfied, must, cert.implied_constant, cert.note)
    return cert


class _Skip(Exception):
    pass


def cmd_bounds(cfg: RunConfig) -> Tuple[CsvTable, bool]:
    """Returns the table and whether every must-satisfy certificate held."""
    f = cfg.test_function()
    t = CsvTable(list(BOUND_HEADER))
    ok = True
    for kind in _bounds.KINDS:
        for r in cfg.r:
            cert = _bound_rows(t, cfg.spec(r), f, kind, cfg.p)
            if cert is not None and cert.satisfied is False and getattr(f, "modulus", None) is not None:
                ok = False
    return t, ok


def cmd_voronovskaja(cfg: RunConfig) -> CsvTable:
    f = cfg.test_function()
    rep = _bounds.voronovskaja_residual([cfg.spec(r) for r in cfg.r], f, cfg.grid_n)
    t = CsvTable(["r", "q_r", "corrected_residual", "printed_residual"])
    for r, q, c, p in zip(rep.r, rep.q, rep.corrected, rep.printed):
        t.add(int(r), q, c, p)
    t.add("slope", None, rep.slope, _bounds.loglog_slope(rep.r, rep.printed))
    return t


def run(cfg: RunConfig) -> Tuple[CsvTable, int]:
    if cfg.subcommand == "bounds":
        table, ok = cmd_bounds(cfg)
        return table, 0 if ok else 2
    table = {"converge": cmd_converge, "moments": cmd_moments, "audit": cmd_audit,
             "voronovskaja": cmd_voronovskaja}[cfg.subcommand](cfg)
    return table, 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = load_config(argv)
        table, code = run(cfg)
        emit_csv(table, cfg.out)
    except ConfigError as exc:
        print(f"qbsk: config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qbsk: cannot write output: {exc}", file=sys.stderr)
        return 1
    except (QbskError, ValueError, ArithmeticError) as exc:
        print(f"qbsk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
