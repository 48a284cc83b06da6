"""Command-line front end.

Every subcommand writes either a table (CSV, or JSON with ``columns`` and
``rows``) or a JSON document checked against the schema of the same name in
``dhglevy/schemas``.  Errors go to stderr as JSON with exit codes 2 (usage),
3 (parameter or domain error), 4 (convergence failure) and 1 (a failing
self-test).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import acceptance
from .dhgprocess import (DhgParameters, characteristic_exponent, laplace_exponent_psi, levy_density_two_sided,
                         long_term_behavior)
from .doublebeta import Quadruple, classify, exponent_sum_gap, laplace_exponent, levy_density, potential_density
from .errors import ConvergenceError, DomainError, ParameterError
from .expfunctional import MellinSpec, mellin
from .montecarlo import (SEED_ENV, SimulationConfig, default_seed, estimate_inf_laplace, estimate_log_drift,
                         estimate_mellin_t0, estimate_sup_laplace, estimate_survival_rate, simulate_glued,
                         simulate_ricochet, simulate_rssmp)
from .ricochet import (Degenerate, GluedParameters, RicochetParameters, glued_exponent, glued_factors,
                       glued_inf_law_laplace, glued_sup_law_laplace, inf_law_laplace, pssmp_classification,
                       sigma_b, sup_law_laplace, t0_mellin, wh_quadruples, wiener_hopf_condition)
from .rssmp import RssmpParameters, chi_prime_zero, classify_phase, hits_zero_forms, phase_scan

EXIT_OK, EXIT_SELFTEST, EXIT_USAGE, EXIT_PARAMETER, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kw):
        kw.setdefault("allow_abbrev", False)  # --c must never resolve to --config
        super().__init__(*args, **kw)

    def error(self, message):  # noqa: D401 - argparse hook
        raise UsageError(message)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    steps: int
    log: bool = False

    @classmethod
    def parse(cls, text: str, log: bool = False) -> "Grid":
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must be min:max:steps, got {text!r}")
        try:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise UsageError(f"bad grid {text!r}: {exc}") from None
        if steps < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
            raise UsageError(f"bad grid {text!r}")
        if log and not (lo > 0 and hi > 0):
            raise UsageError("a log-spaced grid needs positive end points")
        return cls(lo, hi, steps, log)

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.lo])
        if self.log:
            return np.geomspace(self.lo, self.hi, self.steps)
        return np.linspace(self.lo, self.hi, self.steps)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}: {exc}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}: {exc}") from None


def _quad(text: str) -> Quadruple:
    try:
        return Quadruple.parse(text)
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise UsageError(f"bad quadruple {text!r}: {exc}") from None


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise UsageError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    return v


def read_config(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment and keys may use '-' or '_'."""
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

@dataclass
class Table:
    command: str
    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)


def _num(x):
    """JSON-safe scalar: non-finite floats become the strings inf, -inf, nan."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return _num(obj)


def _csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return f"{x:.16e}" if math.isfinite(x) else str(_num(x))
    return "" if x is None else str(x)


def table_csv(t: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(t.columns)
    for row in t.rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _flatten(doc, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(doc, dict):
        out = []
        for k, v in doc.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(doc, list):
        out = []
        for i, v in enumerate(doc):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, doc)]


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("dhglevy").joinpath("schemas", f"{name}.json").read_text(encoding="utf-8"))


def validate_document(doc: dict, schema: str) -> None:
    import jsonschema

    jsonschema.validate(doc, load_schema(schema))


def render(result, fmt: str) -> str:
    if isinstance(result, Table):
        if fmt == "csv":
            return table_csv(result)
        doc = _jsonable({"command": result.command, "columns": result.columns, "rows": result.rows,
                         "meta": result.meta})
        validate_document(doc, "table")
    else:
        doc = _jsonable(result)
        validate_document(doc, doc["command"])
        if fmt == "csv":
            return table_csv(Table(doc["command"], ["key", "value"], [list(kv) for kv in _flatten(doc)]))
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _class_doc(q: Quadruple) -> dict:
    c = classify(q)
    return {"quadruple": list(q.as_tuple()), "class": c.tag.value, "k": c.k, "chain": c.chain,
            "in_G": c.in_G, "interior": c.interior, "reason": c.reason, "diagnostics": list(c.diagnostics),
            "sum_gap": exponent_sum_gap(q) if c.in_G else None}


def _params(a) -> DhgParameters:
    if a.plus is None or a.minus is None:
        raise UsageError("--plus and --minus are both required")
    return DhgParameters(_quad(a.plus), _quad(a.minus))


def _grid(a, name: str = "grid") -> np.ndarray:
    text = getattr(a, name)
    if text is None:
        raise UsageError(f"--{name.replace('_', '-')} is required")
    return Grid.parse(text, a.log).values()


def cmd_validate(a):
    doc = _class_doc(_quad(a.quad))
    doc["command"] = "validate"
    return doc


def cmd_exponent(a):
    x = _grid(a)
    if a.quad is not None:
        q = _quad(a.quad)
        if a.imaginary:
            v = np.asarray(laplace_exponent(q, 1j * x), dtype=complex)
            return Table("exponent", ["theta", "re_Phi_i_theta", "im_Phi_i_theta"],
                         [[t, z.real, z.imag] for t, z in zip(x, v)], {"quadruple": list(q.as_tuple())})
        v = np.real(laplace_exponent(q, x))
        return Table("exponent", ["z", "Phi"], [[t, z] for t, z in zip(x, v)], {"quadruple": list(q.as_tuple())})
    p = _params(a)
    meta = {"plus": list(p.plus.as_tuple()), "minus": list(p.minus.as_tuple())}
    if a.laplace:
        v = np.real(laplace_exponent_psi(p, x))
        return Table("exponent", ["z", "psi"], [[t, z] for t, z in zip(x, v)], meta)
    v = np.asarray(characteristic_exponent(p, x), dtype=complex)
    return Table("exponent", ["theta", "re_Psi", "im_Psi"], [[t, z.real, z.imag] for t, z in zip(x, v)], meta)


def cmd_density(a):
    x = _grid(a)
    if a.kind in ("levy", "potential"):
        if a.quad is None:
            raise UsageError("--quad is required for the subordinator densities")
        q = _quad(a.quad)
        fn = levy_density if a.kind == "levy" else potential_density
        v = np.asarray(fn(q, x), dtype=float)
        return Table("density", ["x", a.kind], [[t, z] for t, z in zip(x, v)], {"quadruple": list(q.as_tuple())})
    p = _params(a)
    v = np.asarray(levy_density_two_sided(p, x), dtype=float)
    return Table("density", ["x", "two_sided"], [[t, z] for t, z in zip(x, v)],
                 {"plus": list(p.plus.as_tuple()), "minus": list(p.minus.as_tuple())})


def cmd_mellin(a):
    y = _grid(a)
    p = _params(a)
    spec = MellinSpec(p, a.c)
    lo, hi = spec.strip
    x = 0.5 * (lo + hi) if a.x is None else a.x
    v = np.asarray(mellin(spec, x + 1j * y), dtype=complex)
    return Table("mellin", ["x", "y", "re_M", "im_M", "abs_M"], [[x, t, z.real, z.imag, abs(z)] for t, z in zip(y, v)],
                 {"c": a.c, "strip": [lo, hi], "decay_rate": spec.decay_rate})


def _law(fn, z):
    v = fn(z)
    if isinstance(v, Degenerate):
        return [v.kind] * len(z)
    return [float(t) for t in np.atleast_1d(np.real(v))]


def cmd_ricochet(a):
    rp = RicochetParameters(a.alpha, a.rho, a.p)
    sb = sigma_b(rp)
    wh = wiener_hopf_condition(rp)
    f = wh_quadruples(rp)
    doc = {"command": "ricochet", "alpha": rp.alpha, "rho": rp.rho, "p": rp.p, "sigma": sb.sigma, "b": sb.b,
           "wiener_hopf": {"holds": wh.holds, "interval_form": wh.interval_form, "sine_form": wh.sine_form,
                           "disagreement": wh.disagreement},
           "factors": {"prefactor": f.prefactor, "plus": _class_doc(f.plus), "minus": _class_doc(f.minus)},
           "classification": pssmp_classification(rp).value if rp.p == 1.0 else None}
    if a.z_grid is not None:
        z = _grid(a, "z_grid")
        if not wh.holds:
            raise ParameterError("extrema laws need the Wiener-Hopf condition")
        sup, inf = _law(lambda t: sup_law_laplace(rp, t), z), _law(lambda t: inf_law_laplace(rp, t), z)
        if a.output == "csv":
            return Table("ricochet", ["z", "sup_law", "inf_law"], [list(r) for r in zip(z, sup, inf)])
        doc["laws"] = [{"z": t, "sup": s, "inf": i} for t, s, i in zip(z, sup, inf)]
    return doc


def cmd_glued(a):
    gp = GluedParameters(a.alpha, a.q)
    f1, f2 = glued_factors(gp)
    doc = {"command": "glued", "alpha": gp.alpha, "q": gp.q, "gamma_glue": gp.gamma_glue,
           "factors": {"ascending": _class_doc(f1), "descending": _class_doc(f2)}}
    if a.grid is not None:
        th = _grid(a)
        v = np.asarray(glued_exponent(gp, th), dtype=complex)
        if a.output == "csv":
            return Table("glued", ["theta", "re_Psi", "im_Psi"], [[t, z.real, z.imag] for t, z in zip(th, v)])
        doc["exponent"] = [{"theta": t, "re": z.real, "im": z.imag} for t, z in zip(th, v)]
    if a.z_grid is not None:
        z = _grid(a, "z_grid")
        doc["laws"] = [{"z": t, "sup": float(s), "inf": float(i)} for t, s, i in
                       zip(z, np.atleast_1d(glued_sup_law_laplace(gp, z)), np.atleast_1d(glued_inf_law_laplace(gp, z)))]
    return doc


def cmd_rssmp(a):
    if a.phase_scan:
        if a.p_grid is None or a.phat_grid is None:
            raise UsageError("--phase-scan needs --p-grid and --phat-grid")
        pg, hg = Grid.parse(a.p_grid).values(), Grid.parse(a.phat_grid).values()
        labels = phase_scan(a.alpha, a.rho, pg, hg)
        rows = []
        for i, p in enumerate(pg):
            for j, h in enumerate(hg):
                rows.append([p, h, chi_prime_zero(RssmpParameters(a.alpha, a.rho, float(p), float(h))), labels[i, j]])
        return Table("rssmp", ["p", "phat", "chi_prime_zero", "phase"], rows, {"alpha": a.alpha, "rho": a.rho})
    if a.p is None or a.phat is None:
        raise UsageError("--p and --phat are required (or use --phase-scan)")
    rs = RssmpParameters(a.alpha, a.rho, a.p, a.phat)
    forms = hits_zero_forms(rs)
    return {"command": "rssmp", "alpha": rs.alpha, "rho": rs.rho, "p": rs.p, "phat": rs.phat,
            "chi_prime_zero": chi_prime_zero(rs), "hits_zero": forms.numerator_form,
            "hits_zero_sine_form": forms.sine_form, "forms_disagree": forms.disagreement,
            "phase": classify_phase(rs).value}


def _est(e, target=None) -> dict:
    d = {"mean": e.mean, "std_error": e.std_error, "n": e.n, "truncated_fraction": e.truncated_fraction,
         "target": target, "z_score": None if target is None else e.z_score(target)}
    return d


def cmd_simulate(a):
    kw = {"seed": a.seed, "n_paths": a.n_paths, "dt": a.dt, "x0": a.x0, "workers": a.workers}
    if a.t_max is not None:
        kw["t_max"] = a.t_max
    if a.lamperti_max is not None:
        kw["lamperti_max"] = a.lamperti_max
    cfg = SimulationConfig(**kw)
    z = _floats(a.z) if a.z else []
    out = {"command": "simulate", "process": a.process, "seed": cfg.seed, "n_paths": cfg.n_paths, "dt": cfg.dt,
           "t_max": cfg.t_max, "lamperti_max": cfg.lamperti_max, "x0": cfg.x0}
    sup_t = inf_t = lambda t: None
    if a.process == "ricochet":
        if a.p is None:
            raise UsageError("--p is required for the ricochet process")
        rp = RicochetParameters(a.alpha, a.rho, a.p)
        out["parameters"] = {"alpha": rp.alpha, "rho": rp.rho, "p": rp.p}
        rec = simulate_ricochet(rp, cfg)
        if wiener_hopf_condition(rp).holds:
            sup_t = lambda t: _scalar(sup_law_laplace(rp, t))
            inf_t = lambda t: _scalar(inf_law_laplace(rp, t))
        out["survival"] = _est(estimate_survival_rate(rec), rp.p)
        if a.s is not None:
            try:
                target = float(np.real(t0_mellin(rp, a.s)))
            except (ParameterError, DomainError):
                target = None
            out["mellin_t0"] = {"s": a.s, **_est(estimate_mellin_t0(rp, a.s, cfg, rec), target)}
    elif a.process == "glued":
        if a.q is None:
            raise UsageError("--q is required for the glued process")
        gp = GluedParameters(a.alpha, a.q)
        out["parameters"] = {"alpha": gp.alpha, "q": gp.q}
        rec = simulate_glued(gp, cfg)
        sup_t = lambda t: float(glued_sup_law_laplace(gp, t))
        inf_t = lambda t: float(glued_inf_law_laplace(gp, t))
        out["survival"] = _est(estimate_survival_rate(rec), gp.q)
    else:
        if a.p is None or a.phat is None:
            raise UsageError("--p and --phat are required for the real-valued process")
        rs = RssmpParameters(a.alpha, a.rho, a.p, a.phat)
        out["parameters"] = {"alpha": rs.alpha, "rho": rs.rho, "p": rs.p, "phat": rs.phat}
        rec = simulate_rssmp(rs, cfg)
        out["log_drift"] = _est(estimate_log_drift(rec, cfg.x0), chi_prime_zero(rs))
    if a.process != "rssmp":
        out["absorbed_fraction"] = float(np.mean(rec.absorbed))
    out["truncated_fraction"] = float(np.mean(rec.truncated))
    out["sup_law"] = [{"z": t, **_est(estimate_sup_laplace(rec, t, cfg.x0), sup_t(t))} for t in z]
    if a.process != "rssmp":
        out["inf_law"] = [{"z": t, **_est(estimate_inf_laplace(rec, t, cfg.x0), inf_t(t))} for t in z]
    return out


def _scalar(v):
    return None if isinstance(v, Degenerate) else float(np.real(v))


def cmd_selftest(a):
    only = _ints(a.only) if a.only else None
    if only and any(k not in acceptance.CRITERIA for k in only):
        raise UsageError(f"criteria are numbered 1..{len(acceptance.CRITERIA)}")
    results = acceptance.run_all(a.level, only, a.workers)
    if a.output == "json":
        text = acceptance.report_json(results, a.timings)
        validate_document(json.loads(text), "selftest")
        text += "\n"
    else:
        lines = [r.line(a.timings) for r in results]
        n_pass = sum(r.passed for r in results)
        lines.append(f"{n_pass}/{len(results)} criteria passed")
        text = "\n".join(lines) + "\n"
    return _Raw(text, EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST)


@dataclass
class _Raw:
    text: str
    code: int


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file of defaults, overridden by flags")
    common.add_argument("--output", choices=("csv", "json"), default=None)
    common.add_argument("--output-path", help="write here instead of stdout")
    common.add_argument("--seed", type=str, default=None, help=f"64-bit seed (default ${SEED_ENV} or built-in)")

    def grid_args(p, name="--grid", required=False, what="evaluation grid"):
        p.add_argument(name, required=required, help=f"{what} as min:max:steps (write --grid=-1:1:5 for a negative start)")
        if not any(o.dest == "log" for o in p._actions):
            p.add_argument("--log", action="store_true", help="log-spaced grid")

    def dhg_args(p):
        p.add_argument("--plus", help="ascending quadruple a,b,g,d")
        p.add_argument("--minus", help="descending quadruple a,b,g,d")

    top = _Parser(prog="dhglevy", description="Double hypergeometric Levy processes and ricocheted stable processes.")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="classify a quadruple")
    p.add_argument("--quad", required=True)
    p.set_defaults(func=cmd_validate, default_output="json")

    p = sub.add_parser("exponent", parents=[common], help="Phi, Psi or psi on a grid")
    p.add_argument("--quad", help="subordinator quadruple (Phi)")
    dhg_args(p)
    p.add_argument("--laplace", action="store_true", help="psi(z) instead of Psi(theta)")
    p.add_argument("--imaginary", action="store_true", help="Phi(i theta) instead of Phi(z)")
    grid_args(p, required=True)
    p.set_defaults(func=cmd_exponent, default_output="csv")

    p = sub.add_parser("density", parents=[common], help="Levy, potential or two-sided density on a grid")
    p.add_argument("--kind", choices=("levy", "potential", "two-sided"), default="levy")
    p.add_argument("--quad")
    dhg_args(p)
    grid_args(p, required=True)
    p.set_defaults(func=cmd_density, default_output="csv")

    p = sub.add_parser("mellin", parents=[common], help="Mellin transform of the exponential functional")
    dhg_args(p)
    p.add_argument("--c", type=float, default=1.0, help="time scaling")
    p.add_argument("--x", type=float, default=None, help="real part (default mid-strip)")
    grid_args(p, required=True, what="imaginary parts")
    p.set_defaults(func=cmd_mellin, default_output="csv")

    p = sub.add_parser("ricochet", parents=[common], help="ricocheted stable process report")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    grid_args(p, "--z-grid", what="Laplace variables of the extrema laws")
    p.set_defaults(func=cmd_ricochet, default_output="json")

    p = sub.add_parser("glued", parents=[common], help="glued stable process report")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    grid_args(p, what="theta grid of the exponent")
    grid_args(p, "--z-grid", what="Laplace variables of the extrema laws")
    p.set_defaults(func=cmd_glued, default_output="json")

    p = sub.add_parser("rssmp", parents=[common], help="real-valued ricocheted process")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--phat", type=float)
    p.add_argument("--phase-scan", action="store_true")
    p.add_argument("--p-grid")
    p.add_argument("--phat-grid")
    p.set_defaults(func=cmd_rssmp, default_output="json")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates with standard errors")
    p.add_argument("--process", choices=("ricochet", "glued", "rssmp"), required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--p", type=float)
    p.add_argument("--phat", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--n-paths", type=int, default=10_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-max", type=float)
    p.add_argument("--lamperti-max", type=float)
    p.add_argument("--x0", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None, help="threads (does not change results)")
    p.add_argument("--z", default="0.5,1,2", help="comma-separated Laplace variables")
    p.add_argument("--s", type=float, default=None, help="Mellin moment E[T0^(s-1)] (ricochet only)")
    p.set_defaults(func=cmd_simulate, default_output="json")

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance suites")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timings", action="store_true", help="include run times (breaks byte identity)")
    p.set_defaults(func=cmd_selftest, default_output="text")
    return top


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((t for t in argv if t in choices), None)
    if not known.config or command is None:
        return parser.parse_args(argv)
    cfg = read_config(known.config)
    sub = choices[command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    unknown = sorted(set(cfg) - set(actions))
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    defaults = {}
    for key, raw in cfg.items():
        act = actions[key]
        if act.nargs == 0:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key} expects a boolean")
            defaults[key] = low in ("true", "1", "yes")
        else:
            try:
                defaults[key] = act.type(raw) if act.type else raw
            except ValueError:
                raise UsageError(f"config key {key}: bad value {raw!r}") from None
            if act.choices is not None and defaults[key] not in act.choices:
                raise UsageError(f"config key {key} must be one of {', '.join(map(str, act.choices))}")
        act.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _error(kind: str, message: str, code: int) -> int:
    doc = {"error": kind, "message": message, "exit_code": code}
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
    return code


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        try:
            a = _apply_config(parser, argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        a.seed = _seed(a.seed) if a.seed is not None else _seed(str(default_seed()))
        if a.output is None:
            a.output = a.default_output
        if a.func is cmd_selftest and a.output == "csv":
            raise UsageError("selftest writes text (default) or json")
        result = a.func(a)
        if isinstance(result, _Raw):
            text, code = result.text, result.code
        else:
            text, code = render(result, a.output), EXIT_OK
        if a.output_path:
            with open(a.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
            sys.stdout.flush()
        return code
    except UsageError as exc:
        return _error("UsageError", str(exc), EXIT_USAGE)
    except (ParameterError, DomainError) as exc:
        return _error(type(exc).__name__, str(exc), EXIT_PARAMETER)
    except ConvergenceError as exc:
        return _error("ConvergenceError", str(exc), EXIT_CONVERGENCE)


def main() -> None:
    sys.exit(run())
