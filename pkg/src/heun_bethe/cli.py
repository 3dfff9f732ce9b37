"""Command-line front end: ``heun <command> [flags]``.

Every command writes one JSON document ``{"command", "inputs", "outputs",
"diagnostics"}`` (or CSV for path and grid tables).  Exit codes: 0 success,
1 computation error or failed verification, 2 invalid flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, HeunError


class FlagError(Exception):
    """Invalid or inconsistent command-line flags (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    l: Optional[tuple] = None
    tau: Optional[complex] = None
    p: Optional[complex] = None
    energy: Optional[complex] = None
    m: Optional[int] = None
    order: Optional[int] = None
    suite: Optional[str] = None
    tol: float = 1e-12
    seed: int = 0
    output: Optional[str] = None
    fmt: str = "json"
    compare: bool = False

    def inputs(self) -> dict:
        out = {}
        for k in ("l", "tau", "p", "energy", "m", "order", "suite", "tol", "seed"):
            v = getattr(self, k)
            if v is not None:
                out[k] = list(v) if k == "l" else v
        return out


# ---------------------------------------------------------------------------
# number formatting


def num(v):
    """JSON-ready value with 15 significant digits; complex as ``[re, im]``."""
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else num(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return [num(float(v.real)), num(float(v.imag))]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return None
        r = float(f"{v:.15g}")
        return 0.0 if r == 0 else r
    if isinstance(v, dict):
        return {str(k): num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [num(x) for x in v]
    return str(v)


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``bi``, ``a`` (``j`` also accepted)."""
    s = str(text).strip().replace(" ", "").replace("I", "i").replace("j", "i")
    if s.endswith("i"):
        body = s[:-1]
        if body in ("", "+", "-") or body[-1] in "+-":
            s = body + "1i"
        s = s.replace("i", "j")
    try:
        return complex(s)
    except ValueError as exc:
        raise FlagError(f"cannot parse complex number {text!r}") from exc


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heun", description="Finite-gap spectra of the elliptic Heun operator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, couplings=True, lattice=False):
        if couplings:
            p.add_argument("--l", help="couplings l0,l1,l2,l3")
            p.add_argument("--l0", type=int)
            p.add_argument("--l1", type=int)
        if lattice:
            p.add_argument("--tau", help="modulus as a+bi")
            p.add_argument("--p", help="nome p = exp(2 pi i tau)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--output", help="write to this file instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    common(sub.add_parser("scheme", help="Riemann scheme"), lattice=True)
    common(sub.add_parser("dim", help="dimension of the invariant space"))
    common(sub.add_parser("qpoly", help="spectral polynomial Q(E)"), lattice=True)
    common(sub.add_parser("trig-qpoly", help="trigonometric spectral polynomial"))
    b = sub.add_parser("bethe", help="Bethe roots at an energy")
    common(b, lattice=True)
    b.add_argument("--energy", required=True)
    tb = sub.add_parser("trig-bethe", help="trigonometric Bethe roots")
    common(tb)
    tb.add_argument("--m", type=int, required=True)
    common(sub.add_parser("spectrum", help="Q roots against matrix eigenvalues"), lattice=True)
    co = sub.add_parser("continue", help="continue E_m(p) from the trigonometric point")
    common(co)
    co.add_argument("--m", type=int, required=True)
    co.add_argument("--p", required=True)
    pe = sub.add_parser("perturb", help="perturbation series in the nome")
    common(pe)
    pe.add_argument("--m", type=int, required=True)
    pe.add_argument("--order", type=int, required=True)
    pe.add_argument("--compare", action="store_true", help="compare with the continuation")
    v = sub.add_parser("verify", help="run invariant suites")
    common(v, couplings=False)
    v.add_argument("--suite", default="all")
    return ap


def _couplings(ns, two_site: bool = False) -> tuple:
    if getattr(ns, "l", None):
        try:
            l = tuple(int(s) for s in ns.l.split(","))
        except ValueError as exc:
            raise FlagError("--l must be comma separated integers") from exc
        if len(l) > 4:
            raise FlagError("--l takes at most four integers")
        l = l + (0,) * (4 - len(l))
    elif ns.l0 is not None or ns.l1 is not None:
        l = (ns.l0 or 0, ns.l1 or 0, 0, 0)
    else:
        raise FlagError("couplings required (--l or --l0/--l1)")
    if any(v < 0 for v in l):
        raise FlagError("couplings must be non-negative")
    if two_site and (l[2] or l[3]):
        raise FlagError("this command requires l2 = l3 = 0")
    return l


def config_from_args(ns) -> RunConfig:
    cmd = ns.command
    cfg = RunConfig(cmd, seed=ns.seed, tol=ns.tol, output=ns.output, fmt=ns.format)
    if not (1e-14 <= cfg.tol <= 1e-4):
        raise FlagError("--tol must lie in [1e-14, 1e-4]")
    if cmd != "verify":
        cfg.l = _couplings(ns, two_site=cmd in ("trig-qpoly", "trig-bethe", "continue", "perturb"))
    if cmd in ("scheme", "qpoly", "bethe", "spectrum"):
        if (ns.tau is None) == (ns.p is None):
            raise FlagError("exactly one of --tau or --p is required")
        if ns.tau is not None:
            cfg.tau = parse_complex(ns.tau)
            if not cfg.tau.imag > 0:
                raise FlagError("Im(tau) must be positive")
        else:
            cfg.p = parse_complex(ns.p)
            if not 0 < abs(cfg.p) < 1:
                raise FlagError("the nome must satisfy 0 < |p| < 1")
    if cmd == "continue":
        cfg.p = parse_complex(ns.p)
        if cfg.p.imag != 0 or not 0 <= cfg.p.real <= 0.05:
            raise FlagError("--p must be real in [0, 0.05]")
        cfg.p = cfg.p.real
    if cmd == "bethe":
        cfg.energy = parse_complex(ns.energy)
    if cmd in ("trig-bethe", "continue", "perturb"):
        if ns.m < 0:
            raise FlagError("--m must be non-negative")
        cfg.m = ns.m
    if cmd == "perturb":
        if not 0 <= ns.order <= 50:
            raise FlagError("--order must lie in 0..50")
        cfg.order = ns.order
        cfg.compare = ns.compare
    if cmd == "verify":
        from .verify import SUITES

        if ns.suite != "all" and ns.suite not in SUITES:
            raise FlagError(f"unknown suite {ns.suite!r}; choose from all, {', '.join(SUITES)}")
        cfg.suite = ns.suite
    if cfg.fmt == "csv" and cmd not in ("continue", "perturb"):
        raise FlagError("csv output is available for continue and perturb only")
    return cfg


# ---------------------------------------------------------------------------
# commands


def _lattice(cfg: RunConfig):
    from .elliptic import Lattice

    return Lattice.normalized(cfg.tau) if cfg.tau is not None else Lattice.from_nome(cfg.p)


def cmd_scheme(cfg):
    from .elliptic import lattice_constants
    from .heun_bridge import Couplings, riemann_scheme, to_heun_parameters

    c = Couplings(*cfg.l)
    lc = lattice_constants(_lattice(cfg))
    rs = riemann_scheme(c, lc)
    out = {"points": [num(p) if p != "inf" else "inf" for p in rs.points],
           "exponents": [[num(a), num(b)] for a, b in rs.exponents],
           "exponents_exact": [[str(a), str(b)] for a, b in rs.exponents],
           "fuchs_sum": num(rs.fuchs_sum())}
    try:
        hp = to_heun_parameters(c, lc, 0)
        out["heun_at_E0"] = {k: num(getattr(hp, k)) for k in
                             ("alpha", "beta", "gamma", "delta", "epsilon", "q", "t")}
    except HeunError:
        pass
    return out, []


def cmd_dim(cfg):
    from .heun_bridge import Couplings
    from .invariant_space import block_sizes, invariant_dimension, parity_basis

    c = Couplings(*cfg.l)
    return {"dimension": invariant_dimension(c), "blocks": block_sizes(parity_basis(c))}, []


def cmd_qpoly(cfg):
    from .heun_bridge import Couplings
    from .spectral_curve import q_polynomial

    q = q_polynomial(Couplings(*cfg.l), _lattice(cfg))
    return {"degree": q.degree, "g": q.g, "coefficients": num(q.coeffs),
            "roots": num(q.roots())}, list(q.diagnostics)


def cmd_trig_qpoly(cfg):
    from .spectral_curve import trig_q_polynomial

    tq = trig_q_polynomial(cfg.l[0], cfg.l[1])
    return {"degree": tq.degree, "coefficients": num(tq.coeffs), "roots": num(tq.roots()),
            "roots_over_pi2": [str(r) for r in tq.roots_pi2], "C_T_over_pi2": str(tq.C_T)}, []


def cmd_bethe(cfg):
    from .bethe import (bethe_energy, extract_bethe_roots, monodromy_multipliers, newton_refine,
                        theta_exponent)
    from .heun_bridge import Couplings
    from .spectral_curve import q_polynomial, xi_polynomials

    c = Couplings(*cfg.l)
    lat = _lattice(cfg)
    xi = xi_polynomials(c, lat, seed=cfg.seed)
    q = q_polynomial(c, lat, xi=xi)
    s0 = extract_bethe_roots(xi, cfg.energy, lat, q)
    diag = [f"extraction residual {s0.residual_sigma:.3e}"]
    normalized = abs(lat.omega1 - 0.5) <= 1e-15
    s = newton_refine(s0, tol=cfg.tol) if normalized and c.l else s0
    out = {"t": num(s.t), "c": num(s.c), "E": num(bethe_energy(s, "sigma")),
           "residual_sigma": num(s.residual_sigma), "residual_theta": num(s.residual_theta),
           "Q_at_E": num(q(cfg.energy))}
    if normalized:
        out["c_theta"] = num(theta_exponent(s))
        out["E_theta"] = num(bethe_energy(s, "theta"))
    out["monodromy"] = num(monodromy_multipliers(s))
    return out, diag


def cmd_trig_bethe(cfg):
    from .trig_bethe import trig_bethe_state

    st = trig_bethe_state(cfg.l[0], cfg.l[1], cfg.m, tol=max(cfg.tol, 1e-10))
    return {"c": num(st.c), "sigma": num(list(st.sigma)), "sigma_exact": [str(v) for v in st.sigma],
            "T": num(list(st.T)), "E": num(st.E), "residual": num(st.residual)}, []


def cmd_spectrum(cfg):
    from scipy.optimize import linear_sum_assignment

    from .heun_bridge import Couplings
    from .invariant_space import hamiltonian_matrix, parity_basis
    from .spectral_curve import q_polynomial

    c = Couplings(*cfg.l)
    lat = _lattice(cfg)
    roots = np.array(q_polynomial(c, lat).roots(), dtype=complex)
    ev = np.linalg.eigvals(hamiltonian_matrix(parity_basis(c), lat))
    D = np.abs(roots[:, None] - ev[None, :])
    r, k = linear_sum_assignment(D)
    rows = [{"root": num(roots[i]), "eigenvalue": num(ev[j]), "difference": num(D[i, j])}
            for i, j in zip(r, k)]
    return {"rows": rows, "max_difference": num(float(D[r, k].max(initial=0.0)))}, []


def cmd_continue(cfg):
    from .bethe import continue_in_p

    path = continue_in_p(cfg.l[0], cfg.l[1], cfg.m, cfg.p)
    rows = [{"p": num(pt.p), "E": num(pt.E)} for pt in path]
    csv_rows = [["p", "E_re", "E_im"]] + [[num(pt.p), num(pt.E.real), num(pt.E.imag)] for pt in path]
    return {"E_final": num(path[-1].E), "points": rows}, [f"{len(path)} path points"], csv_rows


def cmd_perturb(cfg):
    from .perturbation import compare_series_vs_continuation, rayleigh_schrodinger

    l0, l1 = cfg.l[0], cfg.l[1]
    ser = rayleigh_schrodinger(l0, l1, cfg.m, cfg.order)
    out = {"cutoff": ser.M, "energy_coefficients": num(ser.energy),
           "energy_coefficients_over_pi2": [str(e) for e in ser.energy_pi2],
           "order_residuals": num([ser.order_residual(k) for k in range(cfg.order + 1)])}
    csv_rows = [["k", "E_k", "E_k_over_pi2"]] + [[k, num(e), str(x)] for k, (e, x) in
                                                 enumerate(zip(ser.energy, ser.energy_pi2))]
    if cfg.compare:
        r = compare_series_vs_continuation(l0, l1, cfg.m, cfg.order, [1e-4, 3e-4, 1e-3, 3e-3, 1e-2])
        out["comparison"] = [{k: num(v) for k, v in row.items()} for row in r["rows"]]
        out["slope"] = num(r["slope"])
        csv_rows = [["p", "E_series", "E_continuation_re", "E_continuation_im", "error"]] + [
            [num(row["p"]), num(row["E_series"]), num(row["E_continuation"].real),
             num(row["E_continuation"].imag), num(row["error"])] for row in r["rows"]]
    return out, [], csv_rows


def cmd_verify(cfg):
    from .verify import run_suite

    res = run_suite(cfg.suite, seed=cfg.seed)
    out = {}
    failed = []
    for name, checks in res.items():
        items = []
        for ch in checks:
            d = ch.to_dict()
            if d.get("unit") == "s":
                d.pop("value")  # timings vary between runs
            items.append(num(d))
            if not ch.passed:
                failed.append(f"{name}.{ch.name}")
        out[name] = items
    out["all_passed"] = not failed
    out["failed"] = failed
    return out, []


COMMANDS = {"scheme": cmd_scheme, "dim": cmd_dim, "qpoly": cmd_qpoly, "trig-qpoly": cmd_trig_qpoly,
            "bethe": cmd_bethe, "trig-bethe": cmd_trig_bethe, "spectrum": cmd_spectrum,
            "continue": cmd_continue, "perturb": cmd_perturb, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# output


def _write(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".heun-", suffix=".tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _document(command, inputs, outputs, diagnostics, error=None) -> str:
    doc = {"command": command, "inputs": num(inputs), "outputs": outputs,
           "diagnostics": diagnostics}
    if error is not None:
        doc["error"] = error
    return json.dumps(doc, indent=2) + "\n"


def dispatch(cfg: RunConfig) -> int:
    """Run one command; returns the exit code."""
    try:
        res = COMMANDS[cfg.command](cfg)
    except HeunError as exc:
        _write(_document(cfg.command, cfg.inputs(), None, [], num(exc.to_dict())), cfg.output)
        return 1
    outputs, diag = res[0], res[1]
    if cfg.fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(res[2])
        _write(buf.getvalue(), cfg.output)
    else:
        _write(_document(cfg.command, cfg.inputs(), outputs, diag), cfg.output)
    if cfg.command == "verify" and not outputs["all_passed"]:
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
    except (FlagError, DomainError) as exc:
        err = {"type": "FlagError", "message": str(exc)}
        sys.stdout.write(_document(ns.command, {}, None, [], err))
        return 2
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
