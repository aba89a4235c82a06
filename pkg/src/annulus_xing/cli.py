"""Command-line interface.

    annulus-xing exact --tau 0.5 --tau 1.0
    annulus-xing roots --n-roots 4
    annulus-xing verify
    annulus-xing simulate --tau 0.25 --mesh 64 --trials 20000 --seed 1
    annulus-xing compare --tau 0.25 --mesh 128 --trials 200000 --events B,BW

Exit status: 0 when every requested check passes, 1 when a check fails,
2 for bad arguments, 3 when a series, root or quadrature fails to converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import formulas, verifier
from .exceptions import AnnulusXingError, DomainError
from .formulas import SeriesValue
from .roots import defining_residual, root_set
from .percolation.estimate import (CSV_COLUMNS, EVENTS, estimate_events, estimate_row,
                                   exact_value)
from .percolation.lattice import GEOMETRIES, build_lattice

COMMANDS = ("exact", "roots", "verify", "simulate", "compare")
CHANNEL_CHOICES = ("eta", "closed", "open", "auto")
FORMATS = ("csv", "json", "pretty")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# below this tau the one-interface closed series is slow, so auto uses open
ONE_INTERFACE_SWITCH = 0.5
# every eta factor is truncated at relative error 1e-16 and p_B, p_BW use at most four
ETA_REL_TAIL = 4e-16

QUAD_X = (0.25, 0.5, 1.0, 2.0, 4.0)
BACKBONE_X = (0.5, 1.0, 2.0)
DUALITY = {
    "p_B": ((0.1, 3.0), 1e-10),
    "p_BW": ((0.1, 3.0), 1e-10),
    "p_BB": ((0.3, 2.0), 1e-8),
    "p_one_interface": ((0.3, 2.0), 1e-8),
}
DEFAULT_ALLOWANCE = {"B": 0.01, "BW": 0.01, "BB": 0.02}


@dataclass
class RunConfig:
    command: str
    tau_list: list = field(default_factory=list)
    channel: str = "auto"
    n_roots: int = 12
    j_max: int = 8
    mesh_n: int = 64
    trials: int = 10_000
    seed: int = 0
    tol: float | None = None
    output_format: str = "csv"
    out: str | None = None
    geometry: str = "cylinder"
    events: tuple = EVENTS
    x_list: list = field(default_factory=list)

    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        for t in self.tau_list:
            if not (t > 0 and math.isfinite(t)):
                raise DomainError(f"tau must be positive, got {t}")
        for name in ("n_roots", "j_max", "mesh_n", "trials"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name.replace('_', '-')} must be positive")
        if self.tol is not None and not self.tol > 0:
            raise DomainError("tol must be positive")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 unsigned bits")
        if self.command in ("exact", "simulate", "compare") and not self.tau_list:
            raise DomainError(f"{self.command} needs at least one --tau")
        if self.command == "roots" and self.n_roots < 2:
            raise DomainError("n-roots must be at least 2")
        for e in self.events:
            if e not in EVENTS:
                raise DomainError(f"event must be one of {EVENTS}, got {e!r}")


# ----------------------------------------------------------------------------
# formatting


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(f"{v:.12g}") if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(rows, columns, fmt) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        return "".join(json.dumps({c: _jsonable(r.get(c)) for c in columns}) + "\n" for r in rows)
    cells = [list(columns)] + [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(s.rjust(wd) for s, wd in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * wd for wd in widths))
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# commands


EXACT_COLUMNS = ("tau", "p_B", "p_BW", "p_BB", "p_one_interface", "channel",
                 "tail_B", "tail_BW", "tail_BB", "tail_one_interface")


def _channels_for(tau, channel):
    if channel == "auto":
        return ("eta", "eta", "closed" if tau >= formulas.BB_CHANNEL_SWITCH else "open",
                "closed" if tau >= ONE_INTERFACE_SWITCH else "open")
    if channel == "eta":
        auto = _channels_for(tau, "auto")
        return ("eta", "eta") + auto[2:]
    return (channel,) * 4


def _eta_value(fn, tau):
    v = fn(tau)
    return SeriesValue(v, ETA_REL_TAIL * abs(v), 0)


def cmd_exact(cfg: RunConfig):
    S = formulas.default_root_set(cfg.n_roots)
    rows = []
    for tau in cfg.tau_list:
        ch = _channels_for(tau, cfg.channel)
        vals = [
            _eta_value(formulas.p_b_eta, tau) if ch[0] == "eta" else formulas.p_b_series(tau, ch[0]),
            _eta_value(formulas.p_bw_eta, tau) if ch[1] == "eta" else formulas.p_bw_series(tau, ch[1]),
            formulas.p_bb_closed(tau, S) if ch[2] == "closed" else formulas.p_bb_open(tau, cfg.j_max),
            formulas.p_one_interface(tau, ch[3]),
        ]
        row = {"tau": tau, "channel": ";".join(ch)}
        for key, v in zip(("B", "BW", "BB", "one_interface"), vals):
            row[f"p_{key}"] = v.value
            row[f"tail_{key}"] = v.tail_bound
        rows.append(row)
    return rows, EXACT_COLUMNS, True


ROOT_COLUMNS = ("index", "n", "re_s", "im_s", "residue_re", "residue_im", "a", "b", "residual")


def cmd_roots(cfg: RunConfig):
    S = root_set(cfg.n_roots)
    rows = []
    for i, (s, (a, b), n) in enumerate(zip(S.roots, S.ab_pairs, S.n_index)):
        c = formulas.residue_coefficient(s)
        rows.append({"index": i, "n": 1 if n == "real root" else n, "re_s": s.real, "im_s": s.imag,
                     "residue_re": c.real, "residue_im": c.imag, "a": a, "b": b,
                     "residual": defining_residual(s)})
    ok = all(r["residual"] < 1e-10 for r in rows)
    return rows, ROOT_COLUMNS, ok


VERIFY_COLUMNS = ("check", "identity", "x", "lhs", "rhs", "residual", "tol", "passed",
                  "nodes_used", "truncation_tau")


def cmd_verify(cfg: RunConfig):
    qtol = cfg.tol if cfg.tol is not None else 1e-6
    xs = cfg.x_list or None
    rows = []
    for which in ("one_arm", "poly_two_arm", "backbone"):
        for x in xs or (BACKBONE_X if which == "backbone" else QUAD_X):
            rep = (verifier.verify_backbone_identity(x) if which == "backbone"
                   else verifier.verify_eta_identity(which, x))
            rows.append({"check": "quadrature", "identity": which, "x": x, "lhs": rep.lhs,
                         "rhs": rep.rhs, "residual": rep.residual, "tol": qtol,
                         "passed": rep.residual < qtol, "nodes_used": rep.nodes_used,
                         "truncation_tau": rep.truncation_tau})
    for formula, ((lo, hi), dtol) in DUALITY.items():
        grid = cfg.tau_list or list(np.linspace(lo, hi, 20))
        res = verifier.duality_sweep(formula, grid)
        rows.append({"check": "duality", "identity": formula, "x": None, "lhs": None, "rhs": None,
                     "residual": res, "tol": dtol, "passed": res < dtol, "nodes_used": len(grid),
                     "truncation_tau": None})
    return rows, VERIFY_COLUMNS, all(r["passed"] for r in rows)


def _estimates(cfg, tau):
    lat = build_lattice(tau, cfg.mesh_n, cfg.geometry)
    return estimate_events(cfg.events, tau, cfg.mesh_n, cfg.trials, cfg.seed, lattice=lat)


def cmd_simulate(cfg: RunConfig):
    rows = []
    for tau in cfg.tau_list:
        rows += [estimate_row(e) for e in _estimates(cfg, tau)]
    return rows, CSV_COLUMNS, True


COMPARE_COLUMNS = ("tau", "event", "n", "trials", "exact", "p_hat", "ci_low", "ci_high",
                   "stderr", "abs_err", "allowance", "passed")


def cmd_compare(cfg: RunConfig):
    rows = []
    for tau in cfg.tau_list:
        for e in _estimates(cfg, tau):
            exact = exact_value(e.event, tau)
            allowance = cfg.tol if cfg.tol is not None else DEFAULT_ALLOWANCE[e.event]
            err = abs(e.p_hat - exact)
            rows.append({"tau": tau, "event": e.event, "n": e.n, "trials": e.trials,
                         "exact": exact, "p_hat": e.p_hat, "ci_low": e.ci_low,
                         "ci_high": e.ci_high, "stderr": e.stderr, "abs_err": err,
                         "allowance": allowance, "passed": err <= 3.0 * e.stderr + allowance})
    return rows, COMPARE_COLUMNS, all(r["passed"] for r in rows)


HANDLERS = {"exact": cmd_exact, "roots": cmd_roots, "verify": cmd_verify,
            "simulate": cmd_simulate, "compare": cmd_compare}


# ----------------------------------------------------------------------------
# argument parsing


def _events(text):
    return tuple(e.strip() for e in text.split(",") if e.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tau", type=float, action="append", default=[], dest="tau_list",
                        help="annulus modulus; repeat for several values")
    common.add_argument("--channel", choices=CHANNEL_CHOICES, default="auto")
    common.add_argument("--n-roots", type=int, default=12,
                        help="real root plus conjugate pairs of branches 2..N")
    common.add_argument("--j-max", type=int, default=8, help="open-channel p_BB order")
    common.add_argument("--mesh", type=int, default=64, dest="mesh_n",
                        help="mesh n: inner radius in lattice units")
    common.add_argument("--trials", type=int, default=10_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None,
                        help="verify: quadrature tolerance; compare: bias allowance")
    common.add_argument("--format", choices=FORMATS, default="csv", dest="output_format")
    common.add_argument("--out", default=None, help="write output to FILE")
    common.add_argument("--geometry", choices=GEOMETRIES, default="cylinder")
    common.add_argument("--events", type=_events, default=EVENTS,
                        help="comma-separated subset of B,BW,BB")
    common.add_argument("--x", type=float, action="append", default=[], dest="x_list",
                        help="verify: Laplace variable; repeat for several values")

    p = argparse.ArgumentParser(prog="annulus-xing",
                                description="Annulus crossing probabilities for critical percolation.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("exact", parents=[common], help="evaluate the exact formulas")
    sub.add_parser("roots", parents=[common], help="solve the closed-channel exponent set")
    sub.add_parser("verify", parents=[common], help="quadrature and duality checks")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo estimates")
    sub.add_parser("compare", parents=[common], help="Monte Carlo against the exact values")
    return p


def config_from_args(ns) -> RunConfig:
    d = vars(ns).copy()
    return RunConfig(**d)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    cfg = config_from_args(ns)
    try:
        cfg.validate()
        rows, columns, ok = HANDLERS[cfg.command](cfg)
    except DomainError as exc:
        print(f"annulus-xing: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AnnulusXingError, ArithmeticError) as exc:
        print(f"annulus-xing: {cfg.command} failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(rows, columns, cfg.output_format)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
