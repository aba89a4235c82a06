"""Quadrature checks of the Laplace-type integral identities.

For each crossing probability f the integral

    int_0^inf exp(-2 pi x^2 tau / 3) f(tau) eta(2 i tau) d tau

has a closed form in x. Evaluating the left side by adaptive quadrature
exercises the probability code along a path independent of the series
manipulations that produced the closed form.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from functools import partial

from scipy import integrate

from .exceptions import DomainError, QuadratureError
from .formulas import (
    BB_CHANNEL_SWITCH,
    default_root_set,
    p_b_eta,
    p_b_series,
    p_bb_closed,
    p_bb_open,
    p_bw_eta,
    p_bw_series,
    p_one_interface,
)
from .special_fn import eta

IDENTITIES = ("one_arm", "poly_two_arm", "backbone")

# truncation error allowed at each end of the tau axis
_END_TOL = 1e-12
_EPSABS = 1e-13
_EPSREL = 1e-11
_LIMIT = 400


@dataclass(frozen=True)
class QuadratureReport:
    identity_id: str
    x: float
    lhs: float
    rhs: float
    residual: float
    nodes_used: int
    truncation_tau: float
    tau_min: float = 0.0
    error_estimate: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)


def rhs_closed_form(which: str, x: float) -> float:
    """Closed-form value of the integral for identity ``which``."""
    if x == 0:
        raise DomainError("closed forms are stated for x != 0")
    x = abs(x)
    px = math.pi * x
    if which == "one_arm":
        return math.sqrt(3.0) * math.tanh(2.0 * px / 3.0) / (4.0 * x * math.cosh(px))
    if which == "poly_two_arm":
        return math.sqrt(3.0) * math.sinh(px / 3.0) ** 2 / (x * math.sinh(px))
    if which == "backbone":
        first = math.sinh(2.0 * px / 3.0) * math.sinh(px) / (math.sinh(4.0 * px / 3.0) + math.sqrt(3.0) / 2.0 * x)
        return math.sqrt(3.0) / x * (first - math.sinh(px / 3.0))
    raise ValueError(f"unknown identity {which!r}")


def backbone_rhs_at_zero() -> float:
    """x -> 0 limit of the backbone closed form."""
    return math.sqrt(3.0) * (2.0 * math.pi**2 / 3.0 / (4.0 * math.pi / 3.0 + math.sqrt(3.0) / 2.0) - math.pi / 3.0)


def _tau_min():
    # for small tau every integrand is at most (2 tau)^(-1/2) exp(-pi/(24 tau)),
    # increasing in tau, so int_0^t is at most t times its value at t
    lo, hi = 1e-6, 1.0
    bound = lambda t: t * math.exp(-math.pi / (24.0 * t)) / math.sqrt(2.0 * t)  # noqa: E731
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bound(mid) < _END_TOL:
            lo = mid
        else:
            hi = mid
    return lo


def _tau_max(x):
    # f <= 1 and eta(2 i tau) <= exp(-pi tau / 6)
    rate = 2.0 * math.pi * x * x / 3.0 + math.pi / 6.0
    return max(2.0, math.log(1.0 / (_END_TOL * rate)) / rate)


def _one_arm_factor(tau):
    return 1.0 - p_b_eta(tau)


def _bb_factor(tau):
    if tau < BB_CHANNEL_SWITCH:
        return p_bb_open(tau).value
    return p_bb_closed(tau, default_root_set()).value


def _integrand(factor, x, tau):
    return math.exp(-2.0 * math.pi * x * x * tau / 3.0) * factor(tau) * eta(2.0 * tau)


def _integrate(fn, breaks, epsabs=_EPSABS, epsrel=_EPSREL):
    total = 0.0
    err = 0.0
    nodes = 0
    for a, b in zip(breaks[:-1], breaks[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e, info = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel,
                                          limit=_LIMIT, full_output=1)[:3]
        nodes += info["neval"]
        if info.get("last", 0) >= _LIMIT or e > max(10 * epsabs, 10 * epsrel * abs(val)):
            raise QuadratureError(f"quadrature on [{a}, {b}] stalled: estimate {e:.2e}")
        total += val
        err += e
    return total, err, nodes


def _report(which, x, factor, breaks_inner, epsabs=_EPSABS):
    if x == 0:
        raise DomainError("x must be nonzero")
    lo, hi = _tau_min(), _tau_max(x)
    breaks = [lo] + [b for b in breaks_inner if lo < b < hi] + [hi]
    lhs, err, nodes = _integrate(partial(_integrand, factor, x), breaks, epsabs=epsabs)
    rhs = rhs_closed_form(which, x)
    return QuadratureReport(which, float(x), lhs, rhs, abs(lhs - rhs), nodes, hi, lo, err)


def verify_eta_identity(which: str, x: float, epsabs: float = _EPSABS) -> QuadratureReport:
    """Quadrature check for the one-arm or polychromatic identity."""
    if which == "one_arm":
        factor = _one_arm_factor
    elif which == "poly_two_arm":
        factor = p_bw_eta
    else:
        raise ValueError(f"which must be 'one_arm' or 'poly_two_arm', got {which!r}")
    return _report(which, x, factor, [1.0], epsabs)


def verify_backbone_identity(x: float, epsabs: float = _EPSABS) -> QuadratureReport:
    """Quadrature check for the monochromatic two-arm identity.

    The integrand switches from the open to the closed channel at
    tau = 0.8; the two are required to agree there to 1e-8.
    """
    seam = abs(p_bb_open(BB_CHANNEL_SWITCH).value - p_bb_closed(BB_CHANNEL_SWITCH).value)
    if seam >= 1e-8:
        raise AssertionError(f"p_BB channels disagree at the seam by {seam:.3e}")
    return _report("backbone", x, _bb_factor, [BB_CHANNEL_SWITCH, 1.0], epsabs)


def _pair(formula):
    if formula == "p_B":
        return (lambda t: p_b_series(t, "closed").value, lambda t: p_b_series(t, "open").value)
    if formula == "p_BW":
        return (lambda t: p_bw_series(t, "closed").value, lambda t: p_bw_series(t, "open").value)
    if formula == "p_BB":
        return (lambda t: p_bb_closed(t, default_root_set(12)).value,
                lambda t: p_bb_open(t, j_max=8).value)
    if formula == "p_one_interface":
        return (lambda t: p_one_interface(t, "closed").value, lambda t: p_one_interface(t, "open").value)
    raise ValueError(f"unknown formula {formula!r}")


FORMULAS = ("p_B", "p_BW", "p_BB", "p_one_interface")


def duality_sweep(formula: str, tau_grid) -> float:
    """max over the grid of |closed channel - open channel|."""
    closed, opened = _pair(formula)
    return max(abs(closed(t) - opened(t)) for t in tau_grid)


def eta_form_sweep(formula: str, tau_grid) -> float:
    """max over the grid of |eta quotient - closed/open series| for p_B or p_BW."""
    if formula == "p_B":
        exact, series = p_b_eta, p_b_series
    elif formula == "p_BW":
        exact, series = p_bw_eta, p_bw_series
    else:
        raise ValueError(f"eta form exists only for p_B and p_BW, got {formula!r}")
    return max(abs(exact(t) - series(t, ch).value) for t in tau_grid for ch in ("closed", "open"))
