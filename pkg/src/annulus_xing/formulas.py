"""Exact annulus crossing probabilities and the related CLE_6 moments.

Each probability is available in the open channel (nome q = exp(-pi/tau))
and the closed channel (nome qt = exp(-2 pi tau)); p_B and p_BW also have
closed eta-quotient forms. The two channels converge fast in opposite
regimes and agree on their overlap, which the test-suite exploits.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Sequence

from .exceptions import ConvergenceError, DomainError, InsufficientRootsError
from .roots import RootSet, backbone_exponent, root_set, solve_branch
from .special_fn import Modulus, eta, euler_product_with_tail, kac_h, principal_sqrt

SQRT3 = math.sqrt(3.0)
SQRT3_2 = math.sqrt(1.5)
CHANNELS = ("closed", "open")

# below this tau the closed-channel p_BB series needs more roots than the default set
BB_CHANNEL_SWITCH = 0.8

_K_CAP = 100_000


@dataclass(frozen=True)
class SeriesValue:
    """A truncated-series evaluation with its truncation bound."""

    value: float
    tail_bound: float
    terms_used: int

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class CoefficientTable:
    """Open-channel p_BB coefficients as polynomials in 1/tau.

    ``g[d]`` (``h[d]``) is the coefficient of tau^(-d) in g_j (h_j).
    """

    j: int
    g: tuple
    h: tuple

    @staticmethod
    def _eval(coeffs, tau):
        inv = 1.0 / tau
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * inv + c
        return acc

    def g_at(self, tau):
        return self._eval(self.g, tau)

    def h_at(self, tau):
        return self._eval(self.h, tau)

    def g_abs_at(self, tau):
        return self._eval([abs(c) for c in self.g], tau)

    def h_abs_at(self, tau):
        return self._eval([abs(c) for c in self.h], tau)


def _as_modulus(m) -> Modulus:
    return m if isinstance(m, Modulus) else Modulus(m)


def _check_channel(channel):
    if channel not in CHANNELS:
        raise ValueError(f"channel must be one of {CHANNELS}, got {channel!r}")


def _check_tol(tol):
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}")


def _qprod(lnx: float, rtol: float = 1e-17):
    """prod_{n>=1}(1 - x^n) for x = exp(lnx), with relative tail bound."""
    x = math.exp(lnx)
    if x < 1e-300:
        return 1.0, 0.0
    p, rel, _ = euler_product_with_tail(x, rtol)
    return p, rel


def _lattice_sum(lnx: float, families: Sequence, tol: float, bilateral: bool = True):
    """sum over k of sum_f coef_f(k) * x^{E_f(k)} with x = exp(lnx).

    ``families`` holds ``(coef, expo)`` callables of the integer k. The
    exponents must be quadratic with positive leading coefficient and the
    coefficients at most polynomial, so that successive term ratios
    eventually decrease; the tail on each side is then bounded by
    ``t_{K+1} / (1 - rho)`` with rho the largest next-term ratio.

    Returns ``(sum, tail_bound, terms)``.
    """

    def mag(f, k):
        coef, expo = f
        return abs(coef(k)) * math.exp(expo(k) * lnx)

    def side_tail(sign, K):
        t1 = t2 = 0.0
        rho = 0.0
        for f in families:
            e0, e1, e2 = (f[1](sign * (K + i)) for i in (0, 1, 2))
            if not (e2 > e1 > e0):
                return math.inf
            a, b = mag(f, sign * (K + 1)), mag(f, sign * (K + 2))
            t1 += a
            t2 += b
            if a > 0.0:
                rho = max(rho, b / a)
        if t1 == 0.0:
            return 0.0
        if rho >= 1.0:
            return math.inf
        return t1 / (1.0 - rho)

    terms = []
    K = 0
    while True:
        ks = (K,) if K == 0 else ((K, -K) if bilateral else (K,))
        for k in ks:
            for coef, expo in families:
                c = coef(k)
                if c != 0:
                    terms.append(c * math.exp(expo(k) * lnx))
        tail = side_tail(1, K)
        if bilateral:
            tail += side_tail(-1, K)
        if tail < tol:
            n_used = (2 * K + 1) if bilateral else (K + 1)
            return math.fsum(terms), tail, n_used
        K += 1
        if K > _K_CAP:
            raise ConvergenceError(f"series did not reach tol={tol} within {_K_CAP} terms")


def _divide(num, num_tail, lnx_prod, terms) -> SeriesValue:
    p, rel = _qprod(lnx_prod)
    value = num / p
    return SeriesValue(value, num_tail / p + abs(value) * rel, terms)


# ----------------------------------------------------------------------------
# p_B and p_BW


def p_b_eta(m) -> float:
    """One-arm crossing probability from the eta quotient."""
    t = _as_modulus(m).tau
    return SQRT3_2 * eta(6 * t) * eta(1.5 * t) / (eta(2 * t) * eta(3 * t))


def p_bw_eta(m) -> float:
    """Polychromatic two-arm crossing probability from the eta quotient."""
    t = _as_modulus(m).tau
    e2 = eta(2 * t)
    e6 = eta(6 * t)
    return SQRT3 * eta(t) * e6 * e6 / (eta(3 * t) * e2 * e2)


def _h_fam(coef, r_of_k, s_of_k, scale=1.0):
    return (lambda k: coef, lambda k: scale * kac_h(r_of_k(k), s_of_k(k)))


def p_b_series(m, channel: str = "closed", tol: float = 1e-14) -> SeriesValue:
    """One-arm probability from its closed- or open-channel q-series."""
    m = _as_modulus(m)
    _check_channel(channel)
    _check_tol(tol)
    if channel == "closed":
        lnx = -2.0 * math.pi * m.tau
        fams = [
            _h_fam(SQRT3_2, lambda k: 4 * k - 0.5, lambda k: 0, 2.0),
            _h_fam(-SQRT3_2, lambda k: 4 * k + 1.5, lambda k: 0, 2.0),
        ]
        s, tail, n = _lattice_sum(lnx, fams, tol)
        return _divide(s, tail, 2.0 * lnx, n)
    lnx = -math.pi / m.tau
    fams = [
        _h_fam(1.0, lambda k: 1, lambda k: 4 * k + 1),
        _h_fam(-1.0, lambda k: 1, lambda k: 4 * k + 3),
    ]
    s, tail, n = _lattice_sum(lnx, fams, tol)
    return _divide(s, tail, lnx, n)


def p_bw_series(m, channel: str = "closed", tol: float = 1e-14) -> SeriesValue:
    """Polychromatic two-arm probability from a channel q-series."""
    m = _as_modulus(m)
    _check_channel(channel)
    _check_tol(tol)
    if channel == "closed":
        lnx = -2.0 * math.pi * m.tau
        fams = [
            _h_fam(SQRT3, lambda k: 0, lambda k: 6 * k + 1, 2.0),
            _h_fam(-SQRT3, lambda k: 0, lambda k: 6 * k + 2, 2.0),
        ]
        s, tail, n = _lattice_sum(lnx, fams, tol)
        return _divide(s, tail, 2.0 * lnx, n)
    lnx = -math.pi / m.tau
    fams = [
        _h_fam(1.0, lambda k: 1, lambda k: 6 * k + 2),
        _h_fam(1.0, lambda k: 1, lambda k: 6 * k + 4),
        _h_fam(-2.0, lambda k: 1, lambda k: 6 * k + 3),
    ]
    s, tail, n = _lattice_sum(lnx, fams, tol)
    return _divide(s, tail, lnx, n)


# ----------------------------------------------------------------------------
# p_BB, open channel


def _double_factorial(m: int) -> int:
    # (-1)!! = 1 by convention
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def _coeff_poly(j: int, u: int, totals, degree: int):
    buckets = [[] for _ in range(degree + 1)]
    a = SQRT3 * u / 4.0
    b = 12.0 / (math.pi * u * u)
    for t in totals:
        if t < 0:
            continue
        for mm in range(t // 2 + 1):
            n = t - 2 * mm
            for k in range(n // 2 + 1):
                sign = -1.0 if (j + k) % 2 else 1.0
                c = sign * comb(n + mm, mm) * comb(n, 2 * k) * _double_factorial(2 * k - 1)
                buckets[n - k].append(c * a**n * b**k)
    return tuple(math.fsum(bk) for bk in buckets)


@lru_cache(maxsize=None)
def coefficient_table(j: int) -> CoefficientTable:
    """g_j and h_j expanded from their finite (m, n, k) sums."""
    if j < 1:
        raise ValueError(f"j must be >= 1, got {j}")
    g = _coeff_poly(j, 4 * j - 1, (j, j - 1), j)
    h = _coeff_poly(j, 4 * j + 1, (j - 1, j - 2), j - 1)
    return CoefficientTable(j, g, h)


def g_coeff(j: int, tau: float) -> float:
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    return coefficient_table(j).g_at(tau)


def h_coeff(j: int, tau: float) -> float:
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    return coefficient_table(j).h_at(tau)


def _bb_open_terms(m: Modulus, j_max: int, tol: float):
    """Numerator terms (excluding the leading 1) and the tail estimate."""
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    tau = m.tau
    lnq = -math.pi / tau

    def bound(j):
        ct = coefficient_table(j)
        return (ct.g_abs_at(tau) * math.exp(lnq * (2 * j * j - j) / 3.0)
                + ct.h_abs_at(tau) * math.exp(lnq * (2 * j * j + j) / 3.0))

    terms = []
    for j in range(1, j_max + 1):
        ct = coefficient_table(j)
        terms.append(ct.g_at(tau) * math.exp(lnq * (2 * j * j - j) / 3.0))
        terms.append(ct.h_at(tau) * math.exp(lnq * (2 * j * j + j) / 3.0))
        b1 = bound(j + 1)
        if b1 == 0.0:
            return terms, 0.0, j
        rho = bound(j + 2) / b1
        # the next-term magnitude estimates the remainder once terms shrink geometrically
        tail = b1 / (1.0 - rho) if rho < 1.0 else math.inf
        if tail < tol:
            return terms, tail, j
    raise ConvergenceError(
        f"open-channel p_BB at tau={tau} did not reach tol={tol} within j_max={j_max}"
    )


def p_bb_open(m, j_max: int = 8, tol: float = 1e-14) -> SeriesValue:
    """Monochromatic two-arm probability from the open-channel series."""
    m = _as_modulus(m)
    _check_tol(tol)
    terms, tail, used = _bb_open_terms(m, j_max, tol)
    return _divide(math.fsum([1.0] + terms), tail, -math.pi / m.tau, used)


def p_bb_open_deficit(m, j_max: int = 8, tol: float = 1e-14) -> float:
    """1 - p_BB from the open channel without cancellation.

    Both the numerator and prod(1 - q^n) (as its pentagonal series) are
    written as 1 + small terms, and the small terms are summed exactly.
    """
    m = _as_modulus(m)
    terms, _, _ = _bb_open_terms(m, j_max, tol)
    lnq = -math.pi / m.tau
    pent = []
    k = 1
    while True:
        sign = -1.0 if k % 2 else 1.0
        e1 = math.exp(lnq * (3 * k * k - k) / 2.0)
        pent += [sign * e1, sign * math.exp(lnq * (3 * k * k + k) / 2.0)]
        if e1 < 1e-30:
            break
        k += 1
    p, _ = _qprod(lnq)
    return math.fsum(pent + [-t for t in terms]) / p


# ----------------------------------------------------------------------------
# p_BB, closed channel


def residue_coefficient(s: complex) -> complex:
    """Weight of qt^(s - 1/12) in the closed-channel p_BB series."""
    r = principal_sqrt(3.0 * s)
    num = -SQRT3 * cmath.sin(2.0 * math.pi / 3.0 * r) * cmath.sin(math.pi * r)
    den = cmath.cos(4.0 * math.pi / 3.0 * r) + 3.0 * SQRT3 / (8.0 * math.pi)
    return num / den


@lru_cache(maxsize=8)
def default_root_set(n_max: int = 12) -> RootSet:
    return root_set(n_max)


def _pair_magnitude(n, lnqt):
    s, _ = solve_branch(n)
    return 2.0 * abs(residue_coefficient(s)) * math.exp((s.real - 1.0 / 12.0) * lnqt)


def p_bb_closed(m, S: RootSet | None = None, tol: float = 1e-14) -> SeriesValue:
    """Monochromatic two-arm probability from the closed-channel root sum.

    Conjugate pairs are added together; the leftover imaginary part is
    checked against 1e-10 of the value.
    """
    m = _as_modulus(m)
    _check_tol(tol)
    if S is None:
        S = default_root_set()
    lnqt = -2.0 * math.pi * m.tau
    re_terms, im_terms = [], []
    for s in S.roots:
        t = residue_coefficient(s) * cmath.exp((s - 1.0 / 12.0) * lnqt)
        re_terms.append(t.real)
        im_terms.append(t.imag)
    p, rel = _qprod(2.0 * lnqt)
    value = math.fsum(re_terms) / p
    imag = math.fsum(im_terms) / p
    if abs(imag) > 1e-10 * abs(value) + 1e-300:
        raise AssertionError(f"closed-channel sum left imaginary part {imag:.3e} at tau={m.tau}")

    n = S.n_max
    t1 = _pair_magnitude(n + 1, lnqt)
    t2 = _pair_magnitude(n + 2, lnqt)
    rho = t2 / t1 if t1 > 0 else 0.0
    tail = (t1 / (1.0 - rho) if rho < 1.0 else math.inf) / p + abs(value) * rel
    if not tail < tol:
        raise InsufficientRootsError(
            f"closed-channel p_BB at tau={m.tau}: tail bound {tail:.3e} exceeds tol={tol} "
            f"with branches up to n={n}"
        )
    return SeriesValue(value, tail, len(S.roots))


def p_bb(m, channel: str = "auto", j_max: int = 8, tol: float = 1e-14) -> SeriesValue:
    """p_BB in a chosen channel; ``auto`` switches to closed at tau >= 0.8."""
    m = _as_modulus(m)
    if channel == "auto":
        channel = "closed" if m.tau >= BB_CHANNEL_SWITCH else "open"
    _check_channel(channel)
    if channel == "closed":
        return p_bb_closed(m, default_root_set(), tol)
    return p_bb_open(m, j_max, tol)


# ----------------------------------------------------------------------------
# one non-contractible interface


def p_one_interface(m, channel: str = "closed", tol: float = 1e-14) -> SeriesValue:
    """Probability of exactly one non-contractible interface.

    The annulus carries black-white boundary conditions. The closed
    channel sums over odd k >= 1 only.
    """
    m = _as_modulus(m)
    _check_channel(channel)
    _check_tol(tol)
    tau = m.tau
    if channel == "open":
        lnx = -math.pi / tau
        fam = (lambda k: (1.0 if (k - 1) % 2 == 0 else -1.0) * k,
               lambda k: 2.0 / 3.0 * k * k - k + 1.0 / 3.0)
        s, tail, n = _lattice_sum(lnx, [fam], tol)
        return _divide(s, tail, lnx, n)
    lnx = -2.0 * math.pi * tau
    pref = 3.0 * SQRT3 / 4.0

    def coef(k):
        kk = 2 * k + 1
        return pref * (tau * kk * math.sin(0.75 * math.pi * kk) - math.cos(0.75 * math.pi * kk))

    def expo(k):
        kk = 2 * k + 1
        return 3.0 * kk * kk / 16.0 - 1.0 / 12.0

    # |coef| is replaced by its linear majorant so the tail ratio argument applies
    def coef_major(k):
        return pref * (tau * (2 * k + 1) + 1.0)

    s, _, n = _lattice_sum(lnx, [(coef, expo)], tol, bilateral=False)
    _, tail, _ = _lattice_sum(lnx, [(coef_major, expo)], tol, bilateral=False)
    return _divide(s, tail, 2.0 * lnx, n)


def one_interface_leading(m) -> float:
    """(3 sqrt(6)/8)(tau + 1) qt^(5/48), the large-tau leading term."""
    m = _as_modulus(m)
    return 3.0 * math.sqrt(6.0) / 8.0 * (m.tau + 1.0) * m.qt ** (5.0 / 48.0)


# ----------------------------------------------------------------------------
# asymptotics and CLE_6 moments


def asymptotic_bb_ratio(m, j_max: int = 8) -> float:
    """(1 - p_BB) / ((1 + (3 sqrt 3/4)/tau) q^(1/3)); tends to 1 as tau -> 0."""
    m = _as_modulus(m)
    if m.tau > 0.3:
        raise DomainError(f"asymptotic ratio is defined for tau <= 0.3, got {m.tau}")
    # same exponent expression as the j = 1 term, so rounding cancels in the ratio
    lnq = -math.pi / m.tau
    lead = (1.0 + 3.0 * SQRT3 / 4.0 / m.tau) * math.exp(lnq * (2 * 1 * 1 - 1) / 3.0)
    return p_bb_open_deficit(m, j_max) / lead


MOMENT_KINDS = ("one_arm", "touch", "backbone")


def moment_threshold(kind: str) -> float:
    """Largest lambda at which the moment is infinite."""
    if kind == "one_arm":
        return -5.0 / 48.0
    if kind == "touch":
        return -0.25
    if kind == "backbone":
        return -backbone_exponent()
    raise ValueError(f"kind must be one of {MOMENT_KINDS}, got {kind!r}")


def _sin_over(w: complex, a: float) -> complex:
    """sin(a w)/w, continuous through w = 0."""
    if abs(w) < 1e-6:
        return a * (1.0 - (a * w) ** 2 / 6.0)
    return cmath.sin(a * w) / w


def cle_moment(kind: str, lam: float) -> float:
    """E[CR^lambda] for the CLE_6 conformal radii (kappa = 6).

    ``one_arm``: outermost loop around 0; ``touch``: same, restricted to the
    loop touching the boundary; ``backbone``: outer boundary of the
    outermost loop whose outer boundary surrounds 0. Returns ``inf`` at
    and below the finiteness threshold.
    """
    kappa = 6.0
    if lam <= moment_threshold(kind):
        return math.inf
    w = principal_sqrt((kappa - 4.0) ** 2 - 8.0 * kappa * lam)
    if kind == "one_arm":
        val = math.cos(math.pi * (kappa - 4.0) / kappa) / cmath.cos(math.pi / kappa * w)
    elif kind == "touch":
        num = 2.0 * math.cos(math.pi * (kappa - 4.0) / kappa) * _sin_over(w, math.pi * (kappa - 4.0) / (4.0 * kappa))
        val = num / _sin_over(w, math.pi / 4.0)
    else:
        pref = kappa * math.sin(8.0 * math.pi / kappa) / (4.0 * math.sin(math.pi * kappa / 4.0))
        s8 = math.sin(8.0 * math.pi / kappa)
        if abs(w - 4.0) < 1e-7:
            # numerator and denominator both vanish at w = 4 (lambda = -1/4)
            num_d = math.pi / 4.0 * math.cos(math.pi)
            den_d = 2.0 * math.pi / kappa * math.cos(8.0 * math.pi / kappa) - 0.25 * s8
            val = pref * num_d / den_d
        else:
            val = pref * _sin_over(w, math.pi / 4.0) / (_sin_over(w, 2.0 * math.pi / kappa) - 0.25 * s8)
    return float(complex(val).real)


def touch_probability() -> float:
    """P[outermost loop around 0 touches the boundary], the touch moment at 0."""
    return cle_moment("touch", 0.0)

