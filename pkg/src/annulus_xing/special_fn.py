"""Dedekind eta, Euler q-products, Jacobi triple product and Kac weights.

All q-series here are evaluated in double precision and truncated with
explicit geometric tail bounds rather than fixed term counts.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .exceptions import DomainError

_TERM_CAP = 200_000


@dataclass(frozen=True)
class Modulus:
    """Annulus modulus ``tau`` with its two nomes.

    ``q = exp(-pi/tau)`` is the open-channel nome and ``qt = exp(-2 pi tau)``
    the closed-channel one. An annulus of radii ``r < R`` has
    ``tau = log(R/r) / (2 pi)``.
    """

    tau: float
    q: float = field(init=False)
    qt: float = field(init=False)

    def __post_init__(self):
        tau = float(self.tau)
        if not (tau > 0 and math.isfinite(tau)):
            raise DomainError(f"modulus must be a positive finite real, got {self.tau!r}")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "q", math.exp(-math.pi / tau))
        object.__setattr__(self, "qt", math.exp(-2.0 * math.pi * tau))

    @classmethod
    def from_radii(cls, r: float, R: float) -> "Modulus":
        if not 0 < r < R:
            raise DomainError(f"need 0 < r < R, got r={r}, R={R}")
        return cls(math.log(R / r) / (2.0 * math.pi))


@dataclass(frozen=True)
class KacWeight:
    r: float
    s: float
    value: float

    @classmethod
    def of(cls, r, s) -> "KacWeight":
        return cls(r, s, kac_h(r, s))


def kac_h(r, s):
    """Kac conformal weight ((3r - 2s)^2 - 1)/24 at central charge zero.

    Exact for ``int`` and ``fractions.Fraction`` arguments.
    """
    return ((3 * r - 2 * s) ** 2 - 1) / 24


def principal_sqrt(z) -> complex:
    """Square root with argument in (-pi/2, pi/2].

    On the negative real axis the root with argument +pi/2 is returned,
    whatever the sign of the zero imaginary part.
    """
    w = cmath.sqrt(complex(z))
    if w.real == 0.0 and w.imag < 0.0:
        w = -w
    return w


def _check_nome(x):
    if not 0.0 < x < 1.0:
        raise DomainError(f"nome must lie in (0, 1), got {x!r}")


def euler_product_with_tail(x: float, rtol: float = 1e-16):
    """Return ``(value, rel_tail, terms)`` for prod_{n>=1} (1 - x^n).

    ``rel_tail`` bounds the relative truncation error: the omitted factors
    multiply the result by ``exp(-t)`` with
    ``0 <= t <= x^(N+1) / ((1-x)(1-x^(N+1)))``.
    """
    _check_nome(x)
    p = 1.0
    xn = 1.0
    for n in range(1, _TERM_CAP):
        xn *= x
        p *= 1.0 - xn
        nxt = xn * x
        bound = nxt / ((1.0 - x) * (1.0 - nxt))
        if bound < rtol:
            return p, -math.expm1(-bound), n
    raise DomainError(f"euler product at x={x} needs more than {_TERM_CAP} factors")


def euler_product(x: float) -> float:
    """prod_{n>=1} (1 - x^n) for 0 < x < 1."""
    return euler_product_with_tail(x, 1e-16)[0]


def pentagonal_series(x: float, tol: float = 1e-17) -> float:
    """sum_k (-1)^k x^((3k^2 - k)/2), the other side of Euler's identity."""
    _check_nome(x)
    terms = [1.0]
    k = 1
    while True:
        a = x ** ((3 * k * k - k) / 2)
        b = x ** ((3 * k * k + k) / 2)
        sign = -1.0 if k % 2 else 1.0
        terms.append(sign * a)
        terms.append(sign * b)
        # remaining terms are alternating in |k| with decreasing size
        if x ** ((3 * (k + 1) ** 2 - (k + 1)) / 2) < tol:
            return math.fsum(terms)
        k += 1
        if k > _TERM_CAP:
            raise DomainError(f"pentagonal series at x={x} did not converge")


def eta(tau: float) -> float:
    """Dedekind eta on the imaginary axis, eta(i tau), for tau > 0.

    For tau < 1 the modular relation eta(i tau) = eta(i/tau)/sqrt(tau) is
    applied first so the product nome exp(-2 pi tau) stays below exp(-2 pi).
    """
    tau = float(tau)
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"eta needs tau > 0, got {tau!r}")
    if tau < 1.0:
        return _eta_direct(1.0 / tau) / math.sqrt(tau)
    return _eta_direct(tau)


def _eta_direct(tau):
    x = math.exp(-2.0 * math.pi * tau)
    if x == 0.0:
        return math.exp(-math.pi * tau / 12.0)
    return math.exp(-math.pi * tau / 12.0) * euler_product(x)


def jacobi_triple_check(z: float, y, tol: float = 1e-16) -> float:
    """|LHS - RHS| of the Jacobi triple product at (z, y).

    LHS = prod_n (1 - z^{2n})(1 + z^{2n-1} y)(1 + z^{2n-1}/y),
    RHS = sum_k z^{k^2} y^k. ``y`` may be complex.
    """
    if not abs(z) < 1:
        raise DomainError(f"need |z| < 1, got {z!r}")
    if y == 0:
        raise DomainError("y must be nonzero")
    y = complex(y)
    az = abs(z)
    big = max(abs(y), 1.0 / abs(y))
    if az == 0.0:
        return 0.0

    lhs = 1.0 + 0j
    n = 1
    while True:
        z2n1 = z ** (2 * n - 1)
        lhs *= (1.0 - z ** (2 * n)) * (1.0 + z2n1 * y) * (1.0 + z2n1 / y)
        # log of the remaining factors is bounded by a geometric series
        nxt = az ** (2 * n + 1)
        if nxt * big < 0.5 and 3.0 * nxt * big / (1.0 - az * az) < tol:
            break
        n += 1
        if n > _TERM_CAP:
            raise DomainError("triple product did not converge")

    re_terms = [1.0]
    im_terms = [0.0]
    k = 1
    while True:
        for kk in (k, -k):
            t = z ** (k * k) * y**kk
            re_terms.append(t.real)
            im_terms.append(t.imag)
        nxt = az ** ((k + 1) ** 2) * big ** (k + 1)
        ratio = az ** (2 * k + 3) * big
        if ratio < 0.5 and 2.0 * nxt / (1.0 - ratio) < tol:
            break
        k += 1
        if k > _TERM_CAP:
            raise DomainError("triple product series did not converge")
    rhs = complex(math.fsum(re_terms), math.fsum(im_terms))
    return abs(lhs - rhs)
