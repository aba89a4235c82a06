"""Exponent spectrum of the closed-channel backbone expansion.

The set S consists of the solutions of

    sin(4 pi sqrt(s/3)) + (3/2) sqrt(s) = 0,   s not in {0, 1/3},

with the principal square root. Writing s = -(3/16) (a + i b)^2 turns the
equation into sinh(pi (a + ib)) + c (a + ib) = 0 with c = 3 sqrt(3)/8, whose
real and imaginary parts separate into

    sinh(pi a) cos(pi b) + c a = 0,     cosh(pi a) sin(pi b) + c b = 0.

``a = 0`` gives the single real member of S. For ``a > 0`` each integer
``n >= 2`` contributes one conjugate pair, found from an equation in ``a``
alone that is increasing in ``a``, so every branch has a guaranteed bracket.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .exceptions import RootBracketError
from .special_fn import principal_sqrt

C = 3.0 * math.sqrt(3.0) / 8.0
_K = 8.0 * math.pi / (3.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class RootSet:
    """Members of S ordered by real part.

    ``ab_pairs[i]`` is the nonnegative solution (a, b) behind ``roots[i]``;
    ``n_index[i]`` is the branch integer, or ``"real root"`` for a = 0.
    """

    roots: tuple
    ab_pairs: tuple
    n_index: tuple

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    @property
    def n_max(self) -> int:
        return max((n for n in self.n_index if isinstance(n, int)), default=1)

    def check_invariants(self, residual_tol: float = 1e-10) -> None:
        for s in self.roots:
            r = defining_residual(s)
            if r >= residual_tol:
                raise AssertionError(f"root {s} has residual {r:.3e}")
            if min(abs(s), abs(s - 1.0 / 3.0)) <= 0.05:
                raise AssertionError(f"excluded root {s} present")
            if s.imag != 0.0 and s.conjugate() not in self.roots:
                raise AssertionError(f"conjugate of {s} missing")
        for s, (a, b) in zip(self.roots, self.ab_pairs):
            expect = s_from_ab(a, b)
            if s.imag > 0:
                expect = expect.conjugate()
            if abs(expect - s) > 1e-12 * max(1.0, abs(s)):
                raise AssertionError(f"(a, b) = ({a}, {b}) does not map to {s}")
        re = [s.real for s in self.roots]
        if re != sorted(re):
            raise AssertionError("roots not ordered by real part")


def s_from_ab(a: float, b: float) -> complex:
    """Member of S with negative imaginary part for the pair (a, b)."""
    return complex(3.0 / 16.0 * (b * b - a * a), -3.0 / 8.0 * a * b)


def defining_residual(s: complex) -> float:
    """|sin(4 pi sqrt(s/3)) + (3/2) sqrt(s)| with the principal branch."""
    return abs(cmath.sin(4.0 * math.pi * principal_sqrt(s / 3.0)) + 1.5 * principal_sqrt(s))


def _bisect_newton(f: Callable, df: Callable, lo: float, hi: float,
                   ftol: float = 1e-13, xtol: float = 1e-15, maxiter: int = 400) -> float:
    """Safeguarded Newton iteration inside a sign-changing bracket."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootBracketError(f"no sign change on [{lo}, {hi}]: f = {flo}, {fhi}")
    if flo > 0:
        f0, g0 = f, df
        f = lambda x: -f0(x)  # noqa: E731
        df = lambda x: -g0(x)  # noqa: E731
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if abs(fx) < ftol:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        d = df(x)
        step = fx / d if d != 0 else math.inf
        xn = x - step
        if not lo < xn < hi:
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= xtol * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def _real_f(b):
    return math.sin(math.pi * b) + C * b


def _real_df(b):
    return math.pi * math.cos(math.pi * b) + C


@lru_cache(maxsize=None)
def _real_b() -> float:
    # b = 4/3 is itself a root (it maps to s = 1/3), so step just inside
    return _bisect_newton(_real_f, _real_df, 4.0 / 3.0 + 1e-9, 5.0 / 3.0)


def solve_real_root() -> float:
    """The unique real member s0 = (3/16) b0^2 of S, with b0 in (4/3, 5/3)."""
    b = _real_b()
    return 3.0 / 16.0 * b * b


def _ratio(a):
    """a / sinh(pi a) and its derivative, with the a -> 0 limit handled."""
    if a < 1e-6:
        pa2 = (math.pi * a) ** 2
        return (1.0 - pa2 / 6.0) / math.pi, -math.pi * a / 3.0
    sh = math.sinh(math.pi * a)
    return a / sh, (sh - math.pi * a * math.cosh(math.pi * a)) / (sh * sh)


def branch_lhs(a: float) -> float:
    """Left-hand side of the branch equation, increasing in a >= 0."""
    r, _ = _ratio(a)
    cr = C * r
    return _K * math.cosh(math.pi * a) * math.sqrt(1.0 - cr * cr) + math.acos(-cr)


def _branch_dlhs(a):
    r, dr = _ratio(a)
    cr = C * r
    root = math.sqrt(1.0 - cr * cr)
    ch, sh = math.cosh(math.pi * a), math.sinh(math.pi * a)
    d_first = _K * (math.pi * sh * root - ch * C * C * r * dr / root)
    d_acos = C * dr / root
    return d_first + d_acos


@lru_cache(maxsize=None)
def _branch_ab(n: int):
    if n < 2:
        raise ValueError(f"branch index must be >= 2, got {n}")
    target = 2.0 * n * math.pi
    f = lambda a: branch_lhs(a) - target  # noqa: E731
    lo = 1e-9
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > 1e3:
            raise RootBracketError(f"branch {n}: no upper bracket found")
    if f(lo) >= 0:
        raise RootBracketError(f"branch {n}: lower end of bracket already positive")
    a = _bisect_newton(f, _branch_dlhs, lo, hi)
    r, _ = _ratio(a)
    b = 2.0 * n - math.acos(-C * r) / math.pi
    return a, b


def solve_branch(n: int):
    """Conjugate pair (s, conj(s)) of S on branch n >= 2; Im s < 0 first."""
    a, b = _branch_ab(int(n))
    s = s_from_ab(a, b)
    return s, s.conjugate()


def branch_ab(n: int):
    """The (a, b) solution behind branch n."""
    return _branch_ab(int(n))


def _bb_f(x):
    return math.sqrt(36.0 * x + 3.0) / 4.0 + math.sin(2.0 * math.pi * math.sqrt(12.0 * x + 1.0) / 3.0)


def _bb_df(x):
    u = math.sqrt(12.0 * x + 1.0)
    return 4.5 / math.sqrt(36.0 * x + 3.0) + math.cos(2.0 * math.pi * u / 3.0) * 4.0 * math.pi / u


def backbone_equation(x: float) -> float:
    """sqrt(36x + 3)/4 + sin(2 pi sqrt(12x + 1)/3)."""
    return _bb_f(x)


@lru_cache(maxsize=None)
def backbone_exponent() -> float:
    """Root of the backbone equation in (1/4, 2/3); about 0.3566."""
    # x = 1/4 is an excluded root of the same equation
    return _bisect_newton(_bb_f, _bb_df, 0.25 + 1e-9, 2.0 / 3.0)


def root_set(n_max: int) -> RootSet:
    """Real root plus the conjugate pairs of branches 2..n_max."""
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    roots = [complex(solve_real_root(), 0.0)]
    ab = [(0.0, _real_b())]
    idx: list = ["real root"]
    for n in range(2, n_max + 1):
        a, b = _branch_ab(n)
        s, sc = solve_branch(n)
        roots += [s, sc]
        ab += [(a, b), (a, b)]
        idx += [n, n]
    rs = RootSet(tuple(roots), tuple(ab), tuple(idx))
    rs.check_invariants()
    return rs
