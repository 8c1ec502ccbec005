"""Frobenius traces of fibers and their fibral averages over F_p.

For a smooth fiber C_t: y^2 = f(x, t) of genus g,

    a = p + 1 - #C_t(F_p)                       (trace on H^1)
    b = p                                       (g = 1, trace on H^2)
    b = (t1^2 - t2) / 2                         (g = 2, trace on H^2(J) = wedge^2 H^1)

with t1 = a and t2 = p^2 + 1 - #C_t(F_{p^2}). Singular fibers contribute
a = b = 0. Sums are kept as exact integers; averages divide by p once.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ParityViolation, SingularFiber
from .family import FamilyModP, fiber_is_singular
from .primes import PrimeFieldCtx

DEFAULT_B_MAX = 500


@dataclass(frozen=True)
class FiberTrace:
    t: int
    a: int
    b: Optional[int]
    singular: bool


@dataclass(frozen=True)
class PrimeSummary:
    p: int
    A_num: int
    B_num: Optional[int]
    n_delta: int
    n_fibers: int
    elapsed: float = 0.0
    max_abs_a: int = 0
    max_abs_b: Optional[int] = None
    b_computed: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def A(self) -> Fraction:
        return Fraction(self.A_num, self.p)

    @property
    def B(self) -> Optional[Fraction]:
        return None if self.B_num is None else Fraction(self.B_num, self.p)

    @property
    def n_ns(self) -> int:
        return self.n_fibers - self.n_delta


def hasse_weil_bound(g: int, p: int) -> int:
    """floor(2 g sqrt(p))."""
    return isqrt(4 * g * g * p)


def infinity_points(coeffs: np.ndarray, p: int, ctx: PrimeFieldCtx) -> int:
    """Points at infinity of y^2 = f(x) on the model used for counting.

    Odd degree: one point. Even degree 2g+2: the two-point chart at
    infinity, 1 + chi(c_D). A plane cubic whose x^3 term vanishes contains
    the whole line at infinity (p + 1 points).
    """
    D = len(coeffs) - 1
    top = int(coeffs[D]) % p
    if D == 3 and top == 0:
        return p + 1
    if D % 2 == 0:
        return 1 + ctx.chi(top)
    return 1


def count_points_fp(coeffs, ctx: PrimeFieldCtx) -> int:
    """#C(F_p) for y^2 = f(x), f given by ascending coefficients mod p."""
    p = ctx.p
    cs = np.asarray(coeffs, dtype=np.int64) % p
    D = len(cs) - 1
    s = _kernels.char_sum(cs, D, p, ctx.chi_table, np.zeros(D + 1, np.int64))
    return p + int(s) + infinity_points(cs, p, ctx)


def count_points_fp2(coeffs, ctx: PrimeFieldCtx) -> int:
    """#C(F_{p^2}) for a smooth y^2 = f(x) with f defined over F_p."""
    p = ctx.p
    cs = np.asarray(coeffs, dtype=np.int64) % p
    D = len(cs) - 1
    dsq = (ctx.nonresidue * ctx.sq_table.astype(np.int64)) % p
    s = _kernels.fp2_char_sum(
        cs, D, p, ctx.nonresidue, ctx.chi_table, ctx.sq_table.astype(np.int64), dsq,
        np.zeros(D + 1, np.int64), np.zeros(D + 1, np.int64),
    )
    inf = 1 if D % 2 == 1 else (2 if cs[D] != 0 else 1)
    return p * p + int(s) + inf


def curve_count_fp(fam_p: FamilyModP, t: int) -> int:
    t %= fam_p.p
    if fam_p.singular_mask[t]:
        raise SingularFiber(f"fiber t={t} is singular mod {fam_p.p}")
    return count_points_fp(fam_p.fiber_coeffs(t), fam_p.ctx)


def curve_count_fp2(fam_p: FamilyModP, t: int) -> int:
    t %= fam_p.p
    if fam_p.singular_mask[t]:
        raise SingularFiber(f"fiber t={t} is singular mod {fam_p.p}")
    return count_points_fp2(fam_p.fiber_coeffs(t), fam_p.ctx)


def b_from_h1(t1: int, t2: int, p: int) -> int:
    """Trace of Frobenius on wedge^2 H^1 from the traces of Frob and Frob^2."""
    num = t1 * t1 - t2
    if num % 2:
        raise ParityViolation(f"t1^2 - t2 = {num} is odd at p = {p}")
    return num // 2


def fiber_trace(fam_p: FamilyModP, t: int, compute_b: bool = True) -> FiberTrace:
    p = fam_p.p
    t %= p
    if fam_p.singular_mask[t]:
        return FiberTrace(t, 0, 0, True)
    a = p + 1 - curve_count_fp(fam_p, t)
    if fam_p.genus == 1:
        b = p
    elif compute_b:
        t2 = p * p + 1 - curve_count_fp2(fam_p, t)
        b = b_from_h1(a, t2, p)
    else:
        b = None
    return FiberTrace(t, a, b, False)


def fiber_traces(fam_p: FamilyModP, compute_b: bool = True) -> list[FiberTrace]:
    """All affine fibers at once, through the vectorised kernels."""
    a, b, sing = _affine_pass(fam_p, compute_b)
    return [
        FiberTrace(t, int(a[t]), None if b is None else int(b[t]), bool(sing[t]))
        for t in range(fam_p.p)
    ]


def _affine_pass(fam_p: FamilyModP, compute_b: bool):
    p, D, ctx = fam_p.p, fam_p.x_degree, fam_p.ctx
    sing, _, a = fam_p.affine_pass
    sing = sing.astype(bool)
    b = None
    if fam_p.genus == 1:
        b = np.where(sing, 0, p).astype(np.int64)
    elif compute_b:
        good = np.flatnonzero(~sing).astype(np.int64)
        n2 = _kernels.fp2_pass(
            fam_p.table, D, p, ctx.nonresidue, ctx.chi_table,
            ctx.sq_table.astype(np.int64), good,
        )
        t1 = a[good]
        t2 = p * p + 1 - n2
        num = t1 * t1 - t2
        if np.any(num % 2):
            bad_t = int(good[np.flatnonzero(num % 2)[0]])
            raise ParityViolation(f"t1^2 - t2 odd at p = {p}, t = {bad_t}")
        b = np.zeros(p, np.int64)
        b[good] = num // 2
    return a, b, sing


def _infinity_fiber(fam_p: FamilyModP, compute_b: bool) -> FiberTrace:
    cs = fam_p.inf_coeffs
    p = fam_p.p
    if fiber_is_singular(cs, p):
        return FiberTrace(-1, 0, 0, True)
    a = p + 1 - count_points_fp(cs, fam_p.ctx)
    if fam_p.genus == 1:
        b = p
    elif compute_b:
        b = b_from_h1(a, p * p + 1 - count_points_fp2(cs, fam_p.ctx), p)
    else:
        b = None
    return FiberTrace(-1, a, b, False)


def fibral_averages(fam_p: FamilyModP, b_max: int = DEFAULT_B_MAX) -> PrimeSummary:
    """Exact numerators of the fibral averages of a and b over the base.

    The base is the affine t-line, plus the fiber at infinity when the family
    carries a second chart. For genus 2 the b pass over F_{p^2} only runs
    when p <= b_max; otherwise ``B_num`` is None.
    """
    start = time.perf_counter()
    p, g = fam_p.p, fam_p.genus
    compute_b = g == 1 or p <= b_max
    a, b, sing = _affine_pass(fam_p, compute_b)
    A_num = int(a.sum())
    B_num = int(b.sum()) if b is not None else None
    n_delta = int(sing.sum())
    n_fibers = p
    max_a = int(np.abs(a).max()) if p else 0
    max_b = int(np.abs(b).max()) if b is not None else None
    if fam_p.inf_coeffs is not None:
        ft = _infinity_fiber(fam_p, compute_b)
        n_fibers += 1
        A_num += ft.a
        if B_num is not None:
            B_num += ft.b
            max_b = max(max_b, abs(ft.b))
        n_delta += int(ft.singular)
        max_a = max(max_a, abs(ft.a))
    return PrimeSummary(
        p=p,
        A_num=A_num,
        B_num=B_num,
        n_delta=n_delta,
        n_fibers=n_fibers,
        elapsed=time.perf_counter() - start,
        max_abs_a=max_a,
        max_abs_b=max_b,
        b_computed=B_num is not None,
    )
