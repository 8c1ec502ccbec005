"""Point counts over the discriminant locus.

Counts the surface y^2 = f(x, t) over F_p two ways (fiber by fiber from the
traces, and directly by listing y for every (t, x)), and measures how far
the rational points over the singular fibers deviate from p per fiber.
For genus 1 with nodal singular fibers that deviation per fiber is 0 or 2
(split or non-split node), so (singular_total - p n_delta) / p -> 0.

Points at infinity follow ``traces.infinity_points``: for the corpus
cubics that is the plane Weierstrass model.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .errors import MismatchBug
from .family import FamilyModP, HyperellipticFamily, bad_primes, reduce_mod_p
from .primes import sieve_primes
from .traces import infinity_points

DEFAULT_CROSSCHECK_CUTOFF = 101
TRIPLE_LOOP_CUTOFF = 211


@dataclass(frozen=True)
class CensusReport:
    p: int
    n_delta: int
    singular_total: int
    total_fiberwise: Optional[int] = None
    total_direct: Optional[int] = None

    @property
    def inferred_trace(self) -> float:
        return (self.singular_total - self.p * self.n_delta) / self.p

    @property
    def rounded(self) -> int:
        return round(self.inferred_trace)

    @property
    def crosscheck_pass(self) -> Optional[bool]:
        if self.total_direct is None:
            return None
        return self.total_fiberwise == self.total_direct


def _fiber_counts(fam_p: FamilyModP):
    """Per-fiber projective counts from the trace kernel, plus singular flags."""
    p, D, ctx = fam_p.p, fam_p.x_degree, fam_p.ctx
    sing, sums, a = fam_p.affine_pass
    counts = np.empty(p, dtype=np.int64)
    for t in range(p):
        if sing[t]:
            counts[t] = p + sums[t] + infinity_points(fam_p.fiber_coeffs(t), p, ctx)
        else:
            # Lefschetz on a smooth fiber: #C_t = p + 1 - a_t
            counts[t] = p + 1 - a[t]
    return counts, sing.astype(bool)


def singular_fiber_counts(fam_p: FamilyModP) -> dict[int, int]:
    """#fiber_t(F_p) for each singular t, by direct enumeration of x."""
    p, D, ctx = fam_p.p, fam_p.x_degree, fam_p.ctx
    ts = np.asarray(fam_p.delta_roots, dtype=np.int64)
    if ts.size == 0:
        return {}
    sums = _kernels.fiber_char_sums(fam_p.table, D, p, ctx.chi_table, ts)
    return {
        int(t): int(p + s + infinity_points(fam_p.fiber_coeffs(int(t)), p, ctx))
        for t, s in zip(ts, sums)
    }


def direct_surface_count(fam_p: FamilyModP, triple_loop: Optional[bool] = None) -> int:
    """Total points of the affine-base surface, counted without the character table."""
    p, D = fam_p.p, fam_p.x_degree
    if triple_loop is None:
        triple_loop = p <= TRIPLE_LOOP_CUTOFF
    kern = _kernels.triple_loop_fiber_counts if triple_loop else _kernels.direct_fiber_counts
    return int(kern(fam_p.table, D, p).sum())


def lefschetz_crosscheck(fam_p: FamilyModP) -> CensusReport:
    """Fiber-by-fiber total against the direct count; any mismatch raises."""
    counts, sing = _fiber_counts(fam_p)
    fiberwise = int(counts.sum())
    direct = direct_surface_count(fam_p)
    if fiberwise != direct:
        raise MismatchBug(
            f"{fam_p.family.name} p={fam_p.p}: fiberwise {fiberwise} != direct {direct}"
        )
    return CensusReport(
        p=fam_p.p,
        n_delta=int(sing.sum()),
        singular_total=int(counts[sing].sum()),
        total_fiberwise=fiberwise,
        total_direct=direct,
    )


def singular_census(fam_p: FamilyModP, crosscheck: bool = False) -> CensusReport:
    if fam_p.genus != 1:
        raise ValueError("the singular-fiber census is defined for genus-1 families only")
    if crosscheck:
        return lefschetz_crosscheck(fam_p)
    counts = singular_fiber_counts(fam_p)
    return CensusReport(p=fam_p.p, n_delta=len(counts), singular_total=sum(counts.values()))


@dataclass(frozen=True)
class CensusSweep:
    reports: tuple[CensusReport, ...]
    verdict: str
    stable_value: Optional[int]

    @property
    def max_abs_inferred(self) -> float:
        return max((abs(r.inferred_trace) for r in self.reports), default=0.0)

    @property
    def all_crosschecks_pass(self) -> bool:
        return all(r.crosscheck_pass is not False for r in self.reports)


MIN_SWEEP_PRIMES = 3


def stability_verdict(rounded: Sequence[int]) -> tuple[str, Optional[int]]:
    if len(rounded) < MIN_SWEEP_PRIMES:
        return "insufficient range", None
    upper = rounded[len(rounded) // 2 :]
    if len(set(upper)) == 1:
        return "stable", upper[0]
    return "unstable", None


def census_sweep(
    family: HyperellipticFamily,
    p_range: Iterable[int] | tuple[int, int],
    crosscheck_cutoff: int = DEFAULT_CROSSCHECK_CUTOFF,
) -> CensusSweep:
    """Census at every good prime of ``p_range`` (an iterable or an inclusive (lo, hi))."""
    if isinstance(p_range, tuple) and len(p_range) == 2:
        lo, hi = p_range
        primes = [q for q in sieve_primes(hi) if q >= lo]
    else:
        primes = sorted(p_range)
    bad = bad_primes(family, max(primes, default=0))
    reports = []
    for p in primes:
        if p in bad:
            continue
        fam_p = reduce_mod_p(family, p)
        reports.append(singular_census(fam_p, crosscheck=p <= crosscheck_cutoff))
    verdict, value = stability_verdict([r.rounded for r in reports])
    return CensusSweep(tuple(reports), verdict, value)
