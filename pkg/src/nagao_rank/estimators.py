"""Rank estimates from streams of per-prime fibral averages.

The primary estimator is the Cesaro form

    S(X) = (1/X) sum_{p <= X} -A_p log p
    T(X) = (1/X) sum_{p <= X}  B_p log(p) / p

whose limits give rank MW (elliptic case) or rank MW + rank NS(A/K)
(combined). A Dirichlet-series residue extrapolation is kept as a
diagnostic, and ``ledger_solve`` does Shioda-Tate bookkeeping.
"""
from __future__ import annotations

import bisect
import math
import statistics
from dataclasses import dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    HypothesisNotAsserted,
    InconsistentLedger,
    InsufficientData,
    OutOfOrderPrime,
    OverDetermined,
)
from .traces import PrimeSummary

DEFAULT_S_GRID_A = (1.5, 1.3, 1.2, 1.1, 1.05)
DEFAULT_S_GRID_B = (2.5, 2.3, 2.2, 2.1, 2.05)
MIN_DIRICHLET_PRIMES = 100


class NeumaierSum:
    """Running compensated sum."""

    __slots__ = ("total", "comp")

    def __init__(self, total: float = 0.0, comp: float = 0.0):
        self.total = total
        self.comp = comp

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp

    def state(self) -> list[float]:
        return [self.total, self.comp]


@dataclass
class Checkpoint:
    X: int
    S: float
    T: float
    theta: float


@dataclass
class EstimateSeries:
    """Cesaro partial sums plus the raw per-prime data they came from."""

    checkpoints_at: tuple[int, ...] = ()
    primes: list[int] = field(default_factory=list)
    A_num: list[int] = field(default_factory=list)
    B_num: list[Optional[int]] = field(default_factory=list)
    n_delta: list[int] = field(default_factory=list)
    a_sum: NeumaierSum = field(default_factory=NeumaierSum)
    b_sum: NeumaierSum = field(default_factory=NeumaierSum)
    theta_sum: NeumaierSum = field(default_factory=NeumaierSum)
    delta_sum: NeumaierSum = field(default_factory=NeumaierSum)
    b_cutoff: Optional[int] = None
    b_skipped: bool = False
    checkpoints: list[Checkpoint] = field(default_factory=list)

    @property
    def last_p(self) -> int:
        return self.primes[-1] if self.primes else 0

    def S(self, X: Optional[int] = None) -> float:
        X = self._X(X)
        return self._upto(X).a_sum.value / X

    def T(self, X: Optional[int] = None) -> float:
        X = self._X(X)
        return self._upto(X).b_sum.value / X

    def theta(self, X: Optional[int] = None) -> float:
        X = self._X(X)
        return self._upto(X).theta_sum.value / X

    def T_complete(self, X: Optional[int] = None) -> float:
        """B-sum normalised by the range it actually covers.

        Equal to T(X) unless the B pass was skipped above a cutoff, in which
        case the partial sum is divided by the cutoff prime instead of X.
        """
        X = self._X(X)
        part = self._upto(X)
        if part.b_skipped and part.b_cutoff is not None and part.b_cutoff < X:
            return part.b_sum.value / part.b_cutoff
        return part.b_sum.value / X

    def delta_correction(self, X: Optional[int] = None) -> float:
        """(1/X) sum n_delta(p) log(p) / p, so that T = theta - this for g = 1."""
        X = self._X(X)
        return self._upto(X).delta_sum.value / X

    def _upto(self, X: int) -> "EstimateSeries":
        # the running sums cover every merged prime; below that, rebuild the prefix
        if X >= self.last_p:
            return self
        k = bisect.bisect_right(self.primes, X)
        part = EstimateSeries()
        for p, A, B, nd in zip(self.primes[:k], self.A_num[:k], self.B_num[:k], self.n_delta[:k]):
            _accumulate(part, p, A, B, nd)
        return part

    def _X(self, X: Optional[int]) -> int:
        X = self.last_p if X is None else X
        if X <= 0:
            raise InsufficientData("no primes recorded yet")
        return X

    def smoothed_S(self, window: int = 10) -> float:
        """Trailing median of S over the last ``window`` checkpoints (display only)."""
        vals = [c.S for c in self.checkpoints[-window:]]
        if not vals:
            return self.S()
        return statistics.median(vals)

    def state(self) -> dict:
        return {
            "a_sum": self.a_sum.state(),
            "b_sum": self.b_sum.state(),
            "theta_sum": self.theta_sum.state(),
            "delta_sum": self.delta_sum.state(),
            "b_cutoff": self.b_cutoff,
            "b_skipped": self.b_skipped,
            "last_p": self.last_p,
        }


def cesaro_update(series: EstimateSeries, summary: PrimeSummary) -> EstimateSeries:
    """Append one prime (in ascending order) and emit any checkpoint it completes."""
    p = summary.p
    if p <= series.last_p:
        raise OutOfOrderPrime(f"prime {p} arrived after {series.last_p}")
    # checkpoints strictly below p are now complete
    _emit_checkpoints(series, below=p)
    _accumulate(series, p, summary.A_num, summary.B_num, summary.n_delta)
    if p in series.checkpoints_at:
        _emit_checkpoints(series, below=p + 1)
    return series


def _accumulate(series: EstimateSeries, p: int, A_num: int, B_num: Optional[int], n_delta: int) -> None:
    logp = math.log(p)
    series.primes.append(p)
    series.A_num.append(A_num)
    series.B_num.append(B_num)
    series.n_delta.append(n_delta)
    series.a_sum.add(-(A_num / p) * logp)
    series.theta_sum.add(logp)
    series.delta_sum.add(n_delta * logp / p)
    if B_num is not None:
        series.b_sum.add((B_num / p) * logp / p)
        series.b_cutoff = p
    else:
        series.b_skipped = True


def _emit_checkpoints(series: EstimateSeries, below: int) -> None:
    done = {c.X for c in series.checkpoints}
    for X in sorted(series.checkpoints_at):
        if X < below and X not in done and X >= series.last_p > 0:
            series.checkpoints.append(Checkpoint(X, series.S(X), series.T(X), series.theta(X)))


def finalize(series: EstimateSeries, X: int) -> Checkpoint:
    """Close the series at X (all primes <= X must already be merged)."""
    cp = Checkpoint(X, series.S(X), series.T(X), series.theta(X))
    if not series.checkpoints or series.checkpoints[-1].X != X:
        series.checkpoints.append(cp)
    return cp


def series_from_summaries(summaries: Iterable[PrimeSummary], checkpoints_at: Sequence[int] = ()) -> EstimateSeries:
    series = EstimateSeries(checkpoints_at=tuple(checkpoints_at))
    for s in summaries:
        cesaro_update(series, s)
    return series


@dataclass(frozen=True)
class DirichletResidue:
    resA_est: float
    resB_est: Optional[float]
    s_grid_A: tuple[float, ...]
    s_grid_B: tuple[float, ...]
    resA_grid: tuple[float, ...]
    resB_grid: tuple[float, ...]


def _extrapolate(offsets: np.ndarray, values: np.ndarray) -> float:
    # least-squares line in (s - s0), read off at s = s0
    slope, intercept = np.polyfit(offsets, values, 1)
    return float(intercept)


def dirichlet_residue(
    data,
    s_grid_A: Sequence[float] = DEFAULT_S_GRID_A,
    s_grid_B: Sequence[float] = DEFAULT_S_GRID_B,
) -> DirichletResidue:
    """Truncated (s - s0) * L'/L-type sums on a grid, extrapolated linearly to s0.

    ``data`` is an EstimateSeries or an iterable of PrimeSummary.
    resA(s) = (s - 1) sum_p -A_p log p / p^s and resB(s) = (s - 2) sum_p B_p log p / p^s.
    """
    if isinstance(data, EstimateSeries):
        ps, A, B = data.primes, data.A_num, data.B_num
    else:
        data = list(data)
        ps = [s.p for s in data]
        A = [s.A_num for s in data]
        B = [s.B_num for s in data]
    if len(ps) < MIN_DIRICHLET_PRIMES:
        raise InsufficientData(f"need at least {MIN_DIRICHLET_PRIMES} primes, have {len(ps)}")
    p = np.asarray(ps, dtype=float)
    logp = np.log(p)
    a_term = -(np.asarray(A, dtype=float) / p) * logp
    gA = np.asarray(s_grid_A, dtype=float)
    resA = np.array([(s - 1.0) * np.sum(a_term / p**s) for s in gA])
    resA_est = _extrapolate(gA - 1.0, resA)

    have_b = np.array([b is not None for b in B])
    resB: tuple[float, ...] = ()
    resB_est = None
    if have_b.any():
        pb = p[have_b]
        b_term = (np.array([b for b in B if b is not None], dtype=float) / pb) * np.log(pb)
        gB = np.asarray(s_grid_B, dtype=float)
        resB_arr = np.array([(s - 2.0) * np.sum(b_term / pb**s) for s in gB])
        resB_est = _extrapolate(gB - 2.0, resB_arr)
        resB = tuple(float(v) for v in resB_arr)
    return DirichletResidue(
        resA_est=resA_est,
        resB_est=resB_est,
        s_grid_A=tuple(float(s) for s in s_grid_A),
        s_grid_B=tuple(float(s) for s in s_grid_B),
        resA_grid=tuple(float(v) for v in resA),
        resB_grid=resB,
    )


@dataclass(frozen=True)
class RankEstimate:
    raw: float
    rounded: int
    mode: str
    X: int

    @property
    def gap(self) -> float:
        return abs(self.raw - self.rounded)


def default_mode(family) -> str:
    return "elliptic" if family.genus == 1 else "combined"


def rank_estimate(series: EstimateSeries, family, mode: Optional[str] = None, X: Optional[int] = None) -> RankEstimate:
    """Mordell-Weil rank estimate at X.

    ``elliptic``: raw = S(X). ``combined``: raw = S(X) + T - rank NS(A/K),
    with the NS(A/K) rank taken from the family's asserted value. The two
    Cesaro limits are separate, so when the B pass stopped at a cutoff the
    B term is read at that cutoff (``T_complete``) rather than diluted by X.
    Rounding is to nearest, ties to even.
    """
    if not family.trace_trivial_asserted:
        raise HypothesisNotAsserted(
            f"{family.name}: the rank formula needs a trivial Chow trace; set trace_trivial = true to assert it"
        )
    mode = mode or default_mode(family)
    if mode == "elliptic":
        raw = series.S(X)
    elif mode == "combined":
        raw = series.S(X) + series.T_complete(X) - family.ns_AK_rank_asserted
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return RankEstimate(raw=raw, rounded=round(raw), mode=mode, X=X or series.last_p)


@dataclass(frozen=True)
class RankLedger:
    """Shioda-Tate bookkeeping: ns_A = mw + ns_S + ns_AK + f_inv."""

    mw_rank: int
    ns_A_rank: int
    ns_S_rank: int
    ns_AK_rank: int
    f_inv_rank: int

    def __post_init__(self):
        rhs = self.mw_rank + self.ns_S_rank + self.ns_AK_rank + self.f_inv_rank
        if self.ns_A_rank != rhs:
            raise InconsistentLedger(f"ns_A = {self.ns_A_rank} but mw + ns_S + ns_AK + f_inv = {rhs}")


_LEDGER_FIELDS = tuple(f.name for f in fields(RankLedger))


def ledger_solve(**known: int) -> RankLedger:
    unknown_keys = set(known) - set(_LEDGER_FIELDS)
    if unknown_keys:
        raise TypeError(f"unknown ledger fields: {sorted(unknown_keys)}")
    for k, v in known.items():
        if v < 0:
            raise InconsistentLedger(f"{k} = {v} is negative")
    missing = [f for f in _LEDGER_FIELDS if f not in known]
    if not missing:
        try:
            return RankLedger(**known)
        except InconsistentLedger as exc:
            raise OverDetermined(str(exc)) from None
    if len(missing) > 1:
        raise ValueError(f"need four of the five fields; missing {missing}")
    (name,) = missing
    if name == "ns_A_rank":
        value = known["mw_rank"] + known["ns_S_rank"] + known["ns_AK_rank"] + known["f_inv_rank"]
    else:
        others = sum(v for k, v in known.items() if k != "ns_A_rank")
        value = known["ns_A_rank"] - others
    if value < 0:
        raise InconsistentLedger(f"solved {name} = {value} < 0")
    return RankLedger(**known, **{name: value})
