"""Nagao-type Mordell-Weil rank estimates for one-parameter curve families.

Typical use::

    from nagao_rank import corpus_family, reduce_mod_p, fibral_averages

    fam = corpus_family("f1")
    summary = fibral_averages(reduce_mod_p(fam, 101))
"""
__version__ = "0.1.0"

from .census import CensusReport, census_sweep, lefschetz_crosscheck, singular_census
from .errors import *  # noqa: F401,F403
from .estimators import (
    EstimateSeries,
    RankLedger,
    cesaro_update,
    dirichlet_residue,
    ledger_solve,
    rank_estimate,
    series_from_summaries,
)
from .family import (
    CORPUS_CONFIGS,
    FamilyModP,
    HyperellipticFamily,
    bad_primes,
    corpus_family,
    discriminant_poly,
    load_family,
    parse_family,
    reduce_mod_p,
)
from .primes import Fp2Elem, PrimeFieldCtx, build_ctx, fp2_count_sqrt_classes, sieve_primes
from .traces import (
    FiberTrace,
    PrimeSummary,
    b_from_h1,
    curve_count_fp,
    curve_count_fp2,
    fiber_trace,
    fiber_traces,
    fibral_averages,
)
