"""End-to-end runs: schedule primes, merge in order, persist, resume, report.

Artifacts written to ``out_dir``:

* ``<family>.primes.csv``  one row per good prime:
  ``p,n_delta,A_num,B_num,elapsed_ms`` (A_num, B_num exact integer sums;
  B_num empty when the genus-2 F_{p^2} pass was skipped).
* ``<family>.checkpoint.json``  running estimates plus resume state,
  rewritten atomically after every block of primes.
* ``<family>.census.csv``  (with ``census=True``) per-prime singular census.
* ``<family>.manifest.json``  config snapshot, fingerprint, timings.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from . import __version__
from .census import DEFAULT_CROSSCHECK_CUTOFF, CensusReport, lefschetz_crosscheck, singular_census, stability_verdict
from .errors import CorruptArtifact, InsufficientData, MalformedConfig
from .estimators import (
    EstimateSeries,
    cesaro_update,
    default_mode,
    dirichlet_residue,
    finalize,
    rank_estimate,
)
from .family import HyperellipticFamily, bad_primes, load_family, parse_family, reduce_mod_p
from .primes import sieve_primes
from .traces import DEFAULT_B_MAX, PrimeSummary, fibral_averages, hasse_weil_bound

log = logging.getLogger(__name__)

CSV_HEADER = "p,n_delta,A_num,B_num,elapsed_ms"
CENSUS_HEADER = "p,n_delta,singular_total,inferred_trace,rounded,crosscheck_pass"
RECOMPUTE_RTOL = 1e-12


@dataclass
class RunConfig:
    family: str
    x_max: int = 10_000
    mode: Optional[str] = None
    b_max: int = DEFAULT_B_MAX
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    checkpoint_every: int = 500
    out_dir: str = "."
    census: bool = False
    crosscheck_cutoff: int = DEFAULT_CROSSCHECK_CUTOFF
    record_elapsed: bool = False

    def validate(self) -> None:
        if self.x_max < 11:
            raise MalformedConfig("x_max must be at least 11")
        if self.workers < 1:
            raise MalformedConfig("workers must be >= 1")
        if self.checkpoint_every < 1:
            raise MalformedConfig("checkpoint_every must be >= 1")
        if self.mode not in (None, "elliptic", "combined"):
            raise MalformedConfig(f"unknown mode {self.mode!r}")
        # b_max above x_max is meaningless; clamp rather than reject
        self.b_max = min(self.b_max, self.x_max)


@dataclass
class RunResult:
    family: HyperellipticFamily
    config: RunConfig
    series: EstimateSeries
    summaries: list[PrimeSummary]
    census: list[CensusReport]
    checkpoint: dict
    paths: dict[str, str]
    manifest: dict
    completed: bool


def _paths(cfg: RunConfig, family: HyperellipticFamily) -> dict[str, str]:
    stem = os.path.join(cfg.out_dir, family.name)
    return {
        "csv": stem + ".primes.csv",
        "checkpoint": stem + ".checkpoint.json",
        "census": stem + ".census.csv",
        "manifest": stem + ".manifest.json",
    }


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _csv_row(s: PrimeSummary, record_elapsed: bool) -> str:
    b = "" if s.B_num is None else str(s.B_num)
    ms = int(round(s.elapsed * 1000)) if record_elapsed else 0
    return f"{s.p},{s.n_delta},{s.A_num},{b},{ms}\n"


def _census_row(r: CensusReport) -> str:
    cc = {None: "skipped", True: "true", False: "false"}[r.crosscheck_pass]
    return f"{r.p},{r.n_delta},{r.singular_total},{r.inferred_trace!r},{r.rounded},{cc}\n"


def _work(args) -> tuple[PrimeSummary, Optional[CensusReport]]:
    family, p, b_max, census, cutoff = args
    fam_p = reduce_mod_p(family, p)
    summary = fibral_averages(fam_p, b_max=b_max)
    report = None
    if census:
        if family.genus == 1:
            report = singular_census(fam_p, crosscheck=p <= cutoff)
        elif p <= cutoff:
            report = lefschetz_crosscheck(fam_p)
    return summary, report


def _checkpoint_payload(family, cfg, series, X, final, paths, mode) -> dict:
    est = rank_estimate(series, family, mode=mode, X=X)
    try:
        dr = dirichlet_residue(series)
        grids = {
            "resA_grid": list(dr.resA_grid),
            "resB_grid": list(dr.resB_grid),
            "resA_est": dr.resA_est,
            "resB_est": dr.resB_est,
            "s_grid_A": list(dr.s_grid_A),
            "s_grid_B": list(dr.s_grid_B),
        }
    except InsufficientData:
        grids = {"resA_grid": None, "resB_grid": None, "resA_est": None, "resB_est": None}
    return {
        "family": family.name,
        "X": X,
        "S": series.S(X),
        "T": series.T(X),
        "theta": series.theta(X),
        "T_complete": series.T_complete(X),
        **grids,
        "raw": est.raw,
        "rounded": est.rounded,
        "gap": est.gap,
        "mode": mode,
        "final": final,
        "b_cutoff": series.b_cutoff,
        "n_primes": len(series.primes),
        "hypotheses": {
            "trace_trivial_asserted": family.trace_trivial_asserted,
            "ns_AK_rank_asserted": family.ns_AK_rank_asserted,
            "tate_conjecture": "assumed",
        },
        "state": series.state(),
        "config": dataclasses.asdict(cfg),
        "family_config": family.to_config(),
        "fingerprint": family.fingerprint(),
        "per_prime_csv": os.path.basename(paths["csv"]),
        "census_csv": os.path.basename(paths["census"]) if cfg.census else None,
    }


def read_prime_csv(path: str) -> list[PrimeSummary]:
    """Strict reader for the per-prime CSV; any malformed row is CorruptArtifact."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise CorruptArtifact(f"cannot read {path}: {exc}") from None
    if not text.startswith(CSV_HEADER + "\n"):
        raise CorruptArtifact(f"{path}: bad header")
    if not text.endswith("\n"):
        raise CorruptArtifact(f"{path}: truncated final row")
    rows = []
    last = 0
    for lineno, line in enumerate(text[len(CSV_HEADER) + 1 :].splitlines(), start=2):
        parts = line.split(",")
        if len(parts) != 5:
            raise CorruptArtifact(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
        try:
            p, nd, a = int(parts[0]), int(parts[1]), int(parts[2])
            b = int(parts[3]) if parts[3] != "" else None
            ms = int(parts[4])
        except ValueError:
            raise CorruptArtifact(f"{path}:{lineno}: non-integer field") from None
        if p <= last:
            raise CorruptArtifact(f"{path}:{lineno}: primes not ascending")
        last = p
        rows.append(PrimeSummary(p=p, A_num=a, B_num=b, n_delta=nd, n_fibers=p, elapsed=ms / 1000))
    return rows


def _truncate_csv(path: str, header: str, last_p: int) -> None:
    if not os.path.exists(path):
        return
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    keep = [header]
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        try:
            if int(parts[0]) <= last_p and len(parts) == header.count(",") + 1:
                keep.append(line)
        except ValueError:
            break
    _atomic_write(path, "\n".join(keep) + "\n")


def run(cfg: RunConfig, *, resume: Optional[str] = None, stop_after: Optional[int] = None) -> RunResult:
    """Run (or resume) a full estimation.

    ``stop_after`` halts after that many committed checkpoint blocks,
    simulating an interrupted run.
    """
    t_start = time.time()
    stage = {}
    series = EstimateSeries()
    if resume is not None:
        with open(resume, encoding="utf-8") as fh:
            cp = json.load(fh)
        cfg = RunConfig(**cp["config"])
        family = parse_family("\n".join(f"{k} = {v}" for k, v in cp["family_config"].items()))
        paths = _paths(cfg, family)
        last_p = cp["state"]["last_p"]
        _truncate_csv(paths["csv"], CSV_HEADER, last_p)
        if cfg.census:
            _truncate_csv(paths["census"], CENSUS_HEADER, last_p)
        for s in read_prime_csv(paths["csv"]):
            cesaro_update(series, s)
        if series.last_p != last_p:
            raise CorruptArtifact(f"CSV ends at {series.last_p}, checkpoint at {last_p}")
    else:
        cfg.validate()
        family = load_family(cfg.family)
        paths = _paths(cfg, family)
        os.makedirs(cfg.out_dir, exist_ok=True)
        _atomic_write(paths["csv"], CSV_HEADER + "\n")
        if cfg.census:
            _atomic_write(paths["census"], CENSUS_HEADER + "\n")
        last_p = 0
    mode = cfg.mode or default_mode(family)
    stage["setup_s"] = time.time() - t_start

    R = bad_primes(family, cfg.x_max)
    todo = [q for q in sieve_primes(cfg.x_max) if q not in R and q > last_p]
    summaries: list[PrimeSummary] = []
    census_reports: list[CensusReport] = []
    timings: dict[int, float] = {}
    blocks = [todo[i : i + cfg.checkpoint_every] for i in range(0, len(todo), cfg.checkpoint_every)]

    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 and todo else None
    t_compute = time.time()
    checkpoint: dict = {}
    committed = 0
    completed = True
    try:
        for block in blocks:
            # largest first: the p^2 cost of the biggest primes dominates
            jobs = [(family, q, cfg.b_max, cfg.census, cfg.crosscheck_cutoff) for q in reversed(block)]
            if pool is not None:
                results = list(pool.map(_work, jobs))
            else:
                results = [_work(j) for j in jobs]
            # reorder buffer: merge strictly by ascending p
            results.sort(key=lambda r: r[0].p)
            with open(paths["csv"], "a", encoding="utf-8", newline="\n") as fh:
                fh.writelines(_csv_row(s, cfg.record_elapsed) for s, _ in results)
            if cfg.census:
                with open(paths["census"], "a", encoding="utf-8", newline="\n") as fh:
                    fh.writelines(_census_row(r) for _, r in results if r is not None)
            for s, r in results:
                cesaro_update(series, s)
                summaries.append(s)
                timings[s.p] = s.elapsed
                if r is not None:
                    census_reports.append(r)
            is_final = block is blocks[-1]
            X = cfg.x_max if is_final else series.last_p
            checkpoint = _checkpoint_payload(family, cfg, series, X, is_final, paths, mode)
            _atomic_write(paths["checkpoint"], json.dumps(checkpoint, indent=2) + "\n")
            committed += 1
            if stop_after is not None and committed >= stop_after and not is_final:
                completed = False
                break
    finally:
        if pool is not None:
            pool.shutdown()
    if completed:
        finalize(series, cfg.x_max)
        if not blocks:
            checkpoint = _checkpoint_payload(family, cfg, series, cfg.x_max, True, paths, mode)
            _atomic_write(paths["checkpoint"], json.dumps(checkpoint, indent=2) + "\n")
    stage["compute_s"] = time.time() - t_compute

    fibers = sum(s.n_fibers for s in summaries)
    g = family.genus
    manifest = {
        "config": dataclasses.asdict(cfg),
        "family": family.name,
        "fingerprint": family.fingerprint(),
        "version": __version__,
        "start": datetime.fromtimestamp(t_start, timezone.utc).isoformat(),
        "end": datetime.now(timezone.utc).isoformat(),
        "stage_timings_s": stage,
        "fibers": fibers,
        "fibers_per_second": fibers / stage["compute_s"] if stage["compute_s"] > 0 else None,
        "per_prime_elapsed_ms": {str(p): round(v * 1000, 3) for p, v in timings.items()},
        "bad_primes": sorted(R),
        "hasse_weil_violations": [
            s.p for s in summaries if s.max_abs_a > hasse_weil_bound(g, s.p)
        ],
        "weil_b_violations": [
            s.p for s in summaries if s.max_abs_b is not None and g == 2 and s.max_abs_b > 6 * s.p
        ],
        "completed": completed,
    }
    if cfg.census and census_reports:
        verdict, value = stability_verdict([r.rounded for r in census_reports if r.p >= 1000] or [r.rounded for r in census_reports])
        manifest["census_verdict"] = {"verdict": verdict, "value": value}
    _atomic_write(paths["manifest"], json.dumps(manifest, indent=2) + "\n")
    return RunResult(family, cfg, series, summaries, census_reports, checkpoint, paths, manifest, completed)


def throughput_regressed(old_manifest: dict, new_manifest: dict, factor: float = 2.0) -> bool:
    """True if fibers/second dropped by more than ``factor``."""
    old, new = old_manifest.get("fibers_per_second"), new_manifest.get("fibers_per_second")
    if not old or not new:
        return False
    return new * factor < old


def _rel_close(a: float, b: float, rtol: float = RECOMPUTE_RTOL) -> bool:
    return a == b or abs(a - b) <= rtol * max(abs(a), abs(b))


@dataclass
class Report:
    text: str
    warnings: list[str]


def report(path: str) -> Report:
    """Summarise a checkpoint JSON or a per-prime CSV.

    For a checkpoint the sums are recomputed from its CSV and any relative
    disagreement above 1e-12 is reported as a warning.
    """
    warnings: list[str] = []
    lines: list[str] = []
    if path.endswith(".json"):
        try:
            with open(path, encoding="utf-8") as fh:
                cp = json.load(fh)
            X = int(cp["X"])
        except (OSError, ValueError, KeyError) as exc:
            raise CorruptArtifact(f"{path}: {exc}") from None
        lines.append(f"family {cp.get('family')}  X = {X}  mode {cp.get('mode')}")
        csv_path = os.path.join(os.path.dirname(path), cp["per_prime_csv"]) if cp.get("per_prime_csv") else None
        values = {k: cp[k] for k in ("S", "T", "theta")}
        if csv_path and os.path.exists(csv_path):
            series = EstimateSeries()
            for s in read_prime_csv(csv_path):
                if s.p > X:
                    break
                cesaro_update(series, s)
            fresh = {"S": series.S(X), "T": series.T(X), "theta": series.theta(X)}
            for k, v in fresh.items():
                if not _rel_close(v, values[k]):
                    warnings.append(f"{k}: checkpoint {values[k]!r} but CSV recomputes {v!r}")
        elif csv_path:
            warnings.append(f"per-prime CSV {csv_path} not found; sums not recomputed")
        lines += [
            f"S(X)     = {values['S']:.6f}",
            f"T(X)     = {values['T']:.6f}" + (f"  (B terms for p <= {cp['b_cutoff']})" if cp.get("b_cutoff") and cp["b_cutoff"] < cp.get("state", {}).get("last_p", 0) else ""),
            f"theta(X) = {values['theta']:.6f}",
        ]
        if cp.get("mode") == "combined" and cp.get("T_complete") is not None:
            lines.append(f"combined raw = S + T_complete - ns_AK = {cp['raw']:.6f}  (T_complete = {cp['T_complete']:.6f})")
        if cp.get("resA_grid"):
            lines.append("Dirichlet resA grid " + _fmt_grid(cp.get("s_grid_A"), cp["resA_grid"]) + f" -> {cp['resA_est']:.4f}")
        if cp.get("resB_grid"):
            lines.append("Dirichlet resB grid " + _fmt_grid(cp.get("s_grid_B"), cp["resB_grid"]) + f" -> {cp['resB_est']:.4f}")
        lines.append(f"estimated rank {cp['rounded']} (gap {cp['gap']:.2f})")
        lines.append("convergence rate unknown: finite-X tolerances are empirical")
        census_csv = cp.get("census_csv")
        if census_csv:
            cpath = os.path.join(os.path.dirname(path), census_csv)
            if os.path.exists(cpath):
                lines.append(_census_summary(cpath))
    else:
        rows = read_prime_csv(path)
        series = EstimateSeries()
        for s in rows:
            cesaro_update(series, s)
        X = series.last_p
        lines += [
            f"{len(rows)} primes up to {X}",
            f"S(X)     = {series.S(X):.6f}",
            f"T(X)     = {series.T(X):.6f}",
            f"theta(X) = {series.theta(X):.6f}",
        ]
        raw = series.S(X)
        lines.append(f"estimated rank {round(raw)} (gap {abs(raw - round(raw)):.2f}) [elliptic mode, X = last prime]")
    for w in warnings:
        log.warning(w)
        lines.append("WARNING: " + w)
    return Report("\n".join(lines), warnings)


def _fmt_grid(grid, values) -> str:
    if not grid:
        return " ".join(f"{v:.4f}" for v in values)
    return " ".join(f"{s:g}:{v:.4f}" for s, v in zip(grid, values))


def _census_summary(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        rows = [line.rstrip("\n").split(",") for line in fh.readlines()[1:] if line.strip()]
    if not rows:
        return "census: no rows"
    rounded = [int(r[4]) for r in rows if r[4] != ""]
    verdict, value = stability_verdict(rounded)
    fails = sum(1 for r in rows if r[5] == "false")
    worst = max(abs(float(r[3])) for r in rows if r[3] != "")
    return f"census: {len(rows)} primes, max |inferred trace| {worst:.4f}, verdict {verdict} ({value}), crosscheck failures {fails}"
