"""
Rank estimates from fibral averages

Two elliptic families over Q(t):

    legendre   y^2 = x (x - 1) (x - t)     rank 0
    f1         y^2 = x^3 + x + t^2          rank >= 1, section (0, t)

For each good prime p we sum the fiber traces a_t(p) over t in F_p, then
average -A_p log p over p <= X. The Cesaro mean S(X) drifts toward the
Mordell-Weil rank. Run with

    python3 demos/rank_walkthrough.py [X]
"""
import sys
import tempfile

from nagao_rank import corpus_family, fiber_traces, reduce_mod_p, rank_estimate
from nagao_rank.runner import RunConfig, run

X = int(sys.argv[1]) if len(sys.argv) > 1 else 3000

# one prime by hand first
fam = corpus_family("f1")
fp = reduce_mod_p(fam, 13)
traces = [ft.a for ft in fiber_traces(fp, compute_b=False)]
print("f1 at p = 13, fiber traces a_t:", traces)
print("  A_13 =", sum(traces) / 13, "(negative sums push the rank up)")
print()

for name in ("legendre", "f1"):
    cfg = RunConfig(family=name, x_max=X, workers=1, out_dir=tempfile.mkdtemp())
    res = run(cfg)
    est = rank_estimate(res.series, res.family, X=X)
    print(f"{name:9s} S({X}) = {res.series.S(X):+.4f}  ->  rank {est.rounded} (gap {est.gap:.3f})")
    # watch the mean settle
    for x in (X // 8, X // 4, X // 2, X):
        print(f"    S({x:5d}) = {res.series.S(x):+.4f}")
