"""
Genus-2 family in combined mode

    g2s   y^2 = x^5 + t x + 1

For genus 2 the first-moment sum S only sees H^1. The combined estimate adds
the second-moment term from b_t(p) = (t1^2 - t2) / 2, which needs counts over
F_{p^2} and therefore costs O(p^3) per prime. That pass stops at b_max and the
B average is read at that cutoff, then the rank of NS(A/K) is subtracted.
"""
import tempfile

from nagao_rank import corpus_family, rank_estimate
from nagao_rank.runner import RunConfig, run

X, BMAX = 2000, 200

fam = corpus_family("g2s")
res = run(RunConfig(family="g2s", x_max=X, b_max=BMAX, workers=1, out_dir=tempfile.mkdtemp()))
s = res.series

print(f"S({X})          = {s.S(X):.4f}")
print(f"T({X})          = {s.T(X):.4f}   (B sum over p <= {s.b_cutoff}, divided by X)")
print(f"T at cutoff     = {s.T_complete(X):.4f}")
print(f"rank NS(A/K)    = {fam.ns_AK_rank_asserted} (asserted in the family config)")
est = rank_estimate(s, fam, X=X)
print(f"combined raw    = {est.raw:.4f}  ->  rank {est.rounded}")
