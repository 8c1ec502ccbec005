"""Prime enumeration and small finite-field arithmetic.

Everything here works with machine-word primes (p < 2**31) so that
products of two residues fit in a signed 64-bit integer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import BadPrime

P_LIMIT = 2**31


def sieve_primes(x_max: int) -> list[int]:
    """Return the primes in ``[2, x_max]`` in ascending order."""
    if x_max < 2:
        return []
    is_prime = np.ones(x_max + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for q in range(3, int(x_max**0.5) + 1, 2):
        if is_prime[q]:
            is_prime[q * q :: 2 * q] = False
    return np.flatnonzero(is_prime).tolist()


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    q = 3
    while q * q <= n:
        if n % q == 0:
            return False
        q += 2
    return True


@dataclass(frozen=True, eq=False)
class PrimeFieldCtx:
    """Lookup tables for arithmetic in F_p.

    ``chi_table[u]`` is the Legendre symbol (u/p) stored as int8,
    ``sq_table[u]`` is u^2 mod p, and ``nonresidue`` is the least
    quadratic non-residue, used as the radicand of F_{p^2} = F_p[sqrt(d)].
    """

    p: int
    chi_table: np.ndarray
    sq_table: np.ndarray
    nonresidue: int
    cube_table: Optional[np.ndarray] = field(default=None)

    def chi(self, u: int) -> int:
        return int(self.chi_table[u % self.p])


def build_ctx(p: int, with_cubes: bool = False) -> PrimeFieldCtx:
    if p == 2:
        raise BadPrime("p = 2: quadratic character counting needs an odd prime")
    if p >= P_LIMIT or not _is_prime(p):
        raise BadPrime(f"{p} is not an odd prime below 2**31")
    v = np.arange(p, dtype=np.int64)
    sq = (v * v) % p
    chi = np.full(p, -1, dtype=np.int8)
    chi[sq[1 : (p - 1) // 2 + 1]] = 1
    chi[0] = 0
    d = 2
    while chi[d] != -1:
        d += 1
    cubes = (sq * v) % p if with_cubes else None
    for arr in (chi, sq) + ((cubes,) if cubes is not None else ()):
        arr.setflags(write=False)
    return PrimeFieldCtx(p=p, chi_table=chi, sq_table=sq, nonresidue=d, cube_table=cubes)


class Fp2Elem(NamedTuple):
    """a + b*sqrt(d) in F_p[sqrt(d)], d the context's non-residue."""

    a: int
    b: int


def fp2(ctx: PrimeFieldCtx, a: int, b: int = 0) -> Fp2Elem:
    return Fp2Elem(a % ctx.p, b % ctx.p)


def fp2_add(ctx: PrimeFieldCtx, u: Fp2Elem, v: Fp2Elem) -> Fp2Elem:
    return Fp2Elem((u.a + v.a) % ctx.p, (u.b + v.b) % ctx.p)


def fp2_neg(ctx: PrimeFieldCtx, u: Fp2Elem) -> Fp2Elem:
    return Fp2Elem(-u.a % ctx.p, -u.b % ctx.p)


def fp2_mul(ctx: PrimeFieldCtx, u: Fp2Elem, v: Fp2Elem) -> Fp2Elem:
    p, d = ctx.p, ctx.nonresidue
    return Fp2Elem((u.a * v.a + d * u.b * v.b) % p, (u.a * v.b + u.b * v.a) % p)


def fp2_pow(ctx: PrimeFieldCtx, u: Fp2Elem, n: int) -> Fp2Elem:
    result = Fp2Elem(1, 0)
    base = u
    while n:
        if n & 1:
            result = fp2_mul(ctx, result, base)
        base = fp2_mul(ctx, base, base)
        n >>= 1
    return result


def fp2_conj(ctx: PrimeFieldCtx, u: Fp2Elem) -> Fp2Elem:
    """The Frobenius image u^p."""
    return Fp2Elem(u.a, -u.b % ctx.p)


def fp2_norm(ctx: PrimeFieldCtx, u: Fp2Elem) -> int:
    return (u.a * u.a - ctx.nonresidue * u.b * u.b) % ctx.p


def fp2_count_sqrt_classes(ctx: PrimeFieldCtx, u: Fp2Elem) -> int:
    """Number of y in F_{p^2} with y^2 = u (0, 1 or 2).

    Uses chi_{p^2}(u) = chi_p(Norm(u)).
    """
    if u.a % ctx.p == 0 and u.b % ctx.p == 0:
        return 1
    return 2 if ctx.chi(fp2_norm(ctx, u)) == 1 else 0


def fp2_elements(ctx: PrimeFieldCtx):
    p = ctx.p
    for a in range(p):
        for b in range(p):
            yield Fp2Elem(a, b)
