"""Slow, independent reference computations used by the tests.

Nothing here imports from nagao_rank; everything is brute force in plain
Python so it can be trusted by inspection.
"""
from __future__ import annotations

from itertools import product
from math import isqrt, log


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


def primes_upto(n: int) -> list[int]:
    return [k for k in range(2, n + 1) if is_prime(k)]


def squares_mod(p: int) -> set[int]:
    return {(v * v) % p for v in range(1, p)}


def poly_at(coeffs, x, p):
    return sum(c * pow(x, j, p) for j, c in enumerate(coeffs)) % p


def fiber_coeffs(family_coeffs, t, p):
    """Ascending x-coefficients of f(x, t) mod p from nested integer lists."""
    return [sum(c * pow(t, i, p) for i, c in enumerate(cj)) % p for cj in family_coeffs]


def sqrt_multiplicity(p: int) -> list[int]:
    """n[v] = #{y in F_p : y^2 = v}, found by squaring every y."""
    n = [0] * p
    for y in range(p):
        n[(y * y) % p] += 1
    return n


def naive_affine_count(coeffs, p) -> int:
    """#{(x, y) in F_p^2 : y^2 = f(x)}, listing the y for each x."""
    n = sqrt_multiplicity(p)
    return sum(n[poly_at(coeffs, x, p)] for x in range(p))


def naive_infinity(coeffs, p) -> int:
    """Points at infinity: odd degree -> 1, even -> 1 + chi(lead), plane cubic with
    vanishing x^3 term -> the line z = 0 (p + 1 points)."""
    D = len(coeffs) - 1
    top = coeffs[D] % p
    if D == 3 and top == 0:
        return p + 1
    if D % 2 == 0:
        return 0 if top == 0 else (2 if top in squares_mod(p) else 0)
    return 1


def naive_projective_count(coeffs, p) -> int:
    return naive_affine_count(coeffs, p) + naive_infinity(coeffs, p)


# --- polynomial arithmetic over F_p, lists ascending, for squarefree tests ---

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a, b, p):
    a, b = _trim(a), _trim(b)
    inv = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        q = a[-1] * inv % p
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - q * c) % p
        a = _trim(a)
    return a


def poly_gcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_mod(a, b, p)
    return a


def is_singular_fiber(coeffs, p) -> bool:
    """Degree drop, or gcd(f, f') nontrivial."""
    D = len(coeffs) - 1
    f = [c % p for c in coeffs]
    if f[D] == 0:
        return True
    df = [(j * f[j]) % p for j in range(1, D + 1)]
    if not _trim(df):
        return True
    return len(poly_gcd(f, df, p)) > 1


# --- F_{p^2} as pairs over F_p[s], s^2 = d ---

def nonresidue(p: int) -> int:
    sq = squares_mod(p)
    return next(d for d in range(2, p) if d not in sq)


def fp2_elements(p):
    return list(product(range(p), repeat=2))


def fp2_mul(u, v, p, d):
    a, b = u
    c, e = v
    return ((a * c + d * b * e) % p, (a * e + b * c) % p)


def fp2_add(u, v, p):
    return ((u[0] + v[0]) % p, (u[1] + v[1]) % p)


def fp2_poly_at(coeffs, x, p, d):
    acc = (0, 0)
    for c in reversed(coeffs):
        acc = fp2_add(fp2_mul(acc, x, p, d), (c % p, 0), p)
    return acc


def fp2_square_counts(p):
    d = nonresidue(p)
    counts = {}
    for y in fp2_elements(p):
        s = fp2_mul(y, y, p, d)
        counts[s] = counts.get(s, 0) + 1
    return counts


def naive_count_fp2(coeffs, p) -> int:
    """#C(F_{p^2}) for y^2 = f(x), odd degree (one point at infinity)
    or even degree with the two-point chart at infinity."""
    d = nonresidue(p)
    sq = fp2_square_counts(p)
    n = 0
    for x in fp2_elements(p):
        n += sq.get(fp2_poly_at(coeffs, x, p, d), 0)
    D = len(coeffs) - 1
    # the leading coefficient lies in F_p, hence is a square in F_{p^2}
    return n + (1 if D % 2 else 2)


# --- Jacobian order of y^2 = f(x), deg f = 5, by Mumford representations ---

def jacobian_order_mumford(coeffs, p) -> int:
    """Count reduced divisors (u, v): u monic, deg u <= 2, deg v < deg u, u | v^2 - f."""
    assert len(coeffs) == 6
    f = [c % p for c in coeffs]
    n = 1  # u = 1
    for a in range(p):  # u = x - a
        fa = poly_at(f, a, p)
        n += sum(1 for v in range(p) if (v * v - fa) % p == 0)
    for u0, u1 in product(range(p), repeat=2):  # u = x^2 + u1 x + u0
        u = [u0, u1, 1]
        for v0, v1 in product(range(p), repeat=2):
            v2 = [(v0 * v0) % p, (2 * v0 * v1) % p, (v1 * v1) % p]
            w = [(v2[i] if i < 3 else 0) - f[i] for i in range(6)]
            if not poly_mod([c % p for c in w], u, p):
                n += 1
    return n


def chebyshev_theta(X: int) -> float:
    """sum_{p <= X} log p by trial division, plain floats."""
    return sum(log(q) for q in primes_upto(X))


# --- elliptic curve y^2 = x^3 + a x + b over Q, affine points or None for O ---

def ec_add(P, Q, a):
    from fractions import Fraction

    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and y1 == -y2:
        return None
    if P == Q:
        lam = Fraction(3 * x1 * x1 + a, 2 * y1)
    else:
        lam = Fraction(y2 - y1, x2 - x1)
    x3 = lam * lam - x1 - x2
    return (x3, lam * (x1 - x3) - y1)


def ec_multiples(P, a, n):
    """[P, 2P, ..., nP]."""
    out, Q = [], None
    for _ in range(n):
        Q = ec_add(Q, P, a)
        out.append(Q)
    return out
