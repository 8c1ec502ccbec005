"""Compiled inner loops.

Coefficient tables are int64 arrays of shape (D + 1, L): row j holds the
ascending t-coefficients of c_j(t), already reduced mod p. All residues
stay in [0, p) and p < 2**31, so every product fits in int64.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _powmod(a, e, p):
    r = 1
    a %= p
    while e > 0:
        if e & 1:
            r = (r * a) % p
        a = (a * a) % p
        e >>= 1
    return r


@njit(cache=True)
def eval_coeffs(table, t, p, out):
    nrows, ncols = table.shape
    for j in range(nrows):
        acc = 0
        for k in range(ncols - 1, -1, -1):
            acc = (acc * t + table[j, k]) % p
        out[j] = acc


@njit(cache=True)
def poly_eval(cs, D, x, p):
    acc = 0
    for j in range(D, -1, -1):
        acc = (acc * x + cs[j]) % p
    return acc


@njit(cache=True)
def _strip(a, deg):
    while deg >= 0 and a[deg] == 0:
        deg -= 1
    return deg


@njit(cache=True)
def is_singular(cs, D, p, wa, wb):
    """True iff the degree drops or gcd(f, f') is non-constant in F_p[x]."""
    if cs[D] == 0:
        return True
    for j in range(D + 1):
        wa[j] = cs[j]
        wb[j] = 0
    for j in range(1, D + 1):
        wb[j - 1] = (j * cs[j]) % p
    a = wa
    b = wb
    da = D
    db = _strip(b, D - 1)
    if db < 0:
        # f' = 0: f is a p-th power
        return True
    while db >= 0:
        inv = _powmod(b[db], p - 2, p)
        while da >= db:
            c = (a[da] * inv) % p
            shift = da - db
            for k in range(db + 1):
                a[shift + k] = (a[shift + k] - c * b[k]) % p
            da = _strip(a, da - 1)
        a, b = b, a
        da, db = db, da
    return da > 0


@njit(cache=True)
def _init_diffs(cs, D, p, diff):
    for k in range(D + 1):
        diff[k] = poly_eval(cs, D, k, p)
    for level in range(1, D + 1):
        for k in range(D, level - 1, -1):
            diff[k] = (diff[k] - diff[k - 1] + p) % p


@njit(cache=True)
def char_sum(cs, D, p, chi, diff):
    """Sum of chi(f(x)) over x in F_p, walking f by forward differences."""
    _init_diffs(cs, D, p, diff)
    s = 0
    for _ in range(p):
        s += chi[diff[0]]
        for k in range(D):
            v = diff[k] + diff[k + 1]
            if v >= p:
                v -= p
            diff[k] = v
    return s


@njit(cache=True)
def _diff_columns(table, D, p, ts):
    """Forward-difference registers of f(., t) for each t, one column per t."""
    n = ts.shape[0]
    d = np.zeros((D + 1, n), np.int32)
    cs = np.zeros(D + 1, np.int64)
    col = np.zeros(D + 1, np.int64)
    for i in range(n):
        eval_coeffs(table, ts[i], p, cs)
        _init_diffs(cs, D, p, col)
        for k in range(D + 1):
            d[k, i] = col[k]
    return d


@njit(cache=True)
def _walk_columns(d, D, p, chi, s):
    # x-major: every fiber advances one step per pass, so the register
    # updates vectorize across fibers
    n = d.shape[1]
    p32 = np.int32(p)
    for _ in range(p):
        row = d[0]
        for i in range(n):
            s[i] += chi[row[i]]
        for k in range(D):
            a = d[k]
            b = d[k + 1]
            for i in range(n):
                v = a[i] + b[i]
                a[i] = v - p32 if v >= p32 else v


@njit(cache=True)
def all_char_sums(table, D, p, chi):
    """sum_x chi(f(x,t)) for every t in F_p (singular fibers included)."""
    ts = np.arange(p)
    d = _diff_columns(table, D, p, ts)
    s = np.zeros(p, np.int32)
    _walk_columns(d, D, p, chi, s)
    return s.astype(np.int64)


@njit(cache=True)
def top_coeffs(table, D, p):
    out = np.zeros(p, np.int64)
    cs = np.zeros(D + 1, np.int64)
    for t in range(p):
        eval_coeffs(table, t, p, cs)
        out[t] = cs[D]
    return out


@njit(cache=True)
def prime_pass(table, D, p, chi):
    """Singular flags, raw character sums and H^1 traces for every t in F_p.

    a_t = -sum_x chi(f(x,t)) - [D even] chi(c_D(t)); singular fibers get 0.
    """
    sing = singular_flags(table, D, p)
    sums = all_char_sums(table, D, p, chi)
    a = np.zeros(p, np.int64)
    top = top_coeffs(table, D, p)
    for t in range(p):
        if sing[t] == 0:
            s = sums[t]
            if D % 2 == 0:
                s += chi[top[t]]
            a[t] = -s
    return sing, sums, a


@njit(cache=True)
def singular_flags(table, D, p):
    sing = np.zeros(p, np.int8)
    cs = np.zeros(D + 1, np.int64)
    wa = np.zeros(D + 1, np.int64)
    wb = np.zeros(D + 1, np.int64)
    for t in range(p):
        eval_coeffs(table, t, p, cs)
        if is_singular(cs, D, p, wa, wb):
            sing[t] = 1
    return sing


@njit(cache=True)
def fiber_char_sums(table, D, p, chi, ts):
    out = np.zeros(ts.shape[0], np.int64)
    cs = np.zeros(D + 1, np.int64)
    diff = np.zeros(D + 1, np.int64)
    for i in range(ts.shape[0]):
        eval_coeffs(table, ts[i], p, cs)
        out[i] = char_sum(cs, D, p, chi, diff)
    return out


@njit(cache=True)
def fp2_char_sum(cs, D, p, d, chi, sq, dsq, du, dv):
    """Sum of chi_{p^2}(f(x)) over x in F_{p^2} = F_p[w], w^2 = d, one fiber.

    Writes x = a + b*w. For fixed b, f(a + b*w) is a polynomial in a and is
    walked by forward differences; chi_{p^2}(u + v*w) = chi(u^2 - d v^2).
    Conjugate pairs b, -b give equal norms, so only b <= (p-1)/2 is walked.
    """
    total = 0
    for b in range((p - 1) // 2 + 1):
        _fp2_init(cs, D, p, d, b, du, dv)
        s = 0
        for _ in range(p):
            n = sq[du[0]] - dsq[dv[0]]
            if n < 0:
                n += p
            s += chi[n]
            for k in range(D):
                x = du[k] + du[k + 1]
                if x >= p:
                    x -= p
                du[k] = x
                y = dv[k] + dv[k + 1]
                if y >= p:
                    y -= p
                dv[k] = y
        total += s if b == 0 else 2 * s
    return total


@njit(cache=True)
def _fp2_init(cs, D, p, d, b, du, dv):
    bd = (b * d) % p
    for k in range(D + 1):
        u = 0
        v = 0
        for j in range(D, -1, -1):
            nu = (u * k + (v * bd) % p) % p
            nv = (u * b + v * k) % p
            u = (nu + cs[j]) % p
            v = nv
        du[k] = u
        dv[k] = v
    for level in range(1, D + 1):
        for k in range(D, level - 1, -1):
            du[k] = (du[k] - du[k - 1] + p) % p
            dv[k] = (dv[k] - dv[k - 1] + p) % p


@njit(cache=True)
def fp2_pass(table, D, p, d, chi, sq, ts):
    """#C_t(F_{p^2}) for each t in ``ts`` (all assumed good fibers).

    Same walk as ``fp2_char_sum`` but with fibers as columns.
    """
    n = ts.shape[0]
    dsq = np.zeros(p, np.int32)
    sq32 = np.zeros(p, np.int32)
    for v in range(p):
        dsq[v] = (d * sq[v]) % p
        sq32[v] = sq[v]
    cs = np.zeros(D + 1, np.int64)
    cu = np.zeros(D + 1, np.int64)
    cv = np.zeros(D + 1, np.int64)
    du = np.zeros((D + 1, n), np.int32)
    dv = np.zeros((D + 1, n), np.int32)
    total = np.zeros(n, np.int64)
    s = np.zeros(n, np.int32)
    p32 = np.int32(p)
    for b in range((p - 1) // 2 + 1):
        for i in range(n):
            eval_coeffs(table, ts[i], p, cs)
            _fp2_init(cs, D, p, d, b, cu, cv)
            for k in range(D + 1):
                du[k, i] = cu[k]
                dv[k, i] = cv[k]
            s[i] = 0
        for _ in range(p):
            u0 = du[0]
            v0 = dv[0]
            for i in range(n):
                m = sq32[u0[i]] - dsq[v0[i]]
                if m < 0:
                    m += p32
                s[i] += chi[m]
            for k in range(D):
                a = du[k]
                a1 = du[k + 1]
                c = dv[k]
                c1 = dv[k + 1]
                for i in range(n):
                    x = a[i] + a1[i]
                    a[i] = x - p32 if x >= p32 else x
                    y = c[i] + c1[i]
                    c[i] = y - p32 if y >= p32 else y
        w = 1 if b == 0 else 2
        for i in range(n):
            total[i] += w * s[i]
    out = np.zeros(n, np.int64)
    # c_D(t) lies in F_p^*, hence is a square in F_{p^2}
    inf = 1 if D % 2 == 1 else 2
    for i in range(n):
        out[i] = p * p + total[i] + inf
    return out


@njit(cache=True)
def direct_fiber_counts(table, D, p):
    """Projective fiber counts by listing y for every (t, x).

    Independent of the character table and of the difference walk: a
    y-multiplicity table is built by squaring every y, and f(x, t) is
    evaluated from tables of x^j. Points at infinity follow
    ``traces.infinity_points``.
    """
    nsq = np.zeros(p, np.int64)
    for y in range(p):
        nsq[(y * y) % p] += 1
    pw = np.ones((D + 1, p), np.int64)
    for j in range(1, D + 1):
        for x in range(p):
            pw[j, x] = (pw[j - 1, x] * x) % p
    out = np.zeros(p, np.int64)
    cs = np.zeros(D + 1, np.int64)
    vals = np.zeros(p, np.int64)
    for t in range(p):
        eval_coeffs(table, t, p, cs)
        for x in range(p):
            vals[x] = cs[0]
        for j in range(1, D + 1):
            c = cs[j]
            row = pw[j]
            for x in range(p):
                vals[x] += c * row[x]
        n = 0
        for x in range(p):
            n += nsq[vals[x] % p]
        if D == 3:
            n += 1 if cs[3] != 0 else p + 1
        elif D % 2 == 0:
            n += nsq[cs[D]]
        else:
            n += 1
        out[t] = n
    return out


@njit(cache=True)
def triple_loop_fiber_counts(table, D, p):
    """Same as ``direct_fiber_counts`` but tests y^2 == f(x,t) for every triple."""
    out = np.zeros(p, np.int64)
    cs = np.zeros(D + 1, np.int64)
    for t in range(p):
        eval_coeffs(table, t, p, cs)
        n = 0
        for x in range(p):
            fx = poly_eval(cs, D, x, p)
            for y in range(p):
                if (y * y) % p == fx:
                    n += 1
        if D == 3:
            n += 1 if cs[3] != 0 else p + 1
        elif D % 2 == 0:
            for y in range(p):
                if (y * y) % p == cs[D]:
                    n += 1
        else:
            n += 1
        out[t] = n
    return out
