"""One-parameter hyperelliptic families y^2 = f(x, t) over Q.

A family is stored as integer coefficient lists: ``coeffs[j]`` holds the
ascending t-coefficients of c_j(t), where f(x, t) = sum_j c_j(t) x^j.
The fibration is the (Jacobian of the) curve family over the t-line, with
the point at infinity of each fiber as the zero section.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import gcd
from typing import Optional, Sequence

import numpy as np
import sympy

from . import _kernels
from .errors import BadPrime, DegenerateFamily, MalformedConfig
from .primes import PrimeFieldCtx, build_ctx, sieve_primes

_X, _T = sympy.symbols("x t")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _trim(c: Sequence[int]) -> tuple[int, ...]:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(int(v) for v in c) or (0,)


@dataclass(frozen=True)
class HyperellipticFamily:
    name: str
    coeffs: tuple[tuple[int, ...], ...]
    trace_trivial_asserted: bool = True
    ns_AK_rank_asserted: int = 1
    second_chart: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(_trim(c) for c in self.coeffs))
        if self.second_chart is not None:
            object.__setattr__(
                self, "second_chart", tuple(_trim(c) for c in self.second_chart)
            )

    @property
    def x_degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def genus(self) -> int:
        return (self.x_degree - 1) // 2

    @cached_property
    def poly(self) -> sympy.Expr:
        return sum(
            sum(c * _T**k for k, c in enumerate(cj)) * _X**j
            for j, cj in enumerate(self.coeffs)
        )

    def fiber(self, t: int) -> list[int]:
        """Integer coefficients (ascending in x) of f(x, t) at an integer t."""
        return [sum(c * t**k for k, c in enumerate(cj)) for cj in self.coeffs]

    def to_config(self) -> dict[str, str]:
        cfg = {
            "name": self.name,
            "degree_x": str(self.x_degree),
            "trace_trivial": "true" if self.trace_trivial_asserted else "false",
            "ns_ak_rank": str(self.ns_AK_rank_asserted),
        }
        for j, cj in enumerate(self.coeffs):
            cfg[f"coeff.{j}"] = ",".join(map(str, cj))
        if self.second_chart is not None:
            for j, cj in enumerate(self.second_chart):
                cfg[f"chart2.coeff.{j}"] = ",".join(map(str, cj))
        return cfg

    def fingerprint(self) -> str:
        """Hash of the canonical config; independent of key order in the source file."""
        blob = json.dumps(self.to_config(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_int_list(key: str, value: str) -> tuple[int, ...]:
    try:
        return tuple(int(v.strip()) for v in value.split(",") if v.strip() != "")
    except ValueError:
        raise MalformedConfig(f"{key}: coefficients must be integers, got {value!r}") from None


def parse_family(config_text: str) -> HyperellipticFamily:
    """Parse an INI-style family description and validate it over Q(t).

    The section header is optional. Required keys: ``name``, ``degree_x``
    and ``coeff.<j>`` for 0 <= j <= degree_x.
    """
    parser = configparser.ConfigParser(interpolation=None)
    text = config_text
    if not text.lstrip().startswith("["):
        text = "[family]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise MalformedConfig(str(exc)) from None
    sections = parser.sections()
    if len(sections) != 1:
        raise MalformedConfig(f"expected exactly one section, found {sections}")
    sec = parser[sections[0]]

    for key in ("name", "degree_x"):
        if key not in sec:
            raise MalformedConfig(f"missing key {key!r}")
    try:
        D = int(sec["degree_x"])
    except ValueError:
        raise MalformedConfig("degree_x must be an integer") from None
    if D not in (3, 4, 5, 6):
        raise MalformedConfig(f"degree_x must be in 3..6, got {D}")

    coeffs = []
    for j in range(D + 1):
        key = f"coeff.{j}"
        if key not in sec:
            raise MalformedConfig(f"missing key {key!r}")
        coeffs.append(_parse_int_list(key, sec[key]) or (0,))
    extra = [k for k in sec if k.startswith("coeff.") and k not in {f"coeff.{j}" for j in range(D + 1)}]
    if extra:
        raise MalformedConfig(f"coefficient keys beyond degree_x: {extra}")

    chart2 = None
    if any(k.startswith("chart2.coeff.") for k in sec):
        chart2 = []
        for j in range(D + 1):
            key = f"chart2.coeff.{j}"
            chart2.append(_parse_int_list(key, sec.get(key, "0")) or (0,))

    trivial = sec.get("trace_trivial", "true").strip().lower()
    if trivial not in _TRUE | _FALSE:
        raise MalformedConfig(f"trace_trivial must be a boolean, got {trivial!r}")
    try:
        ns_ak = int(sec.get("ns_ak_rank", "1"))
    except ValueError:
        raise MalformedConfig("ns_ak_rank must be an integer") from None
    if ns_ak < 0:
        raise MalformedConfig("ns_ak_rank must be non-negative")

    family = HyperellipticFamily(
        name=sec["name"].strip(),
        coeffs=tuple(coeffs),
        trace_trivial_asserted=trivial in _TRUE,
        ns_AK_rank_asserted=ns_ak,
        second_chart=tuple(chart2) if chart2 else None,
    )
    validate(family, declared_degree=D)
    return family


def validate(family: HyperellipticFamily, declared_degree: Optional[int] = None) -> None:
    D = len(family.coeffs) - 1 if declared_degree is None else declared_degree
    if family.x_degree != D or all(c == 0 for c in family.coeffs[-1]):
        raise DegenerateFamily(f"{family.name}: leading coefficient c_{D}(t) is identically zero")
    f = sympy.Poly(family.poly, _X, domain=sympy.QQ.frac_field(_T))
    if sympy.degree(sympy.gcd(f, f.diff(_X))) > 0:
        raise DegenerateFamily(f"{family.name}: f(x, t) is not squarefree in x over Q(t)")


@lru_cache(maxsize=64)
def discriminant_poly(family: HyperellipticFamily) -> tuple[int, ...]:
    """disc_x f(x, t) in Z[t], ascending coefficients.

    Normalised as (-1)^(D(D-1)/2) Res_x(f, f_x) / c_D(t), with no extra
    constant factor (so x^3 + a x + b gives -4a^3 - 27b^2).
    """
    disc = sympy.discriminant(sympy.Poly(family.poly, _X), _X)
    dp = sympy.Poly(disc, _T)
    return _trim(int(c) for c in reversed(dp.all_coeffs()))


def _prime_factors(n: int) -> set[int]:
    return set(sympy.factorint(abs(n))) if abs(n) > 1 else set()


def _content(c: Sequence[int]) -> int:
    g = 0
    for v in c:
        g = gcd(g, int(v))
    return g


def bad_primes(family: HyperellipticFamily, x_max: int) -> frozenset[int]:
    """The excluded primes R intersected with [2, x_max].

    R holds 2 and 3, the primes dividing the content of c_D(t) or of the
    discriminant (every fiber degenerates), and every prime up to the largest
    prime factor of the discriminant's leading coefficient.
    """
    return frozenset(q for q in _excluded(family) if q <= x_max)


@lru_cache(maxsize=64)
def _excluded(family: HyperellipticFamily) -> frozenset[int]:
    disc = discriminant_poly(family)
    bad = {2, 3}
    bad |= _prime_factors(_content(family.coeffs[-1]))
    bad |= _prime_factors(_content(disc))
    lead = _prime_factors(disc[-1])
    if lead:
        bad |= set(sieve_primes(max(lead)))
    return frozenset(bad)


@dataclass(frozen=True, eq=False)
class FamilyModP:
    """A family reduced mod a good prime, with its singular fibers located."""

    family: HyperellipticFamily
    p: int
    ctx: PrimeFieldCtx
    table: np.ndarray
    delta_roots: tuple[int, ...]
    singular_mask: np.ndarray
    inf_coeffs: Optional[np.ndarray] = field(default=None)

    @property
    def n_delta(self) -> int:
        return len(self.delta_roots)

    @property
    def x_degree(self) -> int:
        return self.family.x_degree

    @property
    def genus(self) -> int:
        return self.family.genus

    @cached_property
    def affine_pass(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(singular flags, sum_x chi(f(x,t)), a_t) for every t in F_p."""
        return _kernels.prime_pass(self.table, self.x_degree, self.p, self.ctx.chi_table)

    def fiber_coeffs(self, t: int) -> np.ndarray:
        out = np.zeros(self.x_degree + 1, np.int64)
        _kernels.eval_coeffs(self.table, t % self.p, self.p, out)
        return out


def coeff_table(coeffs: Sequence[Sequence[int]], p: int) -> np.ndarray:
    width = max(len(c) for c in coeffs)
    tab = np.zeros((len(coeffs), width), dtype=np.int64)
    for j, cj in enumerate(coeffs):
        tab[j, : len(cj)] = [v % p for v in cj]
    return tab


def reduce_mod_p(
    family: HyperellipticFamily,
    p: int,
    ctx: Optional[PrimeFieldCtx] = None,
    *,
    allow_bad: bool = False,
) -> FamilyModP:
    """Reduce ``family`` mod p and mark the singular fibers t in F_p.

    A fiber is singular when f(., t) mod p drops degree or shares a factor
    with its x-derivative. ``allow_bad`` skips the R check (diagnostics only).
    """
    if not allow_bad and p in bad_primes(family, p):
        raise BadPrime(f"{p} is a bad prime for {family.name}")
    ctx = ctx if ctx is not None else build_ctx(p)
    table = coeff_table(family.coeffs, p)
    mask = _kernels.singular_flags(table, family.x_degree, p)
    roots = tuple(int(t) for t in np.flatnonzero(mask))
    inf = None
    if family.second_chart is not None:
        # fiber at t = infinity is the second chart at s = 0
        inf = np.array([cj[0] % p for cj in family.second_chart], dtype=np.int64)
    mask.setflags(write=False)
    return FamilyModP(family, p, ctx, table, roots, mask, inf)


def fiber_is_singular(coeffs: np.ndarray, p: int) -> bool:
    D = len(coeffs) - 1
    cs = np.asarray(coeffs, dtype=np.int64) % p
    return bool(_kernels.is_singular(cs, D, p, np.zeros(D + 1, np.int64), np.zeros(D + 1, np.int64)))


CORPUS_CONFIGS = {
    "legendre": """\
name = legendre
degree_x = 3
# y^2 = x (x - 1) (x - t)
coeff.0 = 0
coeff.1 = 0, 1
coeff.2 = -1, -1
coeff.3 = 1
""",
    "f1": """\
name = f1
degree_x = 3
# y^2 = x^3 + x + t^2, section (x, y) = (0, t)
coeff.0 = 0, 0, 1
coeff.1 = 1
coeff.2 = 0
coeff.3 = 1
""",
    "g2s": """\
name = g2s
degree_x = 5
# y^2 = x^5 + t x + 1
coeff.0 = 1
coeff.1 = 0, 1
coeff.2 = 0
coeff.3 = 0
coeff.4 = 0
coeff.5 = 1
""",
}


def corpus_family(name: str) -> HyperellipticFamily:
    try:
        return parse_family(CORPUS_CONFIGS[name])
    except KeyError:
        raise KeyError(f"unknown corpus family {name!r}; known: {sorted(CORPUS_CONFIGS)}") from None


def load_family(path_or_name: str) -> HyperellipticFamily:
    """Load a family from an INI file, or by corpus name (``legendre`` etc.)."""
    if path_or_name in CORPUS_CONFIGS and not os.path.exists(path_or_name):
        return corpus_family(path_or_name)
    try:
        with open(path_or_name, encoding="utf-8") as fh:
            return parse_family(fh.read())
    except FileNotFoundError:
        stem = os.path.splitext(os.path.basename(path_or_name))[0]
        if stem in CORPUS_CONFIGS:
            return corpus_family(stem)
        raise
