"""Outward-rounded interval arithmetic and verified linear algebra.

Soundness model
---------------
IEEE-754 doubles with round-to-nearest are the substrate.  Every elementary
operation is correctly rounded, so the exact real result lies within one ulp
of the computed one; endpoints are pushed outward with ``nextafter``.  Sums
use the exact TwoSum error term, so bumps happen only when an addition is
actually inexact (keeping exact finite-series arithmetic exact).  Reductions
(sums, dot products, matrix products) run at numpy speed and are corrected
with the standard a-priori bound

    |fl(sum x_i) - sum x_i| <= gamma_n * sum |x_i|,   gamma_n = n*u/(1-n*u),

inflated by a documented safety factor.  Transcendentals (exp, log, sqrt,
pow) are bumped by ``_TRANS_ULPS`` ulps on each side, covering libm
implementations that are faithful but not correctly rounded.

All values are immutable after construction; nothing here touches global
rounding state, so everything is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "Interval",
    "IntervalVector",
    "IntervalMatrix",
    "EMPTY",
    "PI",
    "IntervalError",
    "IntervalDivisionError",
    "IntervalRangeError",
    "VerificationError",
    "verified_inverse",
]

_U = 2.0 ** -53          # unit roundoff
_INF = math.inf
_TRANS_ULPS = 3          # outward bumps applied around libm exp/log/pow
_SUM_SAFETY = 4          # extra terms granted in gamma_n for reductions


class IntervalError(ArithmeticError):
    """Invalid interval operation."""


class IntervalDivisionError(IntervalError):
    """Division by an interval containing zero."""


class IntervalRangeError(IntervalError):
    """Operation left the representable finite range (e.g. exp overflow)."""


class VerificationError(RuntimeError):
    """A posteriori verification (matrix inverse, enclosure) failed."""


# ---------------------------------------------------------------------------
# directed rounding helpers (scalar and array)
# ---------------------------------------------------------------------------

def _up(x):
    return np.nextafter(x, _INF)


def _dn(x):
    return np.nextafter(x, -_INF)


def _bump_steps(x, steps: int, direction: float):
    for _ in range(steps):
        x = np.nextafter(x, direction)
    return x


def _up_nz(x):
    """Bump up, but keep exact zeros exact."""
    return np.where(np.asarray(x) == 0.0, 0.0, _up(x))


def _gamma(n: int) -> float:
    """Over-estimate of the summation constant gamma_n, safe to use in
    round-to-nearest float arithmetic."""
    t = (n + _SUM_SAFETY) * _U
    if t >= 0.5:
        raise IntervalRangeError(f"reduction too long for gamma bound: {n}")
    return (t / (1.0 - t)) * (1.0 + 8.0 * _U)


def _add_lo(a, b):
    """Lower bound of a+b: exact when the float addition is exact (TwoSum)."""
    s = a + b
    bv = s - a
    av = s - bv
    err = (a - av) + (b - bv)
    return np.where(err < 0.0, _dn(s), s)


def _add_hi(a, b):
    s = a + b
    bv = s - a
    av = s - bv
    err = (a - av) + (b - bv)
    return np.where(err > 0.0, _up(s), s)


_TINY = 2.2250738585072014e-308  # smallest positive normal double


def _pow2(x):
    with np.errstate(all="ignore"):
        m, _ = np.frexp(x)
    return np.abs(m) == 0.5


def _mul_dn(a, b):
    """Lower bound of the float product a*b (exact-zero, power-of-two and
    sign preserving)."""
    p = a * b
    exact_zero = (a == 0.0) | (b == 0.0)
    exact = (_pow2(a) | _pow2(b)) & (np.abs(p) >= _TINY)
    out = np.where(exact, p, _dn(p))
    # an underflowed same-sign product is positive: do not bump below zero
    pos = ((a > 0.0) & (b > 0.0)) | ((a < 0.0) & (b < 0.0))
    out = np.where((p == 0.0) & pos, 0.0, out)
    return np.where(exact_zero, 0.0, out)


def _mul_up(a, b):
    p = a * b
    exact_zero = (a == 0.0) | (b == 0.0)
    exact = (_pow2(a) | _pow2(b)) & (np.abs(p) >= _TINY)
    out = np.where(exact, p, _up(p))
    neg = ((a > 0.0) & (b < 0.0)) | ((a < 0.0) & (b > 0.0))
    out = np.where((p == 0.0) & neg, 0.0, out)
    return np.where(exact_zero, 0.0, out)


def _imul_arrays(alo, ahi, blo, bhi):
    """Elementwise interval product of (lo,hi) arrays."""
    with np.errstate(all="ignore"):
        cands_dn = np.stack([
            _mul_dn(alo, blo), _mul_dn(alo, bhi),
            _mul_dn(ahi, blo), _mul_dn(ahi, bhi),
        ])
        cands_up = np.stack([
            _mul_up(alo, blo), _mul_up(alo, bhi),
            _mul_up(ahi, blo), _mul_up(ahi, bhi),
        ])
    return cands_dn.min(axis=0), cands_up.max(axis=0)


def _imul_arrays_fast(alo, ahi, blo, bhi):
    """Interval product without the power-of-two exactness probe (hot paths).

    Keeps exact zeros exact and never bumps an underflowed product across
    zero; pays one ulp on every other product."""
    with np.errstate(all="ignore"):
        ll = alo * blo
        lh = alo * bhi
        hl = ahi * blo
        hh = ahi * bhi
        lo = np.minimum(np.minimum(ll, lh), np.minimum(hl, hh))
        hi = np.maximum(np.maximum(ll, lh), np.maximum(hl, hh))
        zero = ((alo == 0.0) & (ahi == 0.0)) | ((blo == 0.0) & (bhi == 0.0))
        out_lo = np.where(zero, 0.0, _dn(lo))
        out_hi = np.where(zero, 0.0, _up(hi))
    return out_lo, out_hi


def _div_dn(a, b):
    q = a / b
    exact = (a == 0.0) | (np.abs(np.frexp(b)[0]) == 0.5) & (np.abs(q) >= 2.3e-308)
    out = _dn(q)
    pos = ((a > 0.0) & (b > 0.0)) | ((a < 0.0) & (b < 0.0))
    out = np.where((q == 0.0) & pos, 0.0, out)
    return np.where(exact, q, out)


def _div_up(a, b):
    q = a / b
    exact = (a == 0.0) | (np.abs(np.frexp(b)[0]) == 0.5) & (np.abs(q) >= 2.3e-308)
    out = _up(q)
    neg = ((a > 0.0) & (b < 0.0)) | ((a < 0.0) & (b > 0.0))
    out = np.where((q == 0.0) & neg, 0.0, out)
    return np.where(exact, q, out)


def _idiv_arrays(alo, ahi, blo, bhi):
    if np.any((blo <= 0.0) & (bhi >= 0.0)):
        raise IntervalDivisionError("division by an interval containing zero")
    with np.errstate(all="ignore"):
        cands_dn = np.stack([
            _div_dn(alo, blo), _div_dn(alo, bhi),
            _div_dn(ahi, blo), _div_dn(ahi, bhi),
        ])
        cands_up = np.stack([
            _div_up(alo, blo), _div_up(alo, bhi),
            _div_up(ahi, blo), _div_up(ahi, bhi),
        ])
    return cands_dn.min(axis=0), cands_up.max(axis=0)


def _isum_arrays(lo, hi, axis=-1):
    """Interval sum reduction with the gamma_n correction."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.shape[axis]
    slo = np.sum(lo, axis=axis)
    shi = np.sum(hi, axis=axis)
    mag = np.maximum(np.sum(np.abs(lo), axis=axis), np.sum(np.abs(hi), axis=axis))
    e = np.where(mag > 0.0, _up(_gamma(n) * mag), 0.0)
    out_lo = np.where(e > 0.0, _dn(slo - e), slo)
    out_hi = np.where(e > 0.0, _up(shi + e), shi)
    return out_lo, out_hi


def _iexp_arrays(lo, hi):
    if np.any(hi > 709.0):
        raise IntervalRangeError("exp overflow")
    elo = np.exp(lo)
    ehi = np.exp(hi)
    out_lo = np.where(lo == 0.0, 1.0, np.maximum(_bump_steps(elo, _TRANS_ULPS, -_INF), 0.0))
    out_hi = np.where(hi == 0.0, 1.0, _bump_steps(ehi, _TRANS_ULPS, _INF))
    return out_lo, out_hi


def _ipow_arrays(base_lo, base_hi, exp_lo, exp_hi):
    """x**s for x > 0, via exp(s*log x), monotonicity-free outward bound."""
    if np.any(base_lo <= 0.0):
        raise IntervalError("ipow requires positive base")
    llo = _bump_steps(np.log(base_lo), _TRANS_ULPS, -_INF)
    lhi = _bump_steps(np.log(base_hi), _TRANS_ULPS, _INF)
    plo, phi = _imul_arrays(llo, lhi, np.asarray(exp_lo, float), np.asarray(exp_hi, float))
    return _iexp_arrays(plo, phi)


# ---------------------------------------------------------------------------
# scalar intervals
# ---------------------------------------------------------------------------

class _EmptyInterval:
    """First-class empty set produced by disjoint intersections."""

    __slots__ = ()
    is_empty = True

    def __repr__(self):
        return "EMPTY"

    def subset(self, other):
        return True

    def interior_subset(self, other):
        return True


EMPTY = _EmptyInterval()


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] of finite doubles, lo <= hi."""

    lo: float
    hi: float
    is_empty = False

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if math.isnan(lo) or math.isnan(hi) or not (lo <= hi):
            raise IntervalError(f"invalid interval endpoints [{lo}, {hi}]")
        if math.isinf(lo) or math.isinf(hi):
            raise IntervalRangeError(f"non-finite interval endpoints [{lo}, {hi}]")

    # construction -----------------------------------------------------------
    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(float(x), float(x))

    @classmethod
    def from_fraction(cls, q: Fraction) -> "Interval":
        f = float(q)
        qf = Fraction(f)
        if qf == q:
            return cls(f, f)
        if qf < q:
            return cls(f, float(_up(f)))
        return cls(float(_dn(f)), f)

    @classmethod
    def from_decimal(cls, text: str) -> "Interval":
        """Exact decimal/rational string -> tightest enclosing interval."""
        return cls.from_fraction(Fraction(str(text)))

    @classmethod
    def symmetric(cls, r: float) -> "Interval":
        r = abs(float(r))
        return cls(-r, r)

    # inspection --------------------------------------------------------------
    @property
    def width(self) -> float:
        return float(_up(self.hi - self.lo))

    @property
    def mid(self) -> float:
        m = self.lo + 0.5 * (self.hi - self.lo)
        return min(max(m, self.lo), self.hi)

    @property
    def mag(self) -> float:
        """Largest absolute value over the interval."""
        return max(abs(self.lo), abs(self.hi))

    @property
    def mig(self) -> float:
        """Smallest absolute value over the interval."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    # arithmetic --------------------------------------------------------------
    def _coerce(self, other) -> "Interval":
        if isinstance(other, Interval):
            return other
        if isinstance(other, (int, float)):
            return Interval.point(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Interval(float(_add_lo(self.lo, o.lo)), float(_add_hi(self.hi, o.hi)))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        lo, hi = _imul_arrays(np.float64(self.lo), np.float64(self.hi),
                              np.float64(o.lo), np.float64(o.hi))
        return Interval(float(lo), float(hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        lo, hi = _idiv_arrays(np.float64(self.lo), np.float64(self.hi),
                              np.float64(o.lo), np.float64(o.hi))
        return Interval(float(lo), float(hi))

    def __rtruediv__(self, other):
        return Interval.point(other) / self

    def exp(self) -> "Interval":
        lo, hi = _iexp_arrays(np.float64(self.lo), np.float64(self.hi))
        return Interval(float(lo), float(hi))

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise IntervalError("sqrt of interval with negative part")
        lo = math.sqrt(self.lo)
        hi = math.sqrt(self.hi)
        lo = lo if lo * lo == self.lo else float(_dn(lo))
        hi = hi if hi * hi == self.hi else float(_up(hi))
        return Interval(lo, hi)

    def pow(self, s: "Interval") -> "Interval":
        s = self._coerce(s)
        lo, hi = _ipow_arrays(np.float64(self.lo), np.float64(self.hi),
                              np.float64(s.lo), np.float64(s.hi))
        return Interval(float(lo), float(hi))

    # lattice -----------------------------------------------------------------
    def hull(self, other) -> "Interval":
        if other is EMPTY:
            return self
        o = self._coerce(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def intersect(self, other):
        if other is EMPTY:
            return EMPTY
        o = self._coerce(other)
        lo, hi = max(self.lo, o.lo), min(self.hi, o.hi)
        if lo > hi:
            return EMPTY
        return Interval(lo, hi)

    def subset(self, other) -> bool:
        if other is EMPTY:
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def interior_subset(self, other) -> bool:
        if other is EMPTY:
            return False
        return other.lo < self.lo and self.hi < other.hi

    # serialization -----------------------------------------------------------
    def to_json(self):
        return [self.lo.hex(), self.hi.hex()]

    @classmethod
    def from_json(cls, pair) -> "Interval":
        return cls(float.fromhex(pair[0]), float.fromhex(pair[1]))


PI = Interval(float(_dn(math.pi)), float(_up(math.pi)))


# ---------------------------------------------------------------------------
# interval vectors
# ---------------------------------------------------------------------------

def _as_lohi(obj):
    if isinstance(obj, IntervalVector):
        return obj.lo, obj.hi
    if isinstance(obj, Interval):
        return np.float64(obj.lo), np.float64(obj.hi)
    arr = np.asarray(obj, dtype=float)
    return arr, arr


class IntervalVector:
    """Fixed-length vector of intervals, stored as (lo, hi) float arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi, _validate: bool = True):
        if _validate:
            lo = np.atleast_1d(np.array(lo, dtype=float))
            hi = np.atleast_1d(np.array(hi, dtype=float))
            if lo.shape != hi.shape:
                raise IntervalError("endpoint shape mismatch")
            if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
                raise IntervalError("invalid interval vector endpoints")
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise IntervalRangeError("non-finite interval vector endpoints")
        else:
            lo = np.atleast_1d(np.asarray(lo, dtype=float))
            hi = np.atleast_1d(np.asarray(hi, dtype=float))
        self.lo = lo
        self.hi = hi
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    # construction ------------------------------------------------------------
    @classmethod
    def point(cls, x) -> "IntervalVector":
        arr = np.asarray(x, dtype=float)
        return cls(arr.copy(), arr.copy())

    @classmethod
    def zeros(cls, n: int) -> "IntervalVector":
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def symmetric(cls, r) -> "IntervalVector":
        r = np.abs(np.asarray(r, dtype=float))
        return cls(-r, r)

    @classmethod
    def from_intervals(cls, items: Iterable[Interval]) -> "IntervalVector":
        items = list(items)
        return cls(np.array([it.lo for it in items]),
                   np.array([it.hi for it in items]))

    # inspection ---------------------------------------------------------------
    def __len__(self):
        return self.lo.shape[0]

    def __getitem__(self, i) -> Interval:
        if isinstance(i, (int, np.integer)):
            return Interval(float(self.lo[i]), float(self.hi[i]))
        return IntervalVector(self.lo[i], self.hi[i], _validate=False)

    @property
    def width(self):
        return _up(self.hi - self.lo)

    @property
    def mid(self):
        m = self.lo + 0.5 * (self.hi - self.lo)
        return np.clip(m, self.lo, self.hi)

    @property
    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    @property
    def rad(self):
        """Upper bound of the radius around ``mid``."""
        m = self.mid
        return np.maximum(_up(self.hi - m), _up(m - self.lo))

    def contains_point(self, x, slack: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lo - slack <= x) and np.all(x <= self.hi + slack))

    def __repr__(self):
        ents = ", ".join(f"[{l:.6g},{h:.6g}]" for l, h in zip(self.lo[:6], self.hi[:6]))
        more = "" if len(self) <= 6 else f", ... ({len(self)})"
        return f"ivec({ents}{more})"

    # arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        olo, ohi = _as_lohi(other)
        return IntervalVector(_add_lo(self.lo, olo), _add_hi(self.hi, ohi), _validate=False)

    __radd__ = __add__

    def __neg__(self):
        return IntervalVector(-self.hi, -self.lo, _validate=False)

    def __sub__(self, other):
        olo, ohi = _as_lohi(other)
        return IntervalVector(_add_lo(self.lo, -ohi), _add_hi(self.hi, -olo), _validate=False)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        olo, ohi = _as_lohi(other)
        lo, hi = _imul_arrays(self.lo, self.hi, olo, ohi)
        return IntervalVector(lo, hi, _validate=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        olo, ohi = _as_lohi(other)
        lo, hi = _idiv_arrays(self.lo, self.hi, olo * np.ones_like(self.lo),
                              ohi * np.ones_like(self.hi))
        return IntervalVector(lo, hi, _validate=False)

    def exp(self) -> "IntervalVector":
        lo, hi = _iexp_arrays(self.lo, self.hi)
        return IntervalVector(lo, hi, _validate=False)

    def sum(self) -> Interval:
        lo, hi = _isum_arrays(self.lo, self.hi)
        return Interval(float(lo), float(hi))

    def dot(self, other) -> Interval:
        olo, ohi = _as_lohi(other)
        plo, phi = _imul_arrays(self.lo, self.hi, olo, ohi)
        lo, hi = _isum_arrays(plo, phi)
        return Interval(float(lo), float(hi))

    def abs_upper_sum(self) -> float:
        """Upper bound of sum_i max|v_i|."""
        lo, hi = _isum_arrays(self.mag, self.mag)
        return float(hi)

    # lattice ------------------------------------------------------------------
    def hull(self, other) -> "IntervalVector":
        olo, ohi = _as_lohi(other)
        return IntervalVector(np.minimum(self.lo, olo), np.maximum(self.hi, ohi),
                              _validate=False)

    def intersect(self, other):
        """Entrywise intersection; EMPTY if any entry is disjoint."""
        olo, ohi = _as_lohi(other)
        lo = np.maximum(self.lo, olo)
        hi = np.minimum(self.hi, ohi)
        if np.any(lo > hi):
            return EMPTY
        return IntervalVector(lo, hi, _validate=False)

    def subset(self, other) -> bool:
        olo, ohi = _as_lohi(other)
        return bool(np.all(olo <= self.lo) and np.all(self.hi <= ohi))

    def interior_subset(self, other) -> bool:
        olo, ohi = _as_lohi(other)
        return bool(np.all(olo < self.lo) and np.all(self.hi < ohi))

    # serialization --------------------------------------------------------
    def to_json(self):
        return [[l.hex(), h.hex()] for l, h in zip(self.lo.tolist(), self.hi.tolist())]

    @classmethod
    def from_json(cls, pairs) -> "IntervalVector":
        return cls(np.array([float.fromhex(p[0]) for p in pairs]),
                   np.array([float.fromhex(p[1]) for p in pairs]))


# ---------------------------------------------------------------------------
# interval matrices
# ---------------------------------------------------------------------------

class IntervalMatrix:
    """Rectangular matrix of intervals, stored as (lo, hi) float arrays.

    Products use Rump's midpoint-radius algorithm: four float GEMMs plus an
    a-priori rounding correction, sound under round-to-nearest.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi, _validate: bool = True):
        if _validate:
            lo = np.array(lo, dtype=float)
            hi = np.array(hi, dtype=float)
            if lo.shape != hi.shape or lo.ndim != 2:
                raise IntervalError("invalid interval matrix shape")
            if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
                raise IntervalError("invalid interval matrix endpoints")
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                raise IntervalRangeError("non-finite interval matrix endpoints")
        else:
            lo = np.asarray(lo, dtype=float)
            hi = np.asarray(hi, dtype=float)
        self.lo = lo
        self.hi = hi
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)

    @classmethod
    def point(cls, a) -> "IntervalMatrix":
        a = np.asarray(a, dtype=float)
        return cls(a.copy(), a.copy())

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        return cls.point(np.eye(n))

    @property
    def shape(self):
        return self.lo.shape

    @property
    def mid(self):
        m = self.lo + 0.5 * (self.hi - self.lo)
        return np.clip(m, self.lo, self.hi)

    @property
    def rad(self):
        m = self.mid
        return np.maximum(_up(self.hi - m), _up(m - self.lo))

    @property
    def mag(self):
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def __add__(self, other):
        if isinstance(other, IntervalMatrix):
            return IntervalMatrix(_add_lo(self.lo, other.lo), _add_hi(self.hi, other.hi),
                                  _validate=False)
        a = np.asarray(other, dtype=float)
        return IntervalMatrix(_add_lo(self.lo, a), _add_hi(self.hi, a), _validate=False)

    def __sub__(self, other):
        if isinstance(other, IntervalMatrix):
            return IntervalMatrix(_add_lo(self.lo, -other.hi), _add_hi(self.hi, -other.lo),
                                  _validate=False)
        a = np.asarray(other, dtype=float)
        return IntervalMatrix(_add_lo(self.lo, -a), _add_hi(self.hi, -a), _validate=False)

    def __neg__(self):
        return IntervalMatrix(-self.hi, -self.lo, _validate=False)

    def scale(self, c: Interval) -> "IntervalMatrix":
        lo, hi = _imul_arrays(self.lo, self.hi, np.float64(c.lo), np.float64(c.hi))
        return IntervalMatrix(lo, hi, _validate=False)

    def _mm(self, omid, orad):
        k = self.shape[1]
        amid, arad = self.mid, self.rad
        g = _gamma(k)
        c = amid @ omid
        aabs = np.abs(amid)
        oabs = np.abs(omid)
        # radius: exact-arithmetic bound rA(|mB|+rB) + |mA| rB + gamma |mA||mB|;
        # the float evaluation of each GEMM is itself covered by the (1+8g) factor
        r = arad @ (oabs + orad) + aabs @ orad + (g * (1.0 + 8.0 * g)) * (aabs @ oabs)
        r = _up(r * (1.0 + 8.0 * g))
        return c, r

    def __matmul__(self, other):
        if isinstance(other, IntervalMatrix):
            c, r = self._mm(other.mid, other.rad)
            return IntervalMatrix(_dn(c - r), _up(c + r), _validate=False)
        if isinstance(other, IntervalVector):
            c, r = self._mm(other.mid[:, None], other.rad[:, None])
            return IntervalVector(_dn(c - r)[:, 0], _up(c + r)[:, 0], _validate=False)
        arr = np.asarray(other, dtype=float)
        if arr.ndim == 1:
            c, r = self._mm(arr[:, None], np.zeros_like(arr)[:, None])
            return IntervalVector(_dn(c - r)[:, 0], _up(c + r)[:, 0], _validate=False)
        c, r = self._mm(arr, np.zeros_like(arr))
        return IntervalMatrix(_dn(c - r), _up(c + r), _validate=False)

    def __rmatmul__(self, other):
        return IntervalMatrix.point(np.asarray(other, dtype=float)) @ self

    def hull(self, other: "IntervalMatrix") -> "IntervalMatrix":
        return IntervalMatrix(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi),
                              _validate=False)

    def subset(self, other: "IntervalMatrix") -> bool:
        return bool(np.all(other.lo <= self.lo) and np.all(self.hi <= other.hi))

    def contains_point(self, a) -> bool:
        a = np.asarray(a, dtype=float)
        return bool(np.all(self.lo <= a) and np.all(a <= self.hi))

    def inf_norm_upper(self) -> float:
        """Upper bound of the induced infinity norm over all point matrices."""
        lo, hi = _isum_arrays(self.mag, self.mag, axis=1)
        return float(np.max(hi))

    def to_json(self):
        return [[[l.hex(), h.hex()] for l, h in zip(rl, rh)]
                for rl, rh in zip(self.lo.tolist(), self.hi.tolist())]

    @classmethod
    def from_json(cls, rows) -> "IntervalMatrix":
        lo = [[float.fromhex(p[0]) for p in row] for row in rows]
        hi = [[float.fromhex(p[1]) for p in row] for row in rows]
        return cls(np.array(lo), np.array(hi))


def verified_inverse(m: Union[IntervalMatrix, np.ndarray],
                     refine: int = 2) -> IntervalMatrix:
    """Rigorous enclosure [B] of A^{-1} for every point matrix A in ``m``.

    Krawczyk-style: with R the approximate inverse of the midpoint and
    E = I - R@[A], verify ||E||_inf < 1.  Then every A is invertible and
    A^{-1} lies in R + sum_k E^k R, enclosed by R + [-rho,rho] with
    rho = ||E|| ||R|| / (1-||E||); the enclosure is tightened entrywise by
    iterating B <- (R + E@B) ∩ B.
    """
    if not isinstance(m, IntervalMatrix):
        m = IntervalMatrix.point(np.asarray(m, dtype=float))
    n = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise IntervalError("verified_inverse requires a square matrix")
    try:
        r = np.linalg.inv(m.mid)
    except np.linalg.LinAlgError as exc:
        raise VerificationError("midpoint inverse failed") from exc
    rmat = IntervalMatrix.point(r)
    e = IntervalMatrix.identity(n) - (rmat @ m)
    enorm = e.inf_norm_upper()
    if not enorm < 1.0:
        raise VerificationError(f"inverse not verifiable: ||I-RA|| = {enorm:.3g} >= 1")
    rnorm = rmat.inf_norm_upper()
    rho = float(_up(_up(enorm * rnorm) / _dn(1.0 - enorm)))
    b = IntervalMatrix(_dn(r - rho), _up(r + rho), _validate=False)
    for _ in range(refine):
        b2 = rmat + (e @ b)
        lo = np.maximum(b.lo, b2.lo)
        hi = np.minimum(b.hi, b2.hi)
        if np.any(lo > hi):          # numerically impossible, be safe
            break
        b = IntervalMatrix(lo, hi, _validate=False)
    return b
