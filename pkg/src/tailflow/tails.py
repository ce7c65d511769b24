"""Infinite interval vectors with explicit head and polynomial-decay tail.

A ``TailVector`` encloses a sequence (x_i)_{i>=1} of Fourier coefficients by

    x_i in head_i              for i <= n,
    x_i in [C-, C+] / i^s      for i  > n,

plus an optional constant term for cosine series.  A parity flag marks
sequences supported on odd (sine) or even (cosine) indices only; entries of
the other parity are structurally zero, which the Brusselator's invariant
subspace makes exact rather than an enclosure.

The combination rules for heads/tails under addition, scalar and pointwise
multiplication, head shrinking and decay weakening implement the standard
estimates for such representations; two sign conventions printed ambiguously
in the source material (the lower bound of the sum rule, and the product
rule's constants) are implemented in their mathematically forced form: the
sum rule adds lower bounds, and the product rule multiplies the constant
intervals.  Randomized selector tests in the suite arbitrate both.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from tailflow.intervals import (
    EMPTY,
    PI,
    Interval,
    IntervalError,
    IntervalVector,
    _add_lo,
    _add_hi,
    _idiv_arrays,
    _imul_arrays,
    _ipow_arrays,
    _isum_arrays,
    _dn,
    _up,
)

__all__ = ["Kind", "Parity", "TailVector", "NormBounds", "psum_upper", "power_mean_inequality_holds"]


class Kind(enum.Enum):
    SINE = "sine"
    COSINE = "cosine"


class Parity(enum.Enum):
    NONE = "none"
    ODD = "odd"    # nonzero entries only at odd indices (sine side)
    EVEN = "even"  # nonzero entries only at even indices (cosine side)


def _allowed(parity: Parity, idx: np.ndarray) -> np.ndarray:
    if parity is Parity.ODD:
        return idx % 2 == 1
    if parity is Parity.EVEN:
        return idx % 2 == 0
    return np.ones_like(idx, dtype=bool)


def psum_upper(n: int, s: float) -> float:
    """Upper bound of sum_{i>n} i^{-s} for s>1:  n^{1-s} / (s-1)."""
    if s <= 1.0:
        raise IntervalError("tail sum bound needs s > 1")
    num = Interval.point(float(n)).pow(Interval.point(s - 1.0))
    return float(_up(_up(1.0 / _dn(num.lo)) / _dn(s - 1.0)))


def power_mean_inequality_holds(a: float, b: float, s: float) -> bool:
    """(a+b)^s <= 2^{s-1} (a^s + b^s) checked in floats (a,b > 0, s >= 1)."""
    lhs = (a + b) ** s
    rhs = 2.0 ** (s - 1.0) * (a ** s + b ** s)
    return lhs <= rhs * (1 + 1e-12)


@dataclass(frozen=True)
class NormBounds:
    """Guaranteed upper bounds; None marks a non-representable (unbounded) case."""
    sup: Optional[float]
    l2: Optional[float]
    h1: Optional[float]


@dataclass(frozen=True)
class TailVector:
    head: IntervalVector          # entries for indices 1..n
    c_lo: float                   # tail constants: x_i in [c_lo, c_hi]/i^s, i>n
    c_hi: float
    s: float
    kind: Kind = Kind.SINE
    parity: Parity = Parity.NONE
    const: Optional[Interval] = None   # cosine index-0 term

    def __post_init__(self):
        if not (self.c_lo <= self.c_hi):
            raise IntervalError("tail constants out of order")
        if self.kind is Kind.SINE and self.const is not None:
            raise IntervalError("sine series has no constant term")
        if self.kind is Kind.COSINE and self.const is None:
            object.__setattr__(self, "const", Interval(0.0, 0.0))
        if self.parity is not Parity.NONE:
            idx = np.arange(1, self.n + 1)
            bad = ~_allowed(self.parity, idx)
            if np.any(self.head.lo[bad] != 0.0) or np.any(self.head.hi[bad] != 0.0):
                raise IntervalError("parity-forbidden head entries must be zero")

    # ------------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.head)

    @property
    def tail_interval(self) -> Interval:
        return Interval(self.c_lo, self.c_hi)

    @property
    def tail_mag(self) -> float:
        return max(abs(self.c_lo), abs(self.c_hi))

    def tail_is_zero(self) -> bool:
        return self.c_lo == 0.0 == self.c_hi

    @classmethod
    def zeros(cls, n: int, s: float, kind: Kind = Kind.SINE,
              parity: Parity = Parity.NONE) -> "TailVector":
        return cls(IntervalVector.zeros(n), 0.0, 0.0, s, kind, parity)

    @classmethod
    def from_point_coeffs(cls, coeffs, s: float, kind: Kind = Kind.SINE,
                          parity: Parity = Parity.NONE) -> "TailVector":
        return cls(IntervalVector.point(np.asarray(coeffs, dtype=float)),
                   0.0, 0.0, s, kind, parity)

    @classmethod
    def symmetric(cls, n: int, radius, tail_radius: float, s: float,
                  kind: Kind = Kind.SINE,
                  parity: Parity = Parity.NONE) -> "TailVector":
        """[-r, r] entries (zeroed where parity forbids) + [-C, C]/i^s tail."""
        r = np.abs(np.broadcast_to(np.asarray(radius, dtype=float), n)).copy()
        idx = np.arange(1, n + 1)
        r[~_allowed(parity, idx)] = 0.0
        tr = abs(tail_radius)
        return cls(IntervalVector(-r, r), -tr, tr, s, kind, parity)

    def __repr__(self):
        c0 = "" if self.const is None else f" c0={self.const!r}"
        return (f"TailVector({self.kind.value}/{self.parity.value}, n={self.n},"
                f"{c0} tail=[{self.c_lo:.3g},{self.c_hi:.3g}]/i^{self.s})")

    # ------------------------------------------------------------------
    # materialization
    # ------------------------------------------------------------------
    def tail_entries(self, idx: np.ndarray) -> IntervalVector:
        """Intervals [c_lo, c_hi]/i^s at the given indices (> n), parity-aware."""
        idx = np.asarray(idx, dtype=float)
        if self.tail_is_zero():
            lo = np.zeros_like(idx)
            hi = np.zeros_like(idx)
        else:
            plo, phi = _ipow_arrays(idx, idx, self.s, self.s)
            lo, hi = _idiv_arrays(np.float64(self.c_lo), np.float64(self.c_hi), plo, phi)
        ok = _allowed(self.parity, idx.astype(int))
        return IntervalVector(np.where(ok, lo, 0.0), np.where(ok, hi, 0.0),
                              _validate=False)

    def coeffs(self, m: int) -> IntervalVector:
        """Entries for indices 1..m (tail materialized beyond the head)."""
        if m <= self.n:
            return self.head[:m]
        ext = self.tail_entries(np.arange(self.n + 1, m + 1))
        return IntervalVector(np.concatenate([self.head.lo, ext.lo]),
                              np.concatenate([self.head.hi, ext.hi]), _validate=False)

    def coeff(self, i: int) -> Interval:
        if i == 0:
            if self.kind is not Kind.COSINE:
                raise IndexError("index 0 only for cosine series")
            return self.const
        if i <= self.n:
            return self.head[i - 1]
        return self.tail_entries(np.array([i]))[0]

    def with_head(self, m: int) -> "TailVector":
        """Re-express with head length m (materializing or folding the tail)."""
        if m == self.n:
            return self
        if m > self.n:
            return replace(self, head=self.coeffs(m))
        return self.shrink_head(m)

    # ------------------------------------------------------------------
    # reshaping (head folding, decay weakening)
    # ------------------------------------------------------------------
    def shrink_head(self, k: int) -> "TailVector":
        """Fold head entries k+1..n into the tail constants.

        New constants: D- = min{ head_i^- * i^s : k<i<=n } u {C-}, D+ analogous,
        taken over parity-allowed indices only.
        """
        if k > self.n:
            raise IntervalError("shrink_head target exceeds head length")
        if k == self.n:
            return self
        idx = np.arange(k + 1, self.n + 1)
        ok = _allowed(self.parity, idx)
        d_lo, d_hi = self.c_lo, self.c_hi
        if np.any(ok):
            sub = self.head[k:]
            fidx = idx.astype(float)
            plo, phi = _ipow_arrays(fidx, fidx, self.s, self.s)
            mlo, mhi = _imul_arrays(sub.lo, sub.hi, plo, phi)
            d_lo = min(d_lo, float(np.min(mlo[ok])))
            d_hi = max(d_hi, float(np.max(mhi[ok])))
        return replace(self, head=self.head[:k], c_lo=d_lo, c_hi=d_hi)

    def weaken_decay(self, s1: float) -> "TailVector":
        """Re-express the tail at a slower decay s1 < s.

        D- = min{0, C-/(n+1)^{s-s1}},  D+ = max{0, C+/(n+1)^{s-s1}}.
        """
        if s1 >= self.s:
            raise IntervalError("weaken_decay requires s1 < s")
        if self.tail_is_zero():
            return replace(self, s=s1)
        base = Interval.point(float(self.n + 1)).pow(Interval.point(self.s - s1))
        q = Interval(self.c_lo, self.c_hi) / Interval(base.lo, base.lo)
        return replace(self, c_lo=min(0.0, q.lo), c_hi=max(0.0, q.hi), s=s1)

    def drop_parity(self) -> "TailVector":
        """Forget the parity flag (tail constants must then cover the zeros)."""
        if self.parity is Parity.NONE:
            return self
        return replace(self, parity=Parity.NONE,
                       c_lo=min(self.c_lo, 0.0), c_hi=max(self.c_hi, 0.0))

    # ------------------------------------------------------------------
    # algebra
    # ------------------------------------------------------------------
    @staticmethod
    def _merge_parity(a: "TailVector", b: "TailVector"):
        if a.parity is b.parity:
            return a, b, a.parity
        return a.drop_parity(), b.drop_parity(), Parity.NONE

    def __add__(self, other: "TailVector") -> "TailVector":
        if not isinstance(other, TailVector):
            return NotImplemented
        if self.kind is not other.kind:
            raise IntervalError("cannot add sine and cosine series")
        a, b, parity = self._merge_parity(self, other)
        n = max(a.n, b.n)
        a, b = a.with_head(n), b.with_head(n)
        head = a.head + b.head
        # a zero tail is representable at any exponent: keep the other side's
        if a.tail_is_zero():
            c, s = b.tail_interval, b.s
        elif b.tail_is_zero():
            c, s = a.tail_interval, a.s
        elif a.s == b.s:
            c = a.tail_interval + b.tail_interval
            s = a.s
        elif a.s < b.s:
            fac = Interval(0.0, 1.0) / Interval.point(float(n + 1)).pow(Interval.point(b.s - a.s))
            c = a.tail_interval + fac * b.tail_interval
            s = a.s
        else:
            fac = Interval(0.0, 1.0) / Interval.point(float(n + 1)).pow(Interval.point(a.s - b.s))
            c = b.tail_interval + fac * a.tail_interval
            s = b.s
        const = None
        if self.kind is Kind.COSINE:
            const = a.const + b.const
        return TailVector(head, c.lo, c.hi, s, self.kind, parity, const)

    def __neg__(self) -> "TailVector":
        const = None if self.const is None else -self.const
        return TailVector(-self.head, -self.c_hi, -self.c_lo, self.s,
                          self.kind, self.parity, const)

    def __sub__(self, other: "TailVector") -> "TailVector":
        return self + (-other)

    def scale(self, c: Interval) -> "TailVector":
        if isinstance(c, (int, float)):
            c = Interval.point(c)
        tail = c * self.tail_interval
        const = None if self.const is None else c * self.const
        return TailVector(self.head * c, tail.lo, tail.hi, self.s,
                          self.kind, self.parity, const)

    def mul_pointwise(self, other: "TailVector") -> "TailVector":
        """Entrywise product; tail exponent s1+s2, constants multiplied as intervals."""
        a, b = self, other
        n = max(a.n, b.n)
        s_out = a.s + b.s
        if {a.parity, b.parity} == {Parity.ODD, Parity.EVEN}:
            # complementary supports: the product is identically zero
            return TailVector.zeros(n, s_out, a.kind, Parity.ODD)
        ah, bh = a.with_head(n), b.with_head(n)
        head = ah.head * bh.head
        tail = a.tail_interval * b.tail_interval
        # a structurally-zero factor forces a zero entry, so the stricter
        # parity wins
        if Parity.ODD in (a.parity, b.parity):
            parity = Parity.ODD
        elif Parity.EVEN in (a.parity, b.parity):
            parity = Parity.EVEN
        else:
            parity = Parity.NONE
        const = None
        kind = a.kind
        if kind is Kind.COSINE:
            const = ah.const * (bh.const if bh.const is not None else Interval(0, 0))
        return TailVector(head, tail.lo, tail.hi, s_out, kind, parity, const)

    # ------------------------------------------------------------------
    # lattice
    # ------------------------------------------------------------------
    def _tail_comparable(self, other: "TailVector"):
        """Bring self's tail to other's exponent (sound direction for subset)."""
        if self.s == other.s:
            return self
        if self.s > other.s:
            return self.weaken_decay(other.s)
        return None  # faster-decay right side: only the zero tail is comparable

    def _tail_parity_split(self, other: "TailVector"):
        """Index classes beyond the head induced by the two parity flags.

        Returns (shared, a_only, b_only): whether there are tail indices
        allowed by both, allowed by self but forbidden in other, and vice
        versa.
        """
        pa, pb = self.parity, other.parity
        if pa is pb:
            return True, False, False
        if pa is Parity.NONE:
            return True, True, False          # other forbids some indices
        if pb is Parity.NONE:
            return True, False, True          # self forbids some indices
        return False, True, True              # complementary (ODD vs EVEN)

    def subset(self, other: "TailVector") -> bool:
        if self.kind is not other.kind:
            return False
        n = max(self.n, other.n)
        a, b = self.with_head(n), other.with_head(n)
        if not a.head.subset(b.head):
            return False
        if self.kind is Kind.COSINE and not a.const.subset(b.const):
            return False
        shared, a_only, b_only = a._tail_parity_split(b)
        if a_only and not a.tail_is_zero():
            return False
        if b_only and not (b.c_lo <= 0.0 <= b.c_hi):
            return False
        if not shared:
            return True
        if a.tail_is_zero():
            return b.c_lo <= 0.0 <= b.c_hi
        cmpa = a._tail_comparable(b)
        if cmpa is None:
            return False
        return b.c_lo <= cmpa.c_lo and cmpa.c_hi <= b.c_hi

    def interior_subset(self, other: "TailVector") -> bool:
        """Entrywise x_i in int y_i over every index; indices that are
        structurally zero on *both* sides are excused (they are absent from
        the problem's phase space)."""
        if self.kind is not other.kind:
            return False
        n = max(self.n, other.n)
        a, b = self.with_head(n), other.with_head(n)
        idx = np.arange(1, n + 1)
        excused = (~_allowed(a.parity, idx)) & (~_allowed(b.parity, idx))
        strict = (b.head.lo < a.head.lo) & (a.head.hi < b.head.hi)
        if not np.all(strict | excused):
            return False
        if self.kind is Kind.COSINE and not a.const.interior_subset(b.const):
            return False
        shared, a_only, b_only = a._tail_parity_split(b)
        if a_only:
            return False                      # {0} has empty interior
        if b_only and not (b.c_lo < 0.0 < b.c_hi):
            return False
        if not shared:
            return True
        cmpa = a._tail_comparable(b)
        if cmpa is None:
            return a.tail_is_zero() and b.c_lo < 0.0 < b.c_hi
        return b.c_lo < cmpa.c_lo and cmpa.c_hi < b.c_hi

    def hull(self, other: "TailVector") -> "TailVector":
        if self.kind is not other.kind:
            raise IntervalError("hull of mixed kinds")
        a, b, parity = self._merge_parity(self, other)
        n = max(a.n, b.n)
        a, b = a.with_head(n), b.with_head(n)
        if a.tail_is_zero():
            c_lo, c_hi, s = min(b.c_lo, 0.0), max(b.c_hi, 0.0), b.s
        elif b.tail_is_zero():
            c_lo, c_hi, s = min(a.c_lo, 0.0), max(a.c_hi, 0.0), a.s
        else:
            s = min(a.s, b.s)
            if a.s > s:
                a = a.weaken_decay(s)
            if b.s > s:
                b = b.weaken_decay(s)
            c_lo, c_hi = min(a.c_lo, b.c_lo), max(a.c_hi, b.c_hi)
        const = None
        if self.kind is Kind.COSINE:
            const = a.const.hull(b.const)
        return TailVector(a.head.hull(b.head), c_lo, c_hi,
                          s, self.kind, parity, const)

    def intersect(self, other: "TailVector"):
        if self.kind is not other.kind:
            raise IntervalError("intersect of mixed kinds")
        a, b, parity = self._merge_parity(self, other)
        n = max(a.n, b.n)
        a, b = a.with_head(n), b.with_head(n)
        if a.tail_is_zero() or b.tail_is_zero():
            zside, oside = (a, b) if a.tail_is_zero() else (b, a)
            if not (oside.c_lo <= 0.0 <= oside.c_hi):
                return EMPTY
            t = Interval(0.0, 0.0)
            s = zside.s
        else:
            s = min(a.s, b.s)
            if a.s > s:
                a = a.weaken_decay(s)
            if b.s > s:
                b = b.weaken_decay(s)
            t = a.tail_interval.intersect(b.tail_interval)
            if t is EMPTY:
                return EMPTY
        head = a.head.intersect(b.head)
        if head is EMPTY:
            return EMPTY
        const = None
        if self.kind is Kind.COSINE:
            const = a.const.intersect(b.const)
            if const is EMPTY:
                return EMPTY
        return TailVector(head, t.lo, t.hi, s, self.kind, parity, const)

    # ------------------------------------------------------------------
    # norms
    # ------------------------------------------------------------------
    def norms(self) -> NormBounds:
        """Upper bounds: sup-norm, L2(0,pi) and H1_0(0,pi) of any member function."""
        mags = self.head.mag
        sup = l2 = h1 = None
        cmax = self.tail_mag
        c0 = 0.0 if self.const is None else self.const.mag

        if self.s > 1.0:
            lo, hi = _isum_arrays(mags, mags)
            tail = 0.0 if cmax == 0.0 else float(_up(cmax * psum_upper(self.n, self.s)))
            sup = (Interval(0.0, float(hi)) + Interval(0.0, tail) + Interval(0.0, c0)).hi

        if self.s > 1.5:
            sq_lo, sq_hi = _imul_arrays(mags, mags, mags, mags)
            lo, hi = _isum_arrays(sq_lo, sq_hi)
            tail = 0.0 if cmax == 0.0 else float(
                _up(_up(cmax * cmax) * psum_upper(self.n, 2.0 * self.s)))
            total = Interval(0.0, (Interval(0.0, float(hi)) + Interval(0.0, tail)).hi)
            l2 = (PI * Interval(0.5, 0.5) * total).sqrt().hi
            # the constant term contributes sqrt(pi)*|c0| to the L2 norm
            if c0 > 0.0:
                l2 = float(_up(l2 + (PI * Interval.point(c0 * c0)).sqrt().hi))

        if self.s > 2.5:
            idx = np.arange(1, self.n + 1, dtype=float)
            i2 = idx * idx  # exact for the index range in use
            sq_lo, sq_hi = _imul_arrays(mags, mags, mags, mags)
            w_lo, w_hi = _imul_arrays(sq_lo, sq_hi, i2, i2)
            lo, hi = _isum_arrays(w_lo, w_hi)
            tail = 0.0 if cmax == 0.0 else float(
                _up(_up(cmax * cmax) * psum_upper(self.n, 2.0 * self.s - 2.0)))
            total = Interval(0.0, (Interval(0.0, float(hi)) + Interval(0.0, tail)).hi)
            h1 = (PI * Interval(0.5, 0.5) * total).sqrt().hi
        return NormBounds(sup, l2, h1)

    # ------------------------------------------------------------------
    # head/tail splitting (for the f(p+q) = f(p) + f2(p,q) decomposition)
    # ------------------------------------------------------------------
    def head_part(self, k: int) -> "TailVector":
        """Entries 1..k kept, everything beyond (and the tail) zeroed."""
        if k > self.n:
            raise IntervalError("head_part needs k <= n")
        sub = self.head[:k]
        out = TailVector(sub, 0.0, 0.0, self.s, self.kind, self.parity,
                         self.const if self.kind is Kind.COSINE else None)
        return out

    def tail_part(self, k: int) -> "TailVector":
        """Entries 1..k zeroed, the rest kept (complement of head_part)."""
        if k > self.n:
            raise IntervalError("tail_part needs k <= n")
        lo = self.head.lo.copy()
        hi = self.head.hi.copy()
        lo[:k] = 0.0
        hi[:k] = 0.0
        const = Interval(0.0, 0.0) if self.kind is Kind.COSINE else None
        return TailVector(IntervalVector(lo, hi, _validate=False),
                          self.c_lo, self.c_hi, self.s, self.kind, self.parity,
                          const)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "head": self.head.to_json(),
            "tail": {"clo": self.c_lo.hex(), "chi": self.c_hi.hex(),
                     "s": float(self.s).hex()},
            "parity": self.parity.value,
            "kind": self.kind.value,
        }
        if self.const is not None:
            out["const"] = self.const.to_json()
        return out

    @classmethod
    def from_json(cls, d: dict) -> "TailVector":
        const = Interval.from_json(d["const"]) if "const" in d else None
        return cls(IntervalVector.from_json(d["head"]),
                   float.fromhex(d["tail"]["clo"]), float.fromhex(d["tail"]["chi"]),
                   float.fromhex(d["tail"]["s"]),
                   Kind(d["kind"]), Parity(d["parity"]), const)
