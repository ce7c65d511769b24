"""Rigorous convolution of sine and cosine Fourier series with uniform tails.

Given two series with explicit heads (n coefficients) and polynomial tails
[C-,C+]/i^s, the product's coefficients are enclosed as

  sine x sine -> cosine:
    (uv)_0 = 1/2 sum u_i v_i
    (uv)_k = 1/2 [ sum_i u_{i+k} v_i + sum_i u_i v_{i+k} - sum_{i<k} u_i v_{k-i} ]
  cosine x sine -> sine:
    (uv)_k = u_0 v_k + 1/2 [ sum_i u_i v_{i+k} - sum_i u_{i+k} v_i
                             + sum_{i<k} u_i v_{k-i} ]

with the infinite parts beyond the head absorbed into an explicit remainder
C_u C_v n^{1-2s}/(2s-1) for k <= 2n, and a uniform tail D/k^s for k > 2n,

  D = [|u_0| C_v +] 1/2 ( sum_{i<=n} (C_u|v_i| + C_v|u_i|)
                              (1 + ((2n+1)/(2n+1-i))^s)
                          + C_u C_v (2 + 2^s) n^{1-s}/(s-1) ).

Tail magnitudes use C = max(|C-|, |C+|); explicit sums look tail entries up
with their signed intervals and parity zeros, which is the sanctioned
sharper form.  Products of odd-only sine series exploit the invariant
subspace: structurally-forbidden output coefficients are exactly zero and
remainders are not applied there.

``square_as_sine`` re-expands u^2 (an even function, naturally a cosine
series) in the sine eigenbasis.  Pairing sin(ax)sin(bx) = (cos px - cos qx)/2
and converting each pair with

  K(i,m) = (2/pi) (1 - (-1)^{i+m}) i / (i^2 - m^2),      K(i,i) = 0,

makes the 1/i parts of K cancel within each pair, which is what yields the
cubic-decay tail (and, downstream, the s in (1,5) compatibility limitation
for the diffusive logistic equation): the head-head block obeys

  |sum_{a,b<=n} u_a u_b (K(i,p)-K(i,q))/2| <= (8/pi) kappa (sum_a a|u_a|)^2 / i^3

for i > n_out >= 2n, kappa = (1 - (2n/(n_out+1))^2)^{-2}.  Cross blocks with
one/both factors from the tail are bounded at exponents 3 and s - 1/2 (the
near-resonant band q ~ i contributes the logarithm absorbed into i^{1/2});
they need s > 3 and n_out >= 4n.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from tailflow.intervals import (
    PI,
    Interval,
    IntervalError,
    IntervalVector,
    _add_lo,
    _add_hi,
    _imul_arrays,
    _ipow_arrays,
    _isum_arrays,
    _dn,
    _up,
    _up_nz,
)
from tailflow.tails import Kind, Parity, TailVector, psum_upper

__all__ = ["sin_times_sin", "cos_times_sin", "cube_term", "square_as_sine"]


# ---------------------------------------------------------------------------
# gather-index plans (cached per head size)
# ---------------------------------------------------------------------------

def _corr_lohi(apad_m, apad_r, apad_a, bm, br, ba, lag0, count, width, gam,
               reverse=False):
    """(lo,hi) of the windowed correlation sum_i a_{lag+i} b_i."""
    from tailflow.headconv import _windows, _from_mr
    wm = _windows(apad_m, lag0, count, width)
    wr = _windows(apad_r, lag0, count, width)
    wa = _windows(apad_a, lag0, count, width)
    mid = (wm @ bm[..., None])[..., 0]
    radp = (wr @ (ba + br)[..., None] + wa @ br[..., None])[..., 0]
    mag = (wa @ ba[..., None])[..., 0]
    rad = radp + (gam * (1.0 + 8.0 * gam)) * mag
    rad = np.where(rad == 0.0, 0.0, _up(rad * (1.0 + 8.0 * gam)))
    if reverse:
        mid, rad = mid[::-1], rad[::-1]
    return _from_mr(mid, rad)


def _head_conv_sums(u3: IntervalVector, v3: IntervalVector, n: int):
    """S1_k = sum_{i<=n} u_{i+k} v_i, S2_k = sum_{i<=n} u_i v_{i+k},
    S3_k = sum_{i<k} u_i v_{k-i}, for k = 1..2n, with lookups up to 3n."""
    from tailflow.headconv import _to_mr, _gamma_fac
    um, ur = _to_mr(u3.lo, u3.hi)
    vm, vr = _to_mr(v3.lo, v3.hi)
    ua, va = np.abs(um), np.abs(vm)
    gam = _gamma_fac(2 * n)
    # S1: windows on u (length 3n) at offsets 1..2n, width n, against v[:n]
    s1 = _corr_lohi(um, ur, ua, vm[:n], vr[:n], va[:n], 1, 2 * n, n, gam)
    s2 = _corr_lohi(vm, vr, va, um[:n], ur[:n], ua[:n], 1, 2 * n, n, gam)
    # S3: reversed-v windows against u[:2n-1]; row k at offset 4n-1-k
    w3 = max(2 * n - 1, 1)
    vrev = vm[:w3][::-1]
    vrevr = vr[:w3][::-1]
    vreva = va[:w3][::-1]
    zl = np.zeros(w3)
    zr = np.zeros(w3 + 2)
    vmr = np.concatenate([zl, vrev, zr])
    vrr = np.concatenate([zl, vrevr, zr])
    var = np.concatenate([zl, vreva, zr])
    # offsets o_k = (w3 + w3 - k) ... derived: v[k-2-i] = vrev[w3-1-(k-2-i)]
    # -> pad index = w3 + (w3 + 1 - k) + i, so rows k = 1..2n sit at offsets
    # 2*w3+1-k, i.e. offsets (2*w3+1-2n)..(2*w3) in reverse order
    lag0 = 2 * w3 + 1 - 2 * n
    s3 = _corr_lohi(vmr, vrr, var, um[:w3], ur[:w3], ua[:w3], lag0, 2 * n,
                    w3, gam, reverse=True)
    return s1, s2, s3


def _tail_mags(u: TailVector, v: TailVector):
    return u.tail_mag, v.tail_mag


def _inner_remainder(cu: float, cv: float, n: int, s: float) -> float:
    """Upper bound of C_u C_v n^{1-2s}/(2s-1) (zero-exact)."""
    if cu == 0.0 or cv == 0.0:
        return 0.0
    return float(_up(_up(cu * cv) * psum_upper(n, 2.0 * s)))


def _tail_constant(u: TailVector, v: TailVector, n: int, s: float,
                   u0_mag: float = 0.0) -> float:
    """The D of the k > 2n tail (upper bound, zero-exact)."""
    cu, cv = _tail_mags(u, v)
    magu = u.head.mag
    magv = v.head.mag
    if cu == 0.0 and cv == 0.0:
        return 0.0
    i = np.arange(1, n + 1, dtype=float)
    base = IntervalVector.point(np.full(n, 2.0 * n + 1.0)) / \
        IntervalVector.point(2.0 * n + 1.0 - i)
    # (1 + ((2n+1)/(2n+1-i))^s), upper endpoints
    qlo, qhi = _ipow_arrays(base.lo, base.hi, s, s)
    fac_hi = _up(1.0 + qhi)
    terms_hi = _up_nz(_up_nz(cu * magv) + _up_nz(cv * magu))
    total_hi = _up_nz(np.sum(_up_nz(terms_hi * fac_hi)) * (1.0 + 1e-12))
    two_pow = Interval.point(2.0).pow(Interval.point(s))
    psum = psum_upper(n, s)
    rem = _up_nz(_up_nz(cu * cv) * _up((2.0 + two_pow.hi) * psum))
    d = _up_nz(0.5 * _up_nz(total_hi + rem))
    if u0_mag > 0.0 and cv > 0.0:
        d = _up(d + _up(u0_mag * cv))
    return float(d)


def _apply_parity_zeros(lo, hi, out_parity: Parity, k_index):
    if out_parity is Parity.NONE:
        return lo, hi
    if out_parity is Parity.EVEN:
        bad = k_index % 2 == 1
    else:
        bad = k_index % 2 == 0
    lo = np.where(bad, 0.0, lo)
    hi = np.where(bad, 0.0, hi)
    return lo, hi


def _check_inputs(u: TailVector, v: TailVector):
    if u.s != v.s:
        raise IntervalError("series products need equal tail exponents; weaken first")
    if u.s <= 1.0:
        raise IntervalError("non-representable tail: s must exceed 1")


# ---------------------------------------------------------------------------
# the three product operations
# ---------------------------------------------------------------------------

def sin_times_sin(u: TailVector, v: TailVector) -> TailVector:
    """Product of two sine series as a cosine series (constant + 2n head + tail)."""
    if u.kind is not Kind.SINE or v.kind is not Kind.SINE:
        raise IntervalError("sin_times_sin needs sine inputs")
    _check_inputs(u, v)
    n = max(u.n, v.n, 1)
    u = u.with_head(n)
    v = v.with_head(n)
    s = u.s
    u3 = u.coeffs(3 * n)
    v3 = v.coeffs(3 * n)
    cu, cv = _tail_mags(u, v)
    rem = _inner_remainder(cu, cv, n, s)

    # constant term
    c0 = (u3[:n] * v3[:n]).sum() * Interval(0.5, 0.5) + Interval.symmetric(0.5 * rem)

    s1, s2, s3 = _head_conv_sums(u3, v3, n)
    lo = _add_lo(_add_lo(s1[0], s2[0]), -s3[1])
    hi = _add_hi(_add_hi(s1[1], s2[1]), -s3[0])
    lo, hi = _imul_arrays(lo, hi, 0.5, 0.5)
    lo = _add_lo(lo, np.full(2 * n, -rem))
    hi = _add_hi(hi, np.full(2 * n, rem))

    if u.parity is Parity.ODD and v.parity is Parity.ODD:
        out_parity = Parity.EVEN
    else:
        out_parity = Parity.NONE
    k_idx = np.arange(1, 2 * n + 1)
    lo, hi = _apply_parity_zeros(lo, hi, out_parity, k_idx)

    d = _tail_constant(u, v, n, s)
    return TailVector(IntervalVector(lo, hi, _validate=False), -d, d, s,
                      Kind.COSINE, out_parity, c0)


def cos_times_sin(u: TailVector, v: TailVector) -> TailVector:
    """Product of a cosine series (with constant) and a sine series, as sine."""
    if u.kind is not Kind.COSINE or v.kind is not Kind.SINE:
        raise IntervalError("cos_times_sin needs cosine x sine")
    _check_inputs(u, v)
    n = max(u.n, v.n, 1)
    u = u.with_head(n)
    v = v.with_head(n)
    s = u.s
    u3 = u.coeffs(3 * n)
    v3 = v.coeffs(3 * n)
    cu, cv = _tail_mags(u, v)
    rem = _inner_remainder(cu, cv, n, s)

    s1, s2, s3 = _head_conv_sums(u3, v3, n)
    # here S1 = sum u_{i+k} v_i enters negatively, S2 = sum u_i v_{i+k} and
    # S3 = sum_{i<k} u_i v_{k-i} positively
    lo = _add_lo(_add_lo(s2[0], -s1[1]), s3[0])
    hi = _add_hi(_add_hi(s2[1], -s1[0]), s3[1])
    lo, hi = _imul_arrays(lo, hi, 0.5, 0.5)
    u0v = v3[:2 * n] * u.const
    lo = _add_lo(lo, u0v.lo)
    hi = _add_hi(hi, u0v.hi)
    lo = _add_lo(lo, np.full(2 * n, -rem))
    hi = _add_hi(hi, np.full(2 * n, rem))

    if u.parity is Parity.EVEN and v.parity is Parity.ODD:
        out_parity = Parity.ODD
    else:
        out_parity = Parity.NONE
    k_idx = np.arange(1, 2 * n + 1)
    lo, hi = _apply_parity_zeros(lo, hi, out_parity, k_idx)

    d = _tail_constant(u, v, n, s, u0_mag=u.const.mag)
    return TailVector(IntervalVector(lo, hi, _validate=False), -d, d, s,
                      Kind.SINE, out_parity)


def cube_term(u: TailVector, v: TailVector) -> TailVector:
    """The composite u^2 v (sine), via sin x sin then cos x sin."""
    w = sin_times_sin(u, u)
    return cos_times_sin(w, v.with_head(w.n))


# ---------------------------------------------------------------------------
# sine-basis re-expansion of a square (logistic-equation nonlinearity)
# ---------------------------------------------------------------------------

def _kappa_log_upper(i0: int) -> float:
    """Upper bound of sup_{i>=i0} (1 + ln i)/sqrt(i) (decreasing for i >= 2)."""
    i0i = Interval.point(float(i0))
    ln = Interval(float(_dn(math.log(i0))), float(_up(math.log(i0))))
    num = Interval(1.0, 1.0) + ln
    return (num / i0i.pow(Interval.point(0.5))).hi


def square_as_sine(u: TailVector, n_out: int = 0) -> TailVector:
    """Enclosure of the sine coefficients of u^2 for a sine-series u.

    The output head runs to n_out (>= max(2n, 4n+4) when the tail is
    nonzero); the tail sits at exponent min(3, s-1/2), carrying the
    compatibility limitation of non-boundary-vanishing nonlinearities.
    """
    if u.kind is not Kind.SINE:
        raise IntervalError("square_as_sine needs a sine series")
    n = max(u.n, 1)
    u = u.with_head(n)
    has_tail = not u.tail_is_zero()
    min_out = max(16 * n, 20) if has_tail else max(4 * n, 8)
    if n_out <= 0:
        n_out = min_out
    if n_out < min_out:
        raise IntervalError(f"square_as_sine needs n_out >= {min_out}")
    if has_tail and u.s <= 3.0:
        raise IntervalError("square_as_sine tail bounds need s > 3")

    # exact finite square of the head, as a cosine series c_0..c_{2n}
    w = sin_times_sin(u.head_part(n), u.head_part(n))
    c = w.coeffs(2 * n)           # zero beyond 2n by construction
    c0 = w.const

    # head entries: b_i = sum_m c_m K(i,m) plus a flat bound for the
    # head x tail and tail x tail contributions
    i_col = np.arange(1, n_out + 1, dtype=float)[:, None]
    m_row = np.arange(0, 2 * n + 1, dtype=float)[None, :]
    par = np.where((i_col + m_row) % 2.0 == 1.0, 2.0, 0.0)
    denom_lo = i_col * i_col - m_row * m_row            # exact in this range
    safe = denom_lo != 0.0
    denom = np.where(safe, denom_lo, 1.0)
    # K(i,m) = (2/pi) * par * i / (i^2 - m^2)
    num_lo, num_hi = _imul_arrays(par * i_col, par * i_col,
                                  np.where(safe, 1.0 / denom, 0.0),
                                  np.where(safe, 1.0 / denom, 0.0))
    # 1/denom rounds; widen by 2 ulp
    num_lo = np.minimum(_dn(_dn(num_lo)), num_lo)
    num_hi = np.maximum(_up(_up(num_hi)), num_hi)
    two_over_pi = Interval(2.0, 2.0) / PI
    klo, khi = _imul_arrays(num_lo, num_hi, two_over_pi.lo, two_over_pi.hi)

    call = IntervalVector(np.concatenate([[c0.lo], c.lo]),
                          np.concatenate([[c0.hi], c.hi]), _validate=False)
    plo, phi = _imul_arrays(klo, khi, call.lo[None, :], call.hi[None, :])
    blo, bhi = _isum_arrays(plo, phi, axis=1)

    s_out = 3.0
    d3_extra = 0.0
    if has_tail:
        # Cross blocks 2 u_head u_tail + u_tail^2.  Head entries get a flat
        # bound (2 sup of the cross function); tail entries i > n_out are
        # split by the pair index q = a+b:
        #   q outside (3i/4, 5i/4): the 1/i-cancelled pair form gives
        #     |T| <= (16/pi)(p^2+q^2)/i^3       (distances >= i/8, needs n <= i/16)
        #   q inside: raw K-bounds; b >= i/2 (resp. 3i/8) caps b^{-s}, and the
        #     resonant sum over |i-m| <= i/4 costs a log absorbed into i^{1/2}
        ct = u.tail_mag
        s = u.s
        idx = np.arange(1, n + 1, dtype=float)
        u1 = float(_isum_arrays(u.head.mag, u.head.mag)[1])
        a1 = float((IntervalVector.point(idx) * u.head.mag).sum().hi)
        sa2 = float((IntervalVector.point(idx * idx) * u.head.mag).sum().hi)
        t0 = float(_up(ct * psum_upper(n, s)))
        t1 = float(_up(ct * psum_upper(n, s - 1.0)))
        t2 = float(_up(ct * psum_upper(n, s - 2.0)))
        sup_h = u1
        # head-region cross bound: two integrations by parts of the cross
        # function w = 2 u_h u_t + u_t^2 (which vanishes with w' boundary-free
        # once), |b_i| <= 2 min(sup|w|, sup|w''|/i^2)
        sup_w = float(_up(2.0 * _up(_up(2.0 * _up(sup_h * t0)) + _up(t0 * t0))))
        sup_w2 = float(_up(2.0 * _up(
            _up(sa2 * t0) + _up(2.0 * a1 * t1) + _up(sup_h * t2)
            + _up(t1 * t1) + _up(t0 * t2))))
        iarr = np.arange(1, n_out + 1, dtype=float)
        cross = np.minimum(sup_w, _up(2.0 * sup_w2) / (iarr * iarr))
        blo = _add_lo(blo, -cross)
        bhi = _add_hi(bhi, cross)
        p0 = psum_upper(n, s)
        p2 = psum_upper(n, s - 2.0)
        # far + mid bands, exponent 3
        d_fm = float(_up((64.0 / (math.pi - 0.01)) * ct
                         * _up(_up(sa2 * p0) + _up(u1 * p2) + _up(ct * p0 * p2))))
        # resonant band, exponent s - 1/2
        kap = _kappa_log_upper(n_out + 1)
        two_s = Interval.point(2.0).pow(Interval.point(s)).hi
        eight_thirds_s = (Interval.point(8.0) / Interval.point(3.0)) \
            .pow(Interval.point(s)).hi
        d_near = float(_up((16.0 / (math.pi - 0.01)) * kap * ct
                           * _up(_up(u1 * two_s) + _up(ct * p0 * eight_thirds_s))))
        if s - 0.5 >= 3.0:
            if s - 0.5 > 3.0:
                fac = Interval.point(float(n_out + 1)).pow(
                    Interval.point(s - 0.5 - 3.0))
                d_near = float(_up(d_near / fac.lo))
            d3_extra = float(_up(d_fm + d_near))
            s_out = 3.0
        else:
            s_out = s - 0.5
            fac = Interval.point(float(n_out + 1)).pow(Interval.point(3.0 - s_out))
            d3_extra = float(_up(_up(d_fm / fac.lo) + d_near))

    # head-head tail block at exponent 3 (weakened if s_out < 3)
    a_sum = float((IntervalVector.point(np.arange(1, n + 1, dtype=float))
                   * u.head.mag).sum().hi)
    ratio = 2.0 * n / (n_out + 1.0)
    kappa_hh = float(_up(1.0 / _dn((1.0 - ratio * ratio) ** 2)))
    d3 = float(_up((8.0 / (math.pi - 0.01)) * kappa_hh * _up(a_sum * a_sum)))
    if s_out < 3.0:
        fac = Interval.point(float(n_out + 1)).pow(Interval.point(3.0 - s_out))
        d3 = float(_up(d3 / fac.lo))
    d_total = float(_up(d3 + d3_extra))

    out_parity = Parity.ODD if u.parity is Parity.ODD else Parity.NONE
    k_idx = np.arange(1, n_out + 1)
    blo, bhi = _apply_parity_zeros(blo, bhi, out_parity, k_idx)
    return TailVector(IntervalVector(blo, bhi, _validate=False),
                      -d_total, d_total, s_out, Kind.SINE, out_parity)
