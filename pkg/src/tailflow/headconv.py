"""Truncated (Galerkin) interval convolutions and Jacobian assembly.

These operate on plain (lo, hi) coefficient arrays for sine modes 1..m
(cosine modes 0..2m), with no tail bookkeeping: they realize the projected
vector field of the head system exactly, at numpy speed.  The cubic
Brusselator term N(u,v) = (u ⊙ u) ⊛ v factors through

    sine ⊙ sine -> cosine:  c_0 = 1/2 sum u_i v_i,
        c_k = 1/2 (sum u_{i+k} v_i + sum u_i v_{i+k} - sum_{i<k} u_i v_{k-i})
    cosine ⊛ sine -> sine:  (w v)_k = w_0 v_k + 1/2 (sum w_i v_{i+k}
        - sum w_{i+k} v_i + sum_{i<k} w_i v_{k-i})

and the underlying trilinear form is symmetric in its three slots, so both
partial derivatives of N are ⊛-multiplier matrices:

    dN/dv = M(u ⊙ u),   dN/du = 2 M(u ⊙ v),
    M(w)[k, c] = w_0 delta_{kc} + 1/2 ((1 - delta_{kc}) w_{|c-k|} - w_{c+k}).

The convolutions run in midpoint-radius form (Rump's product rule with an
a-priori gamma_n correction for the float contractions), batched over sums
of products so a whole Taylor-jet order costs a few GEMV passes.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from tailflow.intervals import (
    IntervalMatrix,
    _add_lo,
    _add_hi,
    _dn,
    _up,
)

__all__ = [
    "hc_sinsin",
    "hc_cossin",
    "hc_sinsin_sum",
    "hc_cossin_sum",
    "multiplier_matrix",
    "HeadConvPlan",
]

_U = 2.0 ** -53


@lru_cache(maxsize=32)
class HeadConvPlan:
    """Cached gather-index plans for head size m."""

    def __init__(self, m: int):
        self.m = m
        k2 = np.arange(1, 2 * m + 1)[:, None]   # sinsin output index
        i = np.arange(1, m + 1)[None, :]
        self.ss_mask12 = (i + k2) <= m          # indices i with i+k <= m
        self.ss_ipk = np.where(self.ss_mask12, i + k2 - 1, 0)
        self.ss_mask3 = (i < k2) & ((k2 - i) >= 1) & ((k2 - i) <= m)
        self.ss_kmi = np.where(self.ss_mask3, k2 - i - 1, 0)

        k1 = np.arange(1, m + 1)[:, None]       # cossin output index
        self.cs_mask1 = (i + k1) <= m           # v_{i+k} exists
        self.cs_v_ipk = np.where(self.cs_mask1, i + k1 - 1, 0)
        self.cs_w_ipk = i + k1 - 1              # w_{i+k}, always <= 2m
        self.cs_mask3 = (i < k1)                # w_{k-i} with i' = k-i below
        self.cs_w_kmi = np.where(self.cs_mask3, k1 - i - 1, 0)

        kk = np.arange(1, m + 1)[:, None]
        cc = np.arange(1, m + 1)[None, :]
        self.mm_diag = kk == cc
        self.mm_abs = np.abs(cc - kk)
        self.mm_sum = cc + kk


def _to_mr(lo, hi):
    """Midpoint-radius covering [lo, hi]; exact points keep radius 0."""
    mid = lo + 0.5 * (hi - lo)
    rad = np.maximum(mid - lo, hi - mid)
    rad = np.nextafter(np.nextafter(rad, np.inf), np.inf)
    rad = np.where(lo == hi, 0.0, rad)
    return mid, rad


def _from_mr(mid, rad):
    lo = np.where(rad == 0.0, mid, _dn(mid - rad))
    hi = np.where(rad == 0.0, mid, _up(mid + rad))
    return lo, hi


def _gamma_fac(q: int) -> float:
    t = (q + 8) * _U
    return (t / (1.0 - t)) * (1.0 + 8.0 * _U)


def _mr_matvec(am, ar, bm, br):
    """mid/rad of A @ b for interval A (.., n, q) and interval b (.., q)."""
    q = am.shape[-1]
    g = _gamma_fac(q)
    aa = np.abs(am)
    ba = np.abs(bm)
    mid = am @ bm[..., None]
    rad = (ar @ (ba + br)[..., None]
           + aa @ (br + (g * (1.0 + 8.0 * g)) * ba)[..., None])
    rad = _up(rad * (1.0 + 8.0 * g))
    return mid[..., 0], rad[..., 0]


def _windows(arr, offset, count, width):
    """Sliding windows arr[.., offset+k : offset+k+width], k = 0..count-1
    (stride view, no copy)."""
    v = np.lib.stride_tricks.sliding_window_view(arr, width, axis=-1)
    return v[..., offset:offset + count, :]


def _corr_parts(am, ar, aa, bm, br, ba, lag0, count, width):
    """Windowed correlations sum_i a_{lag+i} b_i for lag = lag0.., batched
    over the leading pair axis; returns (mid, rad-part, mag) without the
    gamma correction."""
    wm = _windows(am, lag0, count, width)
    wr = _windows(ar, lag0, count, width)
    wa = _windows(aa, lag0, count, width)
    mid = wm @ bm[..., None]
    radp = wr @ (ba + br)[..., None] + wa @ br[..., None]
    mag = wa @ ba[..., None]
    return mid[..., 0], radp[..., 0], mag[..., 0]


def _mr_batch(us, vs):
    jn = len(us)
    m = len(us[0][0])
    um = np.empty((jn, m)); ur = np.empty((jn, m))
    vm = np.empty((jn, m)); vr = np.empty((jn, m))
    for j, (u, v) in enumerate(zip(us, vs)):
        um[j], ur[j] = _to_mr(*u)
        vm[j], vr[j] = _to_mr(*v)
    return um, ur, np.abs(um), vm, vr, np.abs(vm)


def hc_sinsin_sum(us, vs):
    """Cosine coefficients of sum_j u_j v_j over pairs of sine heads.

    us, vs: sequences of (lo, hi) arrays of length m.
    Returns (c0_lo, c0_hi, wlo, whi), w indexed 1..2m.
    """
    m = len(us[0][0])
    jn = len(us)
    um, ur, ua, vm, vr, va = _mr_batch(us, vs)
    zc = np.zeros((jn, 2 * m + 1))
    ump = np.concatenate([um, zc], axis=1)
    urp = np.concatenate([ur, zc], axis=1)
    uap = np.concatenate([ua, zc], axis=1)
    vmp = np.concatenate([vm, zc], axis=1)
    vrp = np.concatenate([vr, zc], axis=1)
    vap = np.concatenate([va, zc], axis=1)
    zl = np.zeros((jn, m))
    zr = np.zeros((jn, m + 2))
    vmr = np.concatenate([zl, vm[:, ::-1], zr], axis=1)
    vrr = np.concatenate([zl, vr[:, ::-1], zr], axis=1)
    var = np.concatenate([zl, va[:, ::-1], zr], axis=1)

    g = _gamma_fac(3 * jn * m)

    c0m = float(np.einsum("ji,ji->", um, vm))
    c0mag = float(np.einsum("ji,ji->", ua, va))
    c0r = float(np.einsum("ji,ji->", ur, va + vr)
                + np.einsum("ji,ji->", ua, vr)
                + (g * (1 + 8 * g)) * c0mag)
    c0r = 0.0 if c0r == 0.0 else float(_up(c0r * (1.0 + 8.0 * g)))
    c0lo, c0hi = _from_mr(np.float64(0.5 * c0m), np.float64(0.5 * c0r))

    # S1_k = sum_i u_{i+k} v_i and S2_k = sum_i v_{i+k} u_i, lags 1..2m
    m1, r1, a1 = _corr_parts(ump, urp, uap, vm, vr, va, 1, 2 * m, m)
    m2, r2, a2 = _corr_parts(vmp, vrp, vap, um, ur, ua, 1, 2 * m, m)
    # S3_k = sum_{i<k} u_i v_{k-i}: windows on reversed v at offsets
    # 2m+1-k, i.e. rows come out in reverse k-order
    m3, r3, a3 = _corr_parts(vmr, vrr, var, um, ur, ua, 1, 2 * m, m)
    m3 = m3[..., ::-1]; r3 = r3[..., ::-1]; a3 = a3[..., ::-1]

    mid = np.sum(m1 + m2 - m3, axis=0)
    radp = np.sum(r1 + r2 + r3, axis=0)
    mag = np.sum(a1 + a2 + a3, axis=0)
    rad = radp + (g * (1.0 + 8.0 * g)) * mag
    rad = np.where(rad == 0.0, 0.0, _up(rad * (1.0 + 8.0 * g)))
    wlo, whi = _from_mr(0.5 * mid, 0.5 * rad)
    return float(c0lo), float(c0hi), wlo, whi


def hc_sinsin(ulo, uhi, vlo, vhi):
    """Cosine coefficients of the product of two sine heads (modes 1..m)."""
    return hc_sinsin_sum([(ulo, uhi)], [(vlo, vhi)])


def hc_cossin_sum(ws, vs):
    """Sine coefficients 1..m of sum_j (c0_j + cosine w_j) v_j.

    ws: sequence of (c0lo, c0hi, wlo, whi) with w indexed 1..2m;
    vs: sequence of (lo, hi) sine heads 1..m.
    """
    m = len(vs[0][0])
    jn = len(ws)
    wm = np.empty((jn, 2 * m)); wr = np.empty((jn, 2 * m))
    vm = np.empty((jn, m)); vr = np.empty((jn, m))
    for j, (w, v) in enumerate(zip(ws, vs)):
        wm[j], wr[j] = _to_mr(w[2], w[3])
        vm[j], vr[j] = _to_mr(*v)
    wa, va = np.abs(wm), np.abs(vm)
    zc = np.zeros((jn, m + 1))
    vmp = np.concatenate([vm, zc], axis=1)
    vrp = np.concatenate([vr, zc], axis=1)
    vap = np.concatenate([va, zc], axis=1)
    zc2 = np.zeros((jn, m + 1))
    wmp = np.concatenate([wm, zc2], axis=1)
    wrp = np.concatenate([wr, zc2], axis=1)
    wap = np.concatenate([wa, zc2], axis=1)
    # reversed v padded for the third sum: window width 2m, offsets 3m+1-k
    zl = np.zeros((jn, 2 * m))
    zr2 = np.zeros((jn, 2 * m + 2))
    vmr = np.concatenate([zl, vm[:, ::-1], zr2], axis=1)
    vrr = np.concatenate([zl, vr[:, ::-1], zr2], axis=1)
    var = np.concatenate([zl, va[:, ::-1], zr2], axis=1)

    g = _gamma_fac(5 * jn * m)

    # T1_k = sum_i v_{i+k} w_i (i <= m), T2_k = sum_i w_{i+k} v_i,
    # T3_k = sum_{i<k} w_i v_{k-i}
    wfm, wfr, wfa = wm[:, :m], wr[:, :m], wa[:, :m]
    m1, r1, a1 = _corr_parts(vmp, vrp, vap, wfm, wfr, wfa, 1, m, m)
    m2, r2, a2 = _corr_parts(wmp, wrp, wap, vm, vr, va, 1, m, m)
    m3, r3, a3 = _corr_parts(vmr, vrr, var, wm, wr, wa, 2 * m + 1, m, 2 * m)
    m3 = m3[..., ::-1]; r3 = r3[..., ::-1]; a3 = a3[..., ::-1]

    mid = np.sum(m1 - m2 + m3, axis=0)
    radp = np.sum(r1 + r2 + r3, axis=0)
    mag = np.sum(a1 + a2 + a3, axis=0)
    rad = radp + (g * (1.0 + 8.0 * g)) * mag
    rad = np.where(rad == 0.0, 0.0, _up(rad * (1.0 + 8.0 * g)))
    slo, shi = _from_mr(0.5 * mid, 0.5 * rad)

    # constant terms c0_j v_j
    c0m, c0r = _to_mr(np.array([w[0] for w in ws]),
                      np.array([w[1] for w in ws]))
    c0m = c0m[:, None]
    c0r = c0r[:, None]
    tm = c0m * vm
    tr = np.abs(c0m) * vr + c0r * (va + vr) + (4.0 * jn + 8.0) * _U * np.abs(tm)
    tm_s = np.sum(tm, axis=0)
    tr_s = np.sum(tr, axis=0) * (1.0 + (jn + 8) * _U)
    tr_s = np.where(tr_s == 0.0, 0.0, _up(tr_s))
    tlo, thi = _from_mr(tm_s, tr_s)
    return _add_lo(slo, tlo), _add_hi(shi, thi)


def hc_cossin(c0lo, c0hi, wlo, whi, vlo, vhi):
    """Sine coefficients 1..m of (c0 + cosine head 1..2m) x (sine head 1..m)."""
    return hc_cossin_sum([(c0lo, c0hi, wlo, whi)], [(vlo, vhi)])


def multiplier_matrix(c0lo, c0hi, wlo, whi) -> IntervalMatrix:
    """The matrix of dv -> (c0 + cosine w) ⊛ dv on sine modes 1..m."""
    m = len(wlo) // 2
    plan = HeadConvPlan(m)
    abs_lo = np.where(plan.mm_diag, 0.0, wlo[plan.mm_abs - 1])
    abs_hi = np.where(plan.mm_diag, 0.0, whi[plan.mm_abs - 1])
    sum_lo = wlo[plan.mm_sum - 1]
    sum_hi = whi[plan.mm_sum - 1]
    mlo = 0.5 * _add_lo(abs_lo, -sum_hi)
    mhi = 0.5 * _add_hi(abs_hi, -sum_lo)
    dl = np.where(plan.mm_diag, c0lo, 0.0)
    dh = np.where(plan.mm_diag, c0hi, 0.0)
    return IntervalMatrix(_add_lo(mlo, dl), _add_hi(mhi, dh), _validate=False)