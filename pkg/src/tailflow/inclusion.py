"""Rigorous integration of finite-dimensional differential inclusions.

Solves x' in Lambda x + N(x) + const + [delta] over one step with a
Lohner-type algorithm on an affine set representation {base + frame r + e}:

1.  Rough enclosure by a per-mode exponential (Duhamel) fixed point
        W  >=  e^{[0,tau] lambda} X0 + conv{0, (e^{lambda tau}-1)/lambda} M(W),
    which stays usable for stiff dissipative modes where first-order boxes
    diverge.
2.  Taylor step of fixed order p: point jets at the base, interval jets over
    the start box for the Jacobian coefficients, jets over W for the Lagrange
    remainders of both the value and the variational series.
3.  The set-valued perturbation is centered; its radius enters through the
    comparison bound |e(tau)| <= |delta| tau e^{c tau} with c an upper bound
    of the infinity-lognorm of the Jacobian over W, folded into the slack.
4.  QR re-orthonormalization of the propagated frame (parallelepiped kept if
    the orthogonal factor fails verification).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from tailflow.intervals import (
    Interval,
    IntervalError,
    IntervalMatrix,
    IntervalVector,
    VerificationError,
    _add_hi,
    _add_lo,
    _imul_arrays,
    _up,
    verified_inverse,
)

__all__ = ["AffineSet", "InclusionOptions", "RoughEnclosureError",
           "rough_enclosure", "tight_step"]


class RoughEnclosureError(RuntimeError):
    """No self-consistent rough enclosure found: reduce tau."""


@dataclass(frozen=True)
class AffineSet:
    """{base + frame @ rho + e : rho in r, e in slack}."""

    base: np.ndarray
    frame: np.ndarray
    r: IntervalVector
    slack: IntervalVector
    frame_inv: Optional[IntervalMatrix] = None

    @classmethod
    def from_box(cls, box: IntervalVector) -> "AffineSet":
        mid = box.mid
        n = len(box)
        return cls(mid, np.eye(n), box - mid, IntervalVector.zeros(n),
                   IntervalMatrix.identity(n))

    @property
    def dim(self) -> int:
        return len(self.base)

    def box(self) -> IntervalVector:
        fr = IntervalMatrix.point(self.frame) @ self.r
        return fr + self.base + self.slack

    def inv(self) -> IntervalMatrix:
        if self.frame_inv is not None:
            return self.frame_inv
        return verified_inverse(self.frame)

    def tighten(self, box: IntervalVector) -> "AffineSet":
        """Intersect with an external coordinate box (kept in frame coords)."""
        finv = self.inv()
        limit = finv @ ((box - self.base) - self.slack)
        r2 = self.r.intersect(limit)
        if not isinstance(r2, IntervalVector):
            # numerically disjoint can only arise from overestimation quirks;
            # keep the original rather than produce an empty set
            return self
        return AffineSet(self.base, self.frame, r2, self.slack, self.frame_inv)

    def contains_point(self, x, slack: float = 0.0) -> bool:
        rr = self.inv() @ (IntervalVector.point(x) - self.base - self.slack)
        return bool(np.all(rr.hi >= self.r.lo - slack)
                    and np.all(rr.lo <= self.r.hi + slack))


@dataclass(frozen=True)
class InclusionOptions:
    order: int = 4
    rough_inflate: float = 1.01
    rough_abs: float = 1e-17
    rough_budget: int = 30


def _phi_factor(lam: IntervalVector, tau: float):
    """Per-mode enclosures of e^{[0,tau] lam} and of the Duhamel factor
    {int_0^t e^{lam (t-s)} ds : t in [0,tau]} = t Phi(lam t) in [0, ub]."""
    et = (lam * Interval.point(tau)).exp()
    e_lo = np.minimum(et.lo, 1.0)
    e_hi = np.maximum(et.hi, 1.0)
    # Phi(z) = (e^z - 1)/z <= max(1, Phi(z_hi)); ub = tau * that
    z_hi = np.max(lam.hi) * tau
    if z_hi <= 0.0:
        ub = float(_up(tau))
    else:
        ub = float(_up(tau * float(((Interval.point(z_hi).exp()
                                     - Interval(1.0, 1.0))
                                    / Interval.point(z_hi)).hi)))
        ub = max(ub, float(_up(tau)))
    duh = IntervalVector(np.zeros(len(lam)), np.full(len(lam), ub),
                         _validate=False)
    return IntervalVector(e_lo, e_hi, _validate=False), duh


def rough_enclosure(fld, delta: IntervalVector, x0_box: IntervalVector,
                    tau: float, opts: InclusionOptions = InclusionOptions()
                    ) -> IntervalVector:
    """Box W containing all solutions of the inclusion on [0, tau]."""
    eh, duh = _phi_factor(fld.lam, tau)
    w = x0_box.hull(x0_box + (fld.nonlin(x0_box) + delta) * duh)
    for _ in range(opts.rough_budget):
        m = fld.nonlin(w) + delta
        w_new = (eh * x0_box) + duh * m
        if w_new.interior_subset(w):
            return w_new
        grown = w.hull(w_new)
        mid = grown.mid
        lo = mid + (grown.lo - mid) * opts.rough_inflate - opts.rough_abs
        hi = mid + (grown.hi - mid) * opts.rough_inflate + opts.rough_abs
        w = IntervalVector(np.minimum(lo, grown.lo), np.maximum(hi, grown.hi),
                           _validate=False)
    raise RoughEnclosureError("no self-consistent rough enclosure; reduce tau")


def _lognorm_upper(dg: IntervalMatrix) -> float:
    """Upper bound of the infinity-lognorm over all point matrices in dg."""
    mag = dg.mag.copy()
    d = np.arange(dg.shape[0])
    mag[d, d] = dg.hi[d, d]
    rows = np.sum(mag, axis=1) * (1.0 + 1e-14)
    return float(_up(np.max(rows)))


def _tau_powers(tau: float, upto: int):
    powers = [Interval(1.0, 1.0)]
    ti = Interval.point(tau)
    for _ in range(upto):
        powers.append(powers[-1] * ti)
    return powers


@dataclass
class StepDiagnostics:
    remainder_mag: float = 0.0
    eta: float = 0.0
    lognorm: float = 0.0
    qr_ok: bool = True
    rough_width: float = 0.0


def tight_step(fld, delta: IntervalVector, x: AffineSet, tau: float,
               opts: InclusionOptions = InclusionOptions(),
               w: Optional[IntervalVector] = None
               ) -> tuple[AffineSet, StepDiagnostics]:
    """One Taylor-Lohner step of the inclusion from the affine set x."""
    p = opts.order
    dmid = delta.mid
    drad = IntervalVector(_add_lo(delta.lo, -dmid), _add_hi(delta.hi, -dmid),
                          _validate=False)
    dmax = float(np.max(drad.mag, initial=0.0))
    fldc = fld.with_extra_const(IntervalVector.point(dmid))

    if w is None:
        w = rough_enclosure(fldc, drad.hull(IntervalVector.zeros(x.dim)),
                            x.box(), tau, opts)

    # jets: point (base), start box (Jacobian coefficients), W (remainders)
    base_iv = IntervalVector.point(x.base)
    uj_pt, vj_pt, _, _ = fldc.flow_jets(base_iv, p, need_jac=False)
    box0 = x.box()
    uj_bx, vj_bx, wj_bx, yj_bx = fldc.flow_jets(box0, p)
    uj_w, vj_w, wj_w, yj_w = fldc.flow_jets(w, p + 1)

    tp = _tau_powers(tau, p + 1)

    # value: Taylor series at the base + Lagrange remainder over W
    val = fldc.jet_coeff(uj_pt, vj_pt, 0)
    for j in range(1, p + 1):
        val = val + fldc.jet_coeff(uj_pt, vj_pt, j) * tp[j]
    rem = fldc.jet_coeff(uj_w, vj_w, p + 1) * tp[p + 1]
    val = val + rem

    # variational series: M_j over the start box, remainder over W
    dg_bx = fldc.dg_matrices(wj_bx, yj_bx, p - 1)
    mjets = [IntervalMatrix.identity(x.dim)]
    for j in range(p):
        acc = dg_bx[j] @ mjets[0]
        for a in range(j):
            acc = acc + (dg_bx[a] @ mjets[j - a])
        inv = Interval(1.0, 1.0) / Interval.point(float(j + 1))
        mjets.append(acc.scale(inv))
    jmat = mjets[0]
    for j in range(1, p + 1):
        jmat = jmat + mjets[j].scale(tp[j])
    # M-remainder: recursion over W with a lognorm ball as order-0
    dg_w = fldc.dg_matrices(wj_w, yj_w, p)
    c_up = _lognorm_upper(dg_w[0])
    ball = float((Interval.point(max(c_up, 0.0) * tau)).exp().hi)
    mw = [IntervalMatrix(np.full((x.dim, x.dim), -ball),
                         np.full((x.dim, x.dim), ball), _validate=False)]
    for j in range(p + 1):
        acc = dg_w[j] @ mw[0]
        for a in range(j):
            acc = acc + (dg_w[a] @ mw[j - a])
        inv = Interval(1.0, 1.0) / Interval.point(float(j + 1))
        mw.append(acc.scale(inv))
    jmat = jmat + mw[p + 1].scale(tp[p + 1])

    # inclusion deviation bound from the centered perturbation
    eta = 0.0
    if dmax > 0.0:
        fac = (Interval.point(tau)
               * (Interval.point(max(c_up, 0.0) * tau)).exp()).hi
        eta = float(_up(dmax * fac))
    eta_box = IntervalVector.symmetric(np.full(x.dim, eta))

    # assemble and re-orthonormalize
    base_new = val.mid
    frameprod = jmat @ x.frame
    cmid = frameprod.mid
    try:
        q, _ = np.linalg.qr(cmid)
        qinv = verified_inverse(q)
        qr_ok = True
    except (np.linalg.LinAlgError, VerificationError):
        q = cmid
        qinv = verified_inverse(q)
        qr_ok = False
    rest = (val - base_new) + (jmat @ x.slack) + eta_box
    r_new = (qinv @ frameprod) @ x.r + (qinv @ rest)
    out = AffineSet(base_new, q, r_new, IntervalVector.zeros(x.dim), qinv)
    diag = StepDiagnostics(
        remainder_mag=float(np.max(rem.mag, initial=0.0)),
        eta=eta, lognorm=c_up, qr_ok=qr_ok,
        rough_width=float(np.max(w.width, initial=0.0)))
    return out, diag
