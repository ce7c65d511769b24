"""Validated enclosures X([0,tau]) = X0 + Z for dissipative mode systems.

For each mode i, trajectories of x_i' = lambda_i x_i + f_i(x(t)) with
f_i^- <= f_i <= f_i^+ over X0 + Z satisfy both

  h-bound:  x_i(t) - x_i(0)  in  [0,t] (lambda_i (X0+Z)_i + f_i)
  g-bound:  x_i(t) - x_i(0)  in  (e^{lambda_i t} - 1)(f_i / lambda_i + X0_i)

so the candidate motion interval Z1_i = ND_i ∩ D_i (the two bounds) must be
interior to Z_i for the enclosure to validate.  Head indices are checked
entrywise; for the infinitely many tail indices the g-bound is evaluated
symbolically on the (C, s) tail constants, with e^{[0,tau] lambda_i} - 1
enclosed by [-1, 0] and 1/lambda_i by a 1/i^2-decay tail, which covers every
index beyond the head at once.

On rejection the candidate is inflated, Z <- [0,c] Z1, and after half the
retry budget the step is also halved; dissipativity guarantees some
sufficiently small step validates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from tailflow.intervals import EMPTY, Interval, IntervalError, IntervalVector
from tailflow.models import PdeState
from tailflow.tails import Kind, Parity, TailVector

__all__ = [
    "EnclosurePolicy",
    "EnclosureResult",
    "validate_enclosure",
    "find_enclosure",
]


@dataclass(frozen=True)
class EnclosurePolicy:
    inflate: float = 2.0        # Z <- [0, inflate] * Z1 on rejection
    fold_margin: float = 1.2    # margin on head-region suggestions folded
    max_retries: int = 20       # into the candidate tail (they scale with C
    min_tau: float = 1e-5       # itself, so full inflation would overshoot)
    shrink_tau: bool = True     # halve tau after half the budget
    floor_rel: float = 0.1      # symmetric widening of the candidate, needed
    floor_abs: float = 1e-14    # when suggestions are one-sided (hi or lo 0)
    giveup_magnitude: float = 1e40   # candidate growth beyond this: diverged


@dataclass
class EnclosureResult:
    accepted: bool
    tau: float
    z1: PdeState                      # computed candidate refinement
    z: PdeState                       # the Z that was validated against
    enclosure: Optional[PdeState]     # X0 + Z1 on acceptance
    f_bounds: PdeState                # V^f over X0 + Z (conclusion-3 data)
    x0: PdeState
    diagnostics: dict = field(default_factory=dict)
    retries: int = 0

    def conclusion3(self, comp: int, i: int, model, t: float) -> Interval:
        """Per-mode endpoint bound e^{t lam} x0_i + (e^{t lam}-1)/lam [f-,f+]."""
        lam = model.lam[comp].at(i)
        et = (lam * Interval.point(t)).exp()
        x0i = self.x0[comp].coeff(i)
        fi = self.f_bounds[comp].coeff(i)
        if lam.contains_zero():
            return x0i + Interval(0.0, t) * fi
        return et * x0i + (et - Interval(1.0, 1.0)) / lam * fi


def _interior_margin(z1: TailVector, z: TailVector):
    """Worst head margin and failing indices of z1 subset-int z."""
    n = max(z1.n, z.n)
    a = z1.with_head(n)
    b = z.with_head(n)
    lo_m = a.head.lo - b.head.lo
    hi_m = b.head.hi - a.head.hi
    margin = np.minimum(lo_m, hi_m)
    idx = np.arange(1, n + 1)
    if z.parity is Parity.ODD:
        margin[idx % 2 == 0] = np.inf
    elif z.parity is Parity.EVEN:
        margin[idx % 2 == 1] = np.inf
    bad = np.where(margin <= 0.0)[0] + 1
    return margin, bad.tolist()


def validate_enclosure(model, x0: PdeState, z: PdeState, tau: float) -> EnclosureResult:
    """One pass of the validation algorithm; no retries."""
    if tau <= 0.0:
        raise IntervalError("enclosure needs tau > 0")
    for c in range(model.ncomp):
        if not (np.all(z[c].head.lo <= 0.0) and np.all(z[c].head.hi >= 0.0)
                and z[c].c_lo <= 0.0 <= z[c].c_hi):
            raise IntervalError("Z must contain zero entrywise")
    xz = x0 + z
    f = model.apply_f(xz)
    tau_iv = Interval(0.0, tau)

    z1_parts = []
    diagnostics = {"tau": tau, "components": []}
    accepted = True
    for c in range(model.ncomp):
        nf = f[c].n
        lam = model.lam[c].head(np.arange(1, nf + 1))
        x0m = x0[c].coeffs(nf)
        xzm = xz[c].coeffs(nf)
        fm = f[c].coeffs(nf)

        # non-dissipative bound: [0,tau] (lambda x + f) over X0+Z
        nd = (lam * xzm + fm) * tau_iv

        # dissipative bound: (e^{[0,tau] lam} - 1)(f/lam + x0); the factor is
        # monotone in t so the endpoint values hulled with 0 enclose it
        et = (lam * Interval.point(tau)).exp()
        em1 = et - Interval(1.0, 1.0)
        e1 = IntervalVector(np.minimum(em1.lo, 0.0),
                            np.maximum(em1.hi, 0.0), _validate=False)
        lam_ok = (lam.lo > 0.0) | (lam.hi < 0.0)
        # guard zero eigenvalues by a harmless placeholder; masked below
        lam_safe = IntervalVector(np.where(lam_ok, lam.lo, 1.0),
                                  np.where(lam_ok, lam.hi, 1.0), _validate=False)
        d = e1 * (fm / lam_safe + x0m)

        z1lo = np.where(lam_ok, np.maximum(nd.lo, d.lo), nd.lo)
        z1hi = np.where(lam_ok, np.minimum(nd.hi, d.hi), nd.hi)
        # both bounds contain 0, so the intersection is never empty
        z1_head = IntervalVector(np.minimum(z1lo, z1hi), np.maximum(z1lo, z1hi),
                                 _validate=False)

        # tail: g-bound on (C, s) constants, uniformly over i > nf
        if not model.lam[c].neg_beyond(nf):
            raise IntervalError("dissipativity lost beyond the head")
        linv = model.lam[c].inv_tail_constants(nf)
        f_tail = TailVector(IntervalVector.zeros(nf), f[c].c_lo, f[c].c_hi,
                            f[c].s, Kind.SINE, f[c].parity)
        fl = f_tail.mul_pointwise(TailVector(
            IntervalVector.zeros(nf), linv.lo, linv.hi, 2.0, Kind.SINE,
            Parity.NONE))
        x0_tail = TailVector(IntervalVector.zeros(nf), x0[c].c_lo, x0[c].c_hi,
                             x0[c].s, Kind.SINE, x0[c].parity)
        d_tail = (fl + x0_tail).scale(Interval(-1.0, 0.0))

        z1_tv = TailVector(z1_head, d_tail.c_lo, d_tail.c_hi, d_tail.s,
                           Kind.SINE, x0[c].parity)
        z1_parts.append(z1_tv)

        ok = z1_tv.interior_subset(z[c])
        margin, bad = _interior_margin(z1_tv, z[c])
        empty = IntervalVector(np.zeros(0), np.zeros(0), _validate=False)
        tail_ok = (TailVector(empty, d_tail.c_lo, d_tail.c_hi,
                              d_tail.s, Kind.SINE, x0[c].parity)
                   .interior_subset(TailVector(empty, z[c].c_lo, z[c].c_hi,
                                               z[c].s, Kind.SINE, z[c].parity)))
        diagnostics["components"].append({
            "head_margin_min": float(np.min(margin)) if len(margin) else np.inf,
            "head_violations": bad,
            "tail_ok": tail_ok,
            "tail_z1": (d_tail.c_lo, d_tail.c_hi, d_tail.s),
            "tail_z": (z[c].c_lo, z[c].c_hi, z[c].s),
        })
        accepted = accepted and ok

    z1 = PdeState(tuple(z1_parts))
    enclosure = (x0.with_head(z1.n) + z1) if accepted else None
    return EnclosureResult(accepted, tau, z1, z, enclosure, f, x0, diagnostics)


def find_enclosure(model, x0: PdeState, tau0: float,
                   policy: EnclosurePolicy = EnclosurePolicy(),
                   z0: Optional[PdeState] = None) -> EnclosureResult:
    """Iterate validate_enclosure, inflating Z (and eventually halving tau)."""
    if policy.inflate <= 1.0:
        raise IntervalError("inflation factor must exceed 1")
    n = x0.n
    if z0 is None:
        z = x0.map(lambda c: TailVector.zeros(c.n, c.s, c.kind, c.parity))
    else:
        z = z0
    tau = tau0
    last = None
    for attempt in range(policy.max_retries):
        res = validate_enclosure(model, x0, z, tau)
        res.retries = attempt
        if res.accepted:
            return res
        last = res
        if any(max(abs(c.c_lo), c.c_hi, float(np.max(c.head.mag, initial=0.0)))
               > policy.giveup_magnitude for c in res.z1.components):
            last.diagnostics["diverged"] = True
            return last
        # Build the next candidate: bring the suggestion to the target
        # exponent, fold its head back to the state's length, and combine
        # an inflated symbolic tail with a lightly-margined folded tail.
        # The candidate family is a free choice, so it is pinned at the
        # state's requested decay exponent: an incompatible exponent then
        # fails instead of silently drifting to a weaker one.
        parts = []
        for c1 in res.z1.components:
            if c1.s > x0.s:
                c1 = c1.weaken_decay(x0.s)
            folded = c1.shrink_head(n)
            t_sym = Interval(c1.c_lo, c1.c_hi) * Interval(0.0, policy.inflate)
            t_fold = Interval(folded.c_lo, folded.c_hi) \
                * Interval(0.0, policy.fold_margin)
            tail = t_sym.hull(t_fold)
            head = folded.head * Interval(0.0, policy.inflate)
            # symmetric floor so one-sided suggestions gain strict interior
            fl = policy.floor_rel * head.mag + policy.floor_abs
            idx = np.arange(1, folded.n + 1)
            if folded.parity is Parity.ODD:
                fl[idx % 2 == 0] = 0.0
            elif folded.parity is Parity.EVEN:
                fl[idx % 2 == 1] = 0.0
            head = head.hull(IntervalVector.symmetric(fl))
            tmag = policy.floor_rel * max(abs(tail.lo), tail.hi) + policy.floor_abs
            tail = tail.hull(Interval.symmetric(tmag))
            parts.append(TailVector(head, tail.lo, tail.hi, x0.s,
                                    folded.kind, folded.parity))
        z = PdeState(tuple(parts))
        if policy.shrink_tau and attempt + 1 >= policy.max_retries // 2:
            tau = max(tau / 2.0, policy.min_tau)
    return last
