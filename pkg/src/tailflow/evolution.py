"""One rigorous time step of the full infinite-dimensional system.

A state is a PQSet: an affine set over the explicitly tracked head modes
plus uniform polynomial tails.  A step:

1.  validates an enclosure X([0,tau]) = X0 + Z for the whole system;
2.  bounds the Galerkin defect V = f2(X_P([0,tau]), X_Q([0,tau])) and feeds
    its head part as the constant set-valued perturbation of the head
    inclusion, solved with the Lohner stepper (X_P1);
3.  bounds V2 = f(X([0,tau])) and forms the per-mode Duhamel estimate
        V3_i = e^{tau lambda_i} X_i(0) + (e^{tau lambda_i}-1)/lambda_i V2_i,
    entrywise over the f-head and symbolically over the tail;
4.  returns (P V3 ∩ X_P1) + Q V3: the head keeps the affine structure of the
    inclusion result tightened by the dissipative box, the new tail folds
    the dissipative estimate beyond the head.

The output tail exponent may be raised by up to the eigenvalue-inverse decay
(2 for second-order diffusion) when a sup-norm heuristic says the re-expressed
tail does not pay more than a configured growth factor.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from tailflow.enclosure import EnclosurePolicy, EnclosureResult, find_enclosure
from tailflow.inclusion import (
    AffineSet,
    InclusionOptions,
    RoughEnclosureError,
    tight_step,
)
from tailflow.intervals import (
    Interval,
    IntervalError,
    IntervalVector,
    _imul_arrays,
    _up,
)
from tailflow.models import PdeState
from tailflow.tails import Kind, TailVector, psum_upper

__all__ = ["PQSet", "StepReport", "StepFailure", "EvolutionConfig", "Evolver"]


@dataclass(frozen=True)
class PQSet:
    """X = X_P + X_Q: affine head set plus per-component uniform tails."""

    p_set: AffineSet
    p_box: IntervalVector                  # head box (affine hull ∩ V3 box)
    q_tails: tuple                         # per component (c_lo, c_hi, s)

    def head_widths(self):
        return self.p_box.width


@dataclass
class StepReport:
    tau: float
    enclosure_retries: int = 0
    enclosure_diag: dict = field(default_factory=dict)
    delta_mag: float = 0.0
    v2_tail: tuple = ()
    out_tail: tuple = ()
    s_raised: bool = False
    inclusion: object = None
    timings: dict = field(default_factory=dict)
    z_warm: Optional[PdeState] = None
    enclosure_state: Optional[PdeState] = None


class StepFailure(RuntimeError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class EvolutionConfig:
    tau: float = 2.0 ** -9
    order: int = 6
    tau_min: float = 2.0 ** -16
    tau_max: float = 2.0 ** -7
    grow: float = 1.2
    raise_cap: Optional[float] = None      # target tail exponent, None = keep
    raise_factor: float = 1.5
    enclosure: EnclosurePolicy = EnclosurePolicy(max_retries=12)


class Evolver:
    """Step/integrate driver binding a model, its head field, and a config."""

    def __init__(self, model, fld, cfg: EvolutionConfig):
        self.model = model
        self.fld = fld
        self.cfg = cfg
        self.opts = InclusionOptions(order=cfg.order)
        n = fld.n
        self._lam_head = [model.lam[c].head(np.arange(1, n + 1))
                          for c in range(model.ncomp)]

    # ------------------------------------------------------------------
    def as_tail_state(self, pq: PQSet) -> PdeState:
        comps = []
        for c in range(self.model.ncomp):
            (lo, hi) = self._comp_head(pq.p_box, c)
            clo, chi, s = pq.q_tails[c]
            comps.append(TailVector(IntervalVector(lo, hi, _validate=False),
                                    clo, chi, s, Kind.SINE, self.model.parity))
        return PdeState(tuple(comps))

    def _comp_head(self, box: IntervalVector, c: int):
        fld = self.fld
        lo = np.zeros(fld.n)
        hi = np.zeros(fld.n)
        idx = fld.modes - 1
        lo[idx] = box.lo[c * fld.nm:(c + 1) * fld.nm]
        hi[idx] = box.hi[c * fld.nm:(c + 1) * fld.nm]
        return lo, hi

    def _flatten_heads(self, state: PdeState, m: int) -> IntervalVector:
        fld = self.fld
        idx = fld.modes - 1
        los, his = [], []
        for c in range(self.model.ncomp):
            coeffs = state[c].coeffs(m)
            los.append(coeffs.lo[idx])
            his.append(coeffs.hi[idx])
        return IntervalVector(np.concatenate(los), np.concatenate(his),
                              _validate=False)

    # ------------------------------------------------------------------
    def _duhamel_weight(self, lam: IntervalVector, tau: float) -> IntervalVector:
        """Enclosure of (e^{tau lam}-1)/lam per mode (the exact Duhamel
        integral weight); handles lam intervals containing zero by the
        monotone form tau * Phi(lam tau)."""
        z = lam * Interval.point(tau)
        ok = (z.lo > 1e-12) | (z.hi < -1e-12)
        zsafe = IntervalVector(np.where(ok, z.lo, 1.0), np.where(ok, z.hi, 1.0),
                               _validate=False)
        em1 = zsafe.exp() - 1.0
        w = em1 / zsafe                    # = Phi(z), positive
        # Phi is increasing; near zero use a crude [e^{z-}, e^{z+}] hull of
        # Phi(z) in [min(1,e^z), max(1,e^z)]
        ez = z.exp()
        near_lo = np.minimum(ez.lo, 1.0)
        near_hi = np.maximum(ez.hi, 1.0)
        wlo = np.where(ok, w.lo, near_lo)
        whi = np.where(ok, w.hi, near_hi)
        tlo, thi = _imul_arrays(wlo, whi, tau, tau)
        return IntervalVector(np.maximum(tlo, 0.0), thi, _validate=False)

    def _v3_entries(self, c: int, x0: PdeState, v2: PdeState, tau: float):
        model = self.model
        nf = v2[c].n
        lam = model.lam[c].head(np.arange(1, nf + 1))
        x0m = x0[c].coeffs(nf)
        v2m = v2[c].coeffs(nf)
        e2 = (lam * Interval.point(tau)).exp()
        duh = self._duhamel_weight(lam, tau)
        return e2 * x0m + duh * v2m

    def _q_tail_candidate(self, c: int, x0: PdeState, v2: PdeState,
                          tau: float, v3: IntervalVector, s_out: float):
        """Fold the dissipative estimate into a tail at exponent s_out."""
        model = self.model
        n = self.fld.n
        nf = v2[c].n
        s_x = x0[c].s
        # e^{tau lam} X beyond nf, expressed at exponent s_out
        if s_out <= s_x:
            eub = model.lam[c].exp_tau_beyond(tau, nf)
            a_tail = eub * Interval(x0[c].c_lo, x0[c].c_hi)
            s_a = s_x
        else:
            eub = model.lam[c].exp_tau_beyond_weighted(tau, nf, s_out - s_x)
            a_tail = eub * Interval(x0[c].c_lo, x0[c].c_hi)
            s_a = s_out
        # Duhamel weight beyond nf: (1-e^{tau lam}) |1/lam| in [0, kappa]/i^2
        kappa = model.lam[c].inv_tail_constants(nf)
        b_tail = Interval(0.0, kappa.mag) * Interval(v2[c].c_lo, v2[c].c_hi)
        tv_a = TailVector(IntervalVector.zeros(nf), a_tail.lo, a_tail.hi,
                          s_a, Kind.SINE, self.model.parity)
        tv_b = TailVector(IntervalVector.zeros(nf), b_tail.lo, b_tail.hi,
                          v2[c].s + 2.0, Kind.SINE, self.model.parity)
        tv = TailVector(IntervalVector(v3.lo, v3.hi, _validate=False), 0.0,
                        0.0, s_x, Kind.SINE, self.model.parity) + tv_a + tv_b
        if tv.s > s_out:
            tv = tv.weaken_decay(s_out)
        elif tv.s < s_out:
            raise IntervalError("tail exponent fell below the target")
        folded = tv.shrink_head(n)
        return folded

    # ------------------------------------------------------------------
    def step(self, pq: PQSet, tau_target: float,
             z_warm: Optional[PdeState] = None) -> tuple[PQSet, StepReport]:
        model = self.model
        fld = self.fld
        n = fld.n
        t_start = time.perf_counter()
        x0 = self.as_tail_state(pq)

        enc = find_enclosure(model, x0, tau_target, self.cfg.enclosure,
                             z0=z_warm)
        if not enc.accepted:
            raise StepFailure("enclosure not accepted",
                              StepReport(tau_target,
                                         enclosure_retries=enc.retries,
                                         enclosure_diag=enc.diagnostics))
        tau = enc.tau
        t_enc = time.perf_counter()

        encl = enc.enclosure
        v = model.apply_f2(encl.head_part(min(n, encl.n)),
                           encl.tail_part(min(n, encl.n)))
        delta = self._flatten_heads(v, n)
        t_f2 = time.perf_counter()

        try:
            p1, idiag = tight_step(fld, delta, pq.p_set, tau, self.opts)
        except RoughEnclosureError as exc:
            raise StepFailure(str(exc), StepReport(tau)) from exc
        t_incl = time.perf_counter()

        v2 = model.apply_f(encl)
        report = StepReport(tau, enclosure_retries=enc.retries,
                            enclosure_diag=enc.diagnostics,
                            delta_mag=float(np.max(delta.mag, initial=0.0)),
                            inclusion=idiag,
                            z_warm=enc.z)

        # dissipative per-mode estimate, possibly at a raised tail exponent
        s_now = x0.s
        v3_heads = [self._v3_entries(c, x0, v2, tau) for c in range(model.ncomp)]
        tails = [self._q_tail_candidate(c, x0, v2, tau, v3_heads[c], s_now)
                 for c in range(model.ncomp)]
        s_out = s_now
        if self.cfg.raise_cap is not None and self.cfg.raise_cap > s_now:
            s_cand = min(s_now + 2.0, self.cfg.raise_cap)
            raised = [self._q_tail_candidate(c, x0, v2, tau, v3_heads[c],
                                             s_cand)
                      for c in range(model.ncomp)]
            sup_keep = max(t.tail_mag * psum_upper(n, s_now) for t in tails)
            sup_raised = max(t.tail_mag * psum_upper(n, s_cand) for t in raised)
            if sup_raised <= self.cfg.raise_factor * max(sup_keep, 1e-300):
                s_out = s_cand
                tails = raised
                report.s_raised = True

        # assemble the new P part: inclusion result tightened by P V3
        v3_state = PdeState(tuple(
            TailVector(IntervalVector(v3_heads[c].lo[:n], v3_heads[c].hi[:n],
                                      _validate=False),
                       tails[c].c_lo, tails[c].c_hi, s_out, Kind.SINE,
                       model.parity)
            for c in range(model.ncomp)))
        v3_box = self._flatten_heads(v3_state, n)
        p_new = p1.tighten(v3_box)
        box_new = p_new.box()
        joint = box_new.intersect(v3_box)
        if not isinstance(joint, IntervalVector):
            joint = box_new
        q_new = tuple((tails[c].c_lo, tails[c].c_hi, s_out)
                      for c in range(model.ncomp))
        out = PQSet(p_new, joint, q_new)
        report.v2_tail = tuple((v2[c].c_lo, v2[c].c_hi, v2[c].s)
                               for c in range(model.ncomp))
        report.out_tail = q_new
        report.timings = {
            "enclosure": t_enc - t_start,
            "f2": t_f2 - t_enc,
            "inclusion": t_incl - t_f2,
            "dissipative": time.perf_counter() - t_incl,
        }
        report.enclosure_state = encl
        return out, report

    # ------------------------------------------------------------------
    def integrate(self, pq: PQSet, total: Fraction,
                  observer: Optional[Callable] = None) -> PQSet:
        """Repeated steps with an adaptive tau (halve on failure, grow on
        success up to tau_max); time is tracked in exact rationals."""
        t = Fraction(0)
        total = Fraction(total)
        tau = self.cfg.tau
        z_warm = None
        while t < total:
            tau = min(tau, float(total - t))
            try:
                nxt, rep = self.step(pq, tau, z_warm)
            except StepFailure:
                if tau / 2.0 < self.cfg.tau_min:
                    raise
                tau = tau / 2.0
                z_warm = None
                continue
            t0 = t
            t = t + Fraction(rep.tau)
            if observer is not None:
                observer(t0, t, pq, nxt, rep)
            pq = nxt
            z_warm = rep.z_warm
            tau = min(rep.tau * self.cfg.grow, self.cfg.tau_max)
        return pq
