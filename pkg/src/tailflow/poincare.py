"""Poincare-section machinery and the fixed-point existence certificate.

The initial set sits on an affine section l(x) = sum_i alpha_i (x_i - x*_i)
(which only sees head modes): X0_P = x* + A r0 with the first frame column
alpha and the remaining columns spanning the section, r0_1 = [0,0]; X0_Q is
a uniform polynomial tail.  The rigorous integrator advances the set until
the section value is certainly negative and then certainly positive; the
bracket is refined by bisection with rigorous sub-steps, transversality
sum alpha_i F_i > 0 is verified on the enclosure over the final window, and
the crossing set is expressed in section coordinates

    q0 = [B](X_P(t_lo) - x*) + [0, w] [B] F(X^E),

with [B] a verified inverse of the interval frame [A].  The certificate
passes when q0_i is interior to r0_i for i >= 2 (C1) and the window tails
are inside the initial tails (C2): the return map then maps the compact
convex initial set into itself and a fixed point (a periodic orbit through
it) exists by the Schauder fixed-point theorem.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from tailflow.enclosure import EnclosurePolicy, find_enclosure
from tailflow.evolution import Evolver, EvolutionConfig, PQSet, StepFailure
from tailflow.inclusion import AffineSet
from tailflow.intervals import (
    EMPTY,
    Interval,
    IntervalError,
    IntervalMatrix,
    IntervalVector,
    VerificationError,
    _dn,
    _up,
    verified_inverse,
)
from tailflow.models import PdeState
from tailflow.tails import Kind, TailVector

__all__ = ["Section", "CrossingResult", "ProofCertificate", "ProofPolicy",
           "eval_section", "build_initial_set", "detect_crossing",
           "check_c1", "validate_fixed_point"]


@dataclass(frozen=True)
class Section:
    alpha: np.ndarray
    beta: np.ndarray

    def eval_point(self, x) -> float:
        return float(np.dot(self.alpha, np.asarray(x) - self.beta))


def eval_section(sec: Section, p_set: AffineSet) -> Interval:
    """l over the affine set, evaluated in frame coordinates."""
    av = IntervalVector.point(sec.alpha)
    at_a = IntervalVector.point(sec.alpha @ p_set.frame)
    val = at_a.dot(p_set.r)
    shift = av.dot(IntervalVector.point(p_set.base - sec.beta))
    return val + shift + av.dot(p_set.slack)


def eval_section_box(sec: Section, box: IntervalVector) -> Interval:
    return IntervalVector.point(sec.alpha).dot(box - sec.beta)


@dataclass
class CrossingResult:
    t_prev: Fraction
    t_curr: Fraction
    t_lo: Fraction
    t_hi: Fraction
    x_e: PdeState                    # enclosure over the refined window
    state_lo: PQSet
    q0: IntervalVector
    transversal: bool
    alpha_f: Interval


@dataclass
class ProofCertificate:
    passed: bool
    c1: bool
    c2: bool
    transversal: bool
    period: tuple                      # coarse bracket (lo, hi) floats
    period_refined: tuple
    r0: IntervalVector
    q0: Optional[IntervalVector]
    q0_radii: Optional[np.ndarray]
    tail_initial: tuple
    tail_final: tuple
    norms: dict
    alpha: np.ndarray
    x_star: np.ndarray
    c1_violations: list
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def hexv(arr):
            return [float(x).hex() for x in np.asarray(arr).tolist()]
        out = {
            "passed": self.passed,
            "c1": self.c1,
            "c2": self.c2,
            "transversal": self.transversal,
            "period": [float(self.period[0]).hex(), float(self.period[1]).hex()],
            "period_float": [float(self.period[0]), float(self.period[1])],
            "period_refined": [float(self.period_refined[0]).hex(),
                               float(self.period_refined[1]).hex()],
            "r0": self.r0.to_json(),
            "q0": self.q0.to_json() if self.q0 is not None else None,
            "tail_initial": [[float(a).hex(), float(b).hex(), float(s).hex()]
                             for (a, b, s) in self.tail_initial],
            "tail_final": [[float(a).hex(), float(b).hex(), float(s).hex()]
                           for (a, b, s) in self.tail_final],
            "norms": {k: (float(v).hex() if v is not None else None)
                      for k, v in self.norms.items()},
            "alpha": hexv(self.alpha),
            "x_star": hexv(self.x_star),
            "c1_violations": self.c1_violations,
            "params": self.params,
            "meta": self.meta,
        }
        return out

    def table(self, rows: int = 10) -> str:
        lines = ["  i  r0_i                       q0_i"]
        for i in range(min(rows, len(self.r0))):
            r = self.r0[i]
            if self.q0 is not None:
                q = self.q0[i]
                lines.append(f"{i + 1:3d}  [{r.lo: .3e},{r.hi: .3e}]  "
                             f"[{q.lo: .6e},{q.hi: .6e}]")
            else:
                lines.append(f"{i + 1:3d}  [{r.lo: .3e},{r.hi: .3e}]  (none)")
        return "\n".join(lines)


@dataclass(frozen=True)
class ProofPolicy:
    delta: float = 1e-5
    tail_c: float = 1.0
    tail_s: float = 5.0
    bisect_tol: float = 1e-4
    bisect_max: int = 20
    t_max: float = 30.0
    eig_floor: float = 1e-6
    fundamental_check: bool = False


def build_initial_set(model, fld, x_star: np.ndarray, alpha: np.ndarray,
                      eigvecs: np.ndarray, eigvals_abs: np.ndarray,
                      policy: ProofPolicy):
    """Section-anchored affine initial set x* + [A] r0 plus uniform tails.

    Frame: column 1 = alpha; next the unit eigenvector estimates whose
    multipliers exceed the noise floor; the remaining directions enter as
    coordinate columns scaled like the tail family (tail_c / k^tail_s), so
    the head box stays graded across modes exactly the way the uniform tail
    is.  All columns beyond the first get the rigorous kernel projection
    making l(c_i + x*) = 0 hold for a true column inside each interval
    column.
    """
    dim = fld.dim
    alpha = np.asarray(alpha, float)
    cols = [alpha / np.linalg.norm(alpha)]
    lead = [cols[0]]
    for j in range(eigvecs.shape[1] if eigvecs.size else 0):
        if j < len(eigvals_abs) and eigvals_abs[j] >= policy.eig_floor:
            v = eigvecs[:, j]
            nrm = np.linalg.norm(v)
            if nrm > 0:
                lead.append(v / nrm)
    # graded coordinate columns for the remaining directions: pick the
    # modes least represented by the leading block, largest scale first
    lead_m = np.column_stack(lead)
    scales = np.concatenate([policy.tail_c / fld.modes.astype(float)
                             ** policy.tail_s] * model.ncomp)
    # residual coordinate content not covered by the leading columns
    qlead, _ = np.linalg.qr(lead_m)
    resid = np.eye(dim) - qlead @ qlead.T
    cand = []
    order = np.argsort(-scales)
    used = len(lead)
    for k in order:
        if used >= dim:
            break
        col = resid[:, k]
        if np.linalg.norm(col) < 1e-8:
            continue
        col = col / np.linalg.norm(col) * scales[k]
        cand.append(col)
        used += 1
    cand = list(lead_m.T) + cand
    # rigorous projection of columns 2.. onto ker(l), on unit columns; the
    # graded scales are attached afterwards as an exact diagonal factor so
    # the inverse verification runs on the well-conditioned unit-column part
    a_iv = IntervalVector.point(cols[0])
    aa = a_iv.dot(a_iv)
    col_lo = [cols[0]]
    col_hi = [cols[0]]
    col_scale = [1.0]
    for v in cand[1:dim]:
        s = float(np.linalg.norm(v))
        vi = IntervalVector.point(v / s)
        coef = a_iv.dot(vi) / aa
        proj = vi - a_iv * coef
        col_lo.append(proj.lo)
        col_hi.append(proj.hi)
        col_scale.append(s)
    a0 = IntervalMatrix(np.column_stack(col_lo), np.column_stack(col_hi))
    b0 = verified_inverse(a0)
    sig = np.asarray(col_scale)
    # [A] = [A0] diag(sig):  scale columns (outward)
    from tailflow.intervals import _imul_arrays
    alo, ahi = _imul_arrays(a0.lo, a0.hi, sig[None, :], sig[None, :])
    amat = IntervalMatrix(alo, ahi, _validate=False)
    # [B] = diag(1/sig) [B0]: scale rows by the interval reciprocal
    inv_sig = IntervalVector.point(np.ones(dim)) / IntervalVector.point(sig)
    blo, bhi = _imul_arrays(b0.lo, b0.hi, inv_sig.lo[:, None],
                            inv_sig.hi[:, None])
    bmat = IntervalMatrix(blo, bhi, _validate=False)

    r0 = IntervalVector(
        np.concatenate([[0.0], np.full(dim - 1, -policy.delta)]),
        np.concatenate([[0.0], np.full(dim - 1, policy.delta)]))
    frame = amat.mid
    radpart = IntervalMatrix(amat.lo - frame, amat.hi - frame, _validate=False)
    slack = radpart @ r0
    p_set = AffineSet(x_star.astype(float), frame, r0, slack)
    box = p_set.box()
    tails = tuple((-policy.tail_c, policy.tail_c, policy.tail_s)
                  for _ in range(model.ncomp))
    pq = PQSet(p_set, box, tails)
    sec = Section(cols[0], x_star.astype(float))
    return pq, sec, amat, bmat, r0


def _alpha_F(model, fld, sec: Section, state: PdeState) -> Interval:
    f = model.apply_f(state)
    bounds = model.rhs_head_bounds(state, f)
    idx = fld.modes - 1
    total = Interval(0.0, 0.0)
    off = 0
    for c in range(model.ncomp):
        av = IntervalVector.point(sec.alpha[off:off + fld.nm])
        fv = IntervalVector(bounds[c].lo[idx], bounds[c].hi[idx],
                            _validate=False)
        total = total + av.dot(fv)
        off += fld.nm
    return total


def check_c1(q0: IntervalVector, r0: IntervalVector) -> list:
    """Indices (1-based) of coordinates >= 2 where q0_i is not interior to
    r0_i; empty means C1 holds."""
    viol = []
    for i in range(1, len(r0)):
        if not q0[i].interior_subset(r0[i]):
            viol.append(i + 1)
    return viol


def _tails_subset(state: PdeState, tails, parity) -> bool:
    """Q part of `state` inside the uniform tails (c_lo, c_hi, s)."""
    for c, (clo, chi, s) in enumerate(tails):
        tv = state[c]
        empty = IntervalVector(np.zeros(0), np.zeros(0), _validate=False)
        left = TailVector(empty, tv.c_lo, tv.c_hi, tv.s, Kind.SINE, parity)
        right = TailVector(empty, clo, chi, s, Kind.SINE, parity)
        if not left.subset(right):
            return False
    return True


def detect_crossing(model, fld, evolver: Evolver, sec: Section, pq0: PQSet,
                    evo_cfg: EvolutionConfig, policy: ProofPolicy,
                    step_cb=None) -> CrossingResult:
    """Advance the set until the section value turns certainly negative and
    then certainly positive; refine the bracket by rigorous bisection and
    enclose the window.  Raises if the set straddles the section initially
    in the certainly-positive sense or no bracket appears before t_max."""
    t = Fraction(0)
    pq = pq0
    z_warm = None
    tau = evo_cfg.tau
    seen_negative = False
    t_prev = None
    state_prev = None
    t_curr = None
    fp_log = []           # (t0, t1, l-interval, alphaF-lo) when requested
    while float(t) < policy.t_max:
        try:
            nxt, rep = evolver.step(pq, tau, z_warm)
        except StepFailure:
            if tau / 2.0 < evo_cfg.tau_min:
                raise
            tau = tau / 2.0
            z_warm = None
            continue
        t0 = t
        t = t + Fraction(rep.tau)
        lval = eval_section(sec, nxt.p_set)
        if step_cb is not None:
            step_cb(t0, t, nxt, rep, lval)
        if policy.fundamental_check:
            lenc = eval_section_box(sec, evolver._flatten_heads(
                rep.enclosure_state, fld.n))
            af_step = _alpha_F(model, fld, sec, rep.enclosure_state)
            fp_log.append((float(t0), float(t), (lenc.lo, lenc.hi),
                           af_step.lo))
        if lval.hi < 0.0:
            seen_negative = True
            t_prev = t
            state_prev = nxt
        elif seen_negative and lval.lo > 0.0:
            t_curr = t
            break
        pq = nxt
        z_warm = rep.z_warm
        tau = min(rep.tau * evo_cfg.grow, evo_cfg.tau_max)
    if t_curr is None:
        raise RuntimeError("no section crossing detected before t_max")

    # bisection refinement of [t_lo, t_lo + w] from state_prev
    t_lo = t_prev
    state_lo = state_prev
    w = t_curr - t_prev
    for _ in range(policy.bisect_max):
        if float(w) <= policy.bisect_tol:
            break
        h = w / 2
        try:
            mid_state, rep = evolver.step(state_lo, float(h), None)
        except StepFailure:
            break
        if Fraction(rep.tau) != h:
            break        # enclosure forced a smaller step: stop refining
        lmid = eval_section(sec, mid_state.p_set)
        if step_cb is not None:
            step_cb(t_lo, t_lo + h, mid_state, rep, lmid)
        if lmid.hi < 0.0:
            t_lo = t_lo + h
            state_lo = mid_state
            w = w - h
        elif lmid.lo > 0.0:
            w = h
        else:
            break
    # enclosure over the final window
    t_acc = Fraction(0)
    st = state_lo
    zw = None
    fine = []
    while t_acc < w:
        try:
            st2, rep = evolver.step(st, float(w - t_acc), zw)
        except StepFailure as exc:
            raise RuntimeError("window enclosure failed") from exc
        fine.append(rep.enclosure_state)
        if step_cb is not None:
            step_cb(t_lo + t_acc, t_lo + t_acc + Fraction(rep.tau), st2, rep,
                    eval_section(sec, st2.p_set))
        t_acc = t_acc + Fraction(rep.tau)
        st = st2
        zw = rep.z_warm
    x_e = fine[0]
    for s2 in fine[1:]:
        x_e = x_e.hull(s2)

    af = _alpha_F(model, fld, sec, x_e)
    res = CrossingResult(t_prev=t_prev, t_curr=t_curr, t_lo=t_lo,
                         t_hi=t_lo + w, x_e=x_e, state_lo=state_lo,
                         q0=None, transversal=af.lo > 0.0, alpha_f=af)
    res.fp_log = fp_log
    return res


def _fundamental_period_holds(fp_log, t_hi: float) -> bool:
    """Scan recorded step data for the sub-interval conditions: alpha.F > 0
    on a prefix [0,t1] and suffix [t2, end], with the section value bounded
    away from zero on [t1, t2]."""
    if not fp_log:
        return False
    n = len(fp_log)
    # prefix of positive transversality
    i = 0
    while i < n and fp_log[i][3] > 0.0:
        i += 1
    if i == 0:
        return False
    j = n
    while j > 0 and fp_log[j - 1][3] > 0.0:
        j -= 1
    if j >= n:
        return False
    # between steps i-1 end and j start the section value must exclude zero
    for k in range(max(i - 1, 0), min(j + 1, n)):
        llo, lhi = fp_log[k][2]
        if llo <= 0.0 <= lhi:
            return False
    return True


def validate_fixed_point(model, fld, orbit, evo_cfg: EvolutionConfig,
                         policy: ProofPolicy = ProofPolicy(),
                         observer=None) -> ProofCertificate:
    """Run the full certificate: build the set, integrate around the loop,
    refine the crossing, and check C1/C2/transversality."""
    evolver = Evolver(model, fld, evo_cfg)
    pq0, sec, amat, bmat, r0 = build_initial_set(
        model, fld, orbit.x_star, orbit.alpha, orbit.eigvecs,
        np.abs(orbit.eigvals), policy)

    norms_max = {}

    def track_norms(enc_state: PdeState):
        for c, name in enumerate(model.component_names):
            nb = enc_state[c].norms()
            for key, valv in (("sup", nb.sup), ("l2", nb.l2), ("h1", nb.h1)):
                k = f"{name}_{key}"
                if valv is not None:
                    norms_max[k] = max(norms_max.get(k, 0.0), valv)

    def step_cb(t0, t1, nxt, rep, lval):
        track_norms(rep.enclosure_state)
        if observer is not None:
            observer(t0, t1, nxt, rep, lval)

    cross = detect_crossing(model, fld, evolver, sec, pq0, evo_cfg, policy,
                            step_cb)
    x_e = cross.x_e
    state_lo = cross.state_lo
    t_prev, t_curr = cross.t_prev, cross.t_curr
    t_lo, w = cross.t_lo, cross.t_hi - cross.t_lo
    af = cross.alpha_f
    transversal = cross.transversal

    # transversality on the refined window
    af = _alpha_F(model, fld, sec, x_e)
    transversal = af.lo > 0.0

    # section coordinates of the crossing set
    p = state_lo.p_set
    bf = bmat @ p.frame
    base_diff = IntervalVector.point(p.base) - orbit.x_star
    q_affine = (bf @ p.r) + (bmat @ base_diff) + (bmat @ p.slack)
    fb = model.rhs_head_bounds(x_e, model.apply_f(x_e))
    idx = fld.modes - 1
    flat = IntervalVector(
        np.concatenate([fb[c].lo[idx] for c in range(model.ncomp)]),
        np.concatenate([fb[c].hi[idx] for c in range(model.ncomp)]),
        _validate=False)
    drift = (bmat @ flat) * Interval(0.0, float(_up(float(w))))
    q0 = q_affine + drift

    # C1: strict interiority for coordinates 2..dim
    viol = check_c1(q0, r0)
    c1 = not viol

    # C2: window tails inside the initial tails
    c2 = _tails_subset(x_e, pq0.q_tails, model.parity)

    passed = bool(c1 and c2 and transversal)
    period = (float(_dn(float(t_prev))), float(_up(float(t_curr))))
    period_ref = (float(_dn(float(t_lo))), float(_up(float(t_lo + w))))
    cert = ProofCertificate(
        passed=passed, c1=c1, c2=c2, transversal=transversal,
        period=period, period_refined=period_ref,
        r0=r0, q0=q0, q0_radii=q0.rad,
        tail_initial=pq0.q_tails,
        tail_final=tuple((x_e[c].c_lo, x_e[c].c_hi, x_e[c].s)
                         for c in range(model.ncomp)),
        norms=norms_max,
        alpha=sec.alpha, x_star=orbit.x_star,
        c1_violations=viol,
        meta={"alpha_F": [af.lo, af.hi],
              "window": [float(t_lo), float(t_lo + w)],
              "order": evo_cfg.order, "tau": evo_cfg.tau,
              "inclusion_dim": fld.dim},
    )
    if policy.fundamental_check:
        cert.meta["fundamental_period"] = _fundamental_period_holds(
            cross.fp_log, float(cross.t_hi))
    return cert
