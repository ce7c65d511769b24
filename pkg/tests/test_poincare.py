import math
from fractions import Fraction

import numpy as np
import pytest

from tailflow.enclosure import EnclosurePolicy
from tailflow.evolution import Evolver, EvolutionConfig, PQSet
from tailflow.inclusion import AffineSet
from tailflow.intervals import Interval, IntervalVector
from tailflow.poincare import (
    ProofPolicy,
    Section,
    build_initial_set,
    check_c1,
    detect_crossing,
    eval_section,
)

RNG = np.random.default_rng(61)


# ---------------------------------------------------------------------------
# section evaluation
# ---------------------------------------------------------------------------

def test_eval_section_zero_radius_on_section():
    alpha = np.array([1.0, 2.0, -0.5])
    beta = np.array([0.3, -0.1, 0.7])
    sec = Section(alpha, beta)
    p = AffineSet(beta.copy(), np.eye(3), IntervalVector.zeros(3),
                  IntervalVector.zeros(3))
    v = eval_section(sec, p)
    assert v.contains(0.0) and v.width < 1e-14


def test_eval_section_frame_pickout():
    # frame column 1 = alpha and r_1 = [0,0]: l evaluates to ~0 sharply even
    # with wide other coordinates
    alpha = np.array([0.6, -0.8])
    x_star = np.array([1.0, 2.0])
    sec = Section(alpha, x_star)
    frame = np.column_stack([alpha, np.array([0.8, 0.6])])
    r = IntervalVector([0.0, -0.5], [0.0, 0.5])
    p = AffineSet(x_star, frame, r, IntervalVector.zeros(2))
    v = eval_section(sec, p)
    # alpha is orthogonal to the second column here, so l picks out r_1 = 0
    assert v.contains(0.0)
    assert v.width < 1e-12


def test_eval_section_translation_linearity():
    alpha = np.array([1.0, 1.0])
    sec = Section(alpha, np.zeros(2))
    shift = alpha / float(alpha @ alpha)
    p0 = AffineSet(np.zeros(2), np.eye(2),
                   IntervalVector.symmetric([0.1, 0.1]),
                   IntervalVector.zeros(2))
    p1 = AffineSet(shift, np.eye(2), IntervalVector.symmetric([0.1, 0.1]),
                   IntervalVector.zeros(2))
    v0 = eval_section(sec, p0)
    v1 = eval_section(sec, p1)
    assert abs((v1.mid - v0.mid) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# initial set construction
# ---------------------------------------------------------------------------

def test_build_initial_set_m2():
    from helpers import LinearPdeModel, LinearHeadField
    # two-coordinate toy: alpha = e1, eigvec = e2 -> frame ~ identity
    model = LinearPdeModel(1.0, 0.0)
    model.ncomp = 1
    fld = LinearHeadField(model.lam[0], 2)
    x_star = np.array([0.5, -0.5])
    alpha = np.array([1.0, 0.0])
    eigvecs = np.array([[0.0], [1.0]])
    pol = ProofPolicy(delta=1e-5, tail_c=0.0, tail_s=5.0)
    pq, sec, amat, bmat, r0 = build_initial_set(
        model, fld, x_star, alpha, eigvecs, np.array([0.5]), pol)
    assert amat.contains_point(np.eye(2))
    assert r0[0] == Interval(0.0, 0.0)
    assert r0[1] == Interval(-1e-5, 1e-5)
    prod = bmat @ amat
    assert prod.contains_point(np.eye(2))


def test_build_initial_set_columns_on_section(b2_model, b2_field, b2_orbit):
    pol = ProofPolicy()
    pq, sec, amat, bmat, r0 = build_initial_set(
        b2_model, b2_field, b2_orbit.x_star, b2_orbit.alpha,
        b2_orbit.eigvecs, np.abs(b2_orbit.eigvals), pol)
    a = IntervalVector.point(sec.alpha)
    for j in range(1, b2_field.dim):
        col = IntervalVector(amat.lo[:, j], amat.hi[:, j])
        # condition (1): some true column in the interval has l(c_j + x*) = 0
        assert a.dot(col).contains(0.0)
    # [B][A] encloses the identity
    assert (bmat @ amat).contains_point(np.eye(b2_field.dim))
    # r0 shape
    assert r0[0] == Interval(0.0, 0.0)
    assert all(r0[i] == Interval(-1e-5, 1e-5) for i in range(1, len(r0)))


# ---------------------------------------------------------------------------
# crossing detection on closed forms
# ---------------------------------------------------------------------------

def test_crossing_linear_onedim():
    # scalar x' = -x + 1 from x0 = -1: crosses x = +0.5 (l = x - 0.5) at
    # t = ln(2/0.5) ... x(t) = 1 - 2 e^{-t}; l = 0 at t = ln 4
    from helpers import LinearPdeModel, LinearHeadField
    from tailflow.evolution import PQSet
    model = LinearPdeModel(1.0, 0.0)      # lambda_1 = -1
    fld = LinearHeadField(model.lam[0], 1)
    fld.const = IntervalVector.point([1.0])

    # model f must match the field constant for consistency of the step
    from tailflow.models import PdeState
    from tailflow.tails import Kind, TailVector

    class ForcedLinear(LinearPdeModel):
        def apply_f(self, state):
            n = state[0].n
            head = np.zeros(n)
            head[0] = 1.0
            return PdeState((TailVector.from_point_coeffs(
                head, state[0].s, Kind.SINE),))

        def apply_f2(self, p, q):
            return PdeState((TailVector.zeros(max(p[0].n, 1), p[0].s,
                                              Kind.SINE),))

        def rhs_head_bounds(self, state, f=None):
            n = state[0].n
            lam = self.lam[0].head(np.arange(1, n + 1))
            if f is None:
                f = self.apply_f(state)
            return (lam * state[0].head + f[0].coeffs(n),)

    model = ForcedLinear(1.0, 0.0)
    box = IntervalVector([-1.0 - 1e-6], [-1.0 + 1e-6])
    pq = PQSet(AffineSet.from_box(box), box, ((0.0, 0.0, 5.0),))
    sec = Section(np.array([1.0]), np.array([0.5]))
    cfg = EvolutionConfig(tau=2.0 ** -6, order=4, grow=1.0,
                          tau_max=2.0 ** -6,
                          enclosure=EnclosurePolicy(max_retries=10))
    ev = Evolver(model, fld, cfg)
    pol = ProofPolicy(bisect_tol=1e-5, t_max=5.0)
    res = detect_crossing(model, fld, ev, sec, pq, cfg, pol)
    t_exact = math.log(4.0)
    assert float(res.t_lo) <= t_exact <= float(res.t_hi)
    assert float(res.t_hi) - float(res.t_lo) < 2e-4
    assert res.transversal


def test_crossing_timeout_raises():
    from helpers import LinearPdeModel, LinearHeadField
    model = LinearPdeModel(1.0, 0.0)
    fld = LinearHeadField(model.lam[0], 1)
    box = IntervalVector([1.0 - 1e-6], [1.0 + 1e-6])
    pq = PQSet(AffineSet.from_box(box), box, ((0.0, 0.0, 5.0),))
    # decaying toward zero never crosses x = 2 upward
    sec = Section(np.array([1.0]), np.array([2.0]))
    cfg = EvolutionConfig(tau=2.0 ** -5, order=3, grow=1.0,
                          tau_max=2.0 ** -5,
                          enclosure=EnclosurePolicy(max_retries=10))
    ev = Evolver(model, fld, cfg)
    with pytest.raises(RuntimeError):
        detect_crossing(model, fld, ev, sec, pq, cfg,
                        ProofPolicy(t_max=1.0))


# ---------------------------------------------------------------------------
# certificate sub-check logic (compositional corruption)
# ---------------------------------------------------------------------------

def test_check_c1_detects_each_violation():
    r0 = IntervalVector([0.0, -1e-5, -1e-5], [0.0, 1e-5, 1e-5])
    good = IntervalVector([-1e-3, -1e-6, -2e-6], [1e-3, 1e-6, 2e-6])
    assert check_c1(good, r0) == []
    # corrupt each coordinate independently
    bad2 = IntervalVector([-1e-3, -2e-5, -2e-6], [1e-3, 1e-6, 2e-6])
    assert check_c1(bad2, r0) == [2]
    bad3 = IntervalVector([-1e-3, -1e-6, -2e-6], [1e-3, 1e-6, 2e-5])
    assert check_c1(bad3, r0) == [3]
    # boundary contact is not interior
    touch = IntervalVector([-1e-3, -1e-5, 0.0], [1e-3, 0.0, 0.0])
    assert 2 in check_c1(touch, r0)


def test_tails_subset_logic():
    from tailflow.poincare import _tails_subset
    from tailflow.models import PdeState
    from tailflow.tails import Kind, Parity, TailVector
    st = PdeState((TailVector(IntervalVector.zeros(3), -1e-13, 1e-13, 6.5,
                              Kind.SINE, Parity.ODD),))
    assert _tails_subset(st, ((-1.0, 1.0, 5.0),), Parity.ODD)
    fat = PdeState((TailVector(IntervalVector.zeros(3), -2.0, 2.0, 5.0,
                               Kind.SINE, Parity.ODD),))
    assert not _tails_subset(fat, ((-1.0, 1.0, 5.0),), Parity.ODD)
    slow = PdeState((TailVector(IntervalVector.zeros(3), -0.5, 0.5, 4.0,
                                Kind.SINE, Parity.ODD),))
    assert not _tails_subset(slow, ((-1.0, 1.0, 5.0),), Parity.ODD)
