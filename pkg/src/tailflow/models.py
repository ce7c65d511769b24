"""Dissipative PDE models as diagonal linear part + polynomial nonlinearity.

A model owns, per component, the eigenvalue structure lambda_k = -(a k^2 + b)
of its diagonalized linear part, and evaluates the nonlinearity f and its
splitting f(p+q) = f(p) + f2(p,q) on TailVector states.

Instances:

* Brusselator (two coupled components, Dirichlet on (0,pi)):
      u_t = d1 u_xx - (B+1) u + u^2 v + A sin x
      v_t = d2 v_xx + B u - u^2 v
  Eigenvalues: lambda^u_k = -(d1 k^2 + B + 1), lambda^v_k = -d2 k^2.
  The cubic u^2 v is closed in the sine basis, so f keeps the input decay.
  States with only odd modes form an invariant subspace (symmetry about
  x = pi/2), which the parity flags realize exactly.

* Diffusive logistic equation:
      u_t = d u_xx + u - u^2
  with L = d u_xx + u (lambda_k = -(d k^2 - 1)) and f(u) = -u^2.  The square
  is an even function, so its sine expansion decays like 1/i^3 regardless of
  the state's decay: the compatibility limitation this instance exists to
  demonstrate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from tailflow.headconv import (
    hc_cossin,
    hc_cossin_sum,
    hc_sinsin,
    hc_sinsin_sum,
    multiplier_matrix,
)
from tailflow.intervals import (
    Interval,
    IntervalError,
    IntervalMatrix,
    IntervalVector,
    _add_hi,
    _add_lo,
    _imul_arrays,
    _imul_arrays_fast,
)
from tailflow.series import cos_times_sin, cube_term, sin_times_sin, square_as_sine
from tailflow.tails import Kind, Parity, TailVector

__all__ = [
    "LambdaSpec",
    "PdeState",
    "BrusselatorParams",
    "LogisticParams",
    "BrusselatorModel",
    "LogisticModel",
]


def _as_interval(x) -> Interval:
    if isinstance(x, Interval):
        return x
    if isinstance(x, str):
        return Interval.from_decimal(x)
    return Interval.point(float(x))


@dataclass(frozen=True)
class LambdaSpec:
    """Eigenvalues lambda_k = -(a k^2 + b), a > 0."""

    a: Interval
    b: Interval

    def head(self, ks: np.ndarray) -> IntervalVector:
        k2 = IntervalVector.point(np.asarray(ks, dtype=float) ** 2)
        return -(k2 * self.a + self.b)

    def at(self, k: int) -> Interval:
        return self.head(np.array([k]))[0]

    def neg_beyond(self, n: int) -> bool:
        """lambda_i < 0 certain for every i > n."""
        return (-self.at(n + 1)).lo > 0.0

    def dissipative_from(self) -> int:
        """Smallest k0 with lambda_k < 0 certain for all k >= k0."""
        k = 1
        while not self.neg_beyond(k - 1):
            k += 1
            if k > 10 ** 6:
                raise IntervalError("eigenvalues do not become negative")
        return k

    def inv_beyond(self, n: int) -> Interval:
        """Enclosure of {1/lambda_i : i > n} (requires negativity beyond n)."""
        if not self.neg_beyond(n):
            raise IntervalError("1/lambda tail needs lambda < 0 beyond the head")
        m = -self.at(n + 1)             # = a(n+1)^2 + b > 0, increasing in i
        return Interval((Interval(-1.0, -1.0) / m).lo, 0.0)

    def inv_tail_constants(self, n: int) -> Interval:
        """Tail constants of 1/lambda at decay exponent 2:
        1/lambda_i in [-kappa, 0]/i^2 for i > n, with
        kappa = sup_{i>n} i^2/(a i^2 + b) (monotone in i for fixed-sign b,
        so the hull of the i->inf and i=n+1 values covers both cases)."""
        if not self.neg_beyond(n):
            raise IntervalError("1/lambda tail needs lambda < 0 beyond the head")
        lim = Interval(1.0, 1.0) / self.a
        m = float(n + 1)
        at_first = Interval.point(m * m) / (-self.at(n + 1))
        kappa = lim.hull(at_first).hi
        return Interval(-kappa, 0.0)

    def exp_tau_beyond(self, tau: float, n: int) -> Interval:
        """Enclosure of {e^{tau lambda_i} : i > n} (tau > 0)."""
        if not self.neg_beyond(n):
            raise IntervalError("exp tail needs lambda < 0 beyond the head")
        top = (self.at(n + 1) * Interval.point(tau)).exp()
        return Interval(0.0, top.hi)

    def exp_tau_beyond_weighted(self, tau: float, n: int, ds: float) -> Interval:
        """Enclosure of {e^{tau lambda_i} i^ds : i > n} for ds >= 0.

        g(i) = e^{-a tau i^2} i^ds e^{-b tau} is unimodal with real maximum
        g* = (ds/(2 a tau))^{ds/2} e^{-ds/2} e^{-b tau}; beyond the peak it
        decreases, so the supremum is min(g*, g(n+1)) when the peak lies left
        of the range and g* always bounds it."""
        if ds <= 0.0:
            return self.exp_tau_beyond(tau, n)
        if not self.neg_beyond(n):
            raise IntervalError("exp tail needs lambda < 0 beyond the head")
        ti = Interval.point(tau)
        dsi = Interval.point(ds)
        gstar = (dsi / (Interval(2.0, 2.0) * self.a * ti)).pow(
            dsi * Interval(0.5, 0.5)) \
            * (-dsi * Interval(0.5, 0.5)).exp() \
            * (-self.b * ti).exp()
        first = (self.at(n + 1) * ti).exp() \
            * Interval.point(float(n + 1)).pow(dsi)
        ub = gstar.hi
        # peak certainly left of the range: the first index dominates
        peak_left = (Interval(2.0, 2.0) * self.a * ti
                     * Interval.point(float(n + 1) ** 2) - dsi).lo >= 0.0
        if peak_left:
            ub = min(ub, first.hi)
        return Interval(0.0, ub)


@dataclass(frozen=True)
class PdeState:
    """A tuple of sine TailVectors, one per component."""

    components: tuple

    def __post_init__(self):
        for c in self.components:
            if c.kind is not Kind.SINE:
                raise IntervalError("PdeState components are sine series")

    @property
    def ncomp(self) -> int:
        return len(self.components)

    @property
    def n(self) -> int:
        return max(c.n for c in self.components)

    @property
    def s(self) -> float:
        return self.components[0].s

    def __getitem__(self, i) -> TailVector:
        return self.components[i]

    def map(self, fn) -> "PdeState":
        return PdeState(tuple(fn(c) for c in self.components))

    def zip(self, other: "PdeState", fn) -> "PdeState":
        return PdeState(tuple(fn(a, b) for a, b in
                              zip(self.components, other.components)))

    def __add__(self, other: "PdeState") -> "PdeState":
        return self.zip(other, lambda a, b: a + b)

    def hull(self, other: "PdeState") -> "PdeState":
        return self.zip(other, lambda a, b: a.hull(b))

    def subset(self, other: "PdeState") -> bool:
        return all(a.subset(b) for a, b in zip(self.components, other.components))

    def interior_subset(self, other: "PdeState") -> bool:
        return all(a.interior_subset(b)
                   for a, b in zip(self.components, other.components))

    def with_head(self, m: int) -> "PdeState":
        return self.map(lambda c: c.with_head(m))

    def scale(self, c: Interval) -> "PdeState":
        return self.map(lambda t: t.scale(c))

    def head_part(self, k: int) -> "PdeState":
        return self.map(lambda t: t.head_part(k))

    def tail_part(self, k: int) -> "PdeState":
        return self.map(lambda t: t.tail_part(k))

    def to_json(self):
        return [c.to_json() for c in self.components]

    @classmethod
    def from_json(cls, items) -> "PdeState":
        return cls(tuple(TailVector.from_json(d) for d in items))


# ---------------------------------------------------------------------------
# Brusselator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BrusselatorParams:
    d1: Interval
    d2: Interval
    A: Interval
    B: Interval

    @classmethod
    def make(cls, d1, d2, A, B) -> "BrusselatorParams":
        p = cls(_as_interval(d1), _as_interval(d2), _as_interval(A), _as_interval(B))
        if p.d1.lo <= 0 or p.d2.lo <= 0:
            raise IntervalError("diffusion rates must be positive")
        if p.A.lo < 0 or p.B.lo < 0:
            raise IntervalError("A, B must be nonnegative")
        return p


class BrusselatorModel:
    """f(u,v) = (u^2 v + A sin x, B u - u^2 v) over the diagonal heat part."""

    ncomp = 2
    component_names = ("u", "v")

    def __init__(self, params: BrusselatorParams, parity: Parity = Parity.ODD):
        self.params = params
        self.parity = parity
        one = Interval(1.0, 1.0)
        self.lam = (
            LambdaSpec(params.d1, params.B + one),
            LambdaSpec(params.d2, Interval(0.0, 0.0)),
        )

    def forcing_state(self, n: int, s: float) -> PdeState:
        head = IntervalVector.zeros(n)
        lo = head.lo.copy()
        hi = head.hi.copy()
        lo[0], hi[0] = self.params.A.lo, self.params.A.hi
        fu = TailVector(IntervalVector(lo, hi, _validate=False), 0.0, 0.0, s,
                        Kind.SINE, self.parity)
        return PdeState((fu, TailVector.zeros(n, s, Kind.SINE, self.parity)))

    def cube(self, state: PdeState) -> TailVector:
        return cube_term(state[0], state[1])

    def apply_f(self, state: PdeState, cube: Optional[TailVector] = None) -> PdeState:
        if cube is None:
            cube = self.cube(state)
        n_out = cube.n
        forcing = self.forcing_state(max(state.n, 1), state.s)
        fu = cube + forcing[0]
        fv = state[1].scale(self.params.B).with_head(n_out) - cube
        return PdeState((fu, fv))

    def apply_f2(self, p: PdeState, q: PdeState,
                 up_sq: Optional[TailVector] = None) -> PdeState:
        """f(p+q) - f(p) = ((2 u_P u_Q + u_Q^2)(v_P + v_Q) + u_P^2 v_Q, ...)."""
        u_p, v_p = p.components
        u_q, v_q = q.components
        g = sin_times_sin(u_p, u_q).scale(Interval(2.0, 2.0)) \
            + sin_times_sin(u_q, u_q)
        v_full = v_p + v_q
        t1 = cos_times_sin(g, v_full.with_head(g.n))
        if up_sq is None:
            up_sq = sin_times_sin(u_p, u_p)
        t2 = cos_times_sin(up_sq, v_q.with_head(up_sq.n))
        f2u = t1 + t2
        f2v = u_q.scale(self.params.B).with_head(f2u.n) - f2u
        return PdeState((f2u, f2v))

    def rhs_head_bounds(self, state: PdeState,
                        f: Optional[PdeState] = None) -> tuple:
        """Per-mode enclosures of F_i = lambda_i x_i + f_i over the head."""
        if f is None:
            f = self.apply_f(state)
        out = []
        for c in range(self.ncomp):
            n = state[c].n
            ks = np.arange(1, n + 1)
            lam = self.lam[c].head(ks)
            out.append(lam * state[c].head + f[c].coeffs(n))
        return tuple(out)

    def mode_rhs_bound(self, state: PdeState, comp: int, i: int,
                       f: Optional[PdeState] = None) -> Interval:
        if f is None:
            f = self.apply_f(state)
        lam = self.lam[comp].at(i)
        xi = state[comp].coeff(i)
        return lam * xi + f[comp].coeff(i)

    def zero_state(self, n: int, s: float) -> PdeState:
        return PdeState(tuple(TailVector.zeros(n, s, Kind.SINE, self.parity)
                              for _ in range(self.ncomp)))


# ---------------------------------------------------------------------------
# diffusive logistic equation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogisticParams:
    d: Interval

    @classmethod
    def make(cls, d) -> "LogisticParams":
        p = cls(_as_interval(d))
        if p.d.lo <= 0:
            raise IntervalError("diffusion rate must be positive")
        return p


class LogisticModel:
    """u_t = d u_xx + u - u^2:  L = d u_xx + u, f(u) = -u^2."""

    ncomp = 1
    component_names = ("u",)

    def __init__(self, params: LogisticParams, parity: Parity = Parity.NONE):
        self.params = params
        self.parity = parity
        self.lam = (LambdaSpec(params.d, Interval(-1.0, -1.0)),)

    def apply_f(self, state: PdeState, n_out: int = 0) -> PdeState:
        sq = square_as_sine(state[0], n_out)
        return PdeState((sq.scale(Interval(-1.0, -1.0)),))

    def apply_f2(self, p: PdeState, q: PdeState) -> PdeState:
        """-(2pq + q^2), evaluated as f(p+q) - f(p) on enclosures."""
        fpq = self.apply_f(p + q)
        fp = self.apply_f(p)
        return fpq.zip(fp.with_head(fpq.n), lambda a, b: a - b)

    def rhs_head_bounds(self, state: PdeState,
                        f: Optional[PdeState] = None) -> tuple:
        if f is None:
            f = self.apply_f(state)
        n = state[0].n
        ks = np.arange(1, n + 1)
        lam = self.lam[0].head(ks)
        return (lam * state[0].head + f[0].coeffs(n),)

    def mode_rhs_bound(self, state: PdeState, comp: int, i: int,
                       f: Optional[PdeState] = None) -> Interval:
        if f is None:
            f = self.apply_f(state)
        return self.lam[0].at(i) * state[0].coeff(i) + f[0].coeff(i)

    def zero_state(self, n: int, s: float) -> PdeState:
        return PdeState((TailVector.zeros(n, s, Kind.SINE, self.parity),))


# ---------------------------------------------------------------------------
# Galerkin head system of the Brusselator (for the rigorous inclusion solver)
# ---------------------------------------------------------------------------

class BrusselatorHeadField:
    """The projected field on sine modes <= n of both components.

    Works internally on full coefficient arrays 1..n (parity-forbidden modes
    stay exactly zero); the public coordinates are the compressed active
    modes, u-block then v-block.  Provides interval evaluation, Taylor jets
    of the flow, and the Taylor coefficients of the Jacobian along
    trajectories.  Both partials of the cubic term are multiplier matrices
    because the underlying trilinear form is symmetric:

        dN/dv = M(u ⊙ u),    dN/du = 2 M(u ⊙ v).
    """

    def __init__(self, model: BrusselatorModel, n: int,
                 extra_const: Optional[IntervalVector] = None):
        self.model = model
        self.n = n
        if model.parity is Parity.ODD:
            self.modes = np.arange(1, n + 1, 2)
        else:
            self.modes = np.arange(1, n + 1)
        self.nm = len(self.modes)
        self.dim = 2 * self.nm
        lam_u = model.lam[0].head(np.arange(1, n + 1))
        lam_v = model.lam[1].head(np.arange(1, n + 1))
        self._lam_full = (lam_u, lam_v)
        idx = self.modes - 1
        self.lam = IntervalVector(
            np.concatenate([lam_u.lo[idx], lam_v.lo[idx]]),
            np.concatenate([lam_u.hi[idx], lam_v.hi[idx]]), _validate=False)
        clo = np.zeros(self.dim)
        chi = np.zeros(self.dim)
        if 1 in self.modes:
            pos = int(np.where(self.modes == 1)[0][0])
            clo[pos] = model.params.A.lo
            chi[pos] = model.params.A.hi
        if extra_const is not None:
            clo = _add_lo(clo, extra_const.lo)
            chi = _add_hi(chi, extra_const.hi)
        self.const = IntervalVector(clo, chi, _validate=False)

    # -- coordinate packing ---------------------------------------------------
    def scatter(self, xlo, xhi):
        n, idx = self.n, self.modes - 1
        ulo = np.zeros(n); uhi = np.zeros(n)
        vlo = np.zeros(n); vhi = np.zeros(n)
        ulo[idx] = xlo[:self.nm]; uhi[idx] = xhi[:self.nm]
        vlo[idx] = xlo[self.nm:]; vhi[idx] = xhi[self.nm:]
        return (ulo, uhi), (vlo, vhi)

    def gather(self, ulo, uhi, vlo, vhi) -> IntervalVector:
        idx = self.modes - 1
        return IntervalVector(np.concatenate([ulo[idx], vlo[idx]]),
                              np.concatenate([uhi[idx], vhi[idx]]),
                              _validate=False)

    # -- direct evaluation ------------------------------------------------------
    def nonlin(self, x: IntervalVector) -> IntervalVector:
        """g(x) - Lambda x: cubic coupling + B u + forcing/folded constants."""
        (u, v) = self.scatter(x.lo, x.hi)
        c0l, c0h, wlo, whi = hc_sinsin(u[0], u[1], u[0], u[1])
        nlo, nhi = hc_cossin(c0l, c0h, wlo, whi, v[0], v[1])
        b = self.model.params.B
        bulo, buhi = _imul_arrays(u[0], u[1], np.float64(b.lo), np.float64(b.hi))
        fv_lo = _add_lo(bulo, -nhi)
        fv_hi = _add_hi(buhi, -nlo)
        return self.gather(nlo, nhi, fv_lo, fv_hi) + self.const

    def eval(self, x: IntervalVector) -> IntervalVector:
        return self.lam * x + self.nonlin(x)

    # -- Taylor machinery --------------------------------------------------------
    def flow_jets(self, x: IntervalVector, order: int, need_jac: bool = True):
        """Taylor coefficients x_0..x_order of the flow from x, plus the
        cosine jets of u*u (and of u*v if need_jac, for Jacobian assembly)."""
        (u0, v0) = self.scatter(x.lo, x.hi)
        ujets = [u0]
        vjets = [v0]
        wjets = []   # (c0lo, c0hi, wlo, whi) of u*u per order
        yjets = []   # of u*v
        lam_u, lam_v = self._lam_full
        b = self.model.params.B
        idx = self.modes - 1
        cu_lo = np.zeros(self.n); cu_hi = np.zeros(self.n)
        cv_lo = np.zeros(self.n); cv_hi = np.zeros(self.n)
        cu_lo[idx] = self.const.lo[:self.nm]; cu_hi[idx] = self.const.hi[:self.nm]
        cv_lo[idx] = self.const.lo[self.nm:]; cv_hi[idx] = self.const.hi[self.nm:]
        for j in range(order):
            pairs_a = [ujets[a] for a in range(j + 1)]
            pairs_b = [ujets[j - a] for a in range(j + 1)]
            wjets.append(hc_sinsin_sum(pairs_a, pairs_b))
            if need_jac:
                pairs_vb = [vjets[j - a] for a in range(j + 1)]
                yjets.append(hc_sinsin_sum(pairs_a, pairs_vb))
            nl, nh = hc_cossin_sum([wjets[a] for a in range(j + 1)],
                                   [vjets[j - a] for a in range(j + 1)])
            inv = Interval(1.0, 1.0) / Interval.point(float(j + 1))
            lulo, luhi = _imul_arrays_fast(lam_u.lo, lam_u.hi, *ujets[j])
            lvlo, lvhi = _imul_arrays_fast(lam_v.lo, lam_v.hi, *vjets[j])
            bulo, buhi = _imul_arrays_fast(np.full(self.n, b.lo),
                                           np.full(self.n, b.hi), *ujets[j])
            du_lo = _add_lo(lulo, nl); du_hi = _add_hi(luhi, nh)
            dv_lo = _add_lo(_add_lo(lvlo, bulo), -nh)
            dv_hi = _add_hi(_add_hi(lvhi, buhi), -nl)
            if j == 0:
                du_lo = _add_lo(du_lo, cu_lo); du_hi = _add_hi(du_hi, cu_hi)
                dv_lo = _add_lo(dv_lo, cv_lo); dv_hi = _add_hi(dv_hi, cv_hi)
            ujets.append(_imul_arrays_fast(du_lo, du_hi, inv.lo, inv.hi))
            vjets.append(_imul_arrays_fast(dv_lo, dv_hi, inv.lo, inv.hi))
        return ujets, vjets, wjets, yjets

    def jet_coeff(self, ujets, vjets, j) -> IntervalVector:
        return self.gather(ujets[j][0], ujets[j][1], vjets[j][0], vjets[j][1])

    def dg_matrices(self, wjets, yjets, upto: int):
        """DG_a, a = 0..upto: Taylor coefficients of Dg(x(t)), compressed."""
        b = self.model.params.B
        idx = self.modes - 1
        nm = self.nm
        out = []
        for a in range(upto + 1):
            mw = multiplier_matrix(*wjets[a])
            my = multiplier_matrix(*yjets[a])
            mw_lo = mw.lo[np.ix_(idx, idx)]
            mw_hi = mw.hi[np.ix_(idx, idx)]
            my2 = my.scale(Interval(2.0, 2.0))
            my_lo = my2.lo[np.ix_(idx, idx)]
            my_hi = my2.hi[np.ix_(idx, idx)]
            glo = np.zeros((2 * nm, 2 * nm))
            ghi = np.zeros((2 * nm, 2 * nm))
            glo[:nm, :nm] = my_lo; ghi[:nm, :nm] = my_hi
            glo[:nm, nm:] = mw_lo; ghi[:nm, nm:] = mw_hi
            glo[nm:, :nm] = -my_hi; ghi[nm:, :nm] = -my_lo
            glo[nm:, nm:] = -mw_hi; ghi[nm:, nm:] = -mw_lo
            if a == 0:
                dd = np.arange(2 * nm)
                glo[dd, dd] = _add_lo(glo[dd, dd], self.lam.lo)
                ghi[dd, dd] = _add_hi(ghi[dd, dd], self.lam.hi)
                du = np.arange(nm)
                glo[nm + du, du] = _add_lo(glo[nm + du, du],
                                           np.full(nm, b.lo))
                ghi[nm + du, du] = _add_hi(ghi[nm + du, du],
                                           np.full(nm, b.hi))
            out.append(IntervalMatrix(glo, ghi, _validate=False))
        return out

    def with_extra_const(self, extra: IntervalVector) -> "BrusselatorHeadField":
        f = BrusselatorHeadField.__new__(BrusselatorHeadField)
        f.model = self.model
        f.n = self.n
        f.modes = self.modes
        f.nm = self.nm
        f.dim = self.dim
        f._lam_full = self._lam_full
        f.lam = self.lam
        f.const = self.const + extra
        return f
