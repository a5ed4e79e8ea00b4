"""Trichotomy classifier: which asymptotic values fall to 0, and cycle data.

For each parameter the orbits of mu and lam are iterated; the parameter is

    ShiftLocus  -- both orbits converge to 0,
    MLambda     -- only mu does; lam tends to a non-zero attracting cycle,
    MMu         -- only lam does; mu tends to a non-zero attracting cycle,
    Undetermined-- the budget ran out (neutral cycles, bifurcation locus,
                   or the free orbit is bounded but not attracted).

Only the hyperbolic situation is certified; everything else lands in
Undetermined by design.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _mathcore as mc
from .errors import BranchAmbiguity, SingularParameter
from .family import (
    EPS_CYCLE_DETECT,
    EPS_POLE,
    EPS_ZERO,
    MAX_PERIOD,
    CycleInfo,
    ParamPoint,
    derive_mu,
)


class Kind(enum.Enum):
    SHIFT_LOCUS = "ShiftLocus"
    M_LAMBDA = "MLambda"
    M_MU = "MMu"
    UNDETERMINED = "Undetermined"
    SINGULAR = "Singular"


_KIND_BY_CODE = {
    mc.KIND_SHIFT: Kind.SHIFT_LOCUS,
    mc.KIND_MLAMBDA: Kind.M_LAMBDA,
    mc.KIND_MMU: Kind.M_MU,
    mc.KIND_UNDETERMINED: Kind.UNDETERMINED,
    mc.KIND_SINGULAR: Kind.SINGULAR,
}


@dataclass(frozen=True)
class ClassifierBudget:
    max_iter: int = 2000
    cycle_window: int = 128
    eps_cycle: float = EPS_CYCLE_DETECT
    eps_zero: float = EPS_ZERO

    def __post_init__(self):
        if not self.max_iter >= self.cycle_window >= 2 * MAX_PERIOD:
            raise ValueError("need max_iter >= cycle_window >= 2*max detectable period")

    def scaled(self, factor: float) -> "ClassifierBudget":
        return ClassifierBudget(max(int(self.max_iter * factor), self.cycle_window),
                                self.cycle_window, self.eps_cycle, self.eps_zero)


DEFAULT_BUDGET = ClassifierBudget()


@dataclass(frozen=True)
class ParamClass:
    kind: Kind
    period: int | None = None
    multiplier: complex | None = None
    lambda_orbit_len: int = 0
    mu_orbit_len: int = 0


@dataclass(frozen=True)
class Itinerary:
    """Branch labels, most recently applied branch first, base pole index last."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise ValueError("itinerary must be non-empty")
        if any(abs(k) > 10 ** 6 for k in self.entries):
            raise ValueError("itinerary entry out of sane range")
        object.__setattr__(self, "entries", tuple(int(k) for k in self.entries))

    def __len__(self):
        return len(self.entries)

    def extended(self, k0: int) -> "Itinerary":
        """Child label: one trailing entry appended (new base pole)."""
        return Itinerary(self.entries + (int(k0),))


def _refine_cycle(p: ParamPoint, seed: complex, period: int,
                  eps_cycle: float) -> CycleInfo | None:
    """Newton on f^n(z) - z from a near-return seed; None when refinement fails.

    30-step cap with step damping 1/2 whenever the residual increases.
    """
    lam, mu = p.lam, p.mu
    z = complex(seed)

    def orbit_and_deriv(z0):
        w = z0
        deriv = complex(1.0, 0.0)
        for _ in range(period):
            deriv *= mc.eval_f_prime_raw(lam, mu, w)
            w = mc.eval_f_raw(lam, mu, w)
            if not (math.isfinite(w.real) and math.isfinite(w.imag)):
                return None, None
        return w, deriv

    w, deriv = orbit_and_deriv(z)
    if w is None:
        return None
    res = abs(w - z)
    for _ in range(30):
        if res < 1e-13 * (1.0 + abs(z)):
            break
        denom = deriv - 1.0
        if denom == 0:
            return None
        step = (w - z) / denom
        z_new = z - step
        w_new, deriv_new = orbit_and_deriv(z_new)
        if w_new is None:
            return None
        res_new = abs(w_new - z_new)
        if res_new > res:
            z_new = z - step / 2.0
            w_new, deriv_new = orbit_and_deriv(z_new)
            if w_new is None:
                return None
            res_new = abs(w_new - z_new)
        z, w, deriv, res = z_new, w_new, deriv_new, res_new
    if res >= 1e-9 * (1.0 + abs(z)):
        return None
    if abs(z - seed) > 1e-3 * (1.0 + abs(seed)) + 100 * eps_cycle:
        return None  # wandered to a different root
    points = []
    w = z
    nu = complex(1.0, 0.0)
    for _ in range(period):
        points.append(w)
        nu *= mc.eval_f_prime_raw(lam, mu, w)
        w = mc.eval_f_raw(lam, mu, w)
    return CycleInfo(period, tuple(points), nu)


def detect_cycle(p: ParamPoint, orbit_tail, budget: ClassifierBudget = DEFAULT_BUDGET
                 ) -> CycleInfo | None:
    """Minimal-period near-return over a window of orbit points, Newton refined.

    Returns None when no near-return is sustained or the refinement diverges.
    """
    tail = [complex(z) for z in orbit_tail]
    window = min(budget.cycle_window, len(tail))
    if window < 2:
        return None
    eps = budget.eps_cycle
    for n in range(1, window // 2 + 1):
        sustained = all(abs(tail[-1 - j] - tail[-1 - j - n]) < eps
                        for j in range(window - n))
        if sustained:
            if all(abs(z) < mc.EPS_ZERO for z in tail[-window:]):
                # fixed point at the origin
                return CycleInfo(1, (0j,), p.rho)
            return _refine_cycle(p, tail[-1], n, eps)
    return None


def classify(p: ParamPoint, budget: ClassifierBudget = DEFAULT_BUDGET) -> ParamClass:
    """Iterate mu then lam and assign the trichotomy kind."""
    kind_code, period, it_mu, it_lam, rep, nu = mc.classify_raw(
        p.rho, p.lam, budget.max_iter, budget.eps_zero, budget.eps_cycle,
        MAX_PERIOD, EPS_POLE)
    kind = _KIND_BY_CODE[kind_code]
    if kind in (Kind.M_LAMBDA, Kind.M_MU):
        refined = _refine_cycle(p, rep, period, budget.eps_cycle)
        if refined is not None:
            return ParamClass(kind, refined.period, refined.multiplier, it_lam, it_mu)
        return ParamClass(kind, period, nu, it_lam, it_mu)
    return ParamClass(kind, None, None, it_lam, it_mu)


def classify_lambda(rho: complex, lam: complex,
                    budget: ClassifierBudget = DEFAULT_BUDGET) -> ParamClass:
    """classify() that reports Singular instead of raising on lambda in {0, rho/2}."""
    try:
        p = ParamPoint(rho, lam)
    except SingularParameter:
        return ParamClass(Kind.SINGULAR)
    return classify(p, budget)


def classify_grid(rho: complex, lams: np.ndarray,
                  budget: ClassifierBudget = DEFAULT_BUDGET
                  ) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized classification (compiled); returns (kind codes, periods).

    Same decision procedure as classify(), minus the Newton polish of the
    reported multiplier; used by the renderer and bulk surveys.
    """
    flat = np.ascontiguousarray(lams, dtype=np.complex128).ravel()
    kinds = np.empty(flat.shape[0], dtype=np.int8)
    periods = np.empty(flat.shape[0], dtype=np.int16)
    mc.classify_grid_raw(complex(rho), flat, budget.max_iter, budget.eps_zero,
                         budget.eps_cycle, MAX_PERIOD, EPS_POLE, kinds, periods)
    return kinds.reshape(np.shape(lams)), periods.reshape(np.shape(lams))


def cycle_itinerary(p: ParamPoint, cycle: CycleInfo) -> Itinerary:
    """Branch labels k_n ... k_1 with a_{j-1} = g_{k_j}(a_j) around the cycle.

    Raises BranchAmbiguity when a branch index rounds within 0.05 of a
    half-integer or the reconstruction residual exceeds 1e-8.
    """
    n = cycle.period
    pts = list(cycle.points)
    ks = []
    try:
        for j in range(1, n + 1):
            a_prev = pts[(j - 1) % n]
            a_j = pts[j % n]
            g0 = mc.inverse_branch_raw(p.lam, p.mu, 0.0, a_j)
            q = (a_prev - g0) / (1j * math.pi)
            k = math.floor(q.real + 0.5)
            if abs(q.real - k) > 0.45 or abs(q.imag) > 0.45:
                raise BranchAmbiguity(f"branch index {q!r} too close to a half-integer")
            ks.append(int(k))
        # verify the reconstruction g_{k_1} o g_{k_2} o ... o g_{k_n} fixes a_0
        w = pts[0]
        for k in reversed(ks):
            w = mc.inverse_branch_raw(p.lam, p.mu, float(k), w)
    except ZeroDivisionError:
        # a cycle point collides with an asymptotic value at machine precision
        # (happens arbitrarily close to a virtual center)
        raise BranchAmbiguity("cycle point indistinguishable from an asymptotic value")
    if abs(w - pts[0]) > 1e-8:
        raise BranchAmbiguity(f"itinerary reconstruction residual {abs(w - pts[0]):g}")
    return Itinerary(tuple(reversed(ks)))
