"""Koenigs linearization, the S_lambda/S_mu/S_* partition, and the model map.

The linearizer at an attracting fixed point c with multiplier m is computed
through the limit phi(z) = lim m^{-n} (f^n(z) - c), normalized phi(c) = 0,
phi'(c) = 1.  Truncating at depth N leaves an error that is an exact power
series in m^N, so two Richardson stages with the known ratios m and m^2
remove the leading terms and the depth adapts until successive extrapolants
settle below the requested residual.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _mathcore as mc
from .classifier import DEFAULT_BUDGET, ClassifierBudget, Kind, classify
from .errors import (
    ContinuationStuck,
    NewtonDivergence,
    NotInBasin,
    NotShiftLocus,
    NotSLambda,
    TraceLost,
)
from .family import EPS_POLE, ParamPoint, derive_mu

TIE_TOL = 1e-6          # relative band on log|phi(lam)/phi(mu)| that counts as S_*
GRAND_ORBIT_TOL = 1e-9  # |phi(av)| this far below the other's means av is in the
                        # grand orbit of 0 and poses no injectivity obstruction
_BASIN_BUDGET = 200_000


class SPart(enum.Enum):
    S_LAMBDA = "SLambda"
    S_MU = "SMu"
    S_STAR = "SStar"


@dataclass(frozen=True)
class KoenigsFrame:
    param: ParamPoint
    phi_at_lambda: complex
    phi_at_mu: complex
    n_used: int
    residual: float


@dataclass(frozen=True)
class ModelFrame:
    """The distinguished map Q = f_{lambda0} with both fixed-point multipliers rho."""

    rho: complex
    lambda0: complex
    q0: complex
    r: float
    phi0_at_lambda0: complex
    point: ParamPoint


def _disk_radius(p: ParamPoint, center: complex) -> float:
    return 0.01 * min(abs(p.lam - center), abs(p.mu - center), 1.0)


def _phi_limit(p: ParamPoint, z: complex, center: complex, mult: complex,
               target: float, extra_depth: int, want_deriv: bool):
    """Two-stage Richardson on the Koenigs limit; returns (phi, phi', n_used)."""
    lam, mu = p.lam, p.mu
    z = complex(z)
    p0 = mc.pole_base_raw(p.rho, lam)
    radius = _disk_radius(p, center)
    n, zn, dn = mc.koenigs_orbit_raw(lam, mu, z, center, radius, _BASIN_BUDGET,
                                     EPS_POLE, p0)
    if n < 0:
        raise NotInBasin(f"orbit of {z!r} did not reach the linearization disk")
    logm = cmath.log(mult)
    q2 = mult * mult
    es: list[complex] = []
    ds: list[complex] = []
    w, dprod = zn, dn
    r2_prev = None
    r2d_prev = None
    phi = phid = complex(0.0)
    m = 0
    settled = -1
    max_extra = 600
    while m <= max_extra:
        scale = cmath.exp(-(n + m) * logm)
        es.append(scale * (w - center))
        if want_deriv:
            ds.append(scale * dprod)
        if len(es) >= 3:
            r1a = (es[-2] - mult * es[-3]) / (1.0 - mult)
            r1b = (es[-1] - mult * es[-2]) / (1.0 - mult)
            r2 = (r1b - q2 * r1a) / (1.0 - q2)
            if want_deriv:
                s1a = (ds[-2] - mult * ds[-3]) / (1.0 - mult)
                s1b = (ds[-1] - mult * ds[-2]) / (1.0 - mult)
                r2d = (s1b - q2 * s1a) / (1.0 - q2)
            else:
                r2d = complex(0.0)
            if r2_prev is not None:
                done = abs(r2 - r2_prev) <= 0.25 * target * (1.0 + abs(r2))
                if want_deriv:
                    done = done and abs(r2d - r2d_prev) <= 0.25 * target * (1.0 + abs(r2d))
                if done and settled < 0:
                    settled = m
                if settled >= 0 and m >= settled + extra_depth:
                    return r2, r2d, n + m
            r2_prev, r2d_prev = r2, r2d
            phi, phid = r2, r2d
        dprod = dprod * mc.eval_f_prime_raw(lam, mu, w)
        w = mc.eval_f_raw(lam, mu, w)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            break
        m += 1
    if r2_prev is None:
        raise NotInBasin("Koenigs limit did not settle")
    return phi, phid, n + m


def koenigs_value(p: ParamPoint, z: complex, target_residual: float = 1e-10,
                  extra_depth: int = 0) -> complex:
    """phi_lambda(z) for the fixed point 0 with multiplier rho."""
    phi, _, _ = _phi_limit(p, z, 0j, p.rho, target_residual, extra_depth, False)
    return phi


def koenigs_value_at(p: ParamPoint, z: complex, center: complex, mult: complex,
                     target_residual: float = 1e-10) -> complex:
    """Linearizer of p's map at an arbitrary attracting fixed point."""
    phi, _, _ = _phi_limit(p, z, complex(center), complex(mult), target_residual, 0, False)
    return phi


def koenigs_value_and_deriv(p: ParamPoint, z: complex, center: complex, mult: complex,
                            target_residual: float = 1e-10) -> tuple[complex, complex]:
    phi, phid, _ = _phi_limit(p, z, complex(center), complex(mult), target_residual, 0, True)
    return phi, phid


def koenigs_frame(p: ParamPoint, target_residual: float = 1e-10) -> KoenigsFrame:
    """phi at both asymptotic values plus a functional-equation residual."""
    phi_lam, _, n1 = _phi_limit(p, p.lam, 0j, p.rho, target_residual, 0, False)
    phi_mu, _, n2 = _phi_limit(p, p.mu, 0j, p.rho, target_residual, 0, False)
    # probe the functional equation at the asymptotic values themselves
    res = 0.0
    for z, phi in ((p.lam, phi_lam), (p.mu, phi_mu)):
        fz = mc.eval_f_raw(p.lam, p.mu, complex(z))
        phi_fz, _, _ = _phi_limit(p, fz, 0j, p.rho, target_residual, 0, False)
        res = max(res, abs(phi_fz - p.rho * phi))
    return KoenigsFrame(p, phi_lam, phi_mu, max(n1, n2), res)


def s_partition(p: ParamPoint, budget: ClassifierBudget = DEFAULT_BUDGET) -> SPart:
    """Which asymptotic value obstructs the linearizer's injectivity domain.

    An asymptotic value lying in the grand orbit of 0 has phi = 0 and is no
    obstruction at all, so the other value alone sits on the boundary.
    """
    if classify(p, budget).kind is not Kind.SHIFT_LOCUS:
        raise NotShiftLocus(f"lambda={p.lam!r} is not in the shift locus")
    phi_lam = koenigs_value(p, p.lam)
    phi_mu = koenigs_value(p, p.mu)
    a, b = abs(phi_lam), abs(phi_mu)
    if a <= GRAND_ORBIT_TOL * b:
        return SPart.S_LAMBDA
    if b <= GRAND_ORBIT_TOL * a:
        return SPart.S_MU
    g = math.log(a / b)
    if abs(g) <= TIE_TOL:
        return SPart.S_STAR
    return SPart.S_LAMBDA if g > 0 else SPart.S_MU


def _log_ratio(rho: complex, lam: complex) -> float | None:
    """log |phi(lam)| - log |phi(mu)|, or None when lam is not usable (not in S)."""
    try:
        p = ParamPoint(rho, lam)
        phi_lam = koenigs_value(p, p.lam)
        phi_mu = koenigs_value(p, p.mu)
    except Exception:
        return None
    a, b = abs(phi_lam), abs(phi_mu)
    if a == 0.0 or b == 0.0:
        return None
    return math.log(a) - math.log(b)


def trace_s_star(rho: complex, n_samples: int = 64) -> list[complex]:
    """Sample the tie curve |phi(lam)| = |phi(mu)| as a closed polyline.

    Marches rays from the parameter singularity rho/2, starting at lam = rho
    (always on the curve), bracketing the log-ratio along each ray and
    polishing with Brent.  Raises TraceLost with the partial polyline when a
    ray cannot be bracketed.
    """
    rho = complex(rho)
    if not 0.0 < abs(rho) < 1.0:
        raise NotShiftLocus("rho outside the punctured unit disk")
    center = rho / 2.0
    theta0 = cmath.phase(rho - center)
    r_guess = abs(rho - center)
    points: list[complex] = []
    for i in range(n_samples):
        theta = theta0 + 2.0 * math.pi * i / n_samples
        direction = cmath.exp(1j * theta)

        def g(r: float) -> float | None:
            return _log_ratio(rho, center + r * direction)

        root = _bracketed_root(g, r_guess)
        if root is None:
            raise TraceLost(points, f"lost the S_* bracket at ray {i} (theta={theta:.4f})")
        points.append(center + root * direction)
        r_guess = root
    return points


def _bracketed_root(g, r_guess: float) -> float | None:
    """Find a sign change of g around r_guess and polish it by bisection.

    g may return None (parameter outside S or singular); such samples are
    skipped when scanning and nudged past when bisecting, so the trace can
    close through the parameter singularity the curve limits on.
    """
    for spread in (0.02, 0.05, 0.12, 0.3, 0.6):
        lo = r_guess * (1.0 - spread)
        hi = r_guess * (1.0 + spread)
        samples = [(float(r), g(float(r))) for r in np.linspace(lo, hi, 9)]
        valid = [(r, v) for r, v in samples if v is not None]
        for (ra, va), (rb, vb) in zip(valid, valid[1:]):
            if va == 0.0:
                return ra
            if va * vb < 0.0:
                return _sign_bisect(g, ra, va, rb, vb)
    return None


def _sign_bisect(g, a: float, ga: float, b: float, gb: float,
                 tol: float = 1e-13, max_iter: int = 120) -> float:
    for _ in range(max_iter):
        if b - a < tol:
            break
        m = 0.5 * (a + b)
        gm = g(m)
        if gm is None:
            m = a + 0.55 * (b - a)  # nudge off a singular evaluation
            gm = g(m)
            if gm is None:
                break
        if gm == 0.0:
            return m
        if ga * gm < 0.0:
            b, gb = m, gm
        else:
            a, ga = m, gm
    return 0.5 * (a + b)


def _fixed_point_on_ray(p: ParamPoint, seed: complex) -> complex | None:
    """Newton for f(q) = q from seed."""
    q = complex(seed)
    for _ in range(80):
        fq = mc.eval_f_raw(p.lam, p.mu, q)
        fpq = mc.eval_f_prime_raw(p.lam, p.mu, q)
        if fpq == 1.0:
            return None
        step = (fq - q) / (fpq - 1.0)
        q -= step
        if not (math.isfinite(q.real) and math.isfinite(q.imag)):
            return None
        if abs(step) < 1e-14 * (1.0 + abs(q)):
            break
    return q if abs(mc.eval_f_raw(p.lam, p.mu, q) - q) < 1e-11 * (1.0 + abs(q)) else None


def _model_system(rho: complex, lam: complex, q: complex) -> tuple[complex, complex]:
    mu = mc.derive_mu_raw(rho, lam)
    return (mc.eval_f_raw(lam, mu, q) - q, mc.eval_f_prime_raw(lam, mu, q) - rho)


def _newton_model(rho: complex, lam: complex, q: complex) -> tuple[complex, complex] | None:
    h = 1e-7
    for _ in range(100):
        g1, g2 = _model_system(rho, lam, q)
        if abs(g1) < 1e-12 and abs(g2) < 1e-11:
            return lam, q
        a1, b1 = _model_system(rho, lam + h, q)
        a2, b2 = _model_system(rho, lam - h, q)
        c1, d1 = _model_system(rho, lam, q + h)
        c2, d2 = _model_system(rho, lam, q - h)
        jac = np.array([[(a1 - a2) / (2 * h), (c1 - c2) / (2 * h)],
                        [(b1 - b2) / (2 * h), (d1 - d2) / (2 * h)]], dtype=complex)
        try:
            step = np.linalg.solve(jac, np.array([g1, g2], dtype=complex))
        except np.linalg.LinAlgError:
            return None
        lam, q = lam - step[0], q - step[1]
        if not all(math.isfinite(v) for v in (lam.real, lam.imag, q.real, q.imag)):
            return None
    return None


def find_model_parameter(rho: complex) -> ModelFrame:
    """lambda0 in Omega_1 whose non-zero fixed point q0 also has multiplier rho.

    For real rho the real solution branch is located by bisecting the fixed
    point multiplier along the real axis, then polished by a 2x2 Newton on
    (f(q)-q, f'(q)-rho); for complex rho a seed ladder feeds the same Newton.
    """
    rho = complex(rho)
    if not 0.0 < abs(rho) < 1.0:
        raise NewtonDivergence("rho outside the punctured unit disk")
    seeds: list[tuple[complex, complex]] = []
    if abs(rho.imag) < 1e-14 and rho.real > 0:
        bracket = _real_multiplier_bracket(rho.real)
        if bracket is not None:
            seeds.append(bracket)
    seeds += [(complex(x), complex(0.8 * x)) for x in (2.0, 2.5, 3.0, 1.6, 4.0, 5.0)]
    for lam_seed, q_seed in seeds:
        sol = _newton_model(rho, complex(lam_seed), complex(q_seed))
        if sol is None:
            continue
        lam0, q0 = sol
        if abs(q0) < 1e-6:
            continue  # collapsed onto the fixed point at 0 (f'(0) = rho identically)
        if abs(rho.imag) < 1e-14 and rho.real > 0:
            lam0, q0 = complex(lam0.real), complex(q0.real)  # real branch
        try:
            point = ParamPoint(rho, lam0)
        except Exception:
            continue
        # q0 must be a genuine attracting fixed point that captures lambda0
        if abs(mc.eval_f_raw(point.lam, point.mu, q0) - q0) > 1e-10:
            continue
        if abs(mc.eval_f_prime_raw(point.lam, point.mu, q0) - rho) > 1e-8:
            continue
        try:
            phi0_lam0 = koenigs_value_at(point, lam0, q0, rho)
        except NotInBasin:
            continue
        return ModelFrame(rho, lam0, q0, abs(phi0_lam0), phi0_lam0, point)
    raise NewtonDivergence(f"no model parameter found for rho={rho!r} from the seed ladder")


def _real_multiplier_bracket(rho: float) -> tuple[complex, complex] | None:
    """Bisect nu(lam) = rho for real lam beyond the cusp of Omega_1."""

    def nu_at(x: float) -> float | None:
        try:
            p = ParamPoint(rho, complex(x))
        except Exception:
            return None
        code, period, _, rep, _, _ = mc.fate_raw(p.rho, p.lam, p.mu, p.lam, 20000,
                                                 1e-9, 1e-9, 2, EPS_POLE)
        if code != mc.FATE_CYCLE or period != 1 or abs(rep) < 1e-6:
            return None
        q = _fixed_point_on_ray(p, rep)
        if q is None or abs(q) < 1e-6:
            return None
        m = mc.eval_f_prime_raw(p.lam, p.mu, q)
        if abs(m) >= 1.0:
            return None
        return m.real

    xs = [1.2, 1.5, 2.0, 2.7, 3.5, 4.5, 6.0, 8.0, 11.0, 15.0, 21.0, 30.0]
    vals = [(x, nu_at(x)) for x in xs]
    vals = [(x, v) for x, v in vals if v is not None]
    for (x1, v1), (x2, v2) in zip(vals, vals[1:]):
        if (v1 - rho) * (v2 - rho) <= 0.0:
            for _ in range(70):
                xm = 0.5 * (x1 + x2)
                vm = nu_at(xm)
                if vm is None:
                    break
                if (v1 - rho) * (vm - rho) <= 0.0:
                    x2, v2 = xm, vm
                else:
                    x1, v1 = xm, vm
            x = 0.5 * (x1 + x2)
            p = ParamPoint(rho, complex(x))
            code, period, _, rep, _, _ = mc.fate_raw(p.rho, p.lam, p.mu, p.lam, 20000,
                                                     1e-9, 1e-9, 2, EPS_POLE)
            if code == mc.FATE_CYCLE and period == 1:
                q = _fixed_point_on_ray(p, rep)
                if q is not None and abs(q) > 1e-6:
                    return complex(x), q
    return None


def eval_E(model: ModelFrame, p: ParamPoint) -> complex:
    """E(lambda) = phi_0^{-1}(c phi_lambda(lambda)), c = phi_0(lambda0)/phi_lambda(mu).

    phi_0 is inverted by walking t in [0,1] along zeta(t) = t * c * phi_lambda(lambda)
    from q0, Newton-correcting phi_0(w(t)) = zeta(t) at each step so one branch is
    continued consistently.
    """
    part = s_partition(p)
    if part is not SPart.S_LAMBDA:
        raise NotSLambda(f"E is defined on S_lambda^0; got {part.value}")
    phi_lam = koenigs_value(p, p.lam)
    phi_mu = koenigs_value(p, p.mu)
    target = model.phi0_at_lambda0 / phi_mu * phi_lam
    return _invert_phi0(model, target)


def _invert_phi0(model: ModelFrame, target: complex, tol: float = 1e-9) -> complex:
    mp = model.point
    w = complex(model.q0)
    t = 0.0
    dt = 0.25
    while t < 1.0:
        t_next = min(1.0, t + dt)
        zeta = t_next * target
        w_try = w
        ok = False
        for _ in range(12):
            try:
                phi, dphi = koenigs_value_and_deriv(mp, w_try, model.q0, model.rho)
            except NotInBasin:
                break  # correction left the basin of q0; retry with a smaller step
            err = phi - zeta
            if abs(err) < tol:
                ok = True
                break
            if dphi == 0:
                break
            w_new = w_try - err / dphi
            if not (math.isfinite(w_new.real) and math.isfinite(w_new.imag)):
                break
            w_try = w_new
        if ok:
            w, t = w_try, t_next
            dt = min(0.25, dt * 1.6)
        else:
            dt *= 0.5
            if dt < 1e-6:
                raise ContinuationStuck(f"step underflow at t={t:.6f} toward {target!r}")
    phi, _ = koenigs_value_and_deriv(mp, w, model.q0, model.rho)
    if abs(phi - target) > 1e-8 * (1.0 + abs(target)):
        raise ContinuationStuck(f"inversion residual {abs(phi - target):g}")
    return w
