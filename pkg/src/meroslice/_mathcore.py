"""Compiled scalar core for the family f(z) = (e^z - e^{-z}) / (e^z/lam - e^{-z}/mu).

Everything here works on raw complex scalars (no validation, no exceptions)
and is numba-compiled so the same code backs both the scalar API and the
per-pixel rendering loops.  All evaluation goes through u = e^{2z}:

    f(z)  = lam*mu*(u - 1) / (mu*u - lam)
    f'(z) = 2*u*lam*mu*(mu - lam) / (mu*u - lam)^2

with asymptotic substitution once Re(2z) passes +-OVERFLOW_RE2Z so the
essential singularity never overflows the evaluation.
"""

import cmath
import math

import numba

# Evaluation constants (see package docs for rationale).
OVERFLOW_RE2Z = 300.0        # switch to asymptotic form when |Re 2z| exceeds this
EPS_POLE = 1e-12             # z-distance to a pole below which iteration stops
EPS_ZERO = 1e-9              # |z| below which a point counts as "at the origin"
ZERO_PERSIST = 5             # consecutive small iterates required for convergence to 0
ZERO_CYCLE_GUARD = 1e-4      # candidate cycles entirely inside this radius are deferred
                             # to the zero rule (no non-zero cycle can live that close to 0)

# Orbit fate codes.
FATE_ZERO = 0
FATE_CYCLE = 1
FATE_POLE = 2
FATE_BUDGET = 3
FATE_ESCAPE = 4

# Parameter classification codes.
KIND_SHIFT = 0
KIND_MLAMBDA = 1
KIND_MMU = 2
KIND_UNDETERMINED = 3
KIND_SINGULAR = 4

_jit = numba.njit(cache=True, nogil=True)


@_jit
def log_branch(w):
    """Logarithm with imaginary part in [-pi, pi)."""
    v = cmath.log(w)
    if v.imag == math.pi:
        return complex(v.real, -math.pi)
    return v


@_jit
def derive_mu_raw(rho, lam):
    return lam * rho / (rho - 2.0 * lam)


@_jit
def eval_f_raw(lam, mu, z):
    x = 2.0 * z.real
    if x > OVERFLOW_RE2Z:
        # f = lam*(1 - 1/u)/(1 - lam/(mu*u)) truncated at first order in 1/u
        return lam + lam * (lam / mu - 1.0) * cmath.exp(-2.0 * z)
    if x < -OVERFLOW_RE2Z:
        u = cmath.exp(2.0 * z)
        return mu + mu * (mu / lam - 1.0) * u
    u = cmath.exp(2.0 * z)
    return lam * mu * (u - 1.0) / (mu * u - lam)


@_jit
def eval_f_prime_raw(lam, mu, z):
    x = 2.0 * z.real
    if x > OVERFLOW_RE2Z:
        return 2.0 * lam * (mu - lam) / mu * cmath.exp(-2.0 * z)
    if x < -OVERFLOW_RE2Z:
        u = cmath.exp(2.0 * z)
        return 2.0 * mu * (mu - lam) / lam * u
    u = cmath.exp(2.0 * z)
    d = mu * u - lam
    return 2.0 * u * lam * mu * (mu - lam) / (d * d)


@_jit
def pole_base_raw(rho, lam):
    """p_0 = (1/2) Log((rho - 2 lam)/rho) with the [-pi, pi) branch."""
    return 0.5 * log_branch((rho - 2.0 * lam) / rho)


@_jit
def pole_k_raw(rho, lam, k):
    return pole_base_raw(rho, lam) + complex(0.0, math.pi * k)


@_jit
def nearest_pole_raw(z, p0):
    """Distance from z to the nearest pole p_k and that k (as a float)."""
    k = math.floor((z.imag - p0.imag) / math.pi + 0.5)
    d = abs(z - (p0 + complex(0.0, math.pi * k)))
    return d, k


@_jit
def inverse_branch_raw(lam, mu, k, w):
    """g_{lam,k}(w) = (1/2) Log(lam (w - mu) / (mu (w - lam))) + i k pi."""
    return 0.5 * log_branch(lam * (w - mu) / (mu * (w - lam))) + complex(0.0, math.pi * k)


@_jit
def _finite(z):
    return math.isfinite(z.real) and math.isfinite(z.imag)


@_jit
def fate_raw(rho, lam, mu, seed, max_iter, eps_zero, eps_cycle, max_period, eps_pole):
    """Orbit fate of one seed.

    Returns (code, period, iters, a, nu, pole_k):
      code FATE_ZERO    -- orbit converged to 0 (ZERO_PERSIST consecutive small iterates)
      code FATE_CYCLE   -- near-return to a non-zero attracting cycle; a is a cycle
                           representative, nu the multiplier, period the minimal period
      code FATE_POLE    -- an orbit point landed within eps_pole of pole p_k
      code FATE_BUDGET  -- budget exhausted without a verdict
      code FATE_ESCAPE  -- an iterate overflowed to a non-finite value
    """
    p0 = pole_base_raw(rho, lam)
    z = seed
    zero_run = 1 if abs(z) < eps_zero else 0
    saved = z
    saved_i = 0
    power = 1
    try_after = 0
    for i in range(1, max_iter + 1):
        d, kf = nearest_pole_raw(z, p0)
        if d < eps_pole:
            return FATE_POLE, 0, i - 1, z, complex(0.0, 0.0), kf
        z = eval_f_raw(lam, mu, z)
        if not _finite(z):
            return FATE_ESCAPE, 0, i, z, complex(0.0, 0.0), 0.0
        if abs(z) < eps_zero:
            zero_run += 1
            if zero_run >= ZERO_PERSIST:
                return FATE_ZERO, 0, i, z, complex(0.0, 0.0), 0.0
        else:
            zero_run = 0
        if i >= try_after and abs(z - saved) < eps_cycle and i - saved_i >= 1 and abs(z) >= eps_zero:
            # candidate near-return; extract the minimal period by walking forward
            gap = i - saved_i
            look = gap
            if look > 2 * max_period:
                look = 2 * max_period
            m = 0
            w = z
            for j in range(1, look + 1):
                w = eval_f_raw(lam, mu, w)
                if not _finite(w):
                    break
                if abs(w - z) < eps_cycle:
                    m = j
                    break
            if 1 <= m <= max_period:
                # verify one more full loop and accumulate the multiplier
                nu = complex(1.0, 0.0)
                minabs = abs(z)
                ok = True
                w = z
                for j in range(m):
                    nu = nu * eval_f_prime_raw(lam, mu, w)
                    w = eval_f_raw(lam, mu, w)
                    if not _finite(w):
                        ok = False
                        break
                    if abs(w) < minabs:
                        minabs = abs(w)
                if ok and abs(w - z) < 10.0 * eps_cycle:
                    if minabs < ZERO_CYCLE_GUARD:
                        # whole candidate cycle sits against the origin: it is the
                        # zero basin converging slowly, let the zero rule decide
                        try_after = i + 2 * m
                    elif abs(nu) < 1.0:
                        return FATE_CYCLE, m, i, z, nu, 0.0
                    else:
                        try_after = i + 2 * m
                else:
                    try_after = i + m
            else:
                try_after = i + 1
        if i - saved_i == power:
            saved = z
            saved_i = i
            power *= 2
    return FATE_BUDGET, 0, max_iter, z, complex(0.0, 0.0), 0.0


@_jit
def classify_raw(rho, lam, max_iter, eps_zero, eps_cycle, max_period, eps_pole):
    """Trichotomy decision for one parameter.

    Returns (kind, period, iters_mu, iters_lam, a, nu).
    """
    mu = derive_mu_raw(rho, lam)
    cm, pm, im_, am, num, _ = fate_raw(rho, lam, mu, mu, max_iter, eps_zero, eps_cycle, max_period, eps_pole)
    cl, pl, il, al, nul, _ = fate_raw(rho, lam, mu, lam, max_iter, eps_zero, eps_cycle, max_period, eps_pole)
    if cm == FATE_ZERO and cl == FATE_ZERO:
        return KIND_SHIFT, 0, im_, il, complex(0.0, 0.0), complex(0.0, 0.0)
    if cm == FATE_ZERO and cl == FATE_CYCLE:
        return KIND_MLAMBDA, pl, im_, il, al, nul
    if cl == FATE_ZERO and cm == FATE_CYCLE:
        return KIND_MMU, pm, im_, il, am, num
    return KIND_UNDETERMINED, 0, im_, il, complex(0.0, 0.0), complex(0.0, 0.0)


@_jit
def classify_grid_raw(rho, lams, max_iter, eps_zero, eps_cycle, max_period, eps_pole,
                      out_kind, out_period):
    """Classify a flat array of lambda values into out_kind/out_period."""
    half = rho / 2.0
    for idx in range(lams.shape[0]):
        lam = lams[idx]
        if abs(lam) < 1e-9 or abs(lam - half) < 1e-9:
            out_kind[idx] = KIND_SINGULAR
            out_period[idx] = 0
            continue
        kind, period, _, _, _, _ = classify_raw(rho, lam, max_iter, eps_zero, eps_cycle,
                                                max_period, eps_pole)
        out_kind[idx] = kind
        out_period[idx] = period


@_jit
def dynamic_grid_raw(rho, lam, mu, zs, max_iter, eps_zero, eps_cycle, max_period, eps_pole,
                     out_code):
    """Orbit fate codes for a flat array of dynamic-plane seeds."""
    for idx in range(zs.shape[0]):
        code, _, _, _, _, _ = fate_raw(rho, lam, mu, zs[idx], max_iter, eps_zero, eps_cycle,
                                       max_period, eps_pole)
        out_code[idx] = code


@_jit
def koenigs_orbit_raw(lam, mu, z, center, radius, max_iter, eps_pole, p0):
    """Iterate until |z - center| < radius, accumulating the derivative product.

    Returns (n, z_n, prod of f' over the n steps); n = -1 if the orbit never
    entered the disk (pole hit, overflow, or budget).
    """
    deriv = complex(1.0, 0.0)
    for n in range(max_iter + 1):
        if abs(z - center) < radius:
            return n, z, deriv
        d, _ = nearest_pole_raw(z, p0)
        if d < eps_pole:
            return -1, z, deriv
        deriv = deriv * eval_f_prime_raw(lam, mu, z)
        z = eval_f_raw(lam, mu, z)
        if not _finite(z):
            return -1, z, deriv
    return -1, z, deriv
