"""Virtual cycle parameters: solutions of f^{n-1}(asymptotic value) = infinity.

A center of order n is labelled by an itinerary of n-1 branch indices
(most recently applied branch first, base pole index last): the marked
asymptotic value equals the prepole

    p_itin(lambda) = g_{e_0}( g_{e_1}( ... g_{e_{m-2}}( p_{e_{m-1}}(lambda) ) ... ) )

and Newton on F(lambda) = av(lambda) - p_itin(lambda) locates it.  Children
(itin + one trailing entry) accumulate on their parent as the new base pole
index grows, which supplies the seeding strategy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import _mathcore as mc
from .classifier import Itinerary
from .errors import (
    CompositionThroughOmittedValue,
    DomainError,
    NewtonDivergence,
    SeedEscaped,
)
from .family import ParamPoint, derive_mu

_NEWTON_H = 1e-7
RESIDUAL_TOL = 1e-9
DEDUPE_TOL = 1e-8


class MarkedAV(enum.Enum):
    LAMBDA = "lambda"
    MU = "mu"


@dataclass(frozen=True)
class Rect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DomainError("degenerate window")

    def contains(self, z: complex) -> bool:
        return (self.re_min <= z.real <= self.re_max
                and self.im_min <= z.imag <= self.im_max)

    def grid(self, n: int) -> list[complex]:
        pts = []
        for i in range(n):
            for j in range(n):
                pts.append(complex(self.re_min + (i + 0.5) * (self.re_max - self.re_min) / n,
                                   self.im_min + (j + 0.5) * (self.im_max - self.im_min) / n))
        return pts


@dataclass(frozen=True)
class VirtualCenter:
    order: int
    marked_av: MarkedAV
    location: complex
    itinerary: Itinerary
    residual: float
    transversality: complex
    rho: complex


@dataclass(frozen=True)
class EnumerationResult:
    centers: tuple[VirtualCenter, ...]
    failures: tuple[str, ...]


def _prepole_raw(rho: complex, lam: complex, entries: tuple[int, ...]) -> complex:
    mu = mc.derive_mu_raw(rho, lam)
    z = mc.pole_k_raw(rho, lam, float(entries[-1]))
    for k in reversed(entries[:-1]):
        if z == lam or z == mu:
            raise CompositionThroughOmittedValue(f"hit omitted value before g_{k}")
        try:
            z = mc.inverse_branch_raw(lam, mu, float(k), z)
        except ZeroDivisionError:
            raise CompositionThroughOmittedValue(f"omitted value in branch g_{k}")
    return z


def prepole(p: ParamPoint, itin: Itinerary) -> complex:
    """p_itin(lambda); f^{|itin|} blows up there (the orbit ends on a pole)."""
    return _prepole_raw(p.rho, p.lam, itin.entries)


def _av(rho: complex, lam: complex, marked: MarkedAV) -> complex:
    return lam if marked is MarkedAV.LAMBDA else mc.derive_mu_raw(rho, lam)


def _center_equation(rho: complex, marked: MarkedAV, entries: tuple[int, ...]):
    def F(lam: complex) -> complex:
        return _av(rho, lam, marked) - _prepole_raw(rho, lam, entries)
    return F


def _forward_residual(rho: complex, lam: complex, marked: MarkedAV,
                      entries: tuple[int, ...]) -> float:
    """|f^{n-2}(av) - p_{base}| : forward check independent of the inverse branches."""
    mu = mc.derive_mu_raw(rho, lam)
    z = _av(rho, lam, marked)
    for _ in range(len(entries) - 1):
        z = mc.eval_f_raw(lam, mu, z)
    return abs(z - mc.pole_k_raw(rho, lam, float(entries[-1])))


def _c_n(rho: complex, lam: complex, marked: MarkedAV, entries: tuple[int, ...]) -> complex:
    """The transversality function c_n = f^{n-2}(av) - p_base as a function of lambda."""
    mu = mc.derive_mu_raw(rho, lam)
    z = _av(rho, lam, marked)
    for _ in range(len(entries) - 1):
        z = mc.eval_f_raw(lam, mu, z)
    return z - mc.pole_k_raw(rho, lam, float(entries[-1]))


def solve_virtual_center(rho: complex, marked_av: MarkedAV, itin: Itinerary,
                         seed: complex, window: Rect | None = None) -> VirtualCenter:
    """Newton on av(lambda) = p_itin(lambda) from the given seed.

    The reported transversality is c_n'(lambda*) by central difference.
    """
    rho = complex(rho)
    entries = itin.entries
    F = _center_equation(rho, marked_av, entries)
    lam = complex(seed)
    for _ in range(80):
        try:
            v = F(lam)
            if abs(v) < 1e-12:
                break
            d = (F(lam + _NEWTON_H) - F(lam - _NEWTON_H)) / (2.0 * _NEWTON_H)
        except (CompositionThroughOmittedValue, ZeroDivisionError):
            raise NewtonDivergence(f"composition degenerate near {lam!r}")
        if d == 0:
            raise NewtonDivergence("flat Newton derivative")
        lam -= v / d
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            raise NewtonDivergence("iterate overflowed")
        if window is not None and not window.contains(lam):
            raise SeedEscaped(f"left window at {lam!r}")
        if abs(lam) > 1e6:
            raise SeedEscaped(f"escaped to {lam!r}")
    if abs(lam) < 1e-6 or abs(lam - rho / 2.0) < 1e-6:
        raise SeedEscaped("converged to a parameter singularity")
    residual = _forward_residual(rho, lam, marked_av, entries)
    if residual >= RESIDUAL_TOL:
        raise NewtonDivergence(f"residual {residual:g} at {lam!r}")
    trans = (_c_n(rho, lam + _NEWTON_H, marked_av, entries)
             - _c_n(rho, lam - _NEWTON_H, marked_av, entries)) / (2.0 * _NEWTON_H)
    return VirtualCenter(len(entries) + 1, marked_av, lam, Itinerary(entries),
                         residual, trans, rho)


def _order2_seed(rho: complex, marked: MarkedAV, k: int) -> complex:
    pk = mc.pole_k_raw(rho, rho, float(k))
    if marked is MarkedAV.LAMBDA:
        return pk
    return pk * rho / (rho + 2.0 * pk)  # inverse of the mu map


def _child_seed(rho: complex, marked: MarkedAV, parent: complex,
                entries: tuple[int, ...]) -> complex:
    base = parent + 1e-4 * (1 + 1j)  # nudge off the parent's own singular composition
    try:
        pred = _prepole_raw(rho, base, entries)
    except (CompositionThroughOmittedValue, ZeroDivisionError):
        return base
    if marked is MarkedAV.MU:
        pred = pred * rho / (rho + 2.0 * pred)
    if math.isfinite(pred.real) and math.isfinite(pred.imag):
        return pred
    return base


def enumerate_centers(rho: complex, window: Rect, max_order: int = 3,
                      k_range: tuple[int, int] = (-5, 5)) -> EnumerationResult:
    """Solve all centers of order <= max_order with labels over k_range.

    Order-2 centers are seeded at p_k(rho); order n+1 children are seeded at the
    prepole-offset prediction from their parent.  Solutions within 1e-6 of the
    parameter singularities are discarded; only centers inside the window are
    returned, sorted by order then |location|.
    """
    rho = complex(rho)
    if max_order < 2:
        raise DomainError("max_order must be >= 2")
    lo, hi = k_range
    ks = list(range(lo, hi + 1))
    failures: list[str] = []
    found: dict[tuple[MarkedAV, tuple[int, ...]], VirtualCenter] = {}
    frontier: list[VirtualCenter] = []
    for marked in (MarkedAV.LAMBDA, MarkedAV.MU):
        for k in ks:
            itin = Itinerary((k,))
            seeds = [_order2_seed(rho, marked, k)] + window.grid(2)
            center = _try_seeds(rho, marked, itin, seeds, failures)
            if center is not None:
                found[(marked, itin.entries)] = center
                frontier.append(center)
    for _ in range(3, max_order + 1):
        next_frontier: list[VirtualCenter] = []
        for parent in frontier:
            for k0 in ks:
                itin = parent.itinerary.extended(k0)
                seeds = [_child_seed(rho, parent.marked_av, parent.location, itin.entries)]
                center = _try_seeds(rho, parent.marked_av, itin, seeds, failures)
                if center is not None and (parent.marked_av, itin.entries) not in found:
                    found[(parent.marked_av, itin.entries)] = center
                    next_frontier.append(center)
        frontier = next_frontier
    deduped = _dedupe(found.values())
    inside = [c for c in deduped if window.contains(c.location)]
    inside.sort(key=lambda c: (c.order, abs(c.location), c.itinerary.entries))
    return EnumerationResult(tuple(inside), tuple(failures))


def _try_seeds(rho, marked, itin, seeds, failures) -> VirtualCenter | None:
    for seed in seeds:
        try:
            return solve_virtual_center(rho, marked, itin, seed)
        except (NewtonDivergence, SeedEscaped) as exc:
            failures.append(f"{marked.value} {itin.entries} from {seed!r}: {exc}")
    return None


def _dedupe(centers) -> list[VirtualCenter]:
    kept: list[VirtualCenter] = []
    for c in sorted(centers, key=lambda c: c.residual):
        if any(k.marked_av is c.marked_av and abs(k.location - c.location) < DEDUPE_TOL
               for k in kept):
            continue
        kept.append(c)
    return kept


def virtual_cycle(center: VirtualCenter, p_budget: int = 64) -> list[complex]:
    """The finite part (a_1 = av, ..., a_{n-1} = pole) of the virtual cycle.

    The cycle closes through a_0 = infinity (recorded by convention, not as a
    point); the last returned point is the pole the orbit lands on.
    """
    if center.residual >= RESIDUAL_TOL:
        raise DomainError("center not verified to residual tolerance")
    rho, lam = center.rho, center.location
    mu = mc.derive_mu_raw(rho, lam)
    z = _av(rho, lam, center.marked_av)
    pts = [z]
    for _ in range(min(center.order - 2, p_budget)):
        z = mc.eval_f_raw(lam, mu, z)
        pts.append(z)
    return pts


def format_center_record(c: VirtualCenter) -> str:
    itin = ",".join(str(k) for k in c.itinerary.entries)
    return (f"{c.order} {c.marked_av.value} {itin} "
            f"{c.location.real!r} {c.location.imag!r} {c.residual!r} {abs(c.transversality)!r}")


def parse_center_record(line: str, rho: complex) -> VirtualCenter:
    parts = line.split()
    if len(parts) != 7:
        raise ValueError(f"malformed center record: {line!r}")
    order = int(parts[0])
    marked = MarkedAV(parts[1])
    itin = Itinerary(tuple(int(s) for s in parts[2].split(",")))
    loc = complex(float(parts[3]), float(parts[4]))
    return VirtualCenter(order, marked, loc, itin, float(parts[5]),
                         complex(float(parts[6]), 0.0), complex(rho))


def write_center_records(path, centers) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for c in centers:
            fh.write(format_center_record(c) + "\n")


def read_center_records(path, rho: complex) -> list[VirtualCenter]:
    out = []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(parse_center_record(line, rho))
    return out
