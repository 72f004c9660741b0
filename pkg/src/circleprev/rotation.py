"""Rotation numbers, continued-fraction convergents and the (*)_beta Diophantine test."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import NotADiffeo
from .lifting import DEFAULT_GRID, Lifting, iterate, unit_grid, validate_diffeo


class BetaOutOfRange(UserWarning):
    """beta outside (0, 1), where the smooth conjugacy result does not apply."""


@dataclass(frozen=True)
class RotationEstimate:
    """Lift rotation number ``(F^N(x0) - x0) / N`` with the classical ``1/N`` error bound."""

    value: float
    error_bound: float
    iterations: int
    x0: float = 0.0

    @classmethod
    def exact(cls, value: float) -> "RotationEstimate":
        """A value known exactly (no orbit behind it); ``iterations`` is 0."""
        return cls(float(value), 0.0, 0, 0.0)


@dataclass(frozen=True)
class DiophantineReport:
    beta: float
    q_max: int
    q_threshold: int
    error_bound: float
    violations: list = field(default_factory=list)
    inconclusive: list = field(default_factory=list)
    satisfied_up_to_qmax: bool = True
    rational: str = "no"  # "no" | "possible" | "exact" | "certified"
    rational_pq: tuple | None = None
    periodic_point: float | None = None

    @property
    def bypassed(self) -> bool:
        return self.rational in ("exact", "certified")

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "q_max": self.q_max,
            "q_threshold": self.q_threshold,
            "error_bound": self.error_bound,
            "violations": [{"p": p, "q": q, "gap": g} for p, q, g in self.violations],
            "inconclusive": [{"p": p, "q": q, "gap": g} for p, q, g in self.inconclusive],
            "satisfied_up_to_qmax": self.satisfied_up_to_qmax,
            "rational": self.rational,
            "rational_pq": list(self.rational_pq) if self.rational_pq else None,
            "periodic_point": self.periodic_point,
            "bypassed": self.bypassed,
        }


def rotation_number(F: Lifting, N: int = 10_000, x0: float = 0.0) -> RotationEstimate:
    if N < 1:
        raise ValueError("N must be >= 1")
    if not validate_diffeo(F).is_diffeo:
        raise NotADiffeo("rotation number needs a certified diffeomorphism lift")
    if F.is_rigid:
        value = F.c0
    else:
        value = (iterate(F, x0, N) - x0) / N
    return RotationEstimate(float(value), 1.0 / N, N, float(x0))


def _as_fraction(rho: float) -> Fraction:
    # the shortest decimal that round-trips, so 0.3 expands as 3/10
    return Fraction(repr(float(rho)))


def convergents(rho: float, q_max: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents ``p/q`` of ``rho`` with ``q <= q_max``, increasing ``q``."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    rem = _as_fraction(rho)
    p1, p2 = 1, 0
    q1, q2 = 0, 1
    out = []
    while True:
        a = math.floor(rem)
        p, q = a * p1 + p2, a * q1 + q2
        if q > q_max:
            break
        out.append((p, q))
        p2, p1 = p1, p
        q2, q1 = q1, q
        frac = rem - a
        if frac == 0:
            break
        rem = 1 / frac
    return out


def certify_periodic_orbit(F: Lifting, p: int, q: int,
                           grid_points: int = DEFAULT_GRID) -> float | None:
    """A point with ``F^q(x) = x + p``, if a sign change of ``F^q(x) - x - p`` is found."""
    xs = unit_grid(grid_points)
    g = iterate(F, xs, q) - xs - p
    zero = np.flatnonzero(g == 0.0)
    if zero.size:
        return float(xs[zero[0]])
    flips = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))
    if not flips.size:
        return None
    i = int(flips[0])
    return float(brentq(lambda x: iterate(F, x, q) - x - p, xs[i], xs[i + 1], xtol=1e-15))


def check_star_beta(est: RotationEstimate, beta: float, q_max: int,
                    q_threshold: int | None = None,
                    lifting: Lifting | None = None) -> DiophantineReport:
    """Convergents ``p/q`` of the estimate with ``|rho - p/q| < q^-(2+beta)``.

    Finitely many such ``p/q`` can only be judged up to ``q_max``: the verdict
    ``satisfied_up_to_qmax`` means no violation with ``q > q_threshold``.  Gaps
    that clear the bound only after adding the estimate's error are listed as
    inconclusive.  Rational values (exact, or certified by a periodic orbit of
    ``lifting``) bypass the test.
    """
    if not beta > 0.0:
        raise ValueError("beta must be positive")
    if beta >= 1.0:
        warnings.warn(f"beta={beta} outside (0, 1)", BetaOutOfRange, stacklevel=2)
    if q_threshold is None:
        q_threshold = max(1, q_max // 10)
    rho = est.value
    convs = convergents(rho, q_max)
    base = dict(beta=beta, q_max=q_max, q_threshold=q_threshold, error_bound=est.error_bound)

    exact = _as_fraction(rho)
    if exact.denominator <= q_threshold:
        return DiophantineReport(**base, rational="exact",
                                 rational_pq=(exact.numerator, exact.denominator))

    rational, pq, point = "no", None, None
    for p, q in convs:
        if q <= q_threshold and abs(rho - p / q) <= est.error_bound:
            rational, pq = "possible", (p, q)
            if lifting is not None:
                point = certify_periodic_orbit(lifting, p, q)
                if point is not None:
                    return DiophantineReport(**base, rational="certified",
                                             rational_pq=pq, periodic_point=point)
            break

    violations, inconclusive = [], []
    for p, q in convs:
        gap = abs(float(Fraction(p, q) - exact))
        limit = q ** -(2.0 + beta)
        if gap < limit:
            violations.append((p, q, gap))
        elif gap < limit + est.error_bound:
            inconclusive.append((p, q, gap))
    satisfied = not any(q > q_threshold for _, q, _ in violations)
    return DiophantineReport(**base, violations=violations, inconclusive=inconclusive,
                             satisfied_up_to_qmax=satisfied, rational=rational,
                             rational_pq=pq)


def estimate_to_dict(est: RotationEstimate) -> dict:
    return {"rho": est.value, "error": est.error_bound, "iterations": est.iterations, "x0": est.x0}
