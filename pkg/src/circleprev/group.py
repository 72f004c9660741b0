"""Reflections ``v -> (1 - lam) v + lam w`` and the group they generate.

Group elements are kept in the flat normal form ``v -> (1 - delta) v + sum a_i w_i``
with ``sum a_i = delta``.  Composition only concatenates and rescales terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    DegenerateComposition,
    IdentityHasAllFixedPoints,
    RegularityMismatch,
    SchemaError,
)
from .lifting import (
    DEFAULT_GRID,
    Lifting,
    combine,
    lifting_from_dict,
    lifting_to_dict,
    validate_diffeo,
)

SUM_TOL = 1e-12


@dataclass(frozen=True)
class Reflection:
    lam: float
    witness: Lifting

    def __post_init__(self):
        lam = float(self.lam)
        if lam == 1.0:
            raise ValueError("reflection parameter must differ from 1")
        if not math.isfinite(lam):
            raise ValueError("reflection parameter must be finite")
        object.__setattr__(self, "lam", lam)

    def __call__(self, v: Lifting) -> Lifting:
        return combine([1.0 - self.lam, self.lam], [v, self.witness])

    def as_element(self) -> "GroupElement":
        if self.lam == 0.0:
            return GroupElement.identity()
        return GroupElement(self.lam, ((self.lam, self.witness),))


@dataclass(frozen=True)
class GroupElement:
    """``psi(v) = (1 - delta) v + sum a_i w_i`` with ``sum a_i = delta != 1``."""

    delta: float
    terms: tuple = ()

    def __post_init__(self):
        delta = float(self.delta)
        if delta == 1.0:
            raise DegenerateComposition("delta == 1 is not a group element")
        terms = tuple((float(a), w) for a, w in self.terms)
        total = math.fsum(a for a, _ in terms)
        scale = max(1.0, abs(delta), *(abs(a) for a, _ in terms))
        if abs(total - delta) > SUM_TOL * scale:
            raise ValueError(f"term weights sum to {total}, expected delta={delta}")
        rs = {w.r for _, w in terms}
        if len(rs) > 1:
            raise RegularityMismatch("witnesses have different regularity r")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(0.0, ())

    @property
    def witnesses(self):
        return [w for _, w in self.terms]

    def __call__(self, v: Lifting) -> Lifting:
        return apply(self, v)

    def is_identity(self, tol: float = 1e-12) -> bool:
        """``delta == 0`` and the weighted witnesses cancel coefficient-wise."""
        if self.delta != 0.0:
            return False
        if not self.terms:
            return True
        # sum a_i w_i with sum a_i = 0 is a periodic function; compare against zero
        probe = Lifting.identity(self.terms[0][1].r)
        return apply(self, probe).isclose(probe, tol)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return _compose_elements(self, other)


def apply(g: GroupElement, v: Lifting) -> Lifting:
    if not g.terms and g.delta == 0.0:
        return v
    weights = [1.0 - g.delta] + [a for a, _ in g.terms]
    return combine(weights, [v] + [w for _, w in g.terms])


def _compose_elements(g: GroupElement, h: GroupElement) -> GroupElement:
    """``g o h``: ``delta = 1 - (1 - delta_g)(1 - delta_h)``."""
    delta = g.delta + h.delta - g.delta * h.delta
    if delta == 1.0:
        raise DegenerateComposition(
            f"composite of delta={g.delta} and delta={h.delta} has delta == 1"
        )
    scale = 1.0 - g.delta
    terms = tuple((scale * b, u) for b, u in h.terms) + g.terms
    return GroupElement(delta, terms)


def compose(g: Reflection, h: Reflection) -> GroupElement:
    """``psi_{lam,w} o psi_{sig,u}`` with ``delta = lam + sig - lam sig``.

    Terms are ``[(delta - lam, u), (lam, w)]``.
    """
    lam, sig = g.lam, h.lam
    delta = lam + sig - lam * sig
    if delta == 1.0:
        raise DegenerateComposition(f"lam={lam}, sigma={sig} give delta == 1")
    terms = []
    if delta - lam != 0.0:
        terms.append((delta - lam, h.witness))
    if lam != 0.0:
        terms.append((lam, g.witness))
    return GroupElement(delta, tuple(terms))


def compose_many(gs: Sequence[Reflection]) -> GroupElement:
    """``gs[0] o gs[1] o ... o gs[-1]`` in normal form."""
    if not gs:
        raise ValueError("need at least one reflection")
    out = gs[-1].as_element()
    for g in reversed(gs[:-1]):
        out = _compose_elements(g.as_element(), out)
    return out


def inverse(r: Reflection) -> Reflection:
    """``psi_{lam,w}^{-1} = psi_{lam/(lam-1), w}``."""
    return Reflection(r.lam / (r.lam - 1.0), r.witness)


def fixed_point(g: GroupElement) -> Lifting:
    """Centre of mass ``(1/delta) sum a_i w_i`` of the witnesses."""
    if g.delta == 0.0:
        raise IdentityHasAllFixedPoints("delta == 0 fixes every lifting or none")
    return combine([a / g.delta for a, _ in g.terms], [w for _, w in g.terms])


def as_reflection(g: GroupElement) -> Reflection:
    """Collapse ``g`` (delta != 0) to the single reflection ``psi_{delta, fixed_point(g)}``."""
    return Reflection(g.delta, fixed_point(g))


def solve_transitivity(v_from: Lifting, v_to: Lifting, lam: float) -> Reflection:
    """Reflection with parameter ``lam`` carrying ``v_from`` to ``v_to``."""
    if lam in (0.0, 1.0):
        raise ValueError("lam must differ from 0 and 1")
    return Reflection(lam, combine([1.0 / lam, 1.0 - 1.0 / lam], [v_to, v_from]))


def is_conditional(g: GroupElement, grid_points: int = DEFAULT_GRID) -> bool:
    """True when every witness is a certified diffeomorphism lift."""
    return all(validate_diffeo(w, grid_points).is_diffeo for _, w in g.terms)


# -- JSON ------------------------------------------------------------------

def element_from_dict(doc) -> GroupElement:
    if not isinstance(doc, dict) or "delta" not in doc:
        raise SchemaError("group element needs 'delta'")
    terms = doc.get("terms", [])
    if not isinstance(terms, list):
        raise SchemaError("terms must be a list")
    parsed = []
    for t in terms:
        if not isinstance(t, dict) or "a" not in t or "w" not in t:
            raise SchemaError("each term needs 'a' and 'w'")
        a = t["a"]
        if isinstance(a, bool) or not isinstance(a, (int, float)) or not math.isfinite(a):
            raise SchemaError("term weight must be a finite number")
        parsed.append((float(a), lifting_from_dict(t["w"])))
    delta = doc["delta"]
    if isinstance(delta, bool) or not isinstance(delta, (int, float)) or not math.isfinite(delta):
        raise SchemaError("delta must be a finite number")
    try:
        return GroupElement(float(delta), tuple(parsed))
    except (ValueError, ArithmeticError) as exc:
        raise SchemaError(str(exc)) from exc


def element_to_dict(g: GroupElement) -> dict:
    return {
        "delta": g.delta,
        "terms": [{"a": a, "w": lifting_to_dict(w)} for a, w in g.terms],
    }


def reflection_from_dict(doc) -> Reflection:
    if not isinstance(doc, dict) or "lambda" not in doc or "w" not in doc:
        raise SchemaError("reflection needs 'lambda' and 'w'")
    lam = doc["lambda"]
    if isinstance(lam, bool) or not isinstance(lam, (int, float)) or not math.isfinite(lam) or lam == 1:
        raise SchemaError("lambda must be a finite number other than 1")
    return Reflection(float(lam), lifting_from_dict(doc["w"]))
