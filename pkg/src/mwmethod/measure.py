"""Invariant means with exact rational values.

A :class:`MeanSpace` puts a nonnegative rational weight on every element of a
carrier (the group itself, or the point set of an action) and measures a set
by summing weights. Such a set function is monotone and modular on any lattice
of sets, so the same object serves as a content space (all subsets) and as a
mean space on an explicit lattice.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .errors import CarrierMismatch, NotInDomain, ValidationError, ZeroMeasure
from .groups import (ActionTable, ESet, GroupTable, GSet, act_point, indices_from_mask,
                     translate)


def parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValidationError("weights", "use exact rationals ('p/q' strings), not floats")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValidationError("weights", f"cannot parse {value!r} as a rational") from exc


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class MeanSpace:
    """A finitely additive, translation/action invariant mean.

    Parameters
    ----------
    carrier : GroupTable or ActionTable
        Measure subsets of the group (left translations act) or of the acted-on set.
    weights : sequence of rationals, optional
        One weight per element; ``None`` gives the counting measure.
    lattice : sequence of bitmasks, optional
        Restrict the domain to an explicit lattice of sets.
    check : bool
        Validate nonnegativity, invariance and lattice closure on construction.
    """

    def __init__(self, carrier, weights: Sequence | None = None,
                 lattice: Sequence[int] | None = None, check: bool = True):
        if isinstance(carrier, GroupTable):
            self.kind = "group"
            self.size = carrier.order
        elif isinstance(carrier, ActionTable):
            self.kind = "space"
            self.size = carrier.space_size
        else:
            raise CarrierMismatch(f"unsupported carrier {carrier!r}")
        self.carrier = carrier
        if weights is None:
            self.weights = (Fraction(1),) * self.size
            self.counting = True
        else:
            if len(weights) != self.size:
                raise ValidationError("weights", f"expected {self.size} weights, got {len(weights)}")
            self.weights = tuple(parse_rational(w) for w in weights)
            self.counting = all(w == 1 for w in self.weights)
        self._denom = lcm(*(w.denominator for w in self.weights))
        nums = [w.numerator * (self._denom // w.denominator) for w in self.weights]
        self._nums = np.array(nums, dtype=object if max(nums) * self.size >= 2**62 else np.int64)
        self._positive = np.array([w > 0 for w in self.weights], dtype=bool)
        self._uniform = len(set(self.weights)) == 1
        self.lattice = None if lattice is None else frozenset(int(m) for m in lattice)
        if check:
            problems = validate_space(self)
            if problems:
                raise ValidationError("measure", "; ".join(problems))

    @classmethod
    def counting_measure(cls, carrier, **kw) -> "MeanSpace":
        return cls(carrier, None, **kw)

    @classmethod
    def normalized(cls, carrier) -> "MeanSpace":
        size = carrier.order if isinstance(carrier, GroupTable) else carrier.space_size
        return cls(carrier, [Fraction(1, size)] * size)

    @property
    def domain_descriptor(self) -> str:
        return "all_subsets" if self.lattice is None else "explicit_lattice"

    def __repr__(self):
        kind = "counting" if self.counting else "weighted"
        return f"MeanSpace({kind}, {self.kind}, {self.domain_descriptor})"

    def _check_carrier(self, X):
        if self.kind == "group":
            if not isinstance(X, GSet) or X.group is not self.carrier:
                raise CarrierMismatch("set is not a subset of the measured group")
        elif not isinstance(X, ESet) or X.action is not self.carrier:
            raise CarrierMismatch("set is not a subset of the measured space")

    def in_domain(self, X) -> bool:
        return self.lattice is None or X.members in self.lattice

    def __call__(self, X) -> Fraction:
        return mu(self, X)

    def measure_mask(self, mask: int) -> Fraction:
        """Measure of a raw bitmask over the carrier, without domain checks."""
        if mask == 0:
            return Fraction(0)
        if self._uniform:
            return self.weights[0] * mask.bit_count()
        total = self._nums[indices_from_mask(mask, self.size)].sum()
        return Fraction(int(total), self._denom)

    def positive(self, mask: int) -> bool:
        """Whether the set has positive measure."""
        if mask == 0:
            return False
        if self._uniform:
            return self.weights[0] > 0
        return bool(self._positive[indices_from_mask(mask, self.size)].any())


def mu(space: MeanSpace, X) -> Fraction:
    """Sum of weights over the members of ``X``."""
    space._check_carrier(X)
    if not space.in_domain(X):
        raise NotInDomain("set is outside the explicit lattice")
    return space.measure_mask(X.members)


def validate_space(space: MeanSpace) -> list[str]:
    problems = []
    if any(w < 0 for w in space.weights):
        problems.append("negative weight")
    bad = invariance_witness(space)
    if bad is not None:
        problems.append(f"weight not invariant: g={bad[0]}, x={bad[1]}")
    if space.lattice is not None:
        problems.extend(_lattice_problems(space.lattice))
    return problems


def invariance_witness(space: MeanSpace):
    """First (g, x) with weight(g.x) != weight(x), or None."""
    if space.kind == "group":
        table = space.carrier.mul
    else:
        table = space.carrier.act
    ids = {w: i for i, w in enumerate(sorted(set(space.weights)))}
    cls = np.array([ids[w] for w in space.weights])
    bad = cls[table] != cls[None, :]
    if not bad.any():
        return None
    g, x = np.argwhere(bad)[0]
    return int(g), int(x)


def _lattice_problems(lattice) -> list[str]:
    out = []
    if 0 not in lattice:
        out.append("lattice misses the empty set")
    members = sorted(lattice)
    for i, a in enumerate(members):
        for b in members[i:]:
            if a | b not in lattice or a & b not in lattice:
                out.append(f"lattice not closed for masks {a}, {b}")
                return out
    return out


# -- axiom reports -------------------------------------------------------------

@dataclass
class AxiomReport:
    checks: dict = field(default_factory=dict)
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": dict(self.checks),
                "counterexamples": list(self.counterexamples)}


def check_mean_axioms(space: MeanSpace, samples: int = 200, seed: int = 0) -> AxiomReport:
    """Spot-check the mean-space axioms on ``samples`` random pairs of domain sets.

    Monotonicity is tested on nested pairs (the second set is a random superset
    of the first), modularity on independent pairs. Invariance is checked on
    every (g, x).
    """
    rng = random.Random(seed)
    report = AxiomReport()
    report.checks["empty_is_zero"] = space.measure_mask(0) == 0
    report.checks["nonnegative"] = all(w >= 0 for w in space.weights)
    bad = invariance_witness(space)
    report.checks["invariance"] = bad is None
    if bad is not None:
        report.counterexamples.append({"axiom": "invariance", "g": bad[0], "x": bad[1]})
    if space.lattice is not None:
        problems = _lattice_problems(space.lattice)
        report.checks["lattice_closed"] = not problems
        report.counterexamples.extend({"axiom": "lattice", "detail": p} for p in problems)
        pool = sorted(space.lattice)

        def draw():
            return rng.choice(pool)

        def draw_super(a):
            sup = [b for b in pool if a & ~b == 0]
            return rng.choice(sup)
    else:
        full = (1 << space.size) - 1

        def draw():
            return rng.getrandbits(space.size)

        def draw_super(a):
            return a | (rng.getrandbits(space.size) & full)

    mono = modular = True
    m = space.measure_mask
    for _ in range(samples):
        a, b = draw(), draw()
        if m(a | b) + m(a & b) != m(a) + m(b):
            modular = False
            report.counterexamples.append({"axiom": "modularity", "A": a, "B": b})
        sup = draw_super(a)
        if m(a) > m(sup):
            mono = False
            report.counterexamples.append({"axiom": "monotonicity", "A": a, "B": sup})
    report.checks["modularity"] = modular
    report.checks["monotonicity"] = mono
    return report


# -- the overlap inequality ------------------------------------------------------

@dataclass
class OverlapVerdict:
    m_Z: Fraction
    m_g1: Fraction
    m_g2: Fraction
    m_g1g2: Fraction
    eps1: Fraction
    eps2: Fraction
    hypotheses_strict: bool
    holds: bool
    boundary: bool
    note: str = ("the source states the conclusion for g1*g1; "
                 "it is evaluated here for the product g1*g2")

    @property
    def threshold(self) -> Fraction:
        return (1 - self.eps1 - self.eps2) * self.m_Z

    def to_json(self) -> dict:
        return {
            "m_Z": format_rational(self.m_Z), "m_g1Z_cap_Z": format_rational(self.m_g1),
            "m_g2Z_cap_Z": format_rational(self.m_g2), "m_g1g2Z_cap_Z": format_rational(self.m_g1g2),
            "eps1": format_rational(self.eps1), "eps2": format_rational(self.eps2),
            "hypotheses_strict": self.hypotheses_strict, "holds": self.holds,
            "boundary": self.boundary, "note": self.note,
        }


def _overlap(m: MeanSpace, g: int, Z):
    if isinstance(Z, GSet):
        gz = translate(g, Z)
    else:
        gz = act_point(g, Z)
    return m.measure_mask(gz.members & Z.members)


def overlap_inequality_check(m: MeanSpace, Z, g1: int, g2: int,
                             eps1=None, eps2=None) -> OverlapVerdict:
    """Test ``m(g1 g2 Z ∩ Z) > (1 - eps1 - eps2) m(Z)``.

    Without explicit ``eps1``/``eps2`` the exact deficits
    ``1 - m(gi Z ∩ Z)/m(Z)`` are used, which makes both hypotheses equalities;
    the verdict then reports whether the conclusion landed on the boundary.
    With explicit epsilons, ``hypotheses_strict`` says whether
    ``m(gi Z ∩ Z) > (1 - epsi) m(Z)`` held for both i.
    """
    m._check_carrier(Z)
    mz = m.measure_mask(Z.members)
    if mz == 0:
        raise ZeroMeasure("m(Z) must be positive")
    G = m.carrier if m.kind == "group" else m.carrier.group
    m1, m2 = _overlap(m, g1, Z), _overlap(m, g2, Z)
    m12 = _overlap(m, G.op(g1, g2), Z)
    d1, d2 = 1 - m1 / mz, 1 - m2 / mz
    if eps1 is None and eps2 is None:
        e1, e2, strict = d1, d2, False
    else:
        e1 = d1 if eps1 is None else parse_rational(eps1)
        e2 = d2 if eps2 is None else parse_rational(eps2)
        strict = m1 > (1 - e1) * mz and m2 > (1 - e2) * mz
    bound = (1 - e1 - e2) * mz
    return OverlapVerdict(mz, m1, m2, m12, e1, e2, strict,
                          holds=m12 > bound, boundary=m12 == bound)
