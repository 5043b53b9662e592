"""Graded largeness systems (Massicot-Wagner systems) on a finite group.

Three systems share one interface:

* ``mu``: level 0 is "nonempty", every higher level is "positive mean".
* ``thick``: W is large at level k when the derived set
  ``{g ∈ Γ : gW∩W or g⁻¹W∩W is large at level k-1}`` is thick in Λ.
* ``generic``: the same derived set must cover Λ by finitely many translates.

In a finite group, thickness and finite covering of a nonempty Λ only ask the
derived set to be nonempty; the numbers that carry content are the exact
thickness and covering constants, which :meth:`MWSystem.witness` extracts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor

import numpy as np

from .approx import covering_number, thickness_number
from .errors import CarrierMismatch, DepthExceeded, HypothesisViolated
from .groups import (
    GSet,
    _same_group,
    generated_subgroup,
    inverse_set,
    mask_from_indices,
    product_set,
)

MAX_DEPTH = 6
MAX_MEMO = 10**6
KINDS = ("mu", "thick", "generic")


@dataclass(frozen=True)
class LevelSet:
    W: GSet
    k: int
    derived: GSet


class MWSystem:
    """A graded membership predicate ``member(W, k)`` with memoization.

    Parameters
    ----------
    kind : {"mu", "thick", "generic"}
    lam : GSet
        The set Λ the system is relative to.
    gamma : GSet, optional
        Allowed translators Γ; defaults to the subgroup generated by Λ.
    measure : MeanSpace, optional
        Required for ``kind="mu"``; a mean on the group.
    depth : int
        Highest level that may be queried (at most 6).
    """

    def __init__(self, kind: str, lam: GSet, gamma: GSet | None = None, *,
                 measure=None, depth: int = MAX_DEPTH, max_memo: int = MAX_MEMO):
        if kind not in KINDS:
            raise ValueError(f"unknown system kind {kind!r}")
        if not 0 <= depth <= MAX_DEPTH:
            raise DepthExceeded(f"depth budget {depth} outside 0..{MAX_DEPTH}")
        if kind == "mu":
            if measure is None:
                raise HypothesisViolated("the mu system needs a mean on the group")
            if measure.kind != "group" or measure.carrier is not lam.group:
                raise CarrierMismatch("the mu system needs a mean on the group containing Λ")
        self.kind = kind
        self.lam = lam
        self.group = lam.group
        self.gamma = generated_subgroup(lam) if gamma is None else gamma
        _same_group(self.gamma.group, self.group)
        self.measure = measure
        self.depth = depth
        self.max_memo = max_memo
        self._memo: dict[tuple[int, int], bool] = {}

    def __repr__(self):
        return f"MWSystem({self.kind}, |Λ|={len(self.lam)}, |Γ|={len(self.gamma)}, depth={self.depth})"

    @classmethod
    def mu_system(cls, measure, lam: GSet | None = None, gamma: GSet | None = None, **kw):
        G = measure.carrier
        lam = G.full() if lam is None else lam
        return cls("mu", lam, gamma, measure=measure, **kw)

    @classmethod
    def thick_system(cls, lam: GSet, gamma: GSet | None = None, **kw):
        return cls("thick", lam, gamma, **kw)

    @classmethod
    def generic_system(cls, lam: GSet, gamma: GSet | None = None, **kw):
        return cls("generic", lam, gamma, **kw)

    def relative_to(self, lam: GSet, gamma: GSet | None = None) -> "MWSystem":
        """The same kind of system in a new Λ (and Γ), with a fresh memo."""
        return MWSystem(self.kind, lam, gamma, measure=self.measure,
                        depth=self.depth, max_memo=self.max_memo)

    def restrict(self, lam0: GSet) -> "MWSystem":
        """The system in Λ₀ ⊆ Λ relative to ``Γ ∩ Λ₀⁻¹Λ₀``."""
        gamma0 = self.gamma & product_set(inverse_set(lam0), lam0)
        return self.relative_to(lam0, gamma0)

    def to_json(self) -> dict:
        return {"system": self.kind, "depth_budget": self.depth}

    # -- membership -------------------------------------------------------------

    def member(self, W: GSet, k: int) -> bool:
        return self._member(W.members, k)

    def _member(self, mask: int, k: int) -> bool:
        if k < 0:
            raise ValueError("levels start at 0")
        if k > self.depth:
            raise DepthExceeded(f"level {k} exceeds depth budget {self.depth}")
        if mask == 0:
            return False
        if k == 0:
            return True
        if self.kind == "mu":
            return self.measure.in_domain(GSet(self.group, mask)) and self.measure.positive(mask)
        key = (mask, k)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if self.lam.is_empty():
            value = True
        else:
            value = self._derived_mask(mask, k) != 0
        if len(self._memo) >= self.max_memo:
            raise DepthExceeded(f"memo exceeded {self.max_memo} entries")
        self._memo[key] = value
        return value

    def _derived_mask(self, mask: int, k: int) -> int:
        G = self.group
        W = GSet(G, mask)
        WW = product_set(W, inverse_set(W))
        cands = (WW & self.gamma)
        if k == 1 and self.kind != "mu":
            # level 0 only asks for nonempty overlaps, which g ∈ WW⁻¹ guarantees
            return cands.members
        w_idx = W.indices()
        keep = []
        for g in cands.indices():
            g = int(g)
            gw = mask_from_indices(G.mul[g, w_idx], G.order) & mask
            if self._member(gw, k - 1):
                keep.append(g)
                continue
            giw = mask_from_indices(G.mul[int(G.inv[g]), w_idx], G.order) & mask
            if self._member(giw, k - 1):
                keep.append(g)
        return mask_from_indices(keep, G.order)

    def derived_set(self, W: GSet, k: int) -> LevelSet:
        """``{g ∈ Γ : gW∩W ∈ ℓ_{k-1} or g⁻¹W∩W ∈ ℓ_{k-1}}``.

        Only ``g ∈ Γ ∩ WW⁻¹`` can qualify; every other g gives an empty overlap.
        """
        if k < 1:
            raise ValueError("derived sets start at level 1")
        if k > self.depth:
            raise DepthExceeded(f"level {k} exceeds depth budget {self.depth}")
        _same_group(W.group, self.group)
        return LevelSet(W, k, GSet(self.group, self._derived_mask(W.members, k)))

    def witness(self, W: GSet, k: int) -> dict:
        """Membership of W at level k together with the constant behind it."""
        is_member = self.member(W, k)
        out = {"member": is_member, "level": k}
        if k == 0 or not is_member:
            return out
        if self.kind == "mu":
            out["measure"] = self.measure(W)
            return out
        derived = self.derived_set(W, k).derived
        if self.kind == "thick":
            th = thickness_number(derived, self.lam)
            out.update(thickness=th.k, exact=th.exact)
        else:
            cov = covering_number(derived, self.lam)
            out.update(covering=cov.k, exact=cov.exact)
        return out


# -- quantitative thickness from a mean ---------------------------------------------

@dataclass
class MuThicknessReport:
    bound: int
    thickness: int
    exact: bool
    bound_half: int
    thickness_half: int
    exact_half: bool
    s_mu: GSet
    s_half: GSet
    readings_with_b: dict | None = None

    @property
    def ok(self) -> bool:
        return self.thickness <= self.bound and self.thickness_half <= self.bound_half

    def to_json(self) -> dict:
        out = {
            "ok": self.ok,
            "floor_bound": self.bound, "thickness": self.thickness, "exact": self.exact,
            "ceil_half_bound": self.bound_half, "thickness_half": self.thickness_half,
            "exact_half": self.exact_half,
            "s_mu": self.s_mu.elements(), "s_half": self.s_half.elements(),
        }
        if self.readings_with_b is not None:
            out["readings_with_b"] = self.readings_with_b
        return out


def _overlap_measures(mu, W: GSet, cands: np.ndarray) -> list[Fraction]:
    G = W.group
    w_idx = W.indices()
    return [mu.measure_mask(mask_from_indices(G.mul[int(g), w_idx], G.order) & W.members)
            for g in cands]


def mu_thickness_bound_check(lam: GSet, A: GSet, C: GSet, mu, W: GSet,
                             B: GSet | None = None) -> MuThicknessReport:
    """Compare exact thickness constants with the mean-based bounds.

    ``S_μ = {g ∈ Λ⁻¹Λ : μ(gW∩W) > 0}`` should be ``⌊μ(C)/μ(W)⌋``-thick in Λ, and
    ``{g ∈ Λ⁻¹Λ : μ(gW∩W) ≥ μ(W)²/(2μ(C))}`` should be ``⌈2μ(C)/μ(W)⌉``-thick.
    If ``B`` is given, the same bounds computed with ``μ(B)`` are reported too.
    """
    if mu.kind != "group" or mu.carrier is not lam.group:
        raise CarrierMismatch("μ must be a mean on the group")
    if not product_set(lam, A) <= C:
        raise HypothesisViolated("ΛA ⊆ C fails")
    mA, mC = mu(A), mu(C)
    if not 0 < mA <= mC:
        raise HypothesisViolated("0 < μ(A) ≤ μ(C) fails")
    if not W <= A:
        raise HypothesisViolated("W ⊆ A fails")
    mW = mu(W)
    if mW <= 0:
        raise HypothesisViolated("μ(W) > 0 fails")
    G = lam.group
    quot = product_set(inverse_set(lam), lam)
    cands = quot.indices()
    overlaps = _overlap_measures(mu, W, cands)
    s_mu = G.from_indices([int(g) for g, v in zip(cands, overlaps) if v > 0])
    threshold = mW * mW / (2 * mC)
    s_half = G.from_indices([int(g) for g, v in zip(cands, overlaps) if v >= threshold])
    th = thickness_number(s_mu, lam)
    th_half = thickness_number(s_half, lam)
    report = MuThicknessReport(
        bound=floor(mC / mW), thickness=th.k, exact=th.exact,
        bound_half=ceil(2 * mC / mW), thickness_half=th_half.k, exact_half=th_half.exact,
        s_mu=s_mu, s_half=s_half)
    if B is not None:
        mB = mu(B)
        report.readings_with_b = {
            "floor_bound": floor(mB / mW), "ceil_half_bound": ceil(2 * mB / mW),
            "holds": th.k <= floor(mB / mW),
        }
    return report
