"""Covering numbers, thickness numbers and the S-operator.

``covering_number(A, B)`` is the least ``k`` with ``B ⊆ ΔA`` for some
``|Δ| = k``; translators are drawn from ``BA^-1`` since no other translate of
``A`` meets ``B``. ``thickness_number(A, B)`` is the largest size of an
``A``-free subset of ``B`` (no two distinct members with quotient in ``A``),
so ``A`` is ``k``-thick in ``B`` exactly when ``k`` is at least this number.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from ._solvers import (
    exact_independent_set,
    exact_set_cover,
    greedy_independent_set,
    greedy_set_cover,
    rows_to_masks,
)
from .errors import (
    BudgetExhausted,
    CarrierMismatch,
    EmptyCoveringSet,
    EmptyInput,
    MissingIdentity,
    NotSymmetric,
)
from .groups import (
    ESet,
    GSet,
    _same_group,
    act_set,
    bool_from_mask,
    generated_subgroup,
    inverse_set,
    is_symmetric,
    product_set,
    symmetrize,
)

EXACT_LIMIT = 64
# largest number of (k-1)-subsets tried when settling a heuristic cover
MINIMALITY_SEARCH_LIMIT = 200_000


@dataclass(frozen=True)
class CoverWitness:
    k: int
    delta: GSet
    exact: bool
    translators_from: str = "BA^-1"

    def covers(self, A: GSet, B: GSet) -> bool:
        return B <= product_set(self.delta, A)

    def to_json(self) -> dict:
        return {"k": self.k, "delta": self.delta.elements(), "exact": self.exact}


@dataclass(frozen=True)
class ThicknessWitness:
    k: int
    free_set: GSet
    exact: bool

    def to_json(self) -> dict:
        return {"k": self.k, "free_set": self.free_set.elements(), "exact": self.exact}


def _translate_masks(cands: np.ndarray, A: GSet, B: GSet) -> list[int]:
    """For each translator c, the bitmask (over the members of B) of cA ∩ B."""
    G = A.group
    b_idx = B.indices()
    pos = np.full(G.order, -1, dtype=np.int64)
    pos[b_idx] = np.arange(len(b_idx))
    hits = pos[G.mul[np.ix_(cands, A.indices())]]
    M = np.zeros((len(cands), len(b_idx)), dtype=bool)
    rows, cols = np.nonzero(hits >= 0)
    M[rows, hits[rows, cols]] = True
    return rows_to_masks(M)


def covering_number(A: GSet, B: GSet, mode: str = "exact", *,
                    translators: GSet | None = None, strict: bool = False,
                    exact_limit: int = EXACT_LIMIT) -> CoverWitness:
    """Fewest left translates of ``A`` covering ``B``.

    ``mode="exact"`` runs branch-and-bound when ``|B| <= exact_limit`` and
    falls back to greedy (``exact=False``) above it, unless ``strict`` is set,
    in which case the fallback raises :class:`BudgetExhausted`. Passing
    ``translators`` overrides the default candidate set ``BA^-1``.
    """
    _same_group(A.group, B.group)
    G = A.group
    if B.is_empty():
        return CoverWitness(0, G.empty(), True)
    if A.is_empty():
        raise EmptyCoveringSet("cannot cover a nonempty set by translates of the empty set")
    if translators is None:
        cand_set = product_set(B, inverse_set(A))
        source = "BA^-1"
    else:
        cand_set = translators
        source = "given"
    cands = cand_set.indices()
    masks = _translate_masks(cands, A, B)
    universe = (1 << len(B)) - 1
    want_exact = mode == "exact"
    if want_exact and len(B) > exact_limit and strict:
        raise BudgetExhausted(f"|B|={len(B)} exceeds the exact solver limit {exact_limit}")
    if want_exact and len(B) <= exact_limit:
        chosen, exact = exact_set_cover(universe, masks)
        if not exact and strict:
            raise BudgetExhausted("set cover node limit reached")
    else:
        chosen, exact = greedy_set_cover(universe, masks), False
    if chosen is None:
        raise EmptyCoveringSet("the candidate translators do not cover B")
    if want_exact and not exact:
        chosen, exact = _settle_minimality(chosen, masks, universe, len(B), len(A))
    delta = G.from_indices(cands[chosen])
    return CoverWitness(len(chosen), delta, exact, source)


def _settle_minimality(chosen, masks, universe, size_b, size_a):
    """Shrink a heuristic cover by exhaustive search while that search stays small.

    Returns the (possibly smaller) cover and whether it is now known to be minimal.
    """
    while True:
        k = len(chosen)
        if k <= 1 or -(-size_b // size_a) >= k:
            return chosen, True
        if comb(len(masks), k - 1) > MINIMALITY_SEARCH_LIMIT:
            return chosen, False
        smaller = next((list(c) for c in combinations(range(len(masks)), k - 1)
                        if _union(masks[i] for i in c) == universe), None)
        if smaller is None:
            return chosen, True
        chosen = smaller


def _union(masks) -> int:
    out = 0
    for m in masks:
        out |= int(m)
    return out


def thickness_graph(A: GSet, B: GSet) -> tuple[np.ndarray, list[int]]:
    """Members of B and adjacency bitmasks: b_i ~ b_j iff b_i^-1 b_j or b_j^-1 b_i lies in A."""
    _same_group(A.group, B.group)
    G = A.group
    b = B.indices()
    quot = G.mul[np.ix_(G.inv[b], b)]
    in_a = bool_from_mask(A.members, G.order)[quot]
    edge = in_a | in_a.T
    np.fill_diagonal(edge, False)
    return b, rows_to_masks(edge)


def thickness_number(A: GSet, B: GSet, mode: str = "exact", *, strict: bool = False,
                     exact_limit: int = EXACT_LIMIT) -> ThicknessWitness:
    """Largest A-free subset of B (exact), or a greedy lower bound."""
    G = A.group
    if B.is_empty():
        return ThicknessWitness(0, G.empty(), True)
    b, adj = thickness_graph(A, B)
    want_exact = mode == "exact"
    if want_exact and len(b) > exact_limit and strict:
        raise BudgetExhausted(f"|B|={len(b)} exceeds the exact solver limit {exact_limit}")
    if want_exact and len(b) <= exact_limit:
        local, exact = exact_independent_set(adj)
        if not exact and strict:
            raise BudgetExhausted("independent set node limit reached")
    else:
        local, exact = greedy_independent_set(adj), False
    chosen = [int(b[i]) for i in range(len(b)) if local >> i & 1]
    return ThicknessWitness(len(chosen), G.from_indices(chosen), exact)


def is_free(A: GSet, F: GSet) -> bool:
    _, adj = thickness_graph(A, F)
    return not any(adj)


def approximate_constant(A: GSet, **kw) -> CoverWitness:
    """Least k such that A is a k-approximate subgroup (fewest translates covering A²)."""
    if A.is_empty():
        raise EmptyInput("approximate_constant needs a nonempty set")
    if not is_symmetric(A):
        raise NotSymmetric("A must equal its inverse")
    if not A.members & 1:
        raise MissingIdentity("A must contain the identity")
    return covering_number(A, product_set(A, A), "exact", **kw)


def s_operator(Gamma: GSet, A: GSet, B: ESet, m) -> GSet:
    """``{g ∈ <Γ> : m(gAB ∩ AB) > 0}`` with ``AB = act_set(A, B)``."""
    if m.kind != "space" or m.carrier is not B.action:
        raise CarrierMismatch("m must measure the space acted on by the group")
    _same_group(Gamma.group, A.group)
    G = A.group
    H = generated_subgroup(Gamma)
    AB = act_set(A, B)
    if AB.is_empty():
        return G.empty()
    space = B.action
    ab = AB.indices()
    h = H.indices()
    img = space.act[np.ix_(h, ab)]
    in_ab = bool_from_mask(AB.members, space.space_size)[img]
    hit = (in_ab & m._positive[img]).any(axis=1)
    return G.from_indices(h[hit])


@dataclass
class BridgeReport:
    thickness: ThicknessWitness
    cover: CoverWitness
    a_symmetric: bool
    direction_i: dict = field(default_factory=dict)
    direction_ii: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.direction_i.get("ok")) and bool(self.direction_ii.get("ok"))

    def to_json(self) -> dict:
        return {"ok": self.ok, "a_symmetric": self.a_symmetric,
                "thickness": self.thickness.to_json(), "cover": self.cover.to_json(),
                "direction_i": self.direction_i, "direction_ii": self.direction_ii}


def thickness_cover_bridge(A: GSet, B: GSet) -> BridgeReport:
    """Check both directions linking thickness and covering on one pair.

    (i) A maximal A-free subset F of B satisfies ``B ⊆ F·(A ∪ A^-1 ∪ {e})``,
    hence ``B ⊆ F·A`` when A is symmetric and contains e; so ``|F|``
    translates suffice.
    (ii) If k translates of A cover B then ``A^-1 A`` is k-thick in B.

    Otherwise the cover in (i) is by ``A ∪ A^-1 ∪ {e}``; the report also
    records whether translates of A alone would do, which can fail
    (e.g. A = {1} in Z/3).
    """
    th = thickness_number(A, B, "exact", strict=True)
    sym = is_symmetric(A) and bool(A.members & 1)
    AA = symmetrize(A)
    F = th.free_set
    direction_i = {
        "k": th.k,
        "delta": F.elements(),
        "covering_set": "A" if sym else "A|A^-1|e",
        "ok": B <= product_set(F, AA) and F <= B and len(F) <= th.k,
    }
    if not sym and not B.is_empty() and not A.is_empty():
        try:
            within = covering_number(A, B, "exact", translators=B).k <= th.k
        except EmptyCoveringSet:
            within = False
        direction_i["cover_by_A_from_B_within_k"] = within
    if B.is_empty():
        cov = CoverWitness(0, B.group.empty(), True)
    elif A.is_empty():
        cov = CoverWitness(0, B.group.empty(), True)
        direction_ii = {"k": None, "ok": True, "note": "A empty: B not coverable"}
        return BridgeReport(th, cov, sym, direction_i, direction_ii)
    else:
        cov = covering_number(A, B, "exact", strict=True)
    th2 = thickness_number(product_set(inverse_set(A), A), B, "exact", strict=True)
    direction_ii = {"k": cov.k, "thickness_of_AinvA": th2.k,
                    "ok": cov.covers(A, B) and th2.k <= cov.k}
    return BridgeReport(th, cov, sym, direction_i, direction_ii)
