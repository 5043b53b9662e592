"""The basic descent, the recursive chain and the finite quotient model.

``basic_descent`` searches the family of intersections of translates of A for
a set W on which ``f(k) = min m(A'B)`` (over family members large at level k)
nearly stops decreasing, and returns ``D = derived(W, k) ∪ {e}`` with
``Dⁿ ⊆ S_Γ(AB)``. The family is built breadth-first under a budget and is
closed on demand: whenever an overlap ``gW∩W`` with g ∈ D undercuts the
current minimum it joins the family and the selection is redone. The
resulting certificate is checked independently by :mod:`mwmethod.verify`.

``recursive_chain`` iterates the descent with Λ := D_i and Γ := ⟨D_i⟩ until
the sets ``D_i^{k_i}`` stop shrinking; ``extract_model`` turns the terminal
subgroup into a homomorphism onto a finite (discrete) quotient.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .approx import CoverWitness, covering_number, s_operator
from .errors import (
    BudgetExhausted,
    CarrierMismatch,
    ExponentCapExceeded,
    HypothesisViolated,
    NotStabilized,
    NotSubgroup,
)
from .groups import (
    ESet,
    GSet,
    act_set,
    bool_from_mask,
    generated_subgroup,
    indices_from_mask,
    inverse_set,
    is_subgroup,
    is_symmetric,
    mask_from_indices,
    power_set,
    product_set,
)
from .measure import format_rational
from .systems import MWSystem

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
NOTES = ("finiteness hypotheses on the means hold automatically for finite carriers",)


@dataclass(frozen=True)
class DescentParams:
    """Target power ``n`` and search budget.

    ``epsilon = 1/n`` and ``lambda_sq = 1 + epsilon`` (the square of the
    growth threshold, which is irrational in general and never formed).
    """

    n: int
    max_translators: int = 4
    max_candidates: int = 256
    max_rounds: int = 64
    n_jobs: int = 1
    exact_only: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise HypothesisViolated("n must be a positive integer")
        if self.max_translators < 1 or self.max_candidates < 1:
            raise HypothesisViolated("search budgets must be positive")

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, self.n)

    @property
    def lambda_sq(self) -> Fraction:
        return 1 + self.epsilon

    def with_n(self, n: int) -> "DescentParams":
        return DescentParams(n, self.max_translators, self.max_candidates,
                             self.max_rounds, self.n_jobs, self.exact_only)


def log_bound(ratio: Fraction, lambda_sq: Fraction) -> int:
    """Largest integer k with ``lambda^k <= ratio``, i.e. ``lambda_sq^k <= ratio^2``."""
    if ratio < 1:
        raise ValueError("ratio must be at least 1")
    target = ratio * ratio
    k, power = 0, Fraction(1)
    while power * lambda_sq <= target:
        power *= lambda_sq
        k += 1
    return k


@dataclass
class DescentCertificate:
    lam: GSet
    gamma: GSet
    A: GSet
    B: ESet
    n: int
    system: dict
    k: int
    W: GSet
    translators: tuple
    f_values: list
    f_witnesses: list
    D: GSet
    cover_witness: CoverWitness
    power_check: bool
    k_bound: int
    m_B: Fraction
    m_AB: Fraction
    m_WB: Fraction

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, self.n)

    @property
    def lambda_sq(self) -> Fraction:
        return 1 + self.epsilon

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "descent",
            "inputs": {"lambda": self.lam.elements(), "gamma": self.gamma.elements(),
                       "A": self.A.elements(), "B": self.B.elements()},
            "n": self.n,
            "epsilon": format_rational(self.epsilon),
            "lambda_sq": format_rational(self.lambda_sq),
            "system": dict(self.system),
            "k": self.k,
            "W": self.W.elements(),
            "W_translators": list(self.translators),
            "f_values": [format_rational(v) for v in self.f_values],
            "f_witnesses": [list(t) for t in self.f_witnesses],
            "D": self.D.elements(),
            "cover_witness": self.cover_witness.to_json(),
            "power_check": self.power_check,
            "k_bound": self.k_bound,
            "m_B": format_rational(self.m_B),
            "m_AB": format_rational(self.m_AB),
            "m_WB": format_rational(self.m_WB),
            "notes": list(NOTES),
        }


class _Family:
    """Intersections ``A ∩ t1A ∩ ... ∩ trA`` keyed by bitmask, with their scores."""

    def __init__(self, A: GSet, B: ESet, m, n_jobs: int):
        self.A = A
        self.B = B
        self.m = m
        self.n_jobs = n_jobs
        self.sets: dict[int, tuple] = {}
        self.score: dict[int, Fraction] = {}
        G = A.group
        self._translate_cache: dict[int, int] = {}
        self._a_idx = A.indices()
        self._G = G

    def translate_A(self, g: int) -> int:
        hit = self._translate_cache.get(g)
        if hit is None:
            hit = mask_from_indices(self._G.mul[g, self._a_idx], self._G.order)
            self._translate_cache[g] = hit
        return hit

    def _measure(self, mask: int) -> Fraction:
        WB = act_set(GSet(self._G, mask), self.B)
        if not self.m.in_domain(WB):
            raise HypothesisViolated("A'B is outside the domain of m for a family member A'")
        return self.m.measure_mask(WB.members)

    def add_many(self, items: list[tuple[int, tuple]]) -> list[int]:
        fresh = []
        for mask, tr in items:
            if mask and mask not in self.sets:
                self.sets[mask] = tr
                fresh.append(mask)
        if self.n_jobs > 1 and len(fresh) > 1:
            with ThreadPoolExecutor(self.n_jobs) as pool:
                scores = list(pool.map(self._measure, fresh))
        else:
            scores = [self._measure(x) for x in fresh]
        self.score.update(zip(fresh, scores))
        return fresh


def _lex_key(mask: int, size: int) -> tuple:
    return tuple(int(x) for x in indices_from_mask(mask, size))


def _build_family(fam: _Family, translators: list[int], params: DescentParams) -> None:
    A = fam.A
    fam.add_many([(A.members, ())])
    level = [A.members]
    size = A.group.order
    for _ in range(params.max_translators - 1):
        proposals = {}
        for mask in level:
            tr = fam.sets[mask]
            last = tr[-1] if tr else -1
            for g in translators:
                if g <= last:
                    continue
                new = mask & fam.translate_A(g)
                if new and new not in fam.sets and new not in proposals:
                    proposals[new] = tr + (g,)
        if not proposals:
            break
        added = fam.add_many(list(proposals.items()))
        added.sort(key=lambda x: (fam.score[x], len(fam.sets[x]), _lex_key(x, size)))
        level = added[:params.max_candidates]


def prune_translators(A: GSet, tr) -> tuple:
    """Sorted, identity-free translators with every redundant one dropped."""
    G = A.group
    a_idx = A.indices()
    tr = sorted({int(t) for t in tr} - {0})
    masks = {t: mask_from_indices(G.mul[t, a_idx], G.order) for t in tr}

    def meet(ts):
        out = A.members
        for t in ts:
            out &= masks[t]
        return out

    target = meet(tr)
    for t in list(tr):
        rest = [u for u in tr if u != t]
        if meet(rest) == target:
            tr = rest
    return tuple(tr)


def _merge_translators(tr: tuple, g: int, G) -> tuple:
    """Translators of ``gW ∩ W`` when W = A ∩ ⋂ tA over ``tr``."""
    out = set(tr)
    out.add(g)
    out.update(G.op(g, t) for t in tr)
    out.discard(0)
    return tuple(sorted(out))


def basic_descent(lam: GSet, gamma: GSet, A: GSet, B: ESet, m, sys: MWSystem,
                  params: DescentParams) -> DescentCertificate:
    """Produce a certified symmetric ``D ⊆ Γ ∩ AA⁻¹`` with ``Dⁿ ⊆ S_Γ(AB)``."""
    G = A.group
    if m.kind != "space" or m.carrier is not B.action:
        raise CarrierMismatch("m must be a mean on the space acted on")
    if B.action.group is not G or lam.group is not G or gamma.group is not G:
        raise CarrierMismatch("all sets must live over the same group")
    if not (gamma.members & 1 and is_symmetric(gamma)):
        raise HypothesisViolated("Γ must be symmetric and contain the identity")
    if A.is_empty():
        raise HypothesisViolated("A must be nonempty")
    if not m.in_domain(B):
        raise HypothesisViolated("B is outside the domain of m")
    m_B = m.measure_mask(B.members)
    AB = act_set(A, B)
    if not m.in_domain(AB):
        raise HypothesisViolated("AB is outside the domain of m")
    m_AB = m.measure_mask(AB.members)
    if not 0 < m_B <= m_AB:
        raise HypothesisViolated("0 < m(B) <= m(AB) fails")
    lsq = params.lambda_sq
    depth = sys.depth
    for j in range(depth + 1):
        if not sys.member(A, j):
            raise HypothesisViolated(f"A is not large at level {j}")

    translators = [int(g) for g in (gamma & product_set(A, inverse_set(A))).indices() if g != 0]
    fam = _Family(A, B, m, params.n_jobs)
    _build_family(fam, translators, params)
    size = G.order

    rounds = 0
    while True:
        rounds += 1
        if rounds > params.max_rounds:
            raise BudgetExhausted("family closure did not settle within the round budget")
        order = sorted(fam.sets, key=lambda x: (fam.score[x], len(fam.sets[x]), _lex_key(x, size)))
        f_vals, f_wit = [], []
        k = None
        for j in range(depth + 1):
            best = next(x for x in order if sys._member(x, j))
            f_vals.append(fam.score[best])
            f_wit.append(fam.sets[best])
            if j >= 1 and f_vals[j] ** 2 < lsq * f_vals[j - 1] ** 2:
                k = j
                break
        if k is None:
            raise BudgetExhausted(f"f did not stall below depth {depth}")
        fk = f_vals[k]
        choices = [x for x in fam.sets
                   if fam.score[x] ** 2 < lsq * fk * fk and sys._member(x, k)]
        W_mask = min(choices, key=lambda x: (len(fam.sets[x]), _lex_key(x, size)))
        W = GSet(G, W_mask)
        derived = sys.derived_set(W, k).derived
        # closure: every overlap used by the argument must be in the family
        w_idx = W.indices()
        pending = []
        for g in derived.indices():
            g = int(g)
            for h in (g, G.inverse(g)):
                ov = mask_from_indices(G.mul[h, w_idx], size) & W_mask
                if sys._member(ov, k - 1):
                    if ov not in fam.sets:
                        pending.append((ov, _merge_translators(fam.sets[W_mask], h, G)))
                    break
        pending = [p for p in pending if p[0] not in fam.sets]
        if not pending:
            break
        worst = {}
        for ov, tr in pending:
            worst.setdefault(ov, tr)
        fam.add_many(sorted(worst.items(), key=lambda kv: _lex_key(kv[0], size)))

    D = derived | G.identity_set()
    S = s_operator(gamma, A, B, m)
    power_check = power_set(D, params.n) <= S
    if lam.is_empty():
        cover = CoverWitness(0, G.empty(), True)
    else:
        cover = covering_number(D, lam, "exact", strict=params.exact_only)
    WB = act_set(W, B)
    cert = DescentCertificate(
        lam=lam, gamma=gamma, A=A, B=B, n=params.n, system=sys.to_json(),
        k=k, W=W, translators=prune_translators(A, fam.sets[W_mask]), f_values=f_vals,
        f_witnesses=[prune_translators(A, t) for t in f_wit],
        D=D, cover_witness=cover, power_check=power_check,
        k_bound=log_bound(m_AB / m_B, lsq), m_B=m_B, m_AB=m_AB,
        m_WB=m.measure_mask(WB.members),
    )
    logger.debug("descent: family of %d sets, %d closure rounds", len(fam.sets), rounds)
    if cert.k > cert.k_bound:
        logger.warning("descent level k=%d exceeds floor(log_lambda(m(AB)/m(B)))=%d "
                       "(m(AB)/m(B) = %s is below lambda)", cert.k, cert.k_bound, m_AB / m_B)
    if not power_check:
        logger.warning("power check failed; the certificate will not verify")
    return cert


# -- the recursive chain ------------------------------------------------------------------

@dataclass
class ChainStep:
    D: GSet
    k: int
    S: GSet
    power: GSet
    exponent_cap: int | None
    descent: DescentCertificate | None = None

    def to_json(self) -> dict:
        return {"D": self.D.elements(), "k": self.k, "s_set": self.S.elements(),
                "power": self.power.elements(), "exponent_cap": self.exponent_cap,
                "descent": None if self.descent is None else self.descent.to_json()}


@dataclass
class ChainCertificate:
    lam: GSet
    n: int
    steps: list
    termination: str
    depth_budget: int
    approximate_constant: CoverWitness | None = None

    @property
    def terminal_power(self) -> GSet:
        return self.steps[-1].power

    @property
    def nonincreasing(self) -> bool:
        return all(b.power <= a.power for a, b in zip(self.steps, self.steps[1:]))

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "chain",
            "lambda": self.lam.elements(),
            "n": self.n,
            "termination": self.termination,
            "depth_budget": self.depth_budget,
            "nonincreasing": self.nonincreasing,
            "approximate_constant": (None if self.approximate_constant is None
                                     else self.approximate_constant.to_json()),
            "steps": [s.to_json() for s in self.steps],
        }


def least_exponent(S: GSet, D: GSet, cap: int) -> tuple[int, GSet]:
    """Least k ≥ 1 with ``S ⊆ D^k``, searching up to ``cap``."""
    P, k = D, 1
    while not S <= P:
        nxt = product_set(P, D)
        if nxt == P or k >= cap:
            raise ExponentCapExceeded(f"no exponent up to {cap} puts S inside D^k")
        P, k = nxt, k + 1
    return k, P


def recursive_chain(lam: GSet, A: GSet, B: ESet, m, sys: MWSystem, n: int,
                    depth_budget: int, params: DescentParams | None = None) -> ChainCertificate:
    """Iterate the descent from ``D_0 = Λ``, ``k_0 = n`` until ``D_i^{k_i}`` stabilizes."""
    if not (lam.members & 1 and is_symmetric(lam)):
        raise HypothesisViolated("Λ must be symmetric and contain the identity")
    params = params or DescentParams(n)
    S0 = s_operator(lam, A, B, m)
    P0 = power_set(lam, n)
    if not S0 <= P0:
        raise HypothesisViolated("S(AB) is not contained in Λⁿ")
    try:
        approx = covering_number(lam, product_set(lam, lam), "exact")
    except BudgetExhausted:
        approx = None
    steps = [ChainStep(lam, n, S0, P0, None)]
    termination = "budget_exhausted"
    for i in range(depth_budget):
        cur = steps[-1]
        gamma_i = generated_subgroup(cur.D)
        sys_i = sys.relative_to(cur.D, gamma_i)
        cert = basic_descent(cur.D, gamma_i, A, B, m, sys_i, params.with_n(2 * cur.k))
        cur.descent = cert
        D_next = cert.D
        S_next = s_operator(D_next, A, B, m)
        cap = 2 * n * (i + 3)
        k_next, P_next = least_exponent(S_next, D_next, cap)
        steps.append(ChainStep(D_next, k_next, S_next, P_next, cap))
        if P_next == cur.power:
            termination = "stabilized"
            break
    chain = ChainCertificate(lam, n, steps, termination, depth_budget, approx)
    if not chain.nonincreasing:
        logger.warning("the chain of powers D_i^k_i is not nonincreasing")
    return chain


# -- the finite quotient model ------------------------------------------------------------

@dataclass
class QuotientModel:
    H: GSet
    K: GSet
    kernel: GSet
    coset_reps: list
    hom: np.ndarray
    table: np.ndarray
    lam: GSet
    n: int
    chain: ChainCertificate | None = None

    @property
    def index(self) -> int:
        return len(self.coset_reps)

    @property
    def K_normal(self) -> bool:
        return self.kernel == self.K

    def transform(self, elements) -> np.ndarray:
        """Coset index of each element of H (−1 outside H)."""
        return self.hom[np.asarray(elements, dtype=np.int64)]

    def conditions(self) -> dict:
        lam_n = power_set(self.lam, self.n)
        image = sorted({int(x) for x in self.hom[self.lam.indices()]})
        return {
            "image_of_lambda_finite": len(image) <= self.index,
            "image_of_lambda_size": len(image),
            "preimage_of_identity_in_lambda_n": self.kernel <= lam_n,
        }

    def to_json(self) -> dict:
        H_idx = self.H.indices()
        cosets = [[] for _ in self.coset_reps]
        for x in H_idx:
            cosets[int(self.hom[x])].append(int(x))
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "model",
            "lambda": self.lam.elements(),
            "n": self.n,
            "H": self.H.elements(),
            "K": self.K.elements(),
            "kernel": self.kernel.elements(),
            "K_normal": self.K_normal,
            "index": self.index,
            "cosets": cosets,
            "hom": {str(int(x)): int(self.hom[x]) for x in H_idx},
            "quotient_table": self.table.tolist(),
            "conditions": self.conditions(),
            "chain": None if self.chain is None else self.chain.to_json(),
        }


def normal_core(K: GSet, H: GSet) -> GSet:
    """Largest subgroup of K normal in H: the intersection of the conjugates hKh⁻¹."""
    G = K.group
    k_idx = K.indices()
    core = K.members
    for h in H.indices():
        conj = G.mul[G.mul[int(h), k_idx], G.inv[int(h)]]
        core &= mask_from_indices(conj, G.order)
    return GSet(G, core)


def quotient(H: GSet, N: GSet) -> tuple[list[int], np.ndarray, np.ndarray]:
    """Left cosets of a normal subgroup N in H, the quotient map and its table."""
    G = H.group
    hom = np.full(G.order, -1, dtype=np.int64)
    n_idx = N.indices()
    reps = []
    for x in H.indices():
        if hom[x] < 0:
            hom[G.mul[int(x), n_idx]] = len(reps)
            reps.append(int(x))
    r = np.array(reps)
    table = hom[G.mul[np.ix_(r, r)]]
    return reps, hom, table


def extract_model(chain: ChainCertificate, lam: GSet, n: int) -> QuotientModel:
    """Quotient of ⟨Λ⟩ by (the normal core of) the terminal subgroup of a stabilized chain."""
    if chain.termination != "stabilized":
        raise NotStabilized("the chain did not stabilize; raise the depth budget")
    K = chain.terminal_power
    if not is_subgroup(K):
        raise NotSubgroup("terminal set of a stabilized chain is not a subgroup")
    if not K <= power_set(lam, n):
        raise NotSubgroup("terminal subgroup is not contained in Λⁿ")
    H = generated_subgroup(lam)
    N = normal_core(K, H)
    reps, hom, table = quotient(H, N)
    G = lam.group
    h_idx = H.indices()
    lhs = hom[G.mul[np.ix_(h_idx, h_idx)]]
    rhs = table[np.ix_(hom[h_idx], hom[h_idx])]
    if not np.array_equal(lhs, rhs):
        raise NotSubgroup("coset map is not a homomorphism; kernel is not normal")
    if not bool_from_mask(N.members, G.order)[np.flatnonzero(hom == 0)].all():
        raise NotSubgroup("fiber over the identity coset differs from the kernel")
    return QuotientModel(H, K, N, reps, hom, table, lam, n, chain)
