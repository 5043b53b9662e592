"""Independent re-check of descent, chain and model certificates.

Everything here is recomputed from the raw multiplication/action tables and
the weight vectors, with plain Python sets; nothing is imported from the
modules that produce certificates. Each check becomes a :class:`Clause`.
Informational clauses are reported but do not affect the verdict.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

SCHEMA_VERSION = 1
NOTES = ["finiteness hypotheses on the means hold automatically for finite carriers"]
BRUTE_FORCE_LIMIT = 200_000


@dataclass
class Clause:
    name: str
    ok: bool
    detail: str = ""
    informational: bool = False

    def to_json(self) -> dict:
        out = {"clause": self.name, "ok": bool(self.ok)}
        if self.detail:
            out["detail"] = self.detail
        if self.informational:
            out["informational"] = True
        return out


@dataclass
class Verdict:
    kind: str
    clauses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.clauses if not c.informational)

    def failed(self) -> list:
        return [c for c in self.clauses if not c.ok and not c.informational]

    def to_json(self) -> dict:
        return {"kind": self.kind, "ok": self.ok, "clauses": [c.to_json() for c in self.clauses]}


def _q(text) -> Fraction | None:
    try:
        return Fraction(text)
    except (TypeError, ValueError, ZeroDivisionError):
        return None


class _Tables:
    """Raw data of a scenario: tables, weights, and lattices as Python objects."""

    def __init__(self, ctx):
        self.mul = ctx.group.mul.tolist()
        self.inv = ctx.group.inv.tolist()
        self.order = len(self.mul)
        self.act = ctx.action.act.tolist()
        self.w_space = list(ctx.m.weights)
        self.lat_space = ctx.m.lattice
        mu = getattr(ctx, "mu", None)
        self.w_group = None if mu is None else list(mu.weights)
        self.lat_group = None if mu is None else mu.lattice

    def prod(self, X, Y) -> set:
        mul = self.mul
        return {mul[x][y] for x in X for y in Y}

    def power(self, X, n: int) -> set:
        P = set(X)
        for _ in range(n - 1):
            P = self.prod(P, X)
        return P

    def inverse(self, X) -> set:
        return {self.inv[x] for x in X}

    def left(self, g: int, X) -> set:
        row = self.mul[g]
        return {row[x] for x in X}

    def closure(self, X) -> set:
        S = set(X) | self.inverse(X) | {0}
        frontier = list(S)
        while frontier:
            nxt = []
            for a in frontier:
                for b in list(S):
                    for c in (self.mul[a][b], self.mul[b][a]):
                        if c not in S:
                            S.add(c)
                            nxt.append(c)
            frontier = nxt
        return S

    def act_on(self, X, B) -> set:
        act = self.act
        return {act[g][e] for g in X for e in B}

    def m(self, E) -> Fraction:
        return sum((self.w_space[e] for e in E), Fraction(0))

    def in_space_domain(self, E) -> bool:
        return self.lat_space is None or sum(1 << e for e in E) in self.lat_space

    def mu(self, X) -> Fraction:
        return sum((self.w_group[x] for x in X), Fraction(0))

    def s_set(self, gamma, AB) -> set:
        act = self.act
        return {g for g in self.closure(gamma)
                if any(act[g][e] in AB and self.w_space[act[g][e]] > 0 for e in AB)}


class _Levels:
    """Graded membership, evaluated straight from the recursive definition."""

    def __init__(self, T: _Tables, kind: str, lam, gamma):
        self.T, self.kind = T, kind
        self.lam, self.gamma = set(lam), set(gamma)
        self.memo: dict = {}

    def member(self, W: frozenset, k: int) -> bool:
        if not W:
            return False
        if k == 0:
            return True
        if self.kind == "mu":
            T = self.T
            in_dom = T.lat_group is None or sum(1 << x for x in W) in T.lat_group
            return in_dom and T.mu(W) > 0
        key = (W, k)
        if key not in self.memo:
            self.memo[key] = (not self.lam) or bool(self.derived(W, k))
        return self.memo[key]

    def derived(self, W: frozenset, k: int) -> set:
        T = self.T
        out = set()
        for g in self.gamma:
            for h in (g, T.inv[g]):
                ov = frozenset(T.left(h, W) & W)
                if ov and self.member(ov, k - 1):
                    out.add(g)
                    break
        return out


def _translates_meet(T: _Tables, A: set, tr) -> frozenset:
    out = set(A)
    for t in tr:
        out &= T.left(t, A)
    return frozenset(out)


def _canonical_translators(T: _Tables, A: set, tr) -> bool:
    if not isinstance(tr, list) or any(not isinstance(t, int) for t in tr):
        return False
    if tr != sorted(set(tr)) or 0 in tr or any(not 0 <= t < T.order for t in tr):
        return False
    full = _translates_meet(T, A, tr)
    return all(_translates_meet(T, A, [u for u in tr if u != t]) != full for t in tr)


def _log_bound(ratio: Fraction, lsq: Fraction) -> int:
    k = 0
    while lsq ** (k + 1) <= ratio * ratio:
        k += 1
    return k


def _cover_clauses(T: _Tables, prefix: str, A: set, B: set, wit) -> list:
    """A witness {k, delta, exact} for covering B by left translates of A."""
    out = []
    try:
        k, delta, exact = int(wit["k"]), list(wit["delta"]), bool(wit["exact"])
    except (KeyError, TypeError, ValueError):
        return [Clause(prefix + "_shape", False, "malformed cover witness")]
    if type(wit["exact"]) is not bool or type(wit["k"]) is not int:
        return [Clause(prefix + "_shape", False, "malformed cover witness")]
    out.append(Clause(prefix + "_size", len(set(delta)) == k == len(delta) and delta == sorted(delta)))
    out.append(Clause(prefix + "_covers", B <= T.prod(set(delta), A)))
    cands = T.prod(B, T.inverse(A))
    out.append(Clause(prefix + "_translators_intrinsic", set(delta) <= cands))
    # minimality claim: certified by counting or by brute force when small
    smaller_exists = None
    if k <= 1:
        smaller_exists = False
    else:
        combos = 1
        for i in range(k - 1):
            combos = combos * (len(cands) - i) // (i + 1)
        if -(-len(B) // max(len(A), 1)) >= k:
            smaller_exists = False
        elif combos <= BRUTE_FORCE_LIMIT:
            cand_sets = {c: T.left(c, A) & B for c in sorted(cands)}
            smaller_exists = any(B <= set().union(*(cand_sets[c] for c in combo))
                                 for combo in itertools.combinations(sorted(cands), k - 1))
    if smaller_exists is None:
        out.append(Clause(prefix + "_exact_claim", True, "minimality not rechecked (too large)",
                          informational=True))
    else:
        # the flag must state minimality whenever it is decidable at this size
        out.append(Clause(prefix + "_exact_claim", exact is not smaller_exists,
                          f"claimed exact={exact}, smaller cover exists={smaller_exists}"))
    return out


# -- descent ------------------------------------------------------------------------------

def _verify_descent(T: _Tables, cert: dict, lam: set, gamma: set, A: set, B: set, n: int,
                    system: dict) -> list:
    C = []
    add = C.append
    add(Clause("schema", cert.get("schema_version") == SCHEMA_VERSION and cert.get("kind") == "descent"
               and cert.get("notes") == NOTES))
    inp = cert.get("inputs", {})
    add(Clause("inputs_match", inp.get("lambda") == sorted(lam) and inp.get("gamma") == sorted(gamma)
               and inp.get("A") == sorted(A) and inp.get("B") == sorted(B)))
    eps, lsq = _q(cert.get("epsilon")), _q(cert.get("lambda_sq"))
    add(Clause("params", cert.get("n") == n and eps == Fraction(1, n) and lsq == 1 + Fraction(1, n),
               f"n={cert.get('n')} expected {n}"))
    lsq = 1 + Fraction(1, n)
    add(Clause("system", cert.get("system") == system))
    kind, depth = system["system"], system["depth_budget"]
    levels = _Levels(T, kind, lam, gamma)

    add(Clause("hyp_gamma_symmetric", 0 in gamma and T.inverse(gamma) == gamma))
    AB = T.act_on(A, B)
    mB, mAB = T.m(B), T.m(AB)
    add(Clause("hyp_measures", 0 < mB <= mAB and T.in_space_domain(B) and T.in_space_domain(AB)))
    add(Clause("m_B", _q(cert.get("m_B")) == mB))
    add(Clause("m_AB", _q(cert.get("m_AB")) == mAB))

    k = cert.get("k")
    if type(k) is not int or not 1 <= k <= depth:
        add(Clause("k_range", False, f"k={k!r} outside 1..{depth}"))
        return C
    fA = frozenset(A)
    add(Clause("hyp_A_large", all(levels.member(fA, j) for j in range(k + 1))))

    f_raw, f_wit = cert.get("f_values", []), cert.get("f_witnesses", [])
    f = [_q(v) for v in f_raw]
    ok_len = len(f) == k + 1 == len(f_wit) and all(v is not None for v in f)
    add(Clause("f_length", ok_len, f"{len(f)} values for k={k}"))
    if not ok_len:
        return C
    for j, (fj, tr) in enumerate(zip(f, f_wit)):
        canon = _canonical_translators(T, A, tr)
        Wj = _translates_meet(T, A, tr) if canon else frozenset()
        good = (canon and levels.member(Wj, j) and T.m(T.act_on(Wj, B)) == fj
                and T.in_space_domain(T.act_on(Wj, B)) and mB <= fj <= mAB)
        add(Clause(f"f_witness_{j}", good))
    add(Clause("f_nondecreasing", all(a <= b for a, b in zip(f, f[1:]))))
    add(Clause("f_stall", f[k] ** 2 < lsq * f[k - 1] ** 2))
    add(Clause("k_least", all(f[j] ** 2 >= lsq * f[j - 1] ** 2 for j in range(1, k))))

    tr = cert.get("W_translators")
    canon = _canonical_translators(T, A, tr)
    W = _translates_meet(T, A, tr) if canon else frozenset()
    add(Clause("W_translators", canon and cert.get("W") == sorted(W)))
    WB = T.act_on(W, B)
    mWB = T.m(WB)
    add(Clause("W_large", bool(W) and levels.member(W, k)))
    add(Clause("m_WB", _q(cert.get("m_WB")) == mWB))
    add(Clause("W_threshold", mWB ** 2 < lsq * f[k] ** 2))

    D_claim = cert.get("D")
    D = levels.derived(W, k) | {0} if W else {0}
    add(Clause("D_derived", D_claim == sorted(D)))
    D = set(D_claim) if isinstance(D_claim, list) and all(
        isinstance(x, int) and 0 <= x < T.order for x in D_claim) else D
    AAinv = T.prod(A, T.inverse(A))
    add(Clause("D_shape", 0 in D and T.inverse(D) == D and D <= (gamma & AAinv)))

    overlaps = {g: T.m(T.act_on({g}, WB) & WB) for g in D}
    add(Clause("D_overlap", all(v * lsq > mWB for v in overlaps.values()),
               "m(gWB∩WB) > m(WB)/(1+ε) for every g in D"))
    S = T.s_set(gamma, AB)
    Dn = T.power(D, n)
    inside = Dn <= S
    add(Clause("power_check", inside, f"{len(Dn - S)} elements of D^n outside S"))
    add(Clause("power_check_field", cert.get("power_check") is inside))
    slack = 1 - n * Fraction(1, n)
    add(Clause("power_overlap", all(T.m(T.act_on({g}, WB) & WB) > slack * mWB for g in Dn),
               "m(gWB∩WB) > (1−nε)m(WB) for g in D^n"))

    kb = _log_bound(mAB / mB, lsq) if mB > 0 and mAB >= mB else None
    add(Clause("k_bound_field", cert.get("k_bound") == kb, f"recomputed {kb}"))
    if kb is not None:
        add(Clause("k_within_provable_bound", k <= kb + 1, f"k={k}, floor(log)+1={kb + 1}"))
        add(Clause("k_within_stated_bound", k <= kb, f"k={k}, floor(log)={kb}", informational=True))
    C.extend(_cover_clauses(T, "cover", D, lam, cert.get("cover_witness")))
    return C


# -- chain --------------------------------------------------------------------------------

def _as_elems(T: _Tables, x) -> set | None:
    if isinstance(x, list) and all(isinstance(v, int) and 0 <= v < T.order for v in x):
        return set(x)
    return None


def _verify_chain(T: _Tables, cert: dict, ctx, system: dict) -> list:
    C = []
    add = C.append
    lam, A, B, n = set(ctx.lam.elements()), set(ctx.A.elements()), set(ctx.B.elements()), ctx.n
    add(Clause("schema", cert.get("schema_version") == SCHEMA_VERSION and cert.get("kind") == "chain"))
    add(Clause("inputs_match", cert.get("lambda") == sorted(lam) and cert.get("n") == n))
    add(Clause("lambda_symmetric", 0 in lam and T.inverse(lam) == lam))
    if cert.get("approximate_constant") is not None:
        C.extend(_cover_clauses(T, "approximate_constant", lam, T.prod(lam, lam),
                                cert["approximate_constant"]))
    AB = T.act_on(A, B)
    steps = cert.get("steps")
    if not isinstance(steps, list) or not steps:
        add(Clause("steps", False, "no steps"))
        return C
    budget = cert.get("depth_budget")
    add(Clause("depth_budget", type(budget) is int and 0 <= budget and len(steps) - 1 <= budget))
    powers = []
    for i, st in enumerate(steps):
        D, k = _as_elems(T, st.get("D")), st.get("k")
        if D is None or type(k) is not int or k < 1:
            add(Clause(f"step{i}_shape", False))
            return C
        if i == 0:
            add(Clause("step0_start", D == lam and k == n and st.get("exponent_cap") is None))
        else:
            cap = 2 * n * (i + 2)
            add(Clause(f"step{i}_cap", st.get("exponent_cap") == cap and k <= cap))
        add(Clause(f"step{i}_D_symmetric", 0 in D and T.inverse(D) == D))
        S = T.s_set(D, AB)
        add(Clause(f"step{i}_s_set", st.get("s_set") == sorted(S)))
        P = T.power(D, k)
        add(Clause(f"step{i}_power", st.get("power") == sorted(P)))
        add(Clause(f"step{i}_S_in_power", S <= P))
        if i > 0 and k > 1:
            add(Clause(f"step{i}_k_least", not S <= T.power(D, k - 1)))
        powers.append(P)
        desc = st.get("descent")
        if i < len(steps) - 1:
            if not isinstance(desc, dict):
                add(Clause(f"step{i}_descent", False, "missing descent certificate"))
                continue
            gamma = T.closure(D)
            sub = _verify_descent(T, desc, D, gamma, A, B, 2 * k, system)
            for c in sub:
                c.name = f"step{i}_descent_{c.name}"
            C.extend(sub)
            nxt = _as_elems(T, steps[i + 1].get("D"))
            add(Clause(f"step{i}_next_is_descent_D", nxt is not None and desc.get("D") == sorted(nxt)))
            if nxt is not None:
                add(Clause(f"step{i}_squared_inclusion", T.power(nxt, 2 * k) <= S))
        else:
            add(Clause(f"step{i}_terminal", desc is None))
    noninc = all(b <= a for a, b in zip(powers, powers[1:]))
    add(Clause("nonincreasing", noninc))
    add(Clause("nonincreasing_field", cert.get("nonincreasing") is noninc))
    equal_at = [i for i in range(1, len(powers)) if powers[i] == powers[i - 1]]
    term = cert.get("termination")
    if term == "stabilized":
        add(Clause("termination", equal_at == [len(powers) - 1]))
    elif term == "budget_exhausted":
        add(Clause("termination", not equal_at and len(steps) - 1 == budget))
    else:
        add(Clause("termination", False, f"unknown termination {term!r}"))
    return C


# -- model --------------------------------------------------------------------------------

def _verify_model(T: _Tables, cert: dict, ctx, system: dict) -> list:
    C = []
    add = C.append
    lam, n = set(ctx.lam.elements()), ctx.n
    add(Clause("schema", cert.get("schema_version") == SCHEMA_VERSION and cert.get("kind") == "model"))
    add(Clause("inputs_match", cert.get("lambda") == sorted(lam) and cert.get("n") == n))
    chain = cert.get("chain")
    if not isinstance(chain, dict):
        add(Clause("chain", False, "model carries no chain"))
        return C
    sub = _verify_chain(T, chain, ctx, system)
    for c in sub:
        c.name = "chain_" + c.name
    C.extend(sub)
    add(Clause("chain_stabilized", chain.get("termination") == "stabilized"))
    K = _as_elems(T, cert.get("K"))
    last = chain.get("steps", [{}])[-1]
    D_T, k_T = _as_elems(T, last.get("D")), last.get("k")
    terminal = T.power(D_T, k_T) if D_T is not None and type(k_T) is int and k_T >= 1 else None
    add(Clause("K_terminal", K is not None and K == terminal))
    if K is None:
        return C
    add(Clause("K_subgroup", 0 in K and T.inverse(K) == K and T.prod(K, K) == K))
    lam_n = T.power(lam, n)
    add(Clause("K_in_lambda_n", K <= lam_n))
    H = T.closure(lam)
    add(Clause("H", cert.get("H") == sorted(H)))
    N = set(K)
    for h in H:
        N &= {T.mul[T.mul[h][x]][T.inv[h]] for x in K}
    add(Clause("kernel_normal_core", cert.get("kernel") == sorted(N)))
    add(Clause("K_normal_field", cert.get("K_normal") is (N == K)))
    cosets = cert.get("cosets")
    hom_raw = cert.get("hom")
    try:
        hom = {int(x): v for x, v in hom_raw.items()}
        cosets = [list(c) for c in cosets]
    except (AttributeError, TypeError, ValueError):
        add(Clause("hom_shape", False))
        return C
    flat = [x for c in cosets for x in c]
    part = sorted(flat) == sorted(H) and len(flat) == len(set(flat))
    add(Clause("cosets_partition_H", part))
    add(Clause("cosets_are_kernel_cosets", part and all(c and set(c) == T.left(c[0], N) for c in cosets)))
    add(Clause("hom_matches_cosets", set(hom) == H and all(hom.get(x) == i for i, c in enumerate(cosets)
                                                            for x in c)))
    add(Clause("index", cert.get("index") == len(cosets) and len(H) == len(cosets) * len(N)))
    table = cert.get("quotient_table")
    reps = [c[0] for c in cosets] if part else []
    good_table = (isinstance(table, list) and len(table) == len(reps)
                  and all(isinstance(r, list) and len(r) == len(reps) for r in table)
                  and all(table[a][b] == hom.get(T.mul[reps[a]][reps[b]])
                          for a in range(len(reps)) for b in range(len(reps))))
    add(Clause("quotient_table", good_table))
    if good_table and set(hom) == H:
        Hs = sorted(H)
        if len(Hs) <= 512:
            pairs = itertools.product(Hs, Hs)
        else:
            rng = random.Random(0)
            pairs = ((rng.choice(Hs), rng.choice(Hs)) for _ in range(100_000))
        add(Clause("homomorphism", all(hom[T.mul[x][y]] == table[hom[x]][hom[y]] for x, y in pairs)))
    else:
        add(Clause("homomorphism", False))
    image = {hom.get(x) for x in lam}
    fiber = {x for x in H if hom.get(x) == hom.get(0)}
    expected = {"image_of_lambda_finite": len(image) <= len(cosets),
                "image_of_lambda_size": len(image),
                "preimage_of_identity_in_lambda_n": fiber <= lam_n}
    add(Clause("lie_model_conditions", cert.get("conditions") == expected
               and all(v for key, v in expected.items() if key != "image_of_lambda_size")))
    add(Clause("identity_fiber_is_kernel", fiber == N))
    return C


def verify_certificate(cert, context) -> Verdict:
    """Check a certificate (object or its JSON form) against the scenario it came from.

    ``context`` needs ``group``, ``action``, ``m`` (mean on the acted-on set),
    ``mu`` (mean on the group, for the mu system), ``lam``, ``gamma``, ``A``,
    ``B``, ``n`` and ``system`` ({"system", "depth_budget"}).
    """
    if hasattr(cert, "to_json"):
        cert = cert.to_json()
    kind = cert.get("kind") if isinstance(cert, dict) else None
    verdict = Verdict(str(kind))
    T = _Tables(context)
    system = dict(context.system)
    try:
        if kind == "descent":
            verdict.clauses = _verify_descent(
                T, cert, set(context.lam.elements()), set(context.gamma.elements()),
                set(context.A.elements()), set(context.B.elements()), context.n, system)
        elif kind == "chain":
            verdict.clauses = _verify_chain(T, cert, context, system)
        elif kind == "model":
            verdict.clauses = _verify_model(T, cert, context, system)
        else:
            verdict.clauses = [Clause("kind", False, f"unknown certificate kind {kind!r}")]
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        verdict.clauses.append(Clause("well_formed", False, f"{type(exc).__name__}: {exc}"))
    return verdict
