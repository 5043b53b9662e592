"""Finite groups, finite group actions and subsets encoded as bitmasks.

Elements of a group of order ``n`` are the integers ``0..n-1`` with ``0`` the
identity. A subset is a Python ``int`` used as a bitmask, so unions,
intersections, inclusion tests and cardinalities are word-parallel. Products
and translates go through the fully materialized Cayley table with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    EmptyInput,
    GroupMismatch,
    NoIdentity,
    NoInverse,
    NonAssociative,
    ValidationError,
)

MAX_ORDER = 4096
EXHAUSTIVE_ASSOC_LIMIT = 256


# -- bitmask helpers ---------------------------------------------------------

def mask_from_indices(indices, size: int) -> int:
    arr = np.zeros(size, dtype=bool)
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size:
        arr[idx] = True
    return mask_from_bool(arr)


def mask_from_bool(arr) -> int:
    packed = np.packbits(np.asarray(arr, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def indices_from_mask(mask: int, size: int) -> np.ndarray:
    if mask == 0:
        return np.empty(0, dtype=np.int64)
    raw = mask.to_bytes((size + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return np.flatnonzero(bits[:size])


def bool_from_mask(mask: int, size: int) -> np.ndarray:
    raw = mask.to_bytes((size + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return bits[:size].astype(bool)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# -- groups ------------------------------------------------------------------

class GroupTable:
    """A finite group given by its Cayley table.

    ``mul[a, b]`` is the index of ``a*b``; ``inv[a]`` the index of ``a^-1``.
    Instances are immutable once built and may be shared between threads.
    """

    def __init__(self, mul, *, name: str = "G", generator_labels=None,
                 family: tuple = ("cayley_table",), validate: bool = True,
                 coords=None):
        mul = np.array(mul, dtype=np.int32)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
            raise ValidationError("mul", "must be a non-empty square table")
        order = mul.shape[0]
        if order > MAX_ORDER:
            raise ValidationError("order", f"{order} exceeds cap {MAX_ORDER}")
        if mul.min() < 0 or mul.max() >= order:
            raise ValidationError("mul", "entries out of range")
        identity = _find_identity(mul)
        if identity != 0:
            # relabel so that element 0 is the identity
            perm = np.arange(order)
            perm[0], perm[identity] = identity, 0
            mul = perm[mul[np.ix_(perm, perm)]]
        inv = _find_inverses(mul)
        if validate:
            _check_associative(mul)
        mul.setflags(write=False)
        inv.setflags(write=False)
        self.order = order
        self.mul = mul
        self.inv = inv
        self.identity = 0
        self.name = name
        self.family = family
        self.generator_labels = list(generator_labels or [])
        self._coords = coords
        self._full = (1 << order) - 1

    def __repr__(self):
        return f"GroupTable({self.name}, order={self.order})"

    # element helpers
    def op(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def inverse(self, a: int) -> int:
        return int(self.inv[a])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def label(self, name: str) -> int:
        for lab, el in self.generator_labels:
            if lab == name:
                return el
        raise ValidationError("element", f"unknown generator label {name!r}")

    def encode(self, spec) -> int:
        """Turn an element spec (index, generator label, or coordinates) into an index."""
        if isinstance(spec, bool):
            raise ValidationError("element", f"bad element spec {spec!r}")
        if isinstance(spec, int):
            if self.family[0] == "cyclic":
                return spec % self.order
            if not 0 <= spec < self.order:
                raise ValidationError("element", f"{spec} out of range for {self.name}")
            return spec
        if isinstance(spec, str):
            if spec.endswith("^-1"):
                return self.inverse(self.label(spec[:-3]))
            return self.label(spec)
        if isinstance(spec, (list, tuple)):
            if self._coords is None:
                raise ValidationError("element", f"{self.name} has no coordinate encoding")
            return self._coords(tuple(spec))
        raise ValidationError("element", f"bad element spec {spec!r}")

    # subset constructors
    def gset(self, elements: Iterable = ()) -> "GSet":
        idx = [self.encode(int(e) if isinstance(e, np.integer) else e) for e in elements]
        return GSet(self, mask_from_indices(idx, self.order))

    def from_indices(self, indices) -> "GSet":
        return GSet(self, mask_from_indices(indices, self.order))

    def empty(self) -> "GSet":
        return GSet(self, 0)

    def full(self) -> "GSet":
        return GSet(self, self._full)

    def identity_set(self) -> "GSet":
        return GSet(self, 1)


def _find_identity(mul: np.ndarray) -> int:
    n = mul.shape[0]
    ar = np.arange(n)
    for e in range(n):
        if np.array_equal(mul[e], ar) and np.array_equal(mul[:, e], ar):
            return e
    raise NoIdentity("no two-sided identity in table")


def _find_inverses(mul: np.ndarray) -> np.ndarray:
    hits = mul == 0
    if not (hits.sum(axis=1) == 1).all():
        raise NoInverse("some element has no unique right inverse")
    inv = hits.argmax(axis=1).astype(np.int32)
    if not (mul[inv, np.arange(mul.shape[0])] == 0).all():
        raise NoInverse("right inverse is not a left inverse")
    return inv


def _check_associative(mul: np.ndarray, seed: int = 0) -> None:
    n = mul.shape[0]
    if n <= EXHAUSTIVE_ASSOC_LIMIT:
        for a in range(n):
            left = mul[mul[a]]          # (ab)c as table over (b, c)
            right = mul[a][mul]         # a(bc)
            if not np.array_equal(left, right):
                b, c = np.argwhere(left != right)[0]
                raise NonAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})")
        return
    rng = np.random.default_rng(seed)
    remaining = 10 * n * n
    while remaining > 0:
        m = min(remaining, 1 << 20)
        a, b, c = rng.integers(0, n, size=(3, m))
        bad = mul[mul[a, b], c] != mul[a, mul[b, c]]
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonAssociative(f"({a[i]}*{b[i]})*{c[i]} != {a[i]}*({b[i]}*{c[i]})")
        remaining -= m


# -- families ----------------------------------------------------------------

def cyclic(N: int) -> GroupTable:
    if N < 1:
        raise ValidationError("N", "must be positive")
    ar = np.arange(N)
    mul = np.add.outer(ar, ar) % N
    labels = [("g", 1 % N)]
    return GroupTable(mul, name=f"C{N}", generator_labels=labels,
                      family=("cyclic", N), validate=False,
                      coords=lambda t: int(t[0]) % N)


def direct_product(G1: GroupTable, G2: GroupTable) -> GroupTable:
    n1, n2 = G1.order, G2.order
    if n1 * n2 > MAX_ORDER:
        raise ValidationError("order", f"{n1 * n2} exceeds cap {MAX_ORDER}")
    i = np.arange(n1 * n2)
    a, b = np.divmod(i, n2)
    mul = G1.mul[np.ix_(a, a)].astype(np.int64) * n2 + G2.mul[np.ix_(b, b)]
    labels = [(f"{lab}1", el * n2) for lab, el in G1.generator_labels]
    labels += [(f"{lab}2", el) for lab, el in G2.generator_labels]

    def coords(t):
        if len(t) != 2:
            raise ValidationError("element", f"expected a pair, got {t!r}")
        x, y = (G.encode(list(c) if isinstance(c, (list, tuple)) else c)
                for G, c in zip((G1, G2), t))
        return x * n2 + y

    return GroupTable(mul, name=f"{G1.name}x{G2.name}", generator_labels=labels,
                      family=("direct_product", G1.family, G2.family),
                      validate=False, coords=coords)


def dihedral(m: int) -> GroupTable:
    """Symmetries of the regular m-gon; ``r^i s^j`` has index ``i + m*j``."""
    if m < 1:
        raise ValidationError("m", "must be positive")
    idx = np.arange(2 * m)
    i, j = idx % m, idx // m
    sign = 1 - 2 * j[:, None]
    rot = (i[:, None] + sign * i[None, :]) % m
    ref = (j[:, None] + j[None, :]) % 2
    mul = rot + m * ref
    labels = [("r", 1 % m), ("s", m)]
    return GroupTable(mul, name=f"D{m}", generator_labels=labels,
                      family=("dihedral", m), validate=False,
                      coords=lambda t: int(t[0]) % m + m * (int(t[1]) % 2))


def heisenberg_mod(p: int) -> GroupTable:
    """Upper unitriangular 3x3 matrices over Z/p, indexed lexicographically by (a, b, c).

    (a, b, c) is the matrix with a, b on the superdiagonal and c in the corner.
    """
    if p < 2:
        raise ValidationError("p", "must be at least 2")
    n = p ** 3
    if n > MAX_ORDER:
        raise ValidationError("order", f"{n} exceeds cap {MAX_ORDER}")
    idx = np.arange(n)
    a, b, c = idx // (p * p), (idx // p) % p, idx % p
    na = (a[:, None] + a[None, :]) % p
    nb = (b[:, None] + b[None, :]) % p
    nc = (c[:, None] + c[None, :] + a[:, None] * b[None, :]) % p
    mul = na * p * p + nb * p + nc
    labels = [("x", p * p), ("y", p), ("z", 1)]

    def coords(t):
        x, y, z = (int(v) % p for v in t)
        return x * p * p + y * p + z

    return GroupTable(mul, name=f"Heis{p}", generator_labels=labels,
                      family=("heisenberg", p), validate=False, coords=coords)


def cayley_table(raw) -> GroupTable:
    """Validate a raw table ``{"order": N, "mul": [[...]]}`` (or a bare nested list)."""
    if isinstance(raw, dict):
        mul = raw.get("mul")
        if mul is None:
            raise ValidationError("mul", "missing")
        if "order" in raw and int(raw["order"]) != len(mul):
            raise ValidationError("order", "does not match table size")
        name = raw.get("name", f"T{len(mul)}")
        labels = [tuple(x) for x in raw.get("generators", [])]
    else:
        mul, name, labels = raw, f"T{len(raw)}", []
    return GroupTable(mul, name=name, generator_labels=labels)


def build_group(family: str, **params) -> GroupTable:
    if family == "cyclic":
        return cyclic(int(params["N"]))
    if family == "dihedral":
        return dihedral(int(params["m"]))
    if family in ("heisenberg", "heisenberg_mod"):
        return heisenberg_mod(int(params["p"]))
    if family == "direct_product":
        factors = params["factors"]
        if len(factors) < 2:
            raise ValidationError("factors", "need at least two factors")
        G = _as_group(factors[0])
        for f in factors[1:]:
            G = direct_product(G, _as_group(f))
        return G
    if family == "cayley_table":
        return cayley_table(params.get("raw", params))
    raise ValidationError("family", f"unknown group family {family!r}")


def _as_group(spec) -> GroupTable:
    if isinstance(spec, GroupTable):
        return spec
    spec = dict(spec)
    return build_group(spec.pop("family"), **spec)


# -- actions -----------------------------------------------------------------

class ActionTable:
    """A left action of ``group`` on the points ``0..space_size-1``."""

    def __init__(self, group: GroupTable, act, *, name: str = "E", validate: bool = True):
        act = np.array(act, dtype=np.int32)
        if act.ndim != 2 or act.shape[0] != group.order or act.shape[1] == 0:
            raise ValidationError("act", f"must be a {group.order} x space_size table")
        size = act.shape[1]
        if act.min() < 0 or act.max() >= size:
            raise ValidationError("act", "entries out of range")
        if validate:
            _check_action(group, act)
        act.setflags(write=False)
        self.group = group
        self.space_size = size
        self.act = act
        self.name = name
        self._full = (1 << size) - 1

    def __repr__(self):
        return f"ActionTable({self.group.name} on {self.name}, size={self.space_size})"

    def eset(self, points: Iterable[int] = ()) -> "ESet":
        pts = [int(p) for p in points]
        for p in pts:
            if not 0 <= p < self.space_size:
                raise ValidationError("points", f"{p} out of range")
        return ESet(self, mask_from_indices(pts, self.space_size))

    def from_indices(self, indices) -> "ESet":
        return ESet(self, mask_from_indices(indices, self.space_size))

    def empty(self) -> "ESet":
        return ESet(self, 0)

    def full(self) -> "ESet":
        return ESet(self, self._full)

    def orbits(self) -> list[list[int]]:
        seen = np.zeros(self.space_size, dtype=bool)
        out = []
        for e in range(self.space_size):
            if not seen[e]:
                orb = np.unique(self.act[:, e])
                seen[orb] = True
                out.append([int(x) for x in orb])
        return out


def _check_action(group: GroupTable, act: np.ndarray) -> None:
    size = act.shape[1]
    if not np.array_equal(act[0], np.arange(size)):
        raise ValidationError("act", "identity does not act trivially")
    for h in range(group.order):
        # act(g, act(h, e)) == act(gh, e) for all g, e
        if not np.array_equal(act[:, act[h]], act[group.mul[:, h]]):
            raise ValidationError("act", f"compatibility fails for h={h}")


def regular_action(G: GroupTable) -> ActionTable:
    return ActionTable(G, G.mul, name=f"{G.name}(regular)", validate=False)


def dihedral_vertex_action(G: GroupTable) -> ActionTable:
    if G.family[0] != "dihedral":
        raise ValidationError("action", "vertex action needs a dihedral group")
    m = G.family[1]
    idx = np.arange(2 * m)
    i, j = idx % m, idx // m
    v = np.arange(m)
    act = (i[:, None] + (1 - 2 * j[:, None]) * v[None, :]) % m
    return ActionTable(G, act, name=f"vertices({m})", validate=False)


def coset_action(G: GroupTable, H: "GSet") -> ActionTable:
    """Left multiplication on the left cosets gH, numbered by least representative."""
    _same_group(H.group, G)
    if not is_subgroup(H):
        raise ValidationError("subgroup", "coset action needs a subgroup")
    h = H.indices()
    cosets = np.full(G.order, -1, dtype=np.int64)
    reps = []
    for g in range(G.order):
        if cosets[g] < 0:
            cosets[G.mul[g, h]] = len(reps)
            reps.append(g)
    reps = np.array(reps)
    act = cosets[G.mul[:, reps]]
    return ActionTable(G, act, name=f"{G.name}/{len(h)}", validate=False)


def disjoint_union(actions: Sequence[ActionTable]) -> ActionTable:
    G = actions[0].group
    cols, offset = [], 0
    for a in actions:
        _same_group(a.group, G)
        cols.append(a.act + offset)
        offset += a.space_size
    return ActionTable(G, np.hstack(cols), name="+".join(a.name for a in actions),
                       validate=False)


# -- subsets -----------------------------------------------------------------

@dataclass(frozen=True)
class GSet:
    group: GroupTable = field(compare=False, repr=False)
    members: int

    def __post_init__(self):
        if self.members >> self.group.order:
            raise ValidationError("members", "bitmask longer than group order")

    def __len__(self):
        return self.members.bit_count()

    def __iter__(self):
        return iter_bits(self.members)

    def __contains__(self, g):
        return bool(self.members >> int(g) & 1)

    def __and__(self, other):
        _same_group(self.group, other.group)
        return GSet(self.group, self.members & other.members)

    def __or__(self, other):
        _same_group(self.group, other.group)
        return GSet(self.group, self.members | other.members)

    def __sub__(self, other):
        _same_group(self.group, other.group)
        return GSet(self.group, self.members & ~other.members)

    def __le__(self, other):
        _same_group(self.group, other.group)
        return self.members & ~other.members == 0

    def __eq__(self, other):
        if not isinstance(other, GSet):
            return NotImplemented
        return self.group is other.group and self.members == other.members

    def __hash__(self):
        return hash((id(self.group), self.members))

    def __repr__(self):
        els = self.elements()
        shown = els if len(els) <= 12 else els[:12] + ["..."]
        return f"GSet({self.group.name}, {shown})"

    def is_empty(self) -> bool:
        return self.members == 0

    def indices(self) -> np.ndarray:
        return indices_from_mask(self.members, self.group.order)

    def elements(self) -> list[int]:
        return [int(x) for x in self.indices()]


@dataclass(frozen=True)
class ESet:
    action: ActionTable = field(compare=False, repr=False)
    members: int

    def __post_init__(self):
        if self.members >> self.action.space_size:
            raise ValidationError("members", "bitmask longer than space size")

    def __len__(self):
        return self.members.bit_count()

    def __iter__(self):
        return iter_bits(self.members)

    def __contains__(self, e):
        return bool(self.members >> int(e) & 1)

    def __and__(self, other):
        _same_action(self.action, other.action)
        return ESet(self.action, self.members & other.members)

    def __or__(self, other):
        _same_action(self.action, other.action)
        return ESet(self.action, self.members | other.members)

    def __le__(self, other):
        _same_action(self.action, other.action)
        return self.members & ~other.members == 0

    def __eq__(self, other):
        if not isinstance(other, ESet):
            return NotImplemented
        return self.action is other.action and self.members == other.members

    def __hash__(self):
        return hash((id(self.action), self.members))

    def __repr__(self):
        return f"ESet({self.action.name}, {self.elements()})"

    def is_empty(self) -> bool:
        return self.members == 0

    def indices(self) -> np.ndarray:
        return indices_from_mask(self.members, self.action.space_size)

    def elements(self) -> list[int]:
        return [int(x) for x in self.indices()]


def _same_group(G1, G2):
    if G1 is not G2:
        raise GroupMismatch(f"{G1!r} vs {G2!r}")


def _same_action(a1, a2):
    if a1 is not a2:
        raise GroupMismatch(f"{a1!r} vs {a2!r}")


# -- set arithmetic ------------------------------------------------------------

def product_set(X: GSet, Y: GSet) -> GSet:
    """The set of products ``{xy : x in X, y in Y}``."""
    _same_group(X.group, Y.group)
    G = X.group
    if X.is_empty() or Y.is_empty():
        return G.empty()
    if X.members == 1:
        return Y
    if Y.members == 1:
        return X
    prods = G.mul[np.ix_(X.indices(), Y.indices())]
    return GSet(G, mask_from_indices(prods, G.order))


def power_set(X: GSet, n: int) -> GSet:
    """``X^n`` (n-fold product set), by binary exponentiation."""
    if n < 1:
        raise ValidationError("n", "power must be at least 1")
    result = None
    base = X
    while n:
        if n & 1:
            result = base if result is None else product_set(result, base)
        n >>= 1
        if n:
            base = product_set(base, base)
    return result


def inverse_set(X: GSet) -> GSet:
    G = X.group
    return GSet(G, mask_from_indices(G.inv[X.indices()], G.order))


def translate(g: int, X: GSet) -> GSet:
    """Left translate ``gX``."""
    G = X.group
    if X.is_empty():
        return X
    return GSet(G, mask_from_indices(G.mul[int(g), X.indices()], G.order))


def right_translate(X: GSet, g: int) -> GSet:
    G = X.group
    if X.is_empty():
        return X
    return GSet(G, mask_from_indices(G.mul[X.indices(), int(g)], G.order))


def symmetrize(X: GSet) -> GSet:
    """``X ∪ X^-1 ∪ {e}``."""
    return GSet(X.group, X.members | inverse_set(X).members | 1)


def is_symmetric(X: GSet) -> bool:
    return inverse_set(X).members == X.members


def act_set(X: GSet, B: ESet) -> ESet:
    """The set ``XB = {g.e : g in X, e in B}``."""
    _same_group(X.group, B.action.group)
    A = B.action
    if X.is_empty() or B.is_empty():
        return A.empty()
    pts = A.act[np.ix_(X.indices(), B.indices())]
    return ESet(A, mask_from_indices(pts, A.space_size))


def act_point(g: int, B: ESet) -> ESet:
    """``gB`` for a single group element."""
    A = B.action
    if B.is_empty():
        return B
    return ESet(A, mask_from_indices(A.act[int(g), B.indices()], A.space_size))


def generated_subgroup(X: GSet) -> GSet:
    if X.is_empty():
        raise EmptyInput("generated_subgroup needs a nonempty set")
    S = symmetrize(X)
    while True:
        S2 = product_set(S, S)
        if S2.members == S.members:
            return S
        S = S2


def is_subgroup(X: GSet) -> bool:
    return (X.members & 1 == 1 and is_symmetric(X)
            and product_set(X, X).members == X.members)


# -- convenient subsets --------------------------------------------------------

def interval(G: GroupTable, r: int, center: int = 0) -> GSet:
    """``{center-r, ..., center+r}`` in a cyclic group."""
    if G.family[0] != "cyclic":
        raise ValidationError("interval", "intervals need a cyclic group")
    N = G.order
    return G.from_indices([(center + i) % N for i in range(-r, r + 1)])


def ball(G: GroupTable, generators: Sequence[int], radius: int) -> GSet:
    """Words of length at most ``radius`` in the generators and their inverses."""
    S = symmetrize(G.from_indices(list(generators)))
    if radius == 0:
        return G.identity_set()
    return power_set(S, radius)


def progression(G: GroupTable, generators: Sequence[int], lengths: Sequence[int]) -> GSet:
    """``{g1^a1 ... gd^ad : |ai| <= Li}`` (a generalized arithmetic progression)."""
    if len(generators) != len(lengths):
        raise ValidationError("progression", "generators and lengths differ in length")
    P = G.identity_set()
    for g, L in zip(generators, lengths):
        powers = [0]
        x = 0
        for _ in range(L):
            x = G.op(x, g)
            powers.append(x)
        y = 0
        gi = G.inverse(g)
        for _ in range(L):
            y = G.op(y, gi)
            powers.append(y)
        P = product_set(P, G.from_indices(powers))
    return P
