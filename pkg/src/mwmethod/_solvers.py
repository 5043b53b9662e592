"""Small exact combinatorial solvers on bitmasks.

Both problems are NP-hard; these branch-and-bound routines are meant for
universes of at most a few dozen elements. Each returns the optimum together
with an ``exact`` flag that is False only if the node limit was hit.
"""

from __future__ import annotations

import numpy as np

DEFAULT_NODE_LIMIT = 2_000_000


def rows_to_masks(matrix: np.ndarray) -> list[int]:
    """Pack each row of a boolean matrix into an int bitmask (bit j = column j)."""
    if matrix.shape[0] == 0:
        return []
    packed = np.packbits(matrix.astype(bool), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


# -- set cover -------------------------------------------------------------------

def greedy_set_cover(universe: int, sets: list[int]) -> list[int] | None:
    """Greedy cover: repeatedly take the set covering most uncovered elements.

    Ties go to the lowest set index. Returns indices into ``sets`` or None if
    the sets do not cover the universe.
    """
    uncovered = universe
    chosen = []
    while uncovered:
        best, gain = -1, 0
        for i, s in enumerate(sets):
            c = (s & uncovered).bit_count()
            if c > gain:
                best, gain = i, c
        if best < 0:
            return None
        chosen.append(best)
        uncovered &= ~sets[best]
    return chosen


def _reduce_sets(universe: int, sets: list[int]) -> list[int]:
    """Indices of the sets worth branching on: nonempty, first of duplicates, undominated."""
    seen = {}
    for i, s in enumerate(sets):
        s &= universe
        if s and s not in seen:
            seen[s] = i
    items = sorted(seen.items(), key=lambda kv: (-kv[0].bit_count(), kv[1]))
    kept = []
    for s, i in items:
        if any(s & ~t == 0 for t, _ in kept):
            continue
        kept.append((s, i))
    return sorted(i for _, i in kept)


def exact_set_cover(universe: int, sets: list[int],
                    node_limit: int = DEFAULT_NODE_LIMIT) -> tuple[list[int] | None, bool]:
    """Minimum cover of ``universe`` by members of ``sets``.

    Branches on the uncovered element contained in the fewest candidate sets
    (lowest element index on ties), trying sets in order of coverage then index.
    """
    greedy = greedy_set_cover(universe, sets)
    if greedy is None:
        return None, True
    if universe == 0:
        return [], True
    ids = _reduce_sets(universe, sets)
    masks = [sets[i] & universe for i in ids]
    containing: dict[int, list[int]] = {}
    u = universe
    while u:
        low = u & -u
        e = low.bit_length() - 1
        containing[e] = [j for j, s in enumerate(masks) if s & low]
        u ^= low
    best_len, best_sol = len(greedy), None
    nodes = 0
    exhausted = False

    def search(unc: int, chosen: list[int]):
        nonlocal best_len, best_sol, nodes, exhausted
        if unc == 0:
            if len(chosen) < best_len:
                best_len, best_sol = len(chosen), list(chosen)
            return
        nodes += 1
        if nodes > node_limit:
            exhausted = True
            return
        cover = max((s & unc).bit_count() for s in masks)
        need = -(-unc.bit_count() // cover)
        if len(chosen) + need >= best_len:
            return
        # branching element: fewest covering sets, then lowest index
        pick, pick_n = -1, None
        v = unc
        while v:
            low = v & -v
            e = low.bit_length() - 1
            n = len(containing[e])
            if pick_n is None or n < pick_n:
                pick, pick_n = e, n
            v ^= low
        options = sorted(containing[pick], key=lambda j: (-(masks[j] & unc).bit_count(), j))
        for j in options:
            chosen.append(j)
            search(unc & ~masks[j], chosen)
            chosen.pop()
            if exhausted:
                return

    search(universe, [])
    if best_sol is None:
        return sorted(greedy), not exhausted
    return sorted(ids[j] for j in best_sol), not exhausted


# -- maximum independent set ---------------------------------------------------------

def greedy_independent_set(adj: list[int]) -> int:
    """Min-degree greedy independent set (ties to the lowest vertex)."""
    n = len(adj)
    remaining = (1 << n) - 1
    chosen = 0
    while remaining:
        best, best_deg = -1, None
        v = remaining
        while v:
            low = v & -v
            i = low.bit_length() - 1
            d = (adj[i] & remaining).bit_count()
            if best_deg is None or d < best_deg:
                best, best_deg = i, d
            v ^= low
        chosen |= 1 << best
        remaining &= ~(adj[best] | (1 << best))
    return chosen


def _clique_cover_bound(P: int, adj: list[int]) -> int:
    count = 0
    while P:
        low = P & -P
        v = low.bit_length() - 1
        clique = low
        cand = P & adj[v]
        while cand:
            lb = cand & -cand
            u = lb.bit_length() - 1
            clique |= lb
            cand &= adj[u]
        P &= ~clique
        count += 1
    return count


def exact_independent_set(adj: list[int],
                          node_limit: int = DEFAULT_NODE_LIMIT) -> tuple[int, bool]:
    """Maximum independent set of a graph given by adjacency bitmasks (no self loops)."""
    n = len(adj)
    best = greedy_independent_set(adj)
    best_size = best.bit_count()
    nodes = 0
    exhausted = False

    def search(P: int, cur: int, size: int):
        nonlocal best, best_size, nodes, exhausted
        # take vertices of degree <= 1 in P: always safe
        while P:
            v = P
            forced = -1
            while v:
                low = v & -v
                i = low.bit_length() - 1
                if (adj[i] & P).bit_count() <= 1:
                    forced = i
                    break
                v ^= low
            if forced < 0:
                break
            cur |= 1 << forced
            size += 1
            P &= ~(adj[forced] | (1 << forced))
        if not P:
            if size > best_size:
                best, best_size = cur, size
            return
        nodes += 1
        if nodes > node_limit:
            exhausted = True
            return
        if size + _clique_cover_bound(P, adj) <= best_size:
            return
        pick, pick_deg = -1, -1
        v = P
        while v:
            low = v & -v
            i = low.bit_length() - 1
            d = (adj[i] & P).bit_count()
            if d > pick_deg:
                pick, pick_deg = i, d
            v ^= low
        bit = 1 << pick
        search(P & ~(adj[pick] | bit), cur | bit, size + 1)
        if exhausted:
            return
        search(P & ~bit, cur, size)

    search((1 << n) - 1, 0, 0)
    return best, not exhausted
