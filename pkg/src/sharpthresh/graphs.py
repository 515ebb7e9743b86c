"""Graphs as edge-indicator vectors, plus exact independence/clique routines.

Edge ``{i, j}`` with ``i < j`` on ``n`` vertices has index
``i*(2n-i-1)/2 + (j-i-1)`` (row-major upper triangle). Vertex sets are
Python ints used as bitsets.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

MAX_EXACT_N = 100


def num_edges(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(n: int, i: int, j: int) -> int:
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"invalid edge ({i}, {j}) for n={n}")
    if i > j:
        i, j = j, i
    return i * (2 * n - i - 1) // 2 + (j - i - 1)


@lru_cache(maxsize=64)
def edge_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint arrays ``(I, J)`` in edge-index order."""
    i, j = np.triu_indices(n, k=1)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def vertices_from_edges(n: int) -> int:
    """Inverse of ``num_edges``; raises if the width is not triangular."""
    v = int((1 + np.sqrt(1 + 8 * n)) / 2 + 0.5)
    for cand in (v - 1, v, v + 1):
        if cand >= 1 and num_edges(cand) == n:
            return cand
    raise ValueError(f"{n} is not a triangular number of edges")


def adjacency_matrix(n: int, edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=bool)
    a = np.zeros((n, n), dtype=bool)
    i, j = edge_pairs(n)
    a[i, j] = edges
    a[j, i] = edges
    return a


def adjacency_bitsets(n: int, edges) -> list[int]:
    a = adjacency_matrix(n, edges)
    weights = [1 << v for v in range(n)]
    return [sum(w for w, x in zip(weights, row) if x) for row in a.tolist()]


def edges_from_pairs(n: int, pairs) -> np.ndarray:
    e = np.zeros(num_edges(n), dtype=bool)
    for i, j in pairs:
        e[edge_index(n, i, j)] = True
    return e


def complement(edges) -> np.ndarray:
    return ~np.asarray(edges, dtype=bool)


def gnp(n: int, p: float, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    shape = (num_edges(n),) if count is None else (count, num_edges(n))
    return rng.random(shape) < p


def degrees(n: int, edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=bool)
    i, j = edge_pairs(n)
    return np.bincount(i[edges], minlength=n) + np.bincount(j[edges], minlength=n)


def count_isolated_vertices(n: int, edges) -> int:
    return int(np.count_nonzero(degrees(n, edges) == 0))


def count_isolated_edges(n: int, edges) -> int:
    """Edges sharing no endpoint with any other edge."""
    edges = np.asarray(edges, dtype=bool)
    deg = degrees(n, edges)
    i, j = edge_pairs(n)
    return int(np.count_nonzero(edges & (deg[i] == 1) & (deg[j] == 1)))


# -- independence number ---------------------------------------------------

def _lowbit(x: int) -> int:
    return (x & -x).bit_length() - 1


def _clique_cover_size(adj: list[int], cand: int) -> int:
    """Greedy partition of ``cand`` into cliques; bounds any independent set."""
    cover = 0
    while cand:
        v = _lowbit(cand)
        cand &= ~(1 << v)
        common = cand & adj[v]
        while common:
            u = _lowbit(common)
            cand &= ~(1 << u)
            common &= adj[u] & ~(1 << u)
        cover += 1
    return cover


def max_independent_set(adj: list[int], target: int | None = None) -> int:
    """Size of a maximum independent set of the graph with neighbour bitsets ``adj``.

    Branch and bound: vertices of degree <= 1 are taken greedily, otherwise
    branch on a maximum-degree vertex, pruning with a greedy clique cover.
    With ``target`` the search stops as soon as an independent set of that
    size is found (the return value is then ``>= target``).
    """
    n = len(adj)
    best = 0
    stop = target if target is not None else n + 1

    def search(cand: int, size: int):
        nonlocal best
        if best >= stop:
            return
        while True:
            if size + cand.bit_count() <= best:
                return
            if cand == 0:
                break
            taken = False
            x = cand
            pick, pick_deg = -1, -1
            while x:
                v = _lowbit(x)
                x &= x - 1
                d = (adj[v] & cand).bit_count()
                if d <= 1:
                    cand &= ~((1 << v) | adj[v])
                    size += 1
                    taken = True
                    break
                if d > pick_deg:
                    pick, pick_deg = v, d
            if not taken:
                break
        if cand == 0:
            if size > best:
                best = size
            return
        if size + _clique_cover_size(adj, cand) <= best:
            return
        v = pick
        search(cand & ~((1 << v) | adj[v]), size + 1)
        if best >= stop:
            return
        search(cand & ~(1 << v), size)

    search((1 << n) - 1, 0)
    return best


def independence_number(n: int, edges, target: int | None = None) -> int:
    if n > MAX_EXACT_N:
        raise ValueError(f"n={n} exceeds exact regime (n <= {MAX_EXACT_N})")
    if n == 0:
        return 0
    return max_independent_set(adjacency_bitsets(n, edges), target=target)


def has_k_clique(n: int, edges, k: int) -> bool:
    """``alpha(complement(G)) >= k``."""
    if k <= 1:
        return k <= n
    return independence_number(n, complement(edges), target=k) >= k


def clique_number(n: int, edges) -> int:
    return independence_number(n, complement(edges))


# -- k-clique enumeration --------------------------------------------------

class CliqueOverflow(RuntimeError):
    pass


def count_k_cliques(adj: list[int], k: int, planted: int = 0, cap: int = 10**7) -> np.ndarray:
    """Number of k-cliques, split by how many vertices they share with ``planted``.

    Returns an array ``Z`` of length ``k+1`` where ``Z[l]`` counts cliques
    using exactly ``l`` vertices of the ``planted`` bitset. Raises
    ``CliqueOverflow`` once more than ``cap`` cliques have been counted.
    """
    n = len(adj)
    counts = np.zeros(k + 1, dtype=np.int64)
    total = 0
    if k == 0:
        counts[0] = 1
        return counts
    if k == 1:
        full = (1 << n) - 1
        counts[1] = (full & planted).bit_count()
        counts[0] = n - counts[1]
        return counts

    def extend(cand: int, depth: int, overlap: int):
        nonlocal total
        if depth == k - 1:
            hit = (cand & planted).bit_count()
            counts[overlap + 1] += hit
            counts[overlap] += cand.bit_count() - hit
            total += cand.bit_count()
            if total > cap:
                raise CliqueOverflow(f"more than {cap} cliques")
            return
        need = k - 1 - depth
        while cand.bit_count() >= need + 1:
            v = _lowbit(cand)
            cand &= cand - 1
            extend(cand & adj[v], depth + 1, overlap + ((planted >> v) & 1))

    extend((1 << n) - 1, 0, 0)
    return counts


def iter_k_cliques(adj: list[int], k: int):
    """Yield k-cliques as sorted vertex tuples."""
    n = len(adj)

    def extend(cand: int, chosen: tuple):
        if len(chosen) == k:
            yield chosen
            return
        while cand.bit_count() >= k - len(chosen):
            v = _lowbit(cand)
            cand &= cand - 1
            yield from extend(cand & adj[v], chosen + (v,))

    yield from extend((1 << n) - 1, ())


def clique_edges(n: int, vertices) -> np.ndarray:
    e = np.zeros(num_edges(n), dtype=bool)
    for i, j in combinations(sorted(vertices), 2):
        e[edge_index(n, i, j)] = True
    return e


# -- text format -----------------------------------------------------------

def format_edge_list(n: int, edges) -> str:
    i, j = edge_pairs(n)
    edges = np.asarray(edges, dtype=bool)
    lines = [f"n {n}"] + [f"{a} {b}" for a, b in zip(i[edges].tolist(), j[edges].tolist())]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> tuple[int, np.ndarray]:
    """Parse ``n <vertices>`` followed by one ``u v`` pair per line; ``#`` comments."""
    n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n" and len(parts) == 2 and n is None:
            n = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {raw!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if n is None:
        n = 1 + max((max(p) for p in pairs), default=-1)
    return n, edges_from_pairs(n, pairs)
