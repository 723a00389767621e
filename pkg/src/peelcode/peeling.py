"""Seeded spanning forests and the leaf-peeling erasure decoder.

The forest over the erased subgraph is grown breadth-first; on surfaces with
boundary the open vertices touched by the erasure act as seeds, so no open
vertex is ever reached by a growth step.  Peeling processes the grown edges
in reverse growth order: the child endpoint of each edge is then a pendant
vertex, is never open, and the whole forest is always exhausted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .channel import CssError
from .surface import CombinatorialSurface, DualMap, dual_map


class InvalidSyndromeError(ValueError):
    """The syndrome is not realizable by any error inside the erasure."""


@dataclass(frozen=True)
class SpanningForest:
    """Spanning forest of an erasure with recorded growth order.

    ``order[k]`` is the k-th grown edge; ``child[k]`` the endpoint newly
    reached by that step and ``parent[k]`` the endpoint already in the
    forest.  Components touching open vertices are rooted there (seeds),
    the rest at their lowest-index vertex.
    """
    order: np.ndarray
    child: np.ndarray
    parent: np.ndarray
    roots: frozenset[int]
    seeds: frozenset[int]
    vertices: frozenset[int]

    @property
    def edge_set(self) -> frozenset[int]:
        return frozenset(self.order.tolist())

    def __len__(self) -> int:
        return len(self.order)


@njit(cache=True)
def _grow_forest_kernel(indptr, adj_edge, adj_other, open_vertex,
                        edge_u, edge_v, erased):
    nv = open_vertex.shape[0]
    touched = np.zeros(nv, np.bool_)
    n_touched = 0
    for e in range(erased.shape[0]):
        if erased[e]:
            for w in (edge_u[e], edge_v[e]):
                if not touched[w]:
                    touched[w] = True
                    n_touched += 1

    queue = np.empty(n_touched if n_touched > 0 else 1, np.int32)
    visited = np.zeros(nv, np.bool_)
    order = np.empty(n_touched if n_touched > 0 else 1, np.int32)
    child = np.empty_like(order)
    parent = np.empty_like(order)
    roots = np.empty(n_touched if n_touched > 0 else 1, np.int32)
    nf = 0
    nroots = 0
    head = 0
    tail = 0

    # seed phase: every touched open vertex is a root
    for v in range(nv):
        if touched[v] and open_vertex[v]:
            visited[v] = True
            queue[tail] = v
            tail += 1
            roots[nroots] = v
            nroots += 1

    scan = 0
    while True:
        while head < tail:
            u = queue[head]
            head += 1
            for i in range(indptr[u], indptr[u + 1]):
                e = adj_edge[i]
                if erased[e]:
                    w = adj_other[i]
                    if not visited[w]:
                        visited[w] = True
                        order[nf] = e
                        child[nf] = w
                        parent[nf] = u
                        nf += 1
                        queue[tail] = w
                        tail += 1
        # next component root: lowest-index unvisited touched vertex
        while scan < nv and (not touched[scan] or visited[scan]):
            scan += 1
        if scan >= nv:
            break
        visited[scan] = True
        queue[tail] = scan
        tail += 1
        roots[nroots] = scan
        nroots += 1

    return order[:nf], child[:nf], parent[:nf], roots[:nroots]


@njit(cache=True)
def _peel_kernel(order, child, parent, sigma, open_vertex, a_out):
    # reverse growth order: the child endpoint is pendant and non-open
    for k in range(order.shape[0] - 1, -1, -1):
        u = child[k]
        if sigma[u]:
            e = order[k]
            v = parent[k]
            a_out[e] = True
            sigma[u] = False
            if not open_vertex[v]:
                sigma[v] = not sigma[v]
    for v in range(sigma.shape[0]):
        if sigma[v]:
            return False
    return True


def grow_forest_arrays(s: CombinatorialSurface, erased_mask: np.ndarray):
    """Raw (order, child, parent, roots) arrays of the seeded forest."""
    return _grow_forest_kernel(s.adj_indptr, s.adj_edge, s.adj_other,
                               s.open_vertex_mask, s.edge_u, s.edge_v,
                               erased_mask)


def peel_arrays(forest_arrays, sigma_mask: np.ndarray,
                open_vertex_mask: np.ndarray, n_edges: int):
    """Peel from raw forest arrays; returns (correction mask, ok flag)."""
    order, child, parent, _ = forest_arrays
    a_out = np.zeros(n_edges, bool)
    ok = _peel_kernel(order, child, parent, sigma_mask, open_vertex_mask, a_out)
    return a_out, ok


def grow_forest(s: CombinatorialSurface, erasure) -> SpanningForest:
    """Seeded spanning forest of the erased subgraph (linear time)."""
    erasure = frozenset(erasure)
    if not erasure <= s.qubit_edges:
        raise ValueError("erasure contains a non-qubit edge")
    order, child, parent, roots = grow_forest_arrays(s, s.edge_mask(erasure))
    vertices = set()
    for e in erasure:
        u, v = s.edges[e]
        vertices.add(u)
        vertices.add(v)
    roots_set = frozenset(roots.tolist())
    seeds = frozenset(v for v in roots_set if v in s.open_vertices)
    return SpanningForest(order, child, parent, roots_set, seeds,
                          frozenset(vertices))


def peel(s: CombinatorialSurface, forest: SpanningForest, sigma,
         *, rng=None) -> frozenset[int]:
    """Unique subset of the forest whose restricted boundary equals sigma.

    With ``rng`` given, leaves are processed in a randomized valid order
    instead of reverse growth order; the result is the same set (it is
    unique), which the test suite exercises directly.
    """
    sigma = frozenset(sigma)
    for v in sigma:
        if v in s.open_vertices:
            raise ValueError(f"syndrome contains open vertex {v}")
        if not 0 <= v < s.vertex_count:
            raise ValueError(f"syndrome vertex {v} out of range")
    if rng is not None:
        return _peel_random_order(s, forest, sigma, rng)
    sigma_mask = s.vertex_mask(sigma)
    a_mask, ok = peel_arrays(
        (forest.order, forest.child, forest.parent, None),
        sigma_mask, s.open_vertex_mask, s.edge_count)
    if not ok:
        raise InvalidSyndromeError(
            "residual syndrome after peeling: syndrome is not realizable "
            "within the erasure")
    return frozenset(np.flatnonzero(a_mask).tolist())


def _peel_random_order(s, forest, sigma, rng) -> frozenset[int]:
    """Reference peeling with a randomized valid leaf order (test support)."""
    remaining = set(forest.order.tolist())
    degree: dict[int, int] = {}
    incident: dict[int, set[int]] = {}
    for e in remaining:
        for w in s.edges[e]:
            degree[w] = degree.get(w, 0) + 1
            incident.setdefault(w, set()).add(e)
    sigma = set(sigma)
    a: set[int] = set()
    while remaining:
        leaves = []
        for e in remaining:
            u, v = s.edges[e]
            for pend, other in ((u, v), (v, u)):
                if degree[pend] == 1 and pend not in s.open_vertices:
                    leaves.append((e, pend, other))
        if not leaves:
            raise InvalidSyndromeError("stuck: no peelable leaf remains")
        e, u, v = leaves[rng.integers(len(leaves))]
        remaining.discard(e)
        degree[u] -= 1
        degree[v] -= 1
        incident[u].discard(e)
        incident[v].discard(e)
        if u in sigma:
            a.add(e)
            sigma.discard(u)
            if v not in s.open_vertices:
                sigma.symmetric_difference_update((v,))
    if sigma:
        raise InvalidSyndromeError(
            "residual syndrome after peeling: syndrome is not realizable "
            "within the erasure")
    return frozenset(a)


def decode(s: CombinatorialSurface, erasure, sigma_z, sigma_x,
           *, dmap: DualMap | None = None) -> CssError:
    """Correct both sectors: peel the primal graph for Z, the dual for X."""
    if dmap is None:
        dmap = dual_map(s)
    erasure = frozenset(erasure)

    forest = grow_forest(s, erasure)
    z = peel(s, forest, sigma_z)

    d = dmap.surface
    dual_erasure = frozenset(int(dmap.to_dual[e]) for e in erasure)
    dual_forest = grow_forest(d, dual_erasure)
    x_dual = peel(d, dual_forest, sigma_x)
    x = frozenset(int(dmap.to_primal[e]) for e in x_dual)
    return CssError(z, x)
