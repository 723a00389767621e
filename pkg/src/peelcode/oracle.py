"""Brute-force machinery for small instances.

Everything here is deliberately independent of the peeling decoder: solution
sets come from exhaustive subset enumeration, coset structure from direct
grouping, and rerouting follows the fundamental-cycle construction.  The
test suite uses these as ground truth for the fast path.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .homology import classifier_for, face_matrix, gf2_rank, star_matrix
from .peeling import SpanningForest
from .surface import CombinatorialSurface, DualMap, dual_map

ORACLE_EDGE_LIMIT = 24


class OracleSizeError(ValueError):
    """The instance exceeds the exhaustive-enumeration bound."""


def _check_size(erasure):
    if len(erasure) > ORACLE_EDGE_LIMIT:
        raise OracleSizeError(
            f"{len(erasure)} erased edges exceed the enumeration bound "
            f"of {ORACLE_EDGE_LIMIT}")


def _enumerate_matching(edge_checks: list[int], target: int,
                        edges: list[int]) -> list[frozenset[int]]:
    """All subsets whose XOR of per-edge check masks equals ``target``.

    Gray-code walk: one mask XOR per subset.
    """
    n = len(edges)
    sols = []
    subset = 0
    acc = 0
    if acc == target:
        sols.append(frozenset())
    for i in range(1, 1 << n):
        j = (i & -i).bit_length() - 1
        subset ^= 1 << j
        acc ^= edge_checks[j]
        if acc == target:
            sols.append(frozenset(edges[k] for k in range(n)
                                  if (subset >> k) & 1))
    return sols


def enumerate_solutions(s: CombinatorialSurface, erasure,
                        sigma) -> list[frozenset[int]]:
    """All B inside the erasure with restricted boundary sigma (Z sector)."""
    _check_size(erasure)
    edges = sorted(erasure)
    checks = []
    for e in edges:
        m = 0
        for w in s.edges[e]:
            if w not in s.open_vertices:
                m ^= 1 << w
        checks.append(m)
    target = 0
    for v in sigma:
        target |= 1 << v
    return _enumerate_matching(checks, target, edges)


def solutions_by_syndrome(s: CombinatorialSurface, erasure
                          ) -> dict[frozenset[int], list[frozenset[int]]]:
    """Group every subset of the erasure by its restricted boundary."""
    _check_size(erasure)
    edges = sorted(erasure)
    checks = []
    for e in edges:
        m = 0
        for w in s.edges[e]:
            if w not in s.open_vertices:
                m ^= 1 << w
        checks.append(m)
    n = len(edges)
    groups: dict[int, list[int]] = {0: [0]}
    subset = 0
    acc = 0
    for i in range(1, 1 << n):
        j = (i & -i).bit_length() - 1
        subset ^= 1 << j
        acc ^= checks[j]
        groups.setdefault(acc, []).append(subset)

    def vertices(mask: int) -> frozenset[int]:
        return frozenset(v for v in range(s.vertex_count) if (mask >> v) & 1)

    def edge_subset(mask: int) -> frozenset[int]:
        return frozenset(edges[k] for k in range(n) if (mask >> k) & 1)

    return {vertices(sig): [edge_subset(m) for m in subsets]
            for sig, subsets in groups.items()}


def enumerate_x_cycles(s: CombinatorialSurface, erasure) -> list[frozenset[int]]:
    """All subsets of the erasure with even overlap with every face."""
    _check_size(erasure)
    edges = sorted(erasure)
    face_of_edge = {e: s.edge_faces[e] for e in edges}
    checks = []
    for e in edges:
        m = 0
        for f in face_of_edge[e]:
            m ^= 1 << f
        checks.append(m)
    return _enumerate_matching(checks, 0, edges)


def reroute_into_forest(s: CombinatorialSurface, b, forest: SpanningForest,
                        *, record_steps: bool = False):
    """Squeeze B inside the forest without changing its restricted boundary.

    Each off-forest edge is removed by XOR-ing its fundamental cycle: the
    edge plus the forest paths from its endpoints towards their roots.
    """
    parent_of: dict[int, tuple[int, int]] = {}
    for k in range(len(forest)):
        parent_of[int(forest.child[k])] = (int(forest.parent[k]),
                                           int(forest.order[k]))

    def path_edges(v: int) -> set[int]:
        out = set()
        while v in parent_of:
            v, e = parent_of[v]
            out.add(e)
        return out

    in_forest = forest.edge_set
    result = set(b)
    steps = [frozenset(result)]
    for x in sorted(set(b) - in_forest):
        u, v = s.edges[x]
        gamma = {x} ^ path_edges(u) ^ path_edges(v)
        result ^= gamma
        steps.append(frozenset(result))
    if record_steps:
        return frozenset(result), steps
    return frozenset(result)


@dataclass(frozen=True)
class SectorEquiprobability:
    n_classes: int
    class_sizes: tuple[int, ...]
    sizes_equal: bool
    stabilizer_dim: int  # log2 of the number of stabilizers supported in E


@dataclass(frozen=True)
class EquiprobabilityReport:
    z: SectorEquiprobability
    x: SectorEquiprobability
    n_total: int  # equiprobable cosets over both sectors

    @property
    def all_equal(self) -> bool:
        return self.z.sizes_equal and self.x.sizes_equal


def _stabilizer_dim_in(stab: np.ndarray, qubit_index: np.ndarray,
                       erasure) -> int:
    """dim of the stabilizer subspace supported inside the erasure."""
    inside = np.isin(qubit_index, np.asarray(sorted(erasure), dtype=np.int64))
    outside = stab[:, ~inside]
    return gf2_rank(stab) - gf2_rank(outside)


def _sector_report(s, cycles, classify, stab_dim) -> SectorEquiprobability:
    counts = Counter(classify(c) for c in cycles)
    sizes = tuple(sorted(counts.values()))
    equal = (len(set(sizes)) == 1 and sizes[0] == 2 ** stab_dim)
    return SectorEquiprobability(len(counts), sizes, equal, stab_dim)


def verify_coset_equiprobability(s: CombinatorialSurface, erasure,
                                 dmap: DualMap | None = None
                                 ) -> EquiprobabilityReport:
    """Group the cycles supported in the erasure by logical class.

    With equiprobable Pauli errors on the erasure, the number of errors in a
    coset consistent with a syndrome depends only on the number of
    stabilizers supported inside the erasure, so all classes must have the
    same cardinality; any decoder answering consistently succeeds with
    probability exactly 1/N per sector.
    """
    if dmap is None:
        dmap = dual_map(s)
    cls = classifier_for(s)
    q = s.qubit_edge_index

    z_cycles = enumerate_solutions(s, erasure, frozenset())
    z_dim = _stabilizer_dim_in(face_matrix(s), q, erasure)
    z = _sector_report(s, z_cycles, lambda c: cls.class_bits(s, c, "z"), z_dim)

    x_cycles = enumerate_x_cycles(s, erasure)
    x_dim = _stabilizer_dim_in(star_matrix(s), q, erasure)
    x = _sector_report(s, x_cycles, lambda c: cls.class_bits(s, c, "x"), x_dim)

    return EquiprobabilityReport(z, x, z.n_classes * x.n_classes)
