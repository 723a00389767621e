"""Erasure-channel sampling and syndrome extraction (GF(2) representation).

A Pauli error is stored as a pair of edge sets: the Z support on primal
qubit edges and the X support on the same index space via the qubit-edge
bijection with the dual.  A Y on edge e puts e in both supports.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import CombinatorialSurface, DualMap, _boundary_mask, dual_map


@dataclass(frozen=True)
class CssError:
    """Z/X supports of a Pauli error, each a set of qubit edge indices."""
    z_support: frozenset[int]
    x_support: frozenset[int]

    def compose(self, other: "CssError") -> "CssError":
        return CssError(self.z_support ^ other.z_support,
                        self.x_support ^ other.x_support)

    @property
    def support(self) -> frozenset[int]:
        return self.z_support | self.x_support


IDENTITY = CssError(frozenset(), frozenset())


def validate_error(s: CombinatorialSurface, err: CssError) -> None:
    qubits = s.qubit_edges
    if not err.z_support <= qubits or not err.x_support <= qubits:
        raise ValueError("error support contains a non-qubit edge")


def sample_erasure(s: CombinatorialSurface, p: float, rng) -> frozenset[int]:
    """Erase each qubit edge independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability {p} outside [0, 1]")
    q = s.qubit_edge_index
    hit = rng.random(len(q)) < p
    return frozenset(q[hit].tolist())


def sample_pauli_on_erasure(erasure, rng) -> CssError:
    """Uniform Pauli supported on the erasure.

    Per erased edge the Z bit and X bit are independent fair coins, which is
    exactly the uniform law over {I, X, Y, Z}.
    """
    edges = np.asarray(sorted(erasure), dtype=np.int64)
    n = len(edges)
    if n == 0:
        return IDENTITY
    z_bits = rng.random(n) < 0.5
    x_bits = rng.random(n) < 0.5
    return CssError(frozenset(edges[z_bits].tolist()),
                    frozenset(edges[x_bits].tolist()))


def syndrome_z(s: CombinatorialSurface, err) -> frozenset[int]:
    """Non-open vertices meeting the Z support an odd number of times."""
    edges = err.z_support if isinstance(err, CssError) else err
    mask = _boundary_mask(s, s.edge_mask(edges), restrict=True)
    return frozenset(np.flatnonzero(mask).tolist())


def syndrome_x(s: CombinatorialSurface, err,
               dmap: DualMap | None = None) -> frozenset[int]:
    """X-sector syndrome: same computation on the dual graph.

    Returned vertices are dual vertex indices, i.e. primal faces.
    """
    if dmap is None:
        dmap = dual_map(s)
    edges = err.x_support if isinstance(err, CssError) else err
    d = dmap.surface
    mask = _boundary_mask(d, d.edge_mask(int(dmap.to_dual[e]) for e in edges),
                          restrict=True)
    return frozenset(np.flatnonzero(mask).tolist())
