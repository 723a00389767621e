"""GF(2) homology of a surface: cycle spaces, stabilizers, logical classes.

Per-trial classification is a handful of crossing parities against fixed
detector edge sets (the opposite sector's logical representatives); Gaussian
elimination is confined to setup and to surfaces without builder metadata.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .channel import CssError, syndrome_x, syndrome_z
from .surface import CombinatorialSurface, _boundary_mask, dual_map


# -- dense GF(2) linear algebra --------------------------------------------

def gf2_row_reduce(a: np.ndarray):
    """Row-reduce over GF(2); returns (rref, pivot columns)."""
    r = (np.asarray(a, dtype=np.uint8) & 1).copy()
    m, n = r.shape
    pivots = []
    row = 0
    for col in range(n):
        if row >= m:
            break
        hits = np.flatnonzero(r[row:, col])
        if hits.size == 0:
            continue
        p = row + int(hits[0])
        if p != row:
            r[[row, p]] = r[[p, row]]
        others = np.flatnonzero(r[:, col])
        others = others[others != row]
        if others.size:
            r[others] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def gf2_rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return len(gf2_row_reduce(a)[1])


def gf2_kernel_basis(a: np.ndarray) -> np.ndarray:
    """Rows form a basis of {x : a @ x = 0 over GF(2)}."""
    a = np.asarray(a, dtype=np.uint8)
    m, n = a.shape
    r, pivots = gf2_row_reduce(a)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), np.uint8)
    for k, c in enumerate(free):
        basis[k, c] = 1
        for i, pc in enumerate(pivots):
            if r[i, c]:
                basis[k, pc] = 1
    return basis


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution of a @ x = b over GF(2), or None if inconsistent."""
    a = np.asarray(a, dtype=np.uint8)
    b = (np.asarray(b, dtype=np.uint8) & 1).reshape(-1, 1)
    m, n = a.shape
    aug = np.concatenate([a & 1, b], axis=1)
    r, pivots = gf2_row_reduce(aug)
    for i in range(m):
        if r[i, :n].max(initial=0) == 0 and r[i, n]:
            return None
    x = np.zeros(n, np.uint8)
    for i, pc in enumerate(pivots):
        if pc < n:
            x[pc] = r[i, n]
        elif r[i, n]:
            return None
    return x


# -- surface matrices -------------------------------------------------------

def _qubit_columns(s: CombinatorialSurface):
    col = np.full(s.edge_count, -1, np.int64)
    col[s.qubit_edge_index] = np.arange(len(s.qubit_edge_index))
    return col


def incidence_matrix(s: CombinatorialSurface) -> np.ndarray:
    """Restricted boundary map: rows = non-open vertices, cols = qubit edges."""
    rows = np.flatnonzero(~s.open_vertex_mask)
    row_of = {int(v): i for i, v in enumerate(rows)}
    col = _qubit_columns(s)
    m = np.zeros((len(rows), len(s.qubit_edge_index)), np.uint8)
    for e in s.qubit_edge_index.tolist():
        for w in s.edges[e]:
            if w in row_of:
                m[row_of[w], col[e]] ^= 1
    return m


def face_matrix(s: CombinatorialSurface) -> np.ndarray:
    """Z-stabilizer supports: rows = faces restricted to qubit edges."""
    col = _qubit_columns(s)
    m = np.zeros((s.face_count, len(s.qubit_edge_index)), np.uint8)
    for fi, face in enumerate(s.faces):
        for e in face:
            if col[e] >= 0:
                m[fi, col[e]] ^= 1
    return m


def star_matrix(s: CombinatorialSurface) -> np.ndarray:
    """X-stabilizer supports: rows = non-open vertex stars over qubit edges."""
    rows = np.flatnonzero(~s.open_vertex_mask)
    col = _qubit_columns(s)
    m = np.zeros((len(rows), len(s.qubit_edge_index)), np.uint8)
    for i, v in enumerate(rows.tolist()):
        for e in s.adjacency[v]:
            if col[e] >= 0:
                m[i, col[e]] ^= 1
    return m


def cycle_basis(s: CombinatorialSurface, sector: str = "z") -> np.ndarray:
    """Basis of relative cycles (Z) or dual relative cycles (X).

    Vectors are indexed by qubit-edge column; Z cycles meet every non-open
    vertex evenly, X cycles meet every face evenly.
    """
    if sector == "z":
        return gf2_kernel_basis(incidence_matrix(s))
    if sector == "x":
        return gf2_kernel_basis(face_matrix(s))
    raise ValueError(f"unknown sector {sector!r}")


def logical_rank(s: CombinatorialSurface, sector: str = "z") -> int:
    """Number of encoded logical bits in one sector."""
    cyc = cycle_basis(s, sector)
    stab = face_matrix(s) if sector == "z" else star_matrix(s)
    return len(cyc) - gf2_rank(stab)


def encoded_qubits(s: CombinatorialSurface) -> int:
    return logical_rank(s, "z")


# -- logical classification -------------------------------------------------

@dataclass(frozen=True)
class LogicalClassifier:
    """Crossing-parity classifier against fixed detector edge sets.

    A detector is the support of an opposite-sector logical representative,
    so each parity vanishes on stabilizers and distinguishes one logical bit.
    """
    detectors_z: tuple[np.ndarray, ...]
    detectors_x: tuple[np.ndarray, ...]

    def class_bits(self, s, edges, sector: str = "z") -> tuple[int, ...]:
        mask = edges if isinstance(edges, np.ndarray) else s.edge_mask(edges)
        dets = self.detectors_z if sector == "z" else self.detectors_x
        return tuple(int(np.count_nonzero(mask[d]) & 1) for d in dets)


def _torus_classifier(L: int) -> LogicalClassifier:
    # h(x,y) = y*L+x ; v(x,y) = L^2 + y*L+x
    h_col0 = np.array([y * L for y in range(L)], np.int64)          # h(0, y)
    h_row0 = np.array([x for x in range(L)], np.int64)              # h(x, 0)
    v_row0 = np.array([L * L + x for x in range(L)], np.int64)      # v(x, 0)
    v_col0 = np.array([L * L + y * L for y in range(L)], np.int64)  # v(0, y)
    return LogicalClassifier(detectors_z=(h_col0, v_row0),
                             detectors_x=(h_row0, v_col0))


def _planar_classifier(Lx: int, Ly: int) -> LogicalClassifier:
    # h(x,y) = y*Lx+x ; one cut joining the two closed boundaries (Z) and
    # one along a closed boundary (X)
    h_col0 = np.array([y * Lx for y in range(Ly + 1)], np.int64)  # h(0, y)
    h_row0 = np.array([x for x in range(Lx)], np.int64)           # h(x, 0)
    return LogicalClassifier(detectors_z=(h_col0,), detectors_x=(h_row0,))


def _derive_detectors(stab: np.ndarray, cycles: np.ndarray,
                      qubit_index: np.ndarray) -> tuple[np.ndarray, ...]:
    """Detectors for arbitrary surfaces, by Gaussian elimination.

    Candidates are the kernel of the stabilizer matrix (even overlap with
    every stabilizer); keep a subset whose parities are independent on the
    cycle space.
    """
    cand = gf2_kernel_basis(stab)
    if len(cand) == 0 or len(cycles) == 0:
        return ()
    # parities[i, j] = <cycle_i, candidate_j>; keep candidates whose parity
    # patterns over the cycle basis are independent
    parities = (cycles @ cand.T) & 1
    chosen = _independent_rows(parities.T)
    return tuple(qubit_index[np.flatnonzero(cand[i])] for i in chosen)


def _independent_rows(a: np.ndarray) -> list[int]:
    """Indices of a maximal independent subset of the rows of ``a``."""
    basis: list[np.ndarray] = []
    chosen: list[int] = []
    r = np.zeros((0, a.shape[1]), np.uint8)
    rank = 0
    for i in range(a.shape[0]):
        test = np.concatenate([r, a[i:i + 1] & 1], axis=0)
        new_rank = gf2_rank(test)
        if new_rank > rank:
            r = test
            rank = new_rank
            chosen.append(i)
    return chosen


def _generic_classifier(s: CombinatorialSurface) -> LogicalClassifier:
    q = s.qubit_edge_index.astype(np.int64)
    dz = _derive_detectors(face_matrix(s), cycle_basis(s, "z"), q)
    dx = _derive_detectors(star_matrix(s), cycle_basis(s, "x"), q)
    return LogicalClassifier(detectors_z=dz, detectors_x=dx)


@functools.lru_cache(maxsize=64)
def classifier_for(s: CombinatorialSurface) -> LogicalClassifier:
    """Cut-based classifier for builder lattices, GF(2)-derived otherwise."""
    kind = s.meta.get("kind")
    if kind == "torus":
        return _torus_classifier(s.meta["L"])
    if kind == "planar":
        return _planar_classifier(s.meta["Lx"], s.meta["Ly"])
    return _generic_classifier(s)


def logical_class(s: CombinatorialSurface, c, sector: str = "z",
                  classifier: LogicalClassifier | None = None) -> tuple[int, ...]:
    """Homology class bits of a relative cycle; all-zero iff trivial."""
    if classifier is None:
        classifier = classifier_for(s)
    mask = c if isinstance(c, np.ndarray) else s.edge_mask(c)
    if sector == "z":
        if _boundary_mask(s, mask, restrict=True).any():
            raise ValueError("not a relative cycle: restricted boundary nonempty")
    elif sector == "x":
        col = _qubit_columns(s)
        for face in s.faces:
            par = 0
            for e in face:
                if col[e] >= 0 and mask[e]:
                    par ^= 1
            if par:
                raise ValueError("not a dual relative cycle: odd face overlap")
    else:
        raise ValueError(f"unknown sector {sector!r}")
    return classifier.class_bits(s, mask, sector)


def is_failure(s: CombinatorialSurface, truth: CssError, correction: CssError,
               *, dmap=None, classifier: LogicalClassifier | None = None
               ) -> tuple[bool, bool]:
    """Per-sector logical failure of a correction against the true error.

    Requires equal syndromes in both sectors (contract violation otherwise);
    a sector fails iff the residual truth XOR correction is a non-trivial
    relative cycle.
    """
    if dmap is None:
        dmap = dual_map(s)
    if syndrome_z(s, truth) != syndrome_z(s, correction):
        raise ValueError("Z syndromes of truth and correction differ")
    if syndrome_x(s, truth, dmap) != syndrome_x(s, correction, dmap):
        raise ValueError("X syndromes of truth and correction differ")
    if classifier is None:
        classifier = classifier_for(s)
    rz = truth.z_support ^ correction.z_support
    rx = truth.x_support ^ correction.x_support
    fail_z = any(logical_class(s, rz, "z", classifier))
    fail_x = any(logical_class(s, rx, "x", classifier))
    return fail_z, fail_x
