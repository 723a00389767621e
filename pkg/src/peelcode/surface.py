"""Combinatorial surfaces: construction, validation, file I/O and duality.

A surface is a finite cell complex (V, E, F).  Edges carry dense integer
indices fixed at construction; a face is stored as the set of edge indices on
its boundary.  Surfaces may have open boundary elements: qubits live only on
non-open edges and stabilizer measurements only on non-open vertices.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SurfaceError(ValueError):
    """A surface invariant is violated."""


class SurfaceParseError(SurfaceError):
    """A surface file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CombinatorialSurface:
    """An immutable surface graph with optional open boundary.

    Parallel edges are rejected unless ``allow_parallel_edges`` is set; the
    L=2 torus needs them (each pair of neighboring vertices is joined by two
    wrap-around edges), every larger builder output is simple.
    """

    def __init__(self, vertex_count, edges, faces, open_vertices=(),
                 open_edges=(), *, allow_parallel_edges: bool = False,
                 meta: dict | None = None):
        self.vertex_count = int(vertex_count)
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        self.faces = tuple(tuple(int(e) for e in face) for face in faces)
        self.open_vertices = frozenset(int(v) for v in open_vertices)
        self.open_edges = frozenset(int(e) for e in open_edges)
        self.allow_parallel_edges = bool(allow_parallel_edges)
        self.meta = dict(meta) if meta else {}
        self._validate()
        self._build_arrays()

    # -- validation ---------------------------------------------------------

    def _validate(self):
        n, ne = self.vertex_count, len(self.edges)
        if n <= 0:
            raise SurfaceError("surface needs at least one vertex")
        seen: dict[tuple[int, int], int] = {}
        for i, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise SurfaceError(f"edge {i} endpoint out of range")
            if u == v:
                raise SurfaceError(f"edge {i} is a loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen and not self.allow_parallel_edges:
                raise SurfaceError(
                    f"edges {seen[key]} and {i} are parallel between "
                    f"vertices {key[0]} and {key[1]}")
            seen.setdefault(key, i)

        edge_faces: list[list[int]] = [[] for _ in range(ne)]
        for fi, face in enumerate(self.faces):
            if not face:
                raise SurfaceError(f"face {fi} is empty")
            if len(set(face)) != len(face):
                raise SurfaceError(f"face {fi} repeats an edge")
            for e in face:
                if not 0 <= e < ne:
                    raise SurfaceError(f"face {fi} refers to unknown edge {e}")
                edge_faces[e].append(fi)
        for e, fs in enumerate(edge_faces):
            if len(fs) not in (1, 2):
                raise SurfaceError(
                    f"edge {e} lies in {len(fs)} faces, expected 1 or 2")

        for v in self.open_vertices:
            if not 0 <= v < n:
                raise SurfaceError(f"open vertex {v} out of range")
        for e in self.open_edges:
            if not 0 <= e < ne:
                raise SurfaceError(f"open edge {e} out of range")
            if len(edge_faces[e]) != 1:
                raise SurfaceError(f"open edge {e} is not a boundary edge")
            u, v = self.edges[e]
            if u not in self.open_vertices or v not in self.open_vertices:
                raise SurfaceError(f"open edge {e} has a non-open endpoint")
        touched = set()
        for e in self.open_edges:
            touched.update(self.edges[e])
        for v in self.open_vertices:
            if v not in touched:
                raise SurfaceError(f"open vertex {v} touches no open edge")

        self.edge_faces = tuple(tuple(fs) for fs in edge_faces)

    def _build_arrays(self):
        n, ne = self.vertex_count, len(self.edges)
        self.edge_u = np.fromiter((u for u, _ in self.edges), np.int32, ne)
        self.edge_v = np.fromiter((v for _, v in self.edges), np.int32, ne)

        adj: list[list[int]] = [[] for _ in range(n)]
        for e, (u, v) in enumerate(self.edges):
            adj[u].append(e)
            adj[v].append(e)
        self.adjacency = tuple(tuple(a) for a in adj)

        # CSR incidence, neighbors listed in ascending edge index
        indptr = np.zeros(n + 1, np.int64)
        for v, a in enumerate(adj):
            indptr[v + 1] = indptr[v] + len(a)
        adj_edge = np.empty(indptr[-1], np.int32)
        adj_other = np.empty(indptr[-1], np.int32)
        pos = indptr[:-1].copy()
        for e, (u, v) in enumerate(self.edges):
            adj_edge[pos[u]] = e
            adj_other[pos[u]] = v
            pos[u] += 1
            adj_edge[pos[v]] = e
            adj_other[pos[v]] = u
            pos[v] += 1
        self.adj_indptr = indptr
        self.adj_edge = adj_edge
        self.adj_other = adj_other

        self.open_vertex_mask = np.zeros(n, bool)
        for v in self.open_vertices:
            self.open_vertex_mask[v] = True
        self.open_edge_mask = np.zeros(ne, bool)
        for e in self.open_edges:
            self.open_edge_mask[e] = True
        self.qubit_edge_index = np.flatnonzero(~self.open_edge_mask).astype(np.int32)
        for a in (self.edge_u, self.edge_v, self.adj_indptr, self.adj_edge,
                  self.adj_other, self.open_vertex_mask, self.open_edge_mask,
                  self.qubit_edge_index):
            a.setflags(write=False)

    # -- basic accessors ----------------------------------------------------

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    @property
    def qubit_edges(self) -> frozenset[int]:
        """Edges that carry a qubit (all non-open edges)."""
        return frozenset(self.qubit_edge_index.tolist())

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_mask(self, edges) -> np.ndarray:
        mask = np.zeros(self.edge_count, bool)
        for e in edges:
            mask[e] = True
        return mask

    def vertex_mask(self, vertices) -> np.ndarray:
        mask = np.zeros(self.vertex_count, bool)
        for v in vertices:
            mask[v] = True
        return mask

    def __repr__(self):
        return (f"CombinatorialSurface(|V|={self.vertex_count}, "
                f"|E|={self.edge_count}, |F|={self.face_count}, "
                f"open={len(self.open_vertices)}v/{len(self.open_edges)}e)")


# -- boundary operator ------------------------------------------------------

def _boundary_mask(s: CombinatorialSurface, edge_mask: np.ndarray,
                   restrict: bool = True) -> np.ndarray:
    sel = np.flatnonzero(edge_mask)
    ends = np.concatenate([s.edge_u[sel], s.edge_v[sel]])
    odd = (np.bincount(ends, minlength=s.vertex_count) & 1).astype(bool)
    if restrict:
        odd &= ~s.open_vertex_mask
    return odd


def boundary_operator(s: CombinatorialSurface, a) -> frozenset[int]:
    """Vertices incident to an odd number of edges of ``a`` (open included)."""
    mask = _boundary_mask(s, s.edge_mask(a), restrict=False)
    return frozenset(np.flatnonzero(mask).tolist())


def restricted_boundary(s: CombinatorialSurface, a) -> frozenset[int]:
    """Boundary of ``a`` restricted to non-open vertices."""
    mask = _boundary_mask(s, s.edge_mask(a), restrict=True)
    return frozenset(np.flatnonzero(mask).tolist())


# -- builders ---------------------------------------------------------------

def build_torus(L: int) -> CombinatorialSurface:
    """Square lattice on the torus: L^2 vertices, 2 L^2 edges, L^2 faces.

    Horizontal edge h(x,y) joins (x,y)-(x+1,y); vertical edge v(x,y) joins
    (x,y)-(x,y+1); indices wrap modulo L.
    """
    if L < 2:
        raise SurfaceError("degenerate lattice: torus needs L >= 2")

    def vid(x, y):
        return (y % L) * L + (x % L)

    def h(x, y):
        return (y % L) * L + (x % L)

    def v(x, y):
        return L * L + (y % L) * L + (x % L)

    edges = []
    for y in range(L):
        for x in range(L):
            edges.append((vid(x, y), vid(x + 1, y)))
    for y in range(L):
        for x in range(L):
            edges.append((vid(x, y), vid(x, y + 1)))
    faces = []
    for y in range(L):
        for x in range(L):
            faces.append((h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)))
    return CombinatorialSurface(
        L * L, edges, faces,
        allow_parallel_edges=(L == 2),
        meta={"kind": "torus", "L": L})


def build_planar(Lx: int, Ly: int) -> CombinatorialSurface:
    """Rectangular patch with open left/right and closed top/bottom boundary.

    Vertices form an (Lx+1) x (Ly+1) grid.  The vertical edges of the
    leftmost and rightmost columns are open together with their endpoints,
    so the patch encodes a single logical qubit.
    """
    if Lx < 2 or Ly < 2:
        raise SurfaceError("degenerate lattice: planar patch needs Lx, Ly >= 2")
    W = Lx + 1

    def vid(x, y):
        return y * W + x

    nh = Lx * (Ly + 1)

    def h(x, y):
        return y * Lx + x

    def v(x, y):
        return nh + y * W + x

    edges = []
    for y in range(Ly + 1):
        for x in range(Lx):
            edges.append((vid(x, y), vid(x + 1, y)))
    for y in range(Ly):
        for x in range(W):
            edges.append((vid(x, y), vid(x, y + 1)))
    faces = []
    for y in range(Ly):
        for x in range(Lx):
            faces.append((h(x, y), h(x, y + 1), v(x, y), v(x + 1, y)))
    open_vertices = [vid(0, y) for y in range(Ly + 1)]
    open_vertices += [vid(Lx, y) for y in range(Ly + 1)]
    open_edges = [v(0, y) for y in range(Ly)] + [v(Lx, y) for y in range(Ly)]
    return CombinatorialSurface(
        (Lx + 1) * (Ly + 1), edges, faces, open_vertices, open_edges,
        meta={"kind": "planar", "Lx": Lx, "Ly": Ly})


# -- duality ----------------------------------------------------------------

@dataclass(frozen=True)
class DualMap:
    """Dual surface plus the qubit-edge bijection with the primal.

    ``to_dual[e]`` is the dual edge of primal edge ``e`` (-1 for open
    primal edges); ``to_primal[d]`` inverts it (-1 for open dual edges).
    """
    surface: CombinatorialSurface
    to_dual: np.ndarray
    to_primal: np.ndarray


@functools.lru_cache(maxsize=64)
def dual_map(s: CombinatorialSurface) -> DualMap:
    """Build the dual surface of ``s``.

    Dual vertices are the primal faces; each primal qubit edge becomes the
    dual edge joining its adjacent faces.  Boundary roles swap: a primal
    closed-boundary edge gets a fresh open dual endpoint, and the chain of
    those open vertices along a closed boundary is joined by open dual edges.
    Dual faces correspond to non-open primal vertices.
    """
    ne = s.edge_count
    n_dual = s.face_count
    dual_edges: list[tuple[int, int]] = []
    to_dual = np.full(ne, -1, np.int32)
    to_primal: list[int] = []
    w_of_edge: dict[int, int] = {}
    dual_open_vertices: list[int] = []
    for e in s.qubit_edge_index.tolist():
        fs = s.edge_faces[e]
        if len(fs) == 2:
            pair = (fs[0], fs[1])
        else:  # closed boundary edge: open endpoint on the dual side
            w = n_dual
            n_dual += 1
            w_of_edge[e] = w
            dual_open_vertices.append(w)
            pair = (fs[0], w)
        to_dual[e] = len(dual_edges)
        to_primal.append(e)
        dual_edges.append(pair)

    # chain open dual vertices along each closed primal boundary
    open_dual_edges: list[int] = []
    open_edge_at_vertex: dict[int, int] = {}
    for v in range(s.vertex_count):
        if v in s.open_vertices:
            continue
        b = [e for e in s.adjacency[v] if e in w_of_edge]
        if not b:
            continue
        if len(b) != 2:
            raise SurfaceError(
                f"vertex {v} meets {len(b)} closed boundary edges; "
                "dual boundary is ill-defined")
        idx = len(dual_edges)
        dual_edges.append((w_of_edge[b[0]], w_of_edge[b[1]]))
        to_primal.append(-1)
        open_dual_edges.append(idx)
        open_edge_at_vertex[v] = idx

    dual_faces = []
    for v in range(s.vertex_count):
        if v in s.open_vertices:
            continue
        face = [int(to_dual[e]) for e in s.adjacency[v] if to_dual[e] >= 0]
        if v in open_edge_at_vertex:
            face.append(open_edge_at_vertex[v])
        if face:
            dual_faces.append(tuple(face))

    surface = CombinatorialSurface(
        n_dual, dual_edges, dual_faces, dual_open_vertices, open_dual_edges,
        allow_parallel_edges=s.allow_parallel_edges,
        meta={"kind": "dual", "of": s.meta.get("kind")})
    to_dual.setflags(write=False)
    tp = np.asarray(to_primal, np.int32)
    tp.setflags(write=False)
    return DualMap(surface, to_dual, tp)


def dual(s: CombinatorialSurface) -> CombinatorialSurface:
    """Dual surface (faces become vertices); see :func:`dual_map`."""
    return dual_map(s).surface


# -- file format ------------------------------------------------------------

def parse_surface(text: str, *, allow_parallel_edges: bool = False) -> CombinatorialSurface:
    """Parse the line-oriented surface format.

    Header ``surface <vertex_count>``, then ``edge <u> <v>`` lines (edge
    index = order of appearance), ``face <e1> <e2> ...`` lines and optional
    ``open_vertex <v>`` / ``open_edge <e>`` lines.  ``#`` starts a comment.
    """
    vertex_count = None
    edges: list[tuple[int, int]] = []
    faces: list[tuple[int, ...]] = []
    open_vertices: list[int] = []
    open_edges: list[int] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw, rest = parts[0], parts[1:]
        try:
            args = [int(t) for t in rest]
        except ValueError:
            raise SurfaceParseError(f"non-integer field in {kw!r} directive", ln)
        if kw == "surface":
            if vertex_count is not None:
                raise SurfaceParseError("duplicate surface header", ln)
            if len(args) != 1:
                raise SurfaceParseError("surface header takes one integer", ln)
            vertex_count = args[0]
        elif vertex_count is None:
            raise SurfaceParseError("missing 'surface <vertex_count>' header", ln)
        elif kw == "edge":
            if len(args) != 2:
                raise SurfaceParseError("edge takes two endpoints", ln)
            edges.append((args[0], args[1]))
        elif kw == "face":
            if not args:
                raise SurfaceParseError("face needs at least one edge", ln)
            faces.append(tuple(args))
        elif kw == "open_vertex":
            if len(args) != 1:
                raise SurfaceParseError("open_vertex takes one vertex", ln)
            open_vertices.append(args[0])
        elif kw == "open_edge":
            if len(args) != 1:
                raise SurfaceParseError("open_edge takes one edge", ln)
            open_edges.append(args[0])
        else:
            raise SurfaceParseError(f"unknown directive {kw!r}", ln)
    if vertex_count is None:
        raise SurfaceParseError("missing 'surface <vertex_count>' header")
    return CombinatorialSurface(vertex_count, edges, faces, open_vertices,
                                open_edges,
                                allow_parallel_edges=allow_parallel_edges)


def load_surface(path, *, allow_parallel_edges: bool = False) -> CombinatorialSurface:
    """Load and validate a surface file."""
    return parse_surface(Path(path).read_text(),
                         allow_parallel_edges=allow_parallel_edges)


def dump_surface(s: CombinatorialSurface) -> str:
    """Serialize a surface in the line-oriented format."""
    lines = [f"surface {s.vertex_count}"]
    lines += [f"edge {u} {v}" for u, v in s.edges]
    lines += ["face " + " ".join(str(e) for e in face) for face in s.faces]
    lines += [f"open_vertex {v}" for v in sorted(s.open_vertices)]
    lines += [f"open_edge {e}" for e in sorted(s.open_edges)]
    return "\n".join(lines) + "\n"


def save_surface(s: CombinatorialSurface, path) -> None:
    Path(path).write_text(dump_surface(s))
