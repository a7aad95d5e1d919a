"""Surface meshes of flat triangles and planar quadrilaterals in R^3.

A mesh is a regular triangulation: two distinct closed elements intersect
in nothing, one vertex, or one full edge, and shared edges are identified
affinely.  Element maps are affine (triangles) or bilinear (quads) from
the reference elements; only flat elements are supported, which keeps all
polynomial operations exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .polyspace import TRI, QUAD, TRI_EDGES, QUAD_EDGES, TRI_VERTICES, QUAD_VERTICES
from .quadrature import gauss_01


class MeshError(Exception):
    """Invalid mesh input (parse error, dangling vertex, bad orientation)."""


class RegularityError(MeshError):
    """Violation of mesh regularity; names the offending elements."""


class ElementMap:
    """Affine (triangle) or bilinear (quad) map from the reference element.

    Stored by the images of the reference vertices; quads must be planar.
    """

    def __init__(self, kind: str, corners: np.ndarray):
        self.kind = kind
        self.corners = np.asarray(corners, dtype=float)
        n = 3 if kind == TRI else 4
        if self.corners.shape != (n, 3):
            raise MeshError(f"{kind} element needs {n} corner points in R^3")
        self.diameter = max(
            float(np.linalg.norm(a - b))
            for i, a in enumerate(self.corners)
            for b in self.corners[i + 1 :]
        )
        if kind == TRI:
            self._J = np.column_stack(
                [self.corners[1] - self.corners[0], self.corners[2] - self.corners[1]]
            )
        else:
            c = self.corners
            self._bilin = (
                c[0],
                c[1] - c[0],
                c[3] - c[0],
                c[0] - c[1] + c[2] - c[3],
            )

    @property
    def is_parallelogram(self) -> bool:
        if self.kind == TRI:
            return True
        return bool(np.linalg.norm(self._bilin[3]) <= 1e-12 * self.diameter)

    def map_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        xi, eta = pts[:, 0:1], pts[:, 1:2]
        if self.kind == TRI:
            return self.corners[0] + xi * self._J[:, 0] + eta * self._J[:, 1]
        a, bx, by, bxy = self._bilin
        return a + xi * bx + eta * by + (xi * eta) * bxy

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = len(pts)
        if self.kind == TRI:
            return np.broadcast_to(self._J, (n, 3, 2)).copy()
        a, bx, by, bxy = self._bilin
        J = np.empty((n, 3, 2))
        J[:, :, 0] = bx + pts[:, 1:2] * bxy
        J[:, :, 1] = by + pts[:, 0:1] * bxy
        return J

    def gramian_eigs(self, pts: np.ndarray) -> np.ndarray:
        """Eigenvalues (n,2) of J^T J at the given reference points."""
        J = self.jacobian(pts)
        G = np.einsum("nki,nkj->nij", J, J)
        tr = G[:, 0, 0] + G[:, 1, 1]
        det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
        disc = np.sqrt(np.maximum(tr * tr / 4 - det, 0.0))
        return np.column_stack([tr / 2 - disc, tr / 2 + disc])

    def surface_measure(self, pts: np.ndarray) -> np.ndarray:
        J = self.jacobian(pts)
        G = np.einsum("nki,nkj->nij", J, J)
        det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
        return np.sqrt(np.maximum(det, 0.0))

    def normal(self, pts: np.ndarray) -> np.ndarray:
        J = self.jacobian(pts)
        n = np.cross(J[:, :, 0], J[:, :, 1], axis=1)
        return n / np.linalg.norm(n, axis=1, keepdims=True)


@dataclass
class Element:
    kind: str
    vids: tuple[int, ...]
    emap: ElementMap

    @property
    def local_edges(self):
        return TRI_EDGES if self.kind == TRI else QUAD_EDGES

    @property
    def nverts(self) -> int:
        return 3 if self.kind == TRI else 4


@dataclass
class Edge:
    vids: tuple[int, int]          # canonical order: low id first
    elements: list[tuple[int, int]] = field(default_factory=list)  # (elem id, local edge index)
    boundary: bool = False


@dataclass
class Patch:
    kind: str                      # "vertex" or "edge"
    seed: int                      # vertex id or edge id
    element_ids: tuple[int, ...]
    diameter: float


class SurfaceMesh:
    """Immutable after construction; derived tables built eagerly."""

    def __init__(self, vertices, triangles=(), quads=(), closed: bool = False,
                 validate: bool = True, element_list=None):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be an (n,3) array")
        self.closed = bool(closed)
        if element_list is None:
            element_list = [(TRI, t) for t in triangles] + [(QUAD, q) for q in quads]
        self.elements: list[Element] = []
        for kind, ids in element_list:
            vids = tuple(int(v) for v in ids)
            want = 3 if kind == TRI else 4
            if len(vids) != want:
                raise MeshError(f"{kind} elements need {want} vertex ids")
            if len(set(vids)) != want:
                raise MeshError(f"element {vids} repeats a vertex")
            self.elements.append(Element(kind, vids, ElementMap(kind, self.vertices[list(vids)])))
        if not self.elements:
            raise MeshError("mesh has no elements")
        self._build_edges()
        self._classify()
        if validate:
            self.validate()

    # -- construction -----------------------------------------------------
    def _build_edges(self):
        self.edges: list[Edge] = []
        lookup: dict[tuple[int, int], int] = {}
        self.elem_edges: list[list[int]] = []
        for kid, el in enumerate(self.elements):
            ids = []
            for lei, (a, b) in enumerate(el.local_edges):
                va, vb = el.vids[a], el.vids[b]
                key = (min(va, vb), max(va, vb))
                if key not in lookup:
                    lookup[key] = len(self.edges)
                    self.edges.append(Edge(vids=key))
                eid = lookup[key]
                self.edges[eid].elements.append((kid, lei))
                ids.append(eid)
            self.elem_edges.append(ids)
        for e in self.edges:
            e.boundary = len(e.elements) == 1
        self.vertex_elems: list[list[int]] = [[] for _ in range(len(self.vertices))]
        for kid, el in enumerate(self.elements):
            for v in el.vids:
                self.vertex_elems[v].append(kid)

    def _classify(self):
        self.vertex_boundary = np.zeros(len(self.vertices), dtype=bool)
        for e in self.edges:
            if e.boundary:
                for v in e.vids:
                    self.vertex_boundary[v] = True

    # -- validation --------------------------------------------------------
    def validate(self):
        for v, els in enumerate(self.vertex_elems):
            if not els:
                raise MeshError(f"dangling vertex {v}")
        for eid, e in enumerate(self.edges):
            if len(e.elements) > 2:
                kids = [k for k, _ in e.elements]
                raise RegularityError(f"edge {eid} shared by elements {kids}")
            if self.closed and e.boundary:
                raise RegularityError(f"closed surface has boundary edge {eid}")
        # pairwise intersection: > 2 shared vertices, or 2 shared vertices
        # that do not form a common edge, violates regularity
        edge_keys = {e.vids for e in self.edges}
        for i, a in enumerate(self.elements):
            for j in range(i + 1, len(self.elements)):
                b = self.elements[j]
                shared = set(a.vids) & set(b.vids)
                if len(shared) > 2:
                    raise RegularityError(f"elements {i} and {j} share {len(shared)} vertices")
                if len(shared) == 2:
                    key = (min(shared), max(shared))
                    if key not in edge_keys:
                        raise RegularityError(
                            f"elements {i} and {j} share two vertices without a common edge"
                        )
                    a_has = any(tuple(sorted((a.vids[x], a.vids[y]))) == key for x, y in a.local_edges)
                    b_has = any(tuple(sorted((b.vids[x], b.vids[y]))) == key for x, y in b.local_edges)
                    if not (a_has and b_has):
                        raise RegularityError(
                            f"elements {i} and {j} overlap in a partial edge"
                        )
        self._check_tjunctions()
        self._check_orientation()
        self._check_edge_identification()
        for kid, el in enumerate(self.elements):
            if el.kind == QUAD:
                c = el.emap.corners
                n = np.cross(c[1] - c[0], c[3] - c[0])
                if np.linalg.norm(n) <= 1e-14 * el.emap.diameter ** 2:
                    raise RegularityError(f"degenerate quad {kid}")
                off = abs(np.dot(c[2] - c[0], n / np.linalg.norm(n)))
                if off > 1e-9 * el.emap.diameter:
                    raise RegularityError(f"quad {kid} is not planar")
            lam = el.emap.gramian_eigs(_gamma_samples(el.kind))
            if np.min(lam[:, 0]) <= 1e-12 * el.emap.diameter ** 2:
                raise RegularityError(f"element {kid} has a degenerate map")

    def _check_tjunctions(self):
        # a vertex lying strictly inside another element's edge segment
        for eid, e in enumerate(self.edges):
            a, b = self.vertices[e.vids[0]], self.vertices[e.vids[1]]
            ab = b - a
            L2 = float(ab @ ab)
            for v in range(len(self.vertices)):
                if v in e.vids:
                    continue
                t = float((self.vertices[v] - a) @ ab) / L2
                if 1e-9 < t < 1 - 1e-9:
                    d = self.vertices[v] - (a + t * ab)
                    if np.linalg.norm(d) < 1e-9 * math.sqrt(L2):
                        kids = [k for k, _ in e.elements]
                        raise RegularityError(
                            f"vertex {v} splits edge {eid} of elements {kids}"
                        )

    def _check_orientation(self):
        for eid, e in enumerate(self.edges):
            if len(e.elements) != 2:
                continue
            dirs = []
            for kid, lei in e.elements:
                el = self.elements[kid]
                a, b = el.local_edges[lei]
                dirs.append((el.vids[a], el.vids[b]))
            if dirs[0] == dirs[1]:
                kids = [k for k, _ in e.elements]
                raise RegularityError(
                    f"elements {kids} traverse edge {eid} in the same direction"
                )

    def _check_edge_identification(self):
        # compare the two parametrizations of each shared edge at 3 points
        for eid, e in enumerate(self.edges):
            if len(e.elements) != 2:
                continue
            pts = []
            for kid, lei in e.elements:
                el = self.elements[kid]
                a, b = el.local_edges[lei]
                ra = (TRI_VERTICES if el.kind == TRI else QUAD_VERTICES)[a]
                rb = (TRI_VERTICES if el.kind == TRI else QUAD_VERTICES)[b]
                # orient from low to high global id
                if el.vids[a] > el.vids[b]:
                    ra, rb = rb, ra
                ts = np.array([[0.0], [0.5], [1.0]])
                pts.append(el.emap.map_points(ra + ts * (rb - ra)))
            if np.max(np.linalg.norm(pts[0] - pts[1], axis=1)) > 1e-9 * self.elements[0].emap.diameter:
                kids = [k for k, _ in e.elements]
                raise RegularityError(f"edge {eid} of elements {kids} is not identified affinely")

    # -- queries -------------------------------------------------------------
    def interior_vertices(self) -> np.ndarray:
        return np.where(~self.vertex_boundary)[0]

    def boundary_vertices(self) -> np.ndarray:
        return np.where(self.vertex_boundary)[0]

    def interior_edges(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if not e.boundary]

    def boundary_edges(self) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.boundary]

    def classify(self):
        """(interior vertices, boundary vertices, interior edges, boundary edges)."""
        return (
            list(self.interior_vertices()),
            list(self.boundary_vertices()),
            self.interior_edges(),
            self.boundary_edges(),
        )

    def vertex_patch(self, v: int) -> Patch:
        if not 0 <= v < len(self.vertices):
            raise MeshError(f"vertex id {v} out of range")
        kids = tuple(sorted(self.vertex_elems[v]))
        return Patch("vertex", v, kids, self._patch_diameter(kids))

    def edge_patch(self, eid: int) -> Patch:
        if not 0 <= eid < len(self.edges):
            raise MeshError(f"edge id {eid} out of range")
        kids = tuple(sorted(k for k, _ in self.edges[eid].elements))
        return Patch("edge", eid, kids, self._patch_diameter(kids))

    def _patch_diameter(self, kids) -> float:
        vids = sorted({v for k in kids for v in self.elements[k].vids})
        pts = self.vertices[vids]
        return max(
            float(np.linalg.norm(a - b)) for i, a in enumerate(pts) for b in pts[i + 1 :]
        ) if len(pts) > 1 else 0.0

    def element_diameters(self) -> np.ndarray:
        return np.array([el.emap.diameter for el in self.elements])

    def diameter(self) -> float:
        pts = self.vertices
        hull = pts  # desk scale: all-pairs is fine
        return max(
            float(np.linalg.norm(a - b)) for i, a in enumerate(hull) for b in hull[i + 1 :]
        )

    # -- shape regularity ------------------------------------------------------
    def shape_regularity_constant(self, samples_per_element: int = 4) -> float:
        gamma = 0.0
        for kid, el in enumerate(self.elements):
            pts = _gamma_samples(el.kind, samples_per_element)
            lam = el.emap.gramian_eigs(pts)
            h2 = el.emap.diameter ** 2
            lmin = np.min(lam[:, 0])
            if lmin <= 1e-12 * h2:
                raise RegularityError(f"element {kid} has degenerate Gramian")
            gamma = max(gamma, float(np.max(h2 / lam[:, 0] + lam[:, 1] / h2)))
        return gamma

    # -- coloring ---------------------------------------------------------------
    def color_patches(self, kind: str) -> dict[int, int]:
        """Greedy conflict-graph coloring; equal colors share no element."""
        if kind == "vertex":
            seeds = list(self.interior_vertices()) + list(self.boundary_vertices())
            patches = {s: set(self.vertex_patch(s).element_ids) for s in seeds}
        elif kind == "edge":
            seeds = list(range(len(self.edges)))
            patches = {s: set(self.edge_patch(s).element_ids) for s in seeds}
        else:
            raise ValueError("patch kind must be 'vertex' or 'edge'")
        elem_owner: dict[int, list[int]] = {}
        for s, els in patches.items():
            for k in els:
                elem_owner.setdefault(k, []).append(s)
        colors: dict[int, int] = {}
        for s in sorted(seeds):
            used = set()
            for k in patches[s]:
                for t in elem_owner[k]:
                    if t != s and t in colors:
                        used.add(colors[t])
            c = 0
            while c in used:
                c += 1
            colors[s] = c
        return colors


def _gamma_samples(kind: str, n: int = 4) -> np.ndarray:
    x, _ = gauss_01(max(n, 1))
    if kind == TRI:
        pts = [(a, a * b) for a in x for b in x]
    else:
        pts = [(a, b) for a in x for b in x]
    return np.array(pts)


# ----------------------------------------------------------------------------
# file format and generators
# ----------------------------------------------------------------------------


def load_mesh(path) -> SurfaceMesh:
    """Load the JSON mesh format; validates regularity."""
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise MeshError(f"cannot parse mesh file {path}: {exc}") from exc
    for key in ("vertices",):
        if key not in data:
            raise MeshError(f"mesh file missing field {key!r}")
    return SurfaceMesh(
        np.asarray(data["vertices"], dtype=float),
        triangles=data.get("triangles", []),
        quads=data.get("quads", []),
        closed=bool(data.get("closed", False)),
    )


def save_mesh(mesh: SurfaceMesh, path) -> None:
    data = {
        "vertices": mesh.vertices.tolist(),
        "triangles": [list(e.vids) for e in mesh.elements if e.kind == TRI],
        "quads": [list(e.vids) for e in mesh.elements if e.kind == QUAD],
        "closed": mesh.closed,
    }
    with open(path, "w") as f:
        json.dump(data, f)


def screen_quads(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> SurfaceMesh:
    """Structured nx-by-ny quad grid on the z=0 screen, CCW w.r.t. +z."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    verts = [(x, y, 0.0) for y in ys for x in xs]

    def vid(i, j):
        return j * (nx + 1) + i

    quads = [
        (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
        for j in range(ny)
        for i in range(nx)
    ]
    return SurfaceMesh(np.array(verts), quads=quads)


def screen_triangles(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> SurfaceMesh:
    """Each grid cell split along its (low, high) diagonal."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    verts = [(x, y, 0.0) for y in ys for x in xs]

    def vid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    return SurfaceMesh(np.array(verts), triangles=tris)


def screen_mixed(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> SurfaceMesh:
    """Quads except the last column, which is split into triangles."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    verts = [(x, y, 0.0) for y in ys for x in xs]

    def vid(i, j):
        return j * (nx + 1) + i

    quads, tris = [], []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            if i == nx - 1:
                tris.append((a, b, c))
                tris.append((a, c, d))
            else:
                quads.append((a, b, c, d))
    return SurfaceMesh(np.array(verts), triangles=tris, quads=quads)


def cube_surface(n: int = 1, side: float = 1.0) -> SurfaceMesh:
    """Closed surface of a cube, n x n quads per face, outward orientation."""
    vert_index: dict[tuple[float, float, float], int] = {}
    verts: list[tuple[float, float, float]] = []

    def getv(p):
        key = tuple(round(float(c), 12) for c in p)
        if key not in vert_index:
            vert_index[key] = len(verts)
            verts.append(key)
        return vert_index[key]

    quads = []
    s = side
    grid = np.linspace(0.0, s, n + 1)
    # each face: origin, axis u, axis v chosen so u x v points outward
    faces = [
        ((0, 0, 0), (0, 1, 0), (0, 0, 1)),   # x = 0, normal -x
        ((s, 0, 0), (0, 0, 1), (0, 1, 0)),   # x = s, normal +x
        ((0, 0, 0), (0, 0, 1), (1, 0, 0)),   # y = 0, normal -y
        ((0, s, 0), (1, 0, 0), (0, 0, 1)),   # y = s, normal +y
        ((0, 0, 0), (1, 0, 0), (0, 1, 0)),   # z = 0, normal -z
        ((0, 0, s), (0, 1, 0), (1, 0, 0)),   # z = s, normal +z
    ]
    for origin, u, v in faces:
        o = np.array(origin, dtype=float)
        u = np.array(u, dtype=float)
        v = np.array(v, dtype=float)
        for i in range(n):
            for j in range(n):
                p00 = o + grid[i] * u + grid[j] * v
                p10 = o + grid[i + 1] * u + grid[j] * v
                p11 = o + grid[i + 1] * u + grid[j + 1] * v
                p01 = o + grid[i] * u + grid[j + 1] * v
                quads.append((getv(p00), getv(p10), getv(p11), getv(p01)))
    return SurfaceMesh(np.array(verts, dtype=float), quads=quads, closed=True)


def refine_uniform(mesh: SurfaceMesh) -> SurfaceMesh:
    """Red refinement: each triangle/quad into 4 children via edge midpoints
    (quads also get a center point).  Children of parent k are 4k..4k+3."""
    verts = [tuple(p) for p in mesh.vertices]
    lookup = {tuple(round(c, 12) for c in p): i for i, p in enumerate(mesh.vertices)}

    def getv(p):
        key = tuple(round(float(c), 12) for c in p)
        if key not in lookup:
            lookup[key] = len(verts)
            verts.append(tuple(float(c) for c in p))
        return lookup[key]

    tris, quads = [], []
    for el in mesh.elements:
        P = mesh.vertices[list(el.vids)]
        if el.kind == TRI:
            a, b, c = el.vids
            mab = getv((P[0] + P[1]) / 2)
            mbc = getv((P[1] + P[2]) / 2)
            mca = getv((P[2] + P[0]) / 2)
            tris += [(a, mab, mca), (mab, b, mbc), (mca, mbc, c), (mab, mbc, mca)]
        else:
            a, b, c, d = el.vids
            mab = getv((P[0] + P[1]) / 2)
            mbc = getv((P[1] + P[2]) / 2)
            mcd = getv((P[2] + P[3]) / 2)
            mda = getv((P[3] + P[0]) / 2)
            ctr = getv((P[0] + P[1] + P[2] + P[3]) / 4)
            quads += [
                (a, mab, ctr, mda),
                (mab, b, mbc, ctr),
                (ctr, mbc, c, mcd),
                (mda, ctr, mcd, d),
            ]
    return SurfaceMesh(np.array(verts, dtype=float), triangles=tris, quads=quads,
                       closed=mesh.closed)
