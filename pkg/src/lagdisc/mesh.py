"""Triangulated unit-disc meshes and piecewise-linear field operators.

The mesh generator produces structured polar meshes whose triangulation
alternates quad diagonals, so the mesh is invariant under the full
dihedral symmetry group of the sector layout (for even sector counts).
Rotation-equivariant fields then produce exactly cancelling sums in the
boundary pairing below, which is what pushes those quadratures to
rounding level instead of O(h^2).

All reductions are performed in fixed node/triangle index order so
repeated runs produce bitwise-identical numbers.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DiscMesh",
    "InvalidCollar",
    "InvalidLoop",
    "InvalidParameter",
    "build_polar_mesh",
    "element_gradient",
    "interpolate_at_centroids",
    "boundary_trace_pairing",
    "loop_integrals",
    "weak_divergence_residual",
]

EPS = np.finfo(float).eps


class InvalidParameter(ValueError):
    pass


class InvalidCollar(ValueError):
    pass


class InvalidLoop(ValueError):
    pass


@dataclass
class DiscMesh:
    """Conforming triangulation of the closed unit disc.

    Attributes
    ----------
    nodes : (N, 2) float array
    triangles : (T, 3) int array, counterclockwise
    boundary_edges : (B, 2) int array, a single CCW cycle tracing r = 1
    is_boundary : (N,) bool array
    polar_info : dict or None
        Present for meshes from :func:`build_polar_mesh`; carries
        (n_rings, n_sectors, grading, radii) and enables fast point
        location.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    is_boundary: np.ndarray
    polar_info: dict | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    # -- derived quantities, cached ------------------------------------
    @property
    def areas(self):
        if "areas" not in self._cache:
            p = self.nodes[self.triangles]
            e1 = p[:, 1] - p[:, 0]
            e2 = p[:, 2] - p[:, 0]
            self._cache["areas"] = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        return self._cache["areas"]

    @property
    def hat_gradients(self):
        """(T, 3, 2) array: gradient of the hat function of each local vertex."""
        if "hat_gradients" not in self._cache:
            p = self.nodes[self.triangles]
            g = np.empty((len(self.triangles), 3, 2))
            for a in range(3):
                edge = p[:, (a + 2) % 3] - p[:, (a + 1) % 3]
                g[:, a, 0] = -edge[:, 1]
                g[:, a, 1] = edge[:, 0]
            g /= (2.0 * self.areas)[:, None, None]
            self._cache["hat_gradients"] = g
        return self._cache["hat_gradients"]

    @property
    def centroids(self):
        if "centroids" not in self._cache:
            self._cache["centroids"] = self.nodes[self.triangles].mean(axis=1)
        return self._cache["centroids"]

    @property
    def h_max(self):
        """Longest edge length; the mesh-size parameter of all reports."""
        if "h_max" not in self._cache:
            p = self.nodes[self.triangles]
            h = 0.0
            for a in range(3):
                e = p[:, (a + 1) % 3] - p[:, a]
                h = max(h, float(np.max(np.hypot(e[:, 0], e[:, 1]))))
            self._cache["h_max"] = h
        return self._cache["h_max"]

    @property
    def node_r(self):
        return np.hypot(self.nodes[:, 0], self.nodes[:, 1])

    @property
    def node_theta(self):
        return np.arctan2(self.nodes[:, 1], self.nodes[:, 0])

    def incident_triangles(self):
        """List of triangle-index arrays, one per node (cached)."""
        if "incident" not in self._cache:
            lists = [[] for _ in range(len(self.nodes))]
            for t, tri in enumerate(self.triangles):
                for i in tri:
                    lists[i].append(t)
            self._cache["incident"] = [np.array(l, dtype=int) for l in lists]
        return self._cache["incident"]

    # -- validation ------------------------------------------------------
    def validate(self):
        if np.any(self.areas < 1e-14):
            raise InvalidParameter("mesh has a non-positive or degenerate triangle")
        r = self.node_r[self.is_boundary]
        if np.any(np.abs(r - 1.0) > 1e-12):
            raise InvalidParameter("boundary node off the unit circle")
        # boundary edges form one closed cycle
        be = self.boundary_edges
        if len(be) and (np.any(be[1:, 0] != be[:-1, 1]) or be[0, 0] != be[-1, 1]):
            raise InvalidParameter("boundary edges do not form a single closed cycle")
        # conformity: interior edges shared by exactly 2 triangles
        edges = {}
        for tri in self.triangles:
            for a in range(3):
                key = (min(tri[a], tri[(a + 1) % 3]), max(tri[a], tri[(a + 1) % 3]))
                edges[key] = edges.get(key, 0) + 1
        bset = {(min(i, j), max(i, j)) for i, j in be}
        for key, count in edges.items():
            want = 1 if key in bset else 2
            if count != want:
                raise InvalidParameter(f"edge {key} shared by {count} triangles")
        return self

    # -- serialization -----------------------------------------------------
    def to_json_dict(self, values=None):
        d = {
            "nodes": [[float(x), float(y)] for x, y in self.nodes],
            "triangles": [[int(a), int(b), int(c)] for a, b, c in self.triangles],
            "boundary_edges": [[int(a), int(b)] for a, b in self.boundary_edges],
        }
        if values is not None:
            values = np.asarray(values)
            d["values"] = [[float(c) for c in row] for row in values]
        return d

    def dump_json(self, path, values=None):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(values), fh, sort_keys=True)
            fh.write("\n")

    # -- point location (polar meshes) ---------------------------------
    def locate(self, points):
        """Triangle index and barycentric coordinates for disc points.

        Only available on meshes built by :func:`build_polar_mesh`.
        Points must lie in the closed unit disc.
        """
        if self.polar_info is None:
            raise InvalidParameter("locate() requires a structured polar mesh")
        pts = np.atleast_2d(np.asarray(points, float))
        info = self.polar_info
        n_s = info["n_sectors"]
        radii = info["radii"]
        r = np.hypot(pts[:, 0], pts[:, 1])
        th = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi)
        if np.any(r > 1 + 1e-12):
            raise InvalidLoop("point outside the closed unit disc")
        dth = 2 * np.pi / n_s
        j = np.minimum((th / dth).astype(int), n_s - 1)
        k = np.searchsorted(radii, r * (1 - 1e-15))  # 0 -> fan, else annulus k
        tri_idx = np.empty(len(pts), dtype=int)
        bary = np.empty((len(pts), 3))
        for i in range(len(pts)):
            cands = self._cell_triangles(int(k[i]), int(j[i]), n_s, info["n_rings"])
            # neighbours guard against searchsorted ties on ring radii
            extra = []
            for kk in (k[i] - 1, k[i] + 1):
                if 0 <= kk <= info["n_rings"] - 1:
                    extra.extend(self._cell_triangles(int(kk), int(j[i]), n_s,
                                                      info["n_rings"]))
            best, best_bar, best_min = -1, None, -np.inf
            for t in list(cands) + extra:
                b = self._barycentric(t, pts[i])
                m = b.min()
                if m > best_min:
                    best, best_bar, best_min = t, b, m
            if best_min < -1e-9:
                raise InvalidLoop(f"point {pts[i]} not located in mesh")
            tri_idx[i] = best
            bary[i] = np.clip(best_bar, 0.0, None)
            bary[i] /= bary[i].sum()
        return tri_idx, bary

    def _cell_triangles(self, k, j, n_s, n_rings):
        if k <= 0:
            return [j]
        if k >= n_rings:
            k = n_rings - 1
        base = n_s + 2 * ((k - 1) * n_s + j)
        return [base, base + 1]

    def _barycentric(self, t, p):
        tri = self.triangles[t]
        a, b, c = self.nodes[tri]
        m = np.column_stack([b - a, c - a])
        lam = np.linalg.solve(m, p - a)
        return np.array([1.0 - lam[0] - lam[1], lam[0], lam[1]])

    def interpolate(self, values, points):
        """P1-interpolate nodal values at arbitrary disc points."""
        tri_idx, bary = self.locate(points)
        vals = np.asarray(values)
        return np.einsum("pa,pa...->p...", bary, vals[self.triangles[tri_idx]])


def build_polar_mesh(n_rings, n_sectors, grading=1.0):
    """Structured polar mesh of the closed unit disc.

    Ring radii are ``(k/n_rings)**(1/grading)`` so ``grading < 1``
    compresses rings toward the origin where the cone examples are
    singular.  Node count is ``1 + n_rings*n_sectors``.

    Parameters must satisfy ``n_rings >= 2``, ``n_sectors >= 8`` and
    ``0.2 <= grading <= 1``.
    """
    if n_rings < 2 or n_sectors < 8:
        raise InvalidParameter("need n_rings >= 2 and n_sectors >= 8")
    if not (0.2 <= grading <= 1.0):
        raise InvalidParameter("grading must lie in [0.2, 1]")

    radii = (np.arange(1, n_rings + 1) / n_rings) ** (1.0 / grading)
    theta = 2 * np.pi * np.arange(n_sectors) / n_sectors
    nodes = np.empty((1 + n_rings * n_sectors, 2))
    nodes[0] = 0.0
    for k in range(1, n_rings + 1):
        idx = 1 + (k - 1) * n_sectors
        nodes[idx:idx + n_sectors, 0] = radii[k - 1] * np.cos(theta)
        nodes[idx:idx + n_sectors, 1] = radii[k - 1] * np.sin(theta)

    def node(k, j):
        return 1 + (k - 1) * n_sectors + (j % n_sectors)

    tris = []
    for j in range(n_sectors):
        tris.append((0, node(1, j), node(1, j + 1)))
    for k in range(1, n_rings):
        for j in range(n_sectors):
            # CCW quad: inner theta_j, outer theta_j, outer theta_j+1, inner theta_j+1
            p0, p1 = node(k, j), node(k + 1, j)
            p2, p3 = node(k + 1, j + 1), node(k, j + 1)
            if (j + k) % 2 == 0:
                tris.append((p0, p1, p2))
                tris.append((p0, p2, p3))
            else:
                tris.append((p0, p1, p3))
                tris.append((p1, p2, p3))
    triangles = np.array(tris, dtype=int)

    boundary_edges = np.array(
        [(node(n_rings, j), node(n_rings, j + 1)) for j in range(n_sectors)],
        dtype=int)
    is_boundary = np.zeros(len(nodes), dtype=bool)
    is_boundary[1 + (n_rings - 1) * n_sectors:] = True

    mesh = DiscMesh(nodes, triangles, boundary_edges, is_boundary,
                    polar_info={"n_rings": n_rings, "n_sectors": n_sectors,
                                "grading": grading, "radii": radii})
    return mesh.validate()


def element_gradient(mesh, values):
    """Per-triangle constant gradient of a P1 nodal field.

    ``values`` has shape (N,) or (N, m); the result has shape (T, 2) or
    (T, 2, m).  Complex dtypes pass through.  Exact for affine fields,
    and exactly zero (not rounding-level) for constant fields because
    the formula differences the nodal values.
    """
    values = np.asarray(values)
    if values.shape[0] != len(mesh.nodes):
        raise ValueError("field must have one value per node")
    v = values[mesh.triangles]          # (T, 3, ...)
    dv = v[:, 1:] - v[:, :1]            # (T, 2, ...): v_a - v_0
    g = mesh.hat_gradients[:, 1:]       # (T, 2, 2)
    return np.einsum("tad,ta...->td...", g, dv)


def interpolate_at_centroids(mesh, values):
    """Average of the three nodal values on each triangle."""
    return np.asarray(values)[mesh.triangles].mean(axis=1)


def _triangles_clear_of(mesh, exclude):
    """Mask of triangles whose vertices and centroid avoid all exclusion balls."""
    ok = np.ones(len(mesh.triangles), dtype=bool)
    cent = mesh.centroids
    p = mesh.nodes[mesh.triangles]
    for center, radius in exclude:
        center = np.asarray(center, float)
        d_c = np.hypot(cent[:, 0] - center[0], cent[:, 1] - center[1])
        d_v = np.hypot(p[..., 0] - center[0], p[..., 1] - center[1]).min(axis=1)
        ok &= (d_c > radius) & (d_v > radius)
    return ok


def weak_divergence_residual(mesh, w, exclude=()):
    """Scale-invariant weak divergence residual of a per-triangle field.

    For every admissible interior hat function ``phi`` the quantity
    ``|sum_T a_T w_T . grad(phi)|`` is divided by
    ``||w||_{L2(supp phi)} * ||grad phi||_{L2} + eps`` and the maximum is
    returned.  The local ``||w||`` keeps the statistic scale invariant:
    a field with O(1) divergence scores O(h/r) regardless of mesh size,
    while discretely divergence-free fields score O(h^2) and exact
    constants score at rounding level.

    Hat functions at boundary nodes, at nodes inside an exclusion ball,
    or whose support meets an exclusion ball are skipped.  Returns 0 with
    a warning when no test function remains.
    """
    w = np.asarray(w)
    ok_tri = _triangles_clear_of(mesh, exclude)
    a = mesh.areas
    g = mesh.hat_gradients
    n = len(mesh.nodes)

    # per-node accumulators in fixed index order
    integral = np.zeros(n, dtype=w.dtype)
    grad_sq = np.zeros(n)
    w_sq = np.zeros(n)
    w2 = np.sum(np.abs(w) ** 2, axis=-1)
    contrib_ok = np.ones(n, dtype=bool)
    for aidx in range(3):
        idx = mesh.triangles[:, aidx]
        dot = np.einsum("td,td->t", g[:, aidx].astype(w.dtype), w)
        np.add.at(integral, idx, a * dot)
        np.add.at(grad_sq, idx, a * np.sum(g[:, aidx] ** 2, axis=-1))
        np.add.at(w_sq, idx, a * w2)
        bad = ~ok_tri
        np.logical_and.at(contrib_ok, idx[bad], False)

    test = contrib_ok & ~mesh.is_boundary
    for center, radius in exclude:
        center = np.asarray(center, float)
        d = np.hypot(mesh.nodes[:, 0] - center[0], mesh.nodes[:, 1] - center[1])
        test &= d > radius
    if not np.any(test):
        warnings.warn("weak_divergence_residual: empty test set")
        return 0.0
    den = np.sqrt(w_sq[test]) * np.sqrt(grad_sq[test]) + EPS
    return float(np.max(np.abs(integral[test]) / den))


def _collar_cutoff(r, collar_r0):
    t = np.clip((r - collar_r0) / (1.0 - collar_r0), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def boundary_trace_pairing(mesh, w, phi, collar_r0):
    """Distributional boundary pairing <w . nu, phi> via an annular collar.

    ``phi`` is a function of the boundary angle; it is extended radially
    and multiplied by a cubic-smoothstep cutoff ``chi`` with
    ``chi(collar_r0) = 0`` and ``chi(1) = 1``.  The return value is
    ``integral over the collar of w . grad(I_h(phi * chi))`` with the
    product interpolated at mesh nodes.  For fields with vanishing weak
    divergence in the collar the result is independent of ``collar_r0``
    up to discretization, and for smooth ``w`` it converges to the
    boundary integral of ``(w . nu) phi``.
    """
    if not (0.0 < collar_r0 < 1.0):
        raise InvalidCollar("collar_r0 must lie in (0, 1)")
    w = np.asarray(w)
    r = mesh.node_r
    vals = np.asarray(phi(mesh.node_theta)) * _collar_cutoff(r, collar_r0)
    grad = element_gradient(mesh, vals)
    contrib = mesh.areas * np.einsum("td,td->t", grad.astype(w.dtype), w)
    return complex(np.sum(contrib)) if np.iscomplexobj(w) else float(np.sum(contrib))


def loop_integrals(w, center, radius, n_quad=512):
    """Flux and circulation of a field around a circle inside the disc.

    ``w`` is a callable mapping (k, 2) points to (k, 2) vectors (real or
    complex).  Trapezoidal quadrature on the circle is spectrally
    accurate for smooth periodic integrands.
    """
    center = np.asarray(center, float)
    if np.hypot(*center) + radius >= 1.0 - 1e-12:
        raise InvalidLoop("quadrature circle exits the open unit disc")
    if radius <= 0:
        raise InvalidLoop("radius must be positive")
    t = 2 * np.pi * np.arange(n_quad) / n_quad
    nu = np.column_stack([np.cos(t), np.sin(t)])
    tau = np.column_stack([-np.sin(t), np.cos(t)])
    pts = center + radius * nu
    vals = np.asarray(w(pts))
    ds = 2 * np.pi * radius / n_quad
    flux = np.sum(np.sum(vals * nu, axis=-1)) * ds
    circ = np.sum(np.sum(vals * tau, axis=-1)) * ds
    if np.iscomplexobj(vals):
        return complex(flux), complex(circ)
    return float(flux), float(circ)
