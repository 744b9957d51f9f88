"""Constraint domains Omega in C^2.

Two representations:

* ``LevelSetDomain``: Omega = {F < 0} with outward normal gradF/|gradF|,
  Newton projection onto the boundary and a globally defined normal
  extension (needed by flows and by the adapted test-function
  construction).
* ``CurveNormalDomain``: only the boundary data that actually enters the
  free-boundary checks -- a closed curve in C^2 together with a unit
  normal field along it.  This realizes constraint domains that are
  known only through a normal field along the image of the disc
  boundary; no global hypersurface is reconstructed.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

from . import algebra

__all__ = [
    "CurveNormalDomain",
    "DegenerateNormal",
    "LevelSetDomain",
    "NotOnBoundary",
    "ProjectionDiverged",
    "Unsupported",
    "curve_domain_from_map",
    "unit_ball",
]


class NotOnBoundary(ValueError):
    pass


class ProjectionDiverged(RuntimeError):
    pass


class Unsupported(TypeError):
    pass


class DegenerateNormal(ValueError):
    pass


class LevelSetDomain:
    """Omega = {F < 0} for a scalar level-set function with gradient."""

    kind = "levelset"

    def __init__(self, F, gradF, name="levelset"):
        self.F = F
        self.gradF = gradF
        self.name = name

    def normal_extension(self, z):
        """gradF/|gradF| wherever the gradient is nonzero (off-boundary too)."""
        g = np.asarray(self.gradF(z), float)
        n = algebra.norm(g)
        if np.any(n < 1e-8):
            raise ProjectionDiverged("level-set gradient vanishes at query point")
        return g / n[..., None]

    def normal_at(self, z):
        """Unit outward normal; requires |F(z)| <= 1e-6 (point on boundary)."""
        val = np.asarray(self.F(z), float)
        if np.any(np.abs(val) > 1e-6):
            raise NotOnBoundary("point is not on the domain boundary")
        return self.normal_extension(z)

    def project_to_boundary(self, z, tol=1e-12, max_iter=60):
        """Newton projection along gradF onto {F = 0}."""
        z = np.asarray(z, float).copy()
        single = z.ndim == 1
        pts = np.atleast_2d(z)
        for _ in range(max_iter):
            val = np.asarray(self.F(pts), float)
            if np.all(np.abs(val) <= tol):
                break
            g = np.asarray(self.gradF(pts), float)
            gn2 = np.sum(g * g, axis=-1)
            if np.any(gn2 < 1e-16):
                raise ProjectionDiverged("gradient vanished during projection")
            pts = pts - (val / gn2)[..., None] * g
        else:
            raise ProjectionDiverged("Newton projection did not converge")
        return pts[0] if single else pts


class CurveNormalDomain:
    """Boundary curve with a prescribed unit normal field, periodic in theta.

    Normals are interpolated with periodic cubic splines per component
    and renormalized; queries must lie within ``curve_tol`` of the curve.
    """

    kind = "curve"

    def __init__(self, theta_grid, curve_points, normals, tangents=None,
                 curve_tol=1e-6, name="curve"):
        theta_grid = np.asarray(theta_grid, float)
        curve_points = np.asarray(curve_points, float)
        normals = np.asarray(normals, float)
        if len(theta_grid) < 256:
            raise ValueError("need a theta grid of at least 256 points")
        n = algebra.norm(normals)
        if np.any(np.abs(n - 1.0) > 1e-10):
            raise DegenerateNormal("stored normals are not unit length")
        self.theta_grid = theta_grid
        self.curve_points = curve_points
        self.normals = normals
        self.curve_tol = curve_tol
        self.name = name
        closed_t = np.append(theta_grid, theta_grid[0] + 2 * np.pi)
        self._curve_spline = CubicSpline(
            closed_t, np.vstack([curve_points, curve_points[:1]]),
            bc_type="periodic")
        self._normal_spline = CubicSpline(
            closed_t, np.vstack([normals, normals[:1]]), bc_type="periodic")
        # tangency of the stored data; exact tangents (when the curve comes
        # from a closed-form map) avoid polluting the check with O(h^3)
        # spline-derivative error
        if tangents is None:
            tangents = self._curve_spline.derivative()(theta_grid)
        tangents = np.asarray(tangents, float)
        resid = np.abs(np.sum(tangents * normals, axis=-1)) / algebra.norm(tangents)
        self.tangency_residual = float(np.max(resid))
        if self.tangency_residual > 1e-8:
            raise DegenerateNormal(
                f"normals not orthogonal to curve tangent (residual "
                f"{self.tangency_residual:.2e})")

    def curve_at(self, theta):
        return self._curve_spline(np.mod(theta, 2 * np.pi) + self.theta_grid[0])

    def normal_at_theta(self, theta):
        n = self._normal_spline(np.mod(theta, 2 * np.pi) + self.theta_grid[0])
        return n / algebra.norm(n)[..., None]

    def _closest_theta(self, z):
        z = np.asarray(z, float)
        d = algebra.norm(self.curve_points - z)
        k = int(np.argmin(d))
        # golden-section refine around the best grid angle
        span = 2 * np.pi / len(self.theta_grid)
        lo, hi = self.theta_grid[k] - span, self.theta_grid[k] + span
        f = lambda t: float(np.sum((self._curve_spline(np.mod(t - self.theta_grid[0],
                                                              2 * np.pi)
                                                       + self.theta_grid[0]) - z) ** 2))
        phi = (np.sqrt(5) - 1) / 2
        a, b = lo, hi
        c1, c2 = b - phi * (b - a), a + phi * (b - a)
        f1, f2 = f(c1), f(c2)
        for _ in range(60):
            if f1 < f2:
                b, c2, f2 = c2, c1, f1
                c1 = b - phi * (b - a)
                f1 = f(c1)
            else:
                a, c1, f1 = c1, c2, f2
                c2 = a + phi * (b - a)
                f2 = f(c2)
        return 0.5 * (a + b)

    def normal_at(self, z):
        z = np.asarray(z, float)
        if z.ndim == 1:
            t = self._closest_theta(z)
            p = self.curve_at(t)
            if np.linalg.norm(p - z) > self.curve_tol:
                raise NotOnBoundary("point is not on the stored boundary curve")
            return self.normal_at_theta(t)
        return np.stack([self.normal_at(row) for row in z])

    def project_to_boundary(self, z, **_):
        raise Unsupported("projection is not defined for curve-based domains")

    def to_json_dict(self):
        return {
            "curve_points": [[float(c) for c in row] for row in self.curve_points],
            "curve_normals": [[float(c) for c in row] for row in self.normals],
        }


def unit_ball():
    """The unit ball: F(z) = |z|^2 - 1, normal z/|z| on the 3-sphere."""
    def F(z):
        z = np.asarray(z, float)
        return np.sum(z * z, axis=-1) - 1.0

    def gradF(z):
        return 2.0 * np.asarray(z, float)

    return LevelSetDomain(F, gradF, name="ball")


def curve_domain_from_map(example, n_grid=512, X=None):
    """Curve domain along u(dD^2) with normals from the field X/|X|.

    ``X`` defaults to the example's ``boundary_X``.  Raises
    :class:`DegenerateNormal` when |X| dips below 1e-6 on the grid; the
    orthogonality of X to the boundary tangent is validated at build
    time.
    """
    if n_grid < 256:
        raise ValueError("n_grid must be at least 256")
    theta = 2 * np.pi * np.arange(n_grid) / n_grid
    curve = example.value(np.ones_like(theta), theta)
    frame = example.frame(np.ones_like(theta), theta)
    tangents = (-np.sin(theta)[:, None] * frame.e_x
                + np.cos(theta)[:, None] * frame.e_y)
    if X is None:
        Xv = example.boundary_X(theta)
    else:
        Xv = np.asarray(X(theta), float)
    mag = algebra.norm(Xv)
    if np.any(mag < 1e-6):
        raise DegenerateNormal("constraint field X degenerates on the boundary")
    normals = Xv / mag[..., None]
    return CurveNormalDomain(theta, curve, normals, tangents=tangents, name="curve")
