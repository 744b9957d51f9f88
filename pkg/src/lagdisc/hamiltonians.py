"""Admissible Hamiltonian test functions on C^2.

A Hamiltonian carries value/gradient/Hessian callables (all batched over
(..., 4) arrays), an optional support ball, and an admissibility tag:

* ``"interior"`` -- compactly supported away from the constraint
  boundary, so the generated field I grad(f) is trivially tangent there;
* ``("boundary_tangent", domain)`` -- satisfies <I grad f, N> = 0 along
  the relevant boundary set of the domain.

Families:

* smooth interior bumps;
* functions of |z|^2 (radially invariant);
* quadratics invariant under z -> e^{it} z (phase-invariant), optionally
  multiplied by a radial profile -- these generate flows tangent to
  every sphere around the origin;
* a flow-adapted construction: transport a one-variable profile along
  the flow of the field g0 * J * N so that its gradient is parallel to
  the flow direction on the central flow line.
"""

from __future__ import annotations

import numpy as np

from . import algebra
from .algebra import apply_I, apply_J, complex_scale, inner

__all__ = [
    "FlowNotInvertible",
    "Hamiltonian",
    "InvalidParameter",
    "Profile",
    "TubeTooLarge",
    "admissibility_residual",
    "combine",
    "constant_profile",
    "even_bump",
    "flow_adapted",
    "hopf_invariant_quadratic",
    "interior_bump",
    "odd_bump",
    "phase_for_tangent",
    "poly_profile",
    "radial_invariant",
    "smooth_cutoff_profile",
    "windowed_wave",
    "z1_arc_hamiltonian",
]

EPS = np.finfo(float).eps


class InvalidParameter(ValueError):
    pass


class FlowNotInvertible(RuntimeError):
    pass


class TubeTooLarge(ValueError):
    pass


class Hamiltonian:
    """Scalar function on C^2 with gradient and Hessian callables."""

    def __init__(self, value, gradient, hessian, support_hint=None,
                 admissibility_tag="interior", boundary_samples=None, name=""):
        self.value = value
        self.gradient = gradient
        self.hessian = hessian
        self.support_hint = support_hint          # (center (4,), radius) or None
        self.admissibility_tag = admissibility_tag
        self.boundary_samples = boundary_samples  # points for admissibility checks
        self.name = name

    def __repr__(self):
        return f"Hamiltonian({self.name or 'anonymous'})"


def combine(coeffs, hams, name="combo"):
    """Real linear combination of Hamiltonians (tags must agree)."""
    coeffs = [float(c) for c in coeffs]
    tag = hams[0].admissibility_tag
    if any(h.admissibility_tag != tag for h in hams):
        raise InvalidParameter("cannot combine Hamiltonians with different tags")

    def value(z):
        return sum(c * h.value(z) for c, h in zip(coeffs, hams))

    def gradient(z):
        return sum(c * h.gradient(z) for c, h in zip(coeffs, hams))

    def hessian(z):
        return sum(c * h.hessian(z) for c, h in zip(coeffs, hams))

    return Hamiltonian(value, gradient, hessian, admissibility_tag=tag, name=name)


# --------------------------------------------------------------------------
# scalar profiles P(s) with two derivatives
# --------------------------------------------------------------------------
class Profile:
    def __init__(self, f, d1, d2):
        self.f, self.d1, self.d2 = f, d1, d2

    def __call__(self, s):
        return self.f(s)


def constant_profile(c=1.0):
    c = float(c)
    return Profile(lambda s: np.full_like(np.asarray(s, float), c),
                   lambda s: np.zeros_like(np.asarray(s, float)),
                   lambda s: np.zeros_like(np.asarray(s, float)))


def poly_profile(coeffs):
    """Polynomial sum_k coeffs[k] * s**k."""
    coeffs = np.asarray(coeffs, float)
    d1 = np.polynomial.polynomial.polyder(coeffs)
    d2 = np.polynomial.polynomial.polyder(coeffs, 2)
    P = np.polynomial.polynomial
    return Profile(lambda s: P.polyval(np.asarray(s, float), coeffs),
                   lambda s: P.polyval(np.asarray(s, float), d1),
                   lambda s: P.polyval(np.asarray(s, float), d2))


def smooth_cutoff_profile(s0, s1):
    """C^2 quintic cutoff: 1 on s <= s0, 0 on s >= s1."""
    if not s0 < s1:
        raise InvalidParameter("need s0 < s1")
    w = s1 - s0

    def t_of(s):
        return np.clip((np.asarray(s, float) - s0) / w, 0.0, 1.0)

    def f(s):
        t = t_of(s)
        return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)

    def d1(s):
        t = t_of(s)
        inside = (t > 0) & (t < 1)
        return np.where(inside, -30.0 * t ** 2 * (1.0 - t) ** 2 / w, 0.0)

    def d2(s):
        t = t_of(s)
        inside = (t > 0) & (t < 1)
        return np.where(inside, -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / w ** 2, 0.0)

    return Profile(f, d1, d2)


# --------------------------------------------------------------------------
# interior bumps
# --------------------------------------------------------------------------
def interior_bump(center, radius, amplitude=1.0):
    """amplitude * exp(-1/(1 - |z-c|^2/R^2)) inside the ball, 0 outside."""
    if radius <= 0:
        raise InvalidParameter("bump radius must be positive")
    center = np.asarray(center, float)
    R2 = float(radius) ** 2
    A = float(amplitude)

    def _s(z):
        d = np.asarray(z, float) - center
        return np.sum(d * d, axis=-1) / R2, d

    def _phi(s):
        out = np.zeros_like(s)
        m = s < 1.0
        out[m] = np.exp(-1.0 / (1.0 - s[m]))
        return out

    def value(z):
        s, _ = _s(z)
        return A * _phi(s)

    def gradient(z):
        s, d = _s(z)
        out = np.zeros_like(d)
        m = s < 1.0
        if np.any(m):
            w = 1.0 / (1.0 - s[m])
            dphi = -np.exp(-w) * w * w
            out[m] = (A * dphi * 2.0 / R2)[..., None] * d[m]
        return out

    def hessian(z):
        s, d = _s(z)
        shape = s.shape + (4, 4)
        out = np.zeros(shape)
        m = s < 1.0
        if np.any(m):
            w = 1.0 / (1.0 - s[m])
            phi = np.exp(-w)
            dphi = -phi * w * w
            d2phi = phi * (w ** 4) - 2.0 * phi * (w ** 3)
            dm = d[m]
            outer = dm[..., :, None] * dm[..., None, :]
            eye = np.eye(4)
            out[m] = (A * d2phi * (2.0 / R2) ** 2)[..., None, None] * outer \
                + (A * dphi * 2.0 / R2)[..., None, None] * eye
        return out

    return Hamiltonian(value, gradient, hessian,
                       support_hint=(center, float(radius)),
                       admissibility_tag="interior",
                       name=f"bump(r={radius:g})")


# --------------------------------------------------------------------------
# phase-invariant families (tangent to all spheres |z| = const)
# --------------------------------------------------------------------------
def radial_invariant(profile, domain=None, name="radial"):
    """f(z) = profile(|z|^2); I grad f is tangent to every centered sphere."""
    P = profile

    def value(z):
        z = np.asarray(z, float)
        return P.f(np.sum(z * z, axis=-1))

    def gradient(z):
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        return 2.0 * P.d1(s)[..., None] * z

    def hessian(z):
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        outer = z[..., :, None] * z[..., None, :]
        eye = np.eye(4)
        return 4.0 * P.d2(s)[..., None, None] * outer \
            + 2.0 * P.d1(s)[..., None, None] * eye

    return Hamiltonian(value, gradient, hessian,
                       admissibility_tag=("boundary_tangent", domain),
                       name=name)


_QUAD_GRADS = None
_QUAD_HESS = None


def _quad_basis():
    """Gradients/Hessians of |z1|^2, |z2|^2, Re(conj z1 z2), Im(conj z1 z2)."""
    global _QUAD_GRADS, _QUAD_HESS
    if _QUAD_HESS is None:
        H = np.zeros((4, 4, 4))
        H[0, 0, 0] = H[0, 1, 1] = 2.0
        H[1, 2, 2] = H[1, 3, 3] = 2.0
        H[2, 0, 2] = H[2, 2, 0] = 1.0
        H[2, 1, 3] = H[2, 3, 1] = 1.0
        H[3, 0, 3] = H[3, 3, 0] = 1.0
        H[3, 1, 2] = H[3, 2, 1] = -1.0
        _QUAD_HESS = H
    return _QUAD_HESS


def _quad_eval(z, c):
    """Q, grad Q, (constant) Hess Q for Q = sum c_k f_k."""
    z = np.asarray(z, float)
    x1, y1, x2, y2 = (z[..., i] for i in range(4))
    Q = (c[0] * (x1 * x1 + y1 * y1) + c[1] * (x2 * x2 + y2 * y2)
         + c[2] * (x1 * x2 + y1 * y2) + c[3] * (x1 * y2 - y1 * x2))
    g = np.empty_like(z)
    g[..., 0] = 2 * c[0] * x1 + c[2] * x2 + c[3] * y2
    g[..., 1] = 2 * c[0] * y1 + c[2] * y2 - c[3] * x2
    g[..., 2] = 2 * c[1] * x2 + c[2] * x1 - c[3] * y1
    g[..., 3] = 2 * c[1] * y2 + c[2] * y1 + c[3] * x1
    H = np.tensordot(np.asarray(c, float), _quad_basis(), axes=1)
    return Q, g, H


def hopf_invariant_quadratic(c, profile=None, domain=None, name=None):
    """profile(|z|^2) * (c0 |z1|^2 + c1 |z2|^2 + c2 Re(conj z1 z2) + c3 Im(conj z1 z2)).

    Each factor is invariant under z -> e^{it} z, hence so is f; its
    Hamiltonian field is tangent to every sphere |z| = const, which makes
    it admissible for ball free-boundary variations.
    """
    c = np.asarray(c, float)
    if c.shape != (4,):
        raise InvalidParameter("need 4 real coefficients")
    P = profile

    def value(z):
        Q, _, _ = _quad_eval(z, c)
        if P is None:
            return Q
        z = np.asarray(z, float)
        return P.f(np.sum(z * z, axis=-1)) * Q

    def gradient(z):
        Q, gQ, _ = _quad_eval(z, c)
        if P is None:
            return gQ
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        return P.d1(s)[..., None] * 2.0 * z * Q[..., None] + P.f(s)[..., None] * gQ

    def hessian(z):
        Q, gQ, HQ = _quad_eval(z, c)
        if P is None:
            shape = Q.shape + (4, 4)
            return np.broadcast_to(HQ, shape).copy()
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        outer_zz = z[..., :, None] * z[..., None, :]
        cross = z[..., :, None] * gQ[..., None, :] + gQ[..., :, None] * z[..., None, :]
        eye = np.eye(4)
        return (4.0 * P.d2(s) * Q)[..., None, None] * outer_zz \
            + (2.0 * P.d1(s) * Q)[..., None, None] * eye \
            + (2.0 * P.d1(s))[..., None, None] * cross \
            + P.f(s)[..., None, None] * HQ

    return Hamiltonian(value, gradient, hessian,
                       admissibility_tag=("boundary_tangent", domain),
                       name=name or f"hopf({c.tolist()})")


def windowed_wave(k, profile, axis=0, name=None):
    """f = sin(k z_axis)/k * profile(|z|^2): an oscillatory interior probe.

    The radial window makes the function compactly supported inside the
    unit ball (hence trivially admissible there); the oscillation makes
    it sensitive to short-scale non-Hamiltonian perturbations that the
    smooth families cannot see against their Hessian normalization.
    """
    P = profile
    e_axis = np.zeros(4)
    e_axis[axis] = 1.0

    def value(z):
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        return np.sin(k * z[..., axis]) / k * P.f(s)

    def gradient(z):
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        g = 2.0 * P.d1(s)[..., None] * z * (np.sin(k * z[..., axis]) / k)[..., None]
        g[..., axis] += np.cos(k * z[..., axis]) * P.f(s)
        return g

    def hessian(z):
        z = np.asarray(z, float)
        s = np.sum(z * z, axis=-1)
        sin_ = np.sin(k * z[..., axis]) / k
        cos_ = np.cos(k * z[..., axis])
        outer_zz = z[..., :, None] * z[..., None, :]
        cross = z[..., :, None] * e_axis[None, :] + e_axis[:, None] * z[..., None, :]
        eye = np.eye(4)
        return ((4.0 * P.d2(s) * sin_)[..., None, None] * outer_zz
                + (2.0 * P.d1(s) * sin_)[..., None, None] * eye
                + (2.0 * P.d1(s) * cos_)[..., None, None] * cross
                + (-k * np.sin(k * z[..., axis]) * P.f(s))[..., None, None]
                * np.outer(e_axis, e_axis))

    return Hamiltonian(value, gradient, hessian,
                       support_hint=(np.zeros(4), 0.97),
                       admissibility_tag="interior",
                       name=name or f"wave(k={k:g},axis={axis})")


# --------------------------------------------------------------------------
# flow-adapted construction
# --------------------------------------------------------------------------
def odd_bump(delta, amplitude=1.0):
    """Smooth odd profile supported in (-delta, delta)."""
    delta = float(delta)

    def beta(t):
        t = np.asarray(t, float)
        u = t / delta
        out = np.zeros_like(u)
        m = np.abs(u) < 1.0
        out[m] = u[m] * np.exp(-1.0 / (1.0 - u[m] ** 2))
        return amplitude * out

    return beta


def even_bump(delta, amplitude=1.0):
    delta = float(delta)

    def beta(t):
        t = np.asarray(t, float)
        u = t / delta
        out = np.zeros_like(u)
        m = np.abs(u) < 1.0
        out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
        return amplitude * out

    return beta


def phase_for_tangent(domain, p, v):
    """Unit complex g0 with v = g0 * J * N(p); fails if v is off that circle."""
    w = domain.normal_extension(np.asarray(p, float))
    w = apply_J(w)
    v = np.asarray(v, float)
    v = v / np.linalg.norm(v)
    g0 = complex(inner(v, w) + 1j * inner(v, apply_I(w)))
    if abs(abs(g0) - 1.0) > 1e-8:
        raise InvalidParameter("tangent direction is not of the form g0*J*N(p)")
    g0 /= abs(g0)
    resid = np.linalg.norm(v - complex_scale(g0, w))
    if resid > 1e-8:
        raise InvalidParameter("tangent direction is not of the form g0*J*N(p)")
    return g0


class _FlowTube:
    """RK4 central flow line of z' = g0 J N(z) with cubic Hermite dense output."""

    def __init__(self, domain, p, g0, t_max, dt):
        self.domain = domain
        self.g0 = complex(g0)
        steps = int(np.ceil(t_max / dt))
        self.dt = t_max / steps

        def field(z):
            return complex_scale(self.g0, apply_J(domain.normal_extension(z)))

        fwd = [np.asarray(p, float)]
        for _ in range(steps):
            fwd.append(self._rk4(field, fwd[-1], self.dt))
        bwd = [np.asarray(p, float)]
        for _ in range(steps):
            bwd.append(self._rk4(field, bwd[-1], -self.dt))
        pts = np.array(bwd[::-1] + fwd[1:])
        self.t = np.linspace(-t_max, t_max, 2 * steps + 1)
        self.c = pts
        self.d = field(pts)  # unit speed: |J N| = 1

    @staticmethod
    def _rk4(field, y, h):
        k1 = field(y)
        k2 = field(y + 0.5 * h * k1)
        k3 = field(y + 0.5 * h * k2)
        k4 = field(y + h * k3)
        return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    def psi_grid(self, y):
        """psi[j, i] = <y_i - c_j, d_j> on the time grid; (n_t, k)."""
        y = np.atleast_2d(y)
        return self.d @ y.T - np.sum(self.c * self.d, axis=1)[:, None]

    def _hermite(self, cell, tau):
        """Position/velocity/acceleration of the dense output inside cells."""
        dt = self.dt if len(self.t) < 2 else self.t[1] - self.t[0]
        c0, c1 = self.c[cell], self.c[cell + 1]
        d0, d1 = self.d[cell], self.d[cell + 1]
        t2, t3 = tau * tau, tau * tau * tau
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + tau
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        pos = (h00[:, None] * c0 + (h10 * dt)[:, None] * d0
               + h01[:, None] * c1 + (h11 * dt)[:, None] * d1)
        g00 = (6 * t2 - 6 * tau) / dt
        g10 = 3 * t2 - 4 * tau + 1
        g01 = (-6 * t2 + 6 * tau) / dt
        g11 = 3 * t2 - 2 * tau
        vel = (g00[:, None] * c0 + g10[:, None] * d0
               + g01[:, None] * c1 + g11[:, None] * d1)
        a00 = (12 * tau - 6) / dt ** 2
        a10 = (6 * tau - 4) / dt
        a01 = (-12 * tau + 6) / dt ** 2
        a11 = (6 * tau - 2) / dt
        acc = (a00[:, None] * c0 + a10[:, None] * d0
               + a01[:, None] * c1 + a11[:, None] * d1)
        return pos, vel, acc

    def time_of(self, y, strict=True):
        """Invert the time coordinate: t with <y - c(t), c'(t)> = 0."""
        y = np.atleast_2d(np.asarray(y, float))
        psi = self.psi_grid(y)                    # (n_t, k)
        if strict and np.any(np.diff(psi, axis=0) > 1e-12):
            raise FlowNotInvertible("time coordinate is not monotone for a query")
        neg = psi < 0
        if np.any(~neg.any(axis=0)) or np.any(neg[0]):
            raise FlowNotInvertible("query point leaves the invertible tube")
        first_neg = neg.argmax(axis=0)
        cell = first_neg - 1
        dt = self.t[1] - self.t[0]
        p0 = np.take_along_axis(psi, cell[None, :], axis=0)[0]
        p1 = np.take_along_axis(psi, first_neg[None, :], axis=0)[0]
        tau = p0 / np.maximum(p0 - p1, EPS)        # linear initial guess in [0,1]
        for _ in range(8):
            pos, vel, acc = self._hermite(cell, tau)
            diff = y - pos
            val = np.sum(diff * vel, axis=1)
            der = -np.sum(vel * vel, axis=1) + np.sum(diff * acc, axis=1)
            step = val / np.where(np.abs(der) < EPS, -EPS, der)
            tau = np.clip(tau - step, 0.0, 1.0)
        return self.t[cell] + tau * dt


def flow_adapted(domain, anchor, beta_profile, delta, cutoff=None,
                 fd_step=3e-6, name="flow_adapted"):
    """Test function eta(y) * beta(t(y)) transported along the g0*J*N flow.

    ``anchor`` is ``(p, g0)`` with p on the domain boundary and g0 a unit
    complex phase; the flow direction at p is ``g0 * J * N(p)``.
    ``beta_profile`` is a scalar profile supported in (-delta, delta);
    ``cutoff = (r_in, r_out)`` is a spatial plateau bump around p with
    eta = 1 for |y - p| <= r_in.  The plateau must contain the central
    flow arc carrying the support of beta, so that on that arc
    grad f = beta'(t) grad t is parallel to the flow direction.

    Gradient and Hessian are centered finite differences of the value
    (step ``fd_step``); this construction is a stress input for the
    stationarity tester, not a precision object.
    """
    if domain.kind != "levelset":
        raise InvalidParameter("flow_adapted needs a level-set domain")
    p, g0 = anchor
    p = np.asarray(p, float)
    if abs(float(domain.F(p))) > 1e-10:
        raise InvalidParameter("anchor point must lie on the domain boundary")
    if cutoff is None:
        cutoff = (1.3 * delta, 2.4 * delta)
    r_in, r_out = map(float, cutoff)
    if not 0 < r_in < r_out:
        raise InvalidParameter("cutoff radii must satisfy 0 < r_in < r_out")

    tube = _FlowTube(domain, p, g0, t_max=max(3.0 * delta, 1.3 * r_out),
                     dt=delta / 64.0)

    # build-time checks: plateau contains the support arc; tube invertible
    arc = tube.c[np.abs(tube.t) <= delta]
    arc_radius = float(np.max(np.linalg.norm(arc - p, axis=1)))
    if arc_radius >= r_in:
        raise TubeTooLarge("support arc of beta leaves the eta = 1 plateau")
    rng = np.random.default_rng(0)
    probe = rng.normal(size=(64, 4))
    probe = p + r_out * probe / np.linalg.norm(probe, axis=1, keepdims=True)
    tube.time_of(probe)                           # FlowNotInvertible on failure

    span2 = r_out ** 2 - r_in ** 2

    def _eta(y):
        rho2 = np.sum((np.atleast_2d(y) - p) ** 2, axis=-1)
        x = np.clip((r_out ** 2 - rho2) / span2, 0.0, 1.0)
        xm = 1.0 - x
        hx = np.where(x > 0, np.exp(-1.0 / np.maximum(x, EPS)), 0.0)
        hm = np.where(xm > 0, np.exp(-1.0 / np.maximum(xm, EPS)), 0.0)
        return hx / (hx + hm)

    def value(z):
        z = np.asarray(z, float)
        single = z.ndim == 1
        y = np.atleast_2d(z)
        out = np.zeros(len(y))
        eta = _eta(y)
        m = eta > 0
        if np.any(m):
            t = tube.time_of(y[m], strict=False)
            out[m] = eta[m] * beta_profile(t)
        return out[0] if single else out

    def gradient(z):
        z = np.asarray(z, float)
        single = z.ndim == 1
        y = np.atleast_2d(z)
        g = np.empty((len(y), 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = fd_step
            g[:, k] = (value(y + e) - value(y - e)) / (2 * fd_step)
        return g[0] if single else g

    def hessian(z):
        z = np.asarray(z, float)
        single = z.ndim == 1
        y = np.atleast_2d(z)
        H = np.empty((len(y), 4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = fd_step
            H[:, :, k] = (gradient(y + e) - gradient(y - e)) / (2 * fd_step)
        H = 0.5 * (H + np.swapaxes(H, 1, 2))
        return H[0] if single else H

    # admissibility samples: central flow arc (it stays on the boundary)
    samples = tube.c[np.abs(tube.t) <= 0.9 * delta]

    ham = Hamiltonian(value, gradient, hessian,
                      support_hint=(p, r_out),
                      admissibility_tag=("boundary_tangent", domain),
                      boundary_samples=samples, name=name)
    ham.tube = tube
    ham.anchor = (p, complex(g0))
    ham.delta = float(delta)
    return ham


def admissibility_residual(f, domain, pts):
    """max over pts of |<I grad f, N>| / (|grad f| + eps); pts on the boundary."""
    pts = np.atleast_2d(np.asarray(pts, float))
    grad = np.atleast_2d(f.gradient(pts))
    normals = domain.normal_at(pts)
    num = np.abs(inner(apply_I(grad), normals))
    den = algebra.norm(grad) + EPS
    return float(np.max(num / den))


# --------------------------------------------------------------------------
# test functions adapted to the z1-unit-circle constraint curve
# --------------------------------------------------------------------------
class _Bump1D:
    """exp(-1/(1-u^2)) bump with two derivatives, u = (x - c)/w."""

    def __init__(self, center, width):
        self.c, self.w = float(center), float(width)

    def _u(self, x):
        return (np.asarray(x, float) - self.c) / self.w

    def f(self, x):
        u = self._u(x)
        out = np.zeros_like(u)
        m = np.abs(u) < 1.0
        out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
        return out

    def d1(self, x):
        u = self._u(x)
        out = np.zeros_like(u)
        m = np.abs(u) < 1.0
        um = u[m]
        q = 1.0 - um ** 2
        out[m] = np.exp(-1.0 / q) * (-2.0 * um / (q * q)) / self.w
        return out

    def d2(self, x):
        u = self._u(x)
        out = np.zeros_like(u)
        m = np.abs(u) < 1.0
        um = u[m]
        q = 1.0 - um ** 2
        b = np.exp(-1.0 / q)
        out[m] = b * (4.0 * um * um / q ** 4
                      - 2.0 / (q * q) - 8.0 * um * um / q ** 3) / self.w ** 2
        return out


def z1_arc_hamiltonian(center, width, domain=None, r_window=(0.15, 0.4),
                       fd_step=1e-5, name=None):
    """Test function of z1 alone, tangent to the curve {(e^{-ia}, ib)}.

    With R = |z1| and phi = arg z1, set f = eta(R) * (A(phi)(R - 1) +
    B(phi)) where B is a smooth bump supported in the phi-arc
    [center - width, center + width] (which must avoid phi = 0 and stay
    inside (-1, 1)), and A = -(1 - phi^2) B'/phi.  Along the constraint
    curve the Hamiltonian field I grad f is then orthogonal to the
    normal field X exactly.
    """
    lo, hi = center - width, center + width
    if not (-1.0 < lo < hi < 1.0) or lo * hi <= 0:
        raise InvalidParameter("phi-arc must avoid 0 and stay inside (-1, 1)")
    B = _Bump1D(center, width)
    w_in, w_out = r_window
    span2 = w_out ** 2 - w_in ** 2

    def _eta(R):
        rho2 = (np.asarray(R, float) - 1.0) ** 2
        x = np.clip((w_out ** 2 - rho2) / span2, 0.0, 1.0)
        xm = 1.0 - x
        hx = np.where(x > 0, np.exp(-1.0 / np.maximum(x, EPS)), 0.0)
        hm = np.where(xm > 0, np.exp(-1.0 / np.maximum(xm, EPS)), 0.0)
        return hx / (hx + hm)

    def _deta(R, h=1e-6):
        return (_eta(np.asarray(R, float) + h) - _eta(np.asarray(R, float) - h)) / (2 * h)

    def _arc(phi):
        return (phi > lo) & (phi < hi)

    def _A(phi):
        m = _arc(phi)
        out = np.zeros_like(phi)
        out[m] = -(1.0 - phi[m] ** 2) * B.d1(phi[m]) / phi[m]
        return out

    def _dA(phi):
        m = _arc(phi)
        out = np.zeros_like(phi)
        pm = phi[m]
        out[m] = (2.0 * pm * B.d1(pm) / pm
                  - (1.0 - pm ** 2) * (B.d2(pm) * pm - B.d1(pm)) / pm ** 2)
        return out

    def value(z):
        z = np.asarray(z, float)
        R = np.hypot(z[..., 0], z[..., 1])
        phi = np.arctan2(z[..., 1], z[..., 0])
        return _eta(R) * (_A(phi) * (R - 1.0) + B.f(phi))

    def gradient(z):
        z = np.asarray(z, float)
        R = np.hypot(z[..., 0], z[..., 1])
        phi = np.arctan2(z[..., 1], z[..., 0])
        eta = _eta(R)
        out = np.zeros(z.shape)
        m = eta > 0.0                      # support sits in an annulus around R=1
        if np.any(m):
            Rm, pm = R[m], phi[m]
            W = _A(pm) * (Rm - 1.0) + B.f(pm)
            fR = _deta(Rm) * W + eta[m] * _A(pm)
            fphi = eta[m] * (_dA(pm) * (Rm - 1.0) + B.d1(pm))
            c, s = np.cos(pm), np.sin(pm)
            gx = np.zeros_like(R)
            gy = np.zeros_like(R)
            gx[m] = c * fR - s * fphi / Rm
            gy[m] = s * fR + c * fphi / Rm
            out[..., 0] = gx
            out[..., 1] = gy
        return out

    def hessian(z):
        z = np.asarray(z, float)
        single = z.ndim == 1
        y = np.atleast_2d(z)
        H = np.empty((len(y), 4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = fd_step
            H[:, :, k] = (np.atleast_2d(gradient(y + e))
                          - np.atleast_2d(gradient(y - e))) / (2 * fd_step)
        H = 0.5 * (H + np.swapaxes(H, 1, 2))
        return H[0] if single else H

    return Hamiltonian(value, gradient, hessian,
                       admissibility_tag=("boundary_tangent", domain),
                       name=name or f"z1arc({center:g},{width:g})")
