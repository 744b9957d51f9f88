"""The three closed-form disc families and their Lagrangian angles.

Every map u: D^2 -> C^2 in this library is weakly conformal and
Lagrangian: the frame (d_x u, d_y u) is orthogonal with equal lengths
and the symplectic form vanishes on it.  The Lagrangian angle gbar is
the unit complex number with dz1^dz2(e_x, e_y) = e2lam * gbar.
"""
import numpy as np

from lagdisc import algebra as alg
from lagdisc import families as fam

rng = np.random.default_rng(0)

print("=" * 72)
print("1. flat equatorial discs: u = U . (x, y) for a unitary U")
print("=" * 72)
U = np.array([[1j, 0], [0, 1]])
fd = fam.flat_disc(U)
fr = fd.frame(0.6, 0.8)
e2lam, gbar = alg.lagrangian_angle(fr.e_x, fr.e_y)
print(f"U = diag(i, 1):   conformal factor {e2lam:.3f}, angle {gbar:.3f}")
print(f"det U           = {np.linalg.det(U):.3f}   (the angle is det U)")

print()
print("=" * 72)
print("2. conical discs Phi_pq (singular at the origin for p != q)")
print("=" * 72)
for (p, q) in [(1, 2), (2, 3)]:
    cone = fam.sw_cone(p, q)
    th = np.pi / 3
    fr = cone.frame(1.0, th)
    _, gbar = alg.lagrangian_angle(fr.e_x, fr.e_y)
    print(f"(p,q)=({p},{q}): angle at theta=pi/3 is {gbar:.4f}, "
          f"exp(i(p-q)theta) = {np.exp(1j*(p-q)*th):.4f}")
v = fam.sw_cone(1, 2).value(1.0, 0.0)
print(f"Phi_12(1, 0) = {np.round(v, 7)}  (|v| = {np.linalg.norm(v):.12f})")

print()
print("=" * 72)
print("3. the non-minimal map u = (e^{-ix}, iy): smooth, non-constant angle")
print("=" * 72)
nm = fam.nonminimal_map()
x = rng.uniform(-1, 1, 5)
print("angle along y = 0:", np.round(nm.angle_xy(x, np.zeros(5)), 4))
r = np.sqrt(rng.uniform(0, 1, 20000))
th = rng.uniform(0, 2 * np.pi, 20000)
ang = nm.angle(r, th)
print(f"angle variance over the disc: {np.mean(np.abs(ang - ang.mean())**2):.4f}"
      " (a constant-angle map would give 0)")

print()
print("=" * 72)
print("4. the polar frame identity d_theta u / r = -gbar J d_r u")
print("=" * 72)
for ex in (fam.flat_disc(np.eye(2)), fam.sw_cone(2, 3), fam.nonminimal_map()):
    r = rng.uniform(0.1, 0.95, 500)
    th = rng.uniform(-np.pi, np.pi, 500)
    fr = ex.frame(r, th)
    e_r = np.cos(th)[:, None] * fr.e_x + np.sin(th)[:, None] * fr.e_y
    e_t = -np.sin(th)[:, None] * fr.e_x + np.cos(th)[:, None] * fr.e_y
    _, gbar = alg.lagrangian_angle(fr.e_x, fr.e_y)
    resid = np.max(np.abs(e_t + alg.complex_scale(gbar, alg.apply_J(e_r))))
    print(f"{type(ex).__name__:>15}: max residual {resid:.2e}")
print("\nThe identity pins down the sign convention of the quaternionic J.")
