"""The three free-boundary conditions and who satisfies which.

For a disc with boundary on a constraint hypersurface with outward
normal N, stationarity under admissible Hamiltonian variations plus a
Legendrian boundary (d_tau u . I(N o u) = 0) forces two more boundary
conditions: the conormal d_nu u aligns with N, and the Neumann trace of
the angle vanishes.  The conical discs satisfy all three on the sphere;
the non-minimal map (on its curve-constraint domain) violates the
Legendrian condition and the Neumann trace -- it is stationary anyway,
which is exactly why the Legendrian hypothesis cannot be dropped from
the rigidity statement.
"""
import numpy as np

from lagdisc import domains as dom
from lagdisc import families as fam
from lagdisc import residuals as res
from lagdisc.mesh import build_polar_mesh

ball = dom.unit_ball()
m = build_polar_mesh(24, 96, 1.0)

print(f"{'example':>12} {'domain':>8} {'legendrian':>12} {'conormal':>10} "
      f"{'neumann':>10}")
for ex, domain in [(fam.flat_disc(np.eye(2)), ball),
                   (fam.sw_cone(1, 2), ball),
                   (fam.sw_cone(2, 3), ball)]:
    u = fam.sample(ex, m)
    leg, con, neu = res.boundary_conditions_report(u, domain)
    print(f"{ex.kind:>12} {'ball':>8} {leg:12.2e} {con:10.2e} {neu:10.2e}")

nm = fam.nonminimal_map()
cd = dom.curve_domain_from_map(nm)
u = fam.sample(nm, m)
leg, con, neu = res.boundary_conditions_report(u, cd)
print(f"{nm.kind:>12} {'curve':>8} {leg:12.2e} {con:10.2e} {neu:10.2e}")
print()
print("the non-minimal example fails the Legendrian condition (residual"
      f" {leg:.2f} ~ 1/sqrt(2)) and has Neumann trace {neu:.2f} ~ pi,")
print("yet its localization (stationarity) residual converges to zero --"
      " see demo 05.")
