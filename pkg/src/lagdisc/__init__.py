"""Numerical toolkit for free-boundary Hamiltonian stationary Lagrangian
discs in C^2: closed-form example families, disc meshes with weak-form
residual operators, admissible Hamiltonian test functions, boundary
condition checks, and a variational rigidity experiment.
"""

from . import algebra, domains, families, hamiltonians, mesh, residuals, solver

__version__ = "0.1.0"

__all__ = ["algebra", "domains", "families", "hamiltonians", "mesh",
           "residuals", "solver", "__version__"]
