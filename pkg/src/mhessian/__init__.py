"""m-Hessian operators: traces, cones, Hessian integrals, Dirichlet solvers and inequality checks."""
from .kernels import BACKEND
from .errors import (ArgumentError, ConeExitError, ConvergenceError, ConvexityGateError,
                     DomainError)
from .symfunc import (ConeVerdict, cone_membership, deleted_trace, faddeev_leverrier, in_cone,
                      m_trace, m_trace_from_eigenvalues, m_trace_gradient, maclaurin_margin,
                      minor_sum, monotonicity_margin, quotient, quotient_gradient, sample_cone,
                      traces)
from .domain import Domain, boundary_curvature
from .cones import AdmissibilityReport, CurvatureProfile, grid_admissibility, is_boundary_m_convex
from .field import (GridFunction2D, HarmonicSum, HessianField, PolarGrid, RadialFunction,
                    cofactor_divergence_residual, divergence_identity_residual, graph_curvature,
                    grid_hessian, m_hessian_field, polar_grid, radial_m_hessian)
from .integrals import (FunctionalValue, QuadratureRule, first_variation_I, functional_J,
                        hessian_integral, second_variation_I, second_variation_I_numeric,
                        second_variation_J, weighted_inner_product)
from .solver import (DirichletProblem, DirichletSolution, quotient_solution_residual,
                     solve, solve_grid_newton, solve_radial_ode, solve_radial_quadratic)
from .inequalities import (InequalityReport, check_anpo, check_composition,
                           check_dilation_invariance, check_isoperimetric, check_p2,
                           check_poincare, check_w2, check_zero_l)

__version__ = "0.1.0"
