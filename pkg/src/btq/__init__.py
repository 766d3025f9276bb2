"""Numerical Berezin-Toeplitz quantization of the Riemann sphere and the torus."""
from .manifold import (LAPLACIAN_KAPPA, KahlerModel, Observable, constant, fourier_atom,
                       hamiltonian_field, kahler_density, laplacian, poisson_bracket,
                       sphere_atom, sup_norm, verify_quantization_condition)
from .parsing import ParseError, parse_observable, random_observable
from .quadrature import QuadratureRule, default_rule, integrate, sphere_rule, torus_rule
from .sections import (SectionBasis, build_basis, connection_potential, evaluate_section,
                       metric_weight)
from .toeplitz import (CovariantSymbol, QuadratureError, SymbolField, ToeplitzContext,
                       build_context, commutator_residual, context, covariant_symbol,
                       epsilon_function, hs_adjointness_residual, operator_norm,
                       prequantum_matrix, toeplitz_matrix, tuynman_residual)

__version__ = "0.1.0"
