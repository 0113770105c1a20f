"""Exact generating-series calculus for DT4 wall-crossing.

The package builds virtual fundamental classes of Hilbert and Quot schemes
inside an explicit symmetric-algebra model of a lattice vertex algebra,
integrates multiplicative-genus insertions against them, and reproduces the
closed-form invariant series of the theory by several independent
computation paths that must agree exactly.  All arithmetic is exact
(rationals with big integers, sparse Laurent parameter polynomials); there
is no floating point anywhere.
"""

from .exactarith import ParamPoly, Scalar, Sym, binomial_poly, param_poly_arith
from .series import (PowerSeries, series_coefficient, series_compose,
                     series_exp_log, series_mul, series_pow)
from .transforms import (DivisorTable, bracket_sym, divisor_table,
                         plethystic_exp, universal_u, universal_u_inverse)
from .inversion import fixed_point_residual, gessel_lagrange_sum, lagrange_invert
from .genera import (CATALOG, GenusSpec, catalan_closed_form, chern, det_genus,
                     det_power, fuss_catalan, genus_by_name, lambda_genus,
                     lambert, macmahon, nekrasov, segre, sqrt_todd_bracket,
                     todd)
from .va import (GeometryModel, InsertionClass, PairingTables, UPoly, VAState,
                 generic_cy4_model, generic_surface_model, lie_bracket,
                 pair_integrate, translate_t)
from .wallcross import (InsertionSpec, VirtualClass, build_hilb_class,
                        build_hilb_class_bracket, build_nnp,
                        build_quot_class_surface, integrate_insertions,
                        invariant_series_closed, invariant_series_pipeline)
from .invariants import (cao_kool_series, check_segre_verlinde,
                         correspondence_4d2d, nekrasov_series,
                         quot_surface_series, resolve_conventions,
                         segre_series, verlinde_series, z_series)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
