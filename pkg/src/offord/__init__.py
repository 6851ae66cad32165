"""Exact and Monte Carlo tools for Littlewood-Offord type concentration."""
from .budget import ENV_VAR as BUDGET_ENV_VAR
from .detector import StructureReport, detect_structure, validate_against_ilo
from .errors import BudgetError, DimensionError, InputError, OffordError, ProperizationError
from .gap import Gap, GapCoords, dilate, eliminate, elements, is_proper, membership, properize, rank_reduce
from .linear import (
    BERNOULLI,
    StepLaw,
    erdos_bound,
    halasz_Rl,
    pigeonhole_lower_bound,
    rho_linear,
    small_ball_linear,
    stanley_reference,
    stanley_set,
    walk_distribution,
)
from .multilinear import (
    a_u_submatrix,
    decoupling_check,
    plant_bilinear,
    plant_quadratic,
    rho_bilinear,
    rho_quadratic,
)
from .numeric import Rational, bareiss_det, integer_kernel, parse_rational, rank_exact
from .randsym import (
    RngSpec,
    bordered_det_identity,
    cofactor_matrix,
    kernel_height_check,
    odlyzko_count,
    qn_exact,
    qn_montecarlo,
    rank1_factor,
    rank_increase_experiment,
    wilson_interval,
)

__version__ = "0.1.0"
