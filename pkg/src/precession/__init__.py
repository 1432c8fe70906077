"""Quantum violations of the classical precession-protocol bound.

Spin and oscillator scores, classical and quantum protocol simulation, and
composite-spin realisations of the optimal states.
"""
from .errors import (ConfigurationError, ConsistencyError, DomainError, EigensolverError,
                     PrecessionError, UnsupportedRangeError)
from .spin_core import SpinQuantum, build_jx, build_jy, build_jz, eigensolve, spectral_sign
from .sign_elements import sgn_jx_element, sgn_jx_matrix, sgn_x_element, sgn_x_matrix, limit_compare
from .averaging import average_over_orbit, decompose_blocks, squared_block_reduce
from .spin_scores import (ScoreReport, classical_bound, optimal_state, score_closed_form,
                          score_numeric, violation_sweep)
from .oscillator_scores import (TruncationPolicy, lower_bound, optimal_fock_coeffs,
                                score_truncated, upper_bound, wigner_grid)
from .classical_protocol import (PhasePoint, bound_check, exact_point_score,
                                 monte_carlo_score, sector_of)
from .measurement_sim import QuantumState, exact_expectation, round_probability, sample_rounds
from .composite_entanglement import (clebsch_gordan, embed_optimal_state, ghz_check,
                                     schmidt_spectrum)

__version__ = "0.1.0"
