"""adiaband: quantitative adiabatic-evolution diagnostics.

Spectral band projectors and the twiddle calculus, interpolating and
seeded-random Hamiltonian families, evolution schedules (polynomial
switching, bump, gap-adapted), unitary propagation with self-convergent
stepping, rigorous gap-power error bounds with measured comparisons, and a
CSV-emitting experiment harness with an identity-verification fleet.
"""

from .bounds import (BoundReport, IngredientProfile, expansion_residual,
                     fit_theorem4_constant, ingredient_profile, lemma8_chain,
                     theorem3_bound, theorem3_profile, theorem4_bound,
                     theorem4_profile, traditional_criterion)
from .errors import (AdiabandError, ConfigError, ContourTooClose,
                     ConvergenceFailure, DimensionMismatch, DimensionTooLarge,
                     EmptyBand, EndpointViolation, GapCollapse, GridMismatch,
                     InsufficientPoints, NonHermitianInput, NonPositiveGap,
                     NonPositiveValue, NormalizationFailure,
                     QuadratureNotConverged, SingularReducedOperator,
                     StepLimitExceeded)
from .families import (CallableFamily, FamilyPoint, GroverProblem,
                       HamiltonianFamily, InterpolatingFamily,
                       ReparametrizedFamily, ThreeTermFamily, TrigFamily,
                       callable_family, grover_family, grover_gap_function,
                       interpolating_family, random_smooth_family,
                       reparametrized_family, three_term_family)
from .harness import (CSV_COLUMNS, SUMMARY_COLUMNS, RunConfig, RunReport,
                      ScalingFit, SweepResult, expand_sweep, fit_points,
                      fit_scaling, read_csv, run_single, sweep, write_csv)
from .operators import (HermitianOperator, Operator, SpectralData,
                        UnitaryOperator, commutator, operator_norm,
                        spectral_decompose, unitary_exp)
from .policy import DEFAULT_POLICY, NumericalPolicy
from .propagators import (PropagatorTrace, TimeGrid, WaveOperatorTrace,
                          adiabatic_diagnostics, evolve_adiabatic,
                          evolve_real, intertwining_residual,
                          volterra_residual, wave_operator)
from .schedules import (AdaptiveScheduleParams, Schedule, adaptive_schedule,
                        bump_schedule, linear_schedule, schedule_from_name,
                        schedule_invariant_report, smooth_switching)
from .spectral import (BandSelector, ContourSpec, ProjectorBundle,
                       band_projector, bundles_along, contour_projector,
                       g_operator, g_operator_identity_rhs,
                       pdot_twiddle_derivative, projector_derivative,
                       projector_second_derivative,
                       projector_second_derivative_fd, reduced_resolvent,
                       track_band, twiddle, twiddle_contour_oracle,
                       twiddle_derivative)
from .verify import CheckResult, VerifyReport, check_names, verify_suite

__version__ = "0.1.0"
