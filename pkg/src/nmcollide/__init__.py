"""Collision-model simulator for non-Markovian qubit dynamics.

Discrete system-ancilla collision protocol with incoherent partial-swap
intra-bath collisions, its continuous-limit dynamical maps (convolution
series and resolvent), the closed-form solution for a resonant
excitation-exchange coupling, finite-temperature baths via purification,
and CPT certification of every produced map.
"""

from .collisions import (
    BathSpec,
    CollisionConfig,
    TrajectoryRecord,
    partial_swap_channel,
    run_discrete,
    run_discrete_thermal,
    sa_collision,
    thermal_weights,
)
from .continuum import (
    DynamicalMap,
    KernelModes,
    LambdaSeriesResult,
    LindbladGenerator,
    MemoryKernelMap,
    SeriesPolicy,
    TimeGrid,
    adc_decay_kernel,
    build_kernel_map,
    build_thermal_kernel_map,
    lambda_resolvent,
    lambda_series,
    lindblad_limit,
)
from .errors import (
    ConfigurationError,
    DivergenceError,
    InternalConsistencyError,
    NmcollideError,
    TruncationError,
    ValidationError,
)
from .jaynes_cummings import (
    BetaPair,
    CubicSpectrum,
    QubitStateParams,
    adc_channel,
    beta1,
    beta2,
    beta_laplace,
    beta_pair,
    cubic_spectrum,
    cubic_spectrum_cardano,
    jc_hamiltonian,
    lambda_jc,
    lambda_jc_channel,
    lambda_jc_superop,
)
from .quantum import (
    ChoiMatrix,
    DensityOperator,
    HermitianOperator,
    KrausChannel,
    apply_channel,
    choi_of,
    compose,
    kraus_from_choi,
    partial_trace,
    tensor,
    trace_distance,
    unitary_evolution,
)
from .tolerances import DEFAULT_TOLERANCES, ToleranceProfile
from .verify import (
    ConvergenceReport,
    CptReport,
    brute_force_chain,
    calibrated_swap_probability,
    certify_cpt,
    convergence_study,
    inverse_laplace,
    random_density_operator,
)

__version__ = "0.1.0"
