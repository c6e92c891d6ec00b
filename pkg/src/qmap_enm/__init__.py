"""Qubit dynamical maps: construction, decay-rate extraction, and
Markovianity classification."""

from .algebra import (
    AffineRep,
    apply_affine,
    bloch_from_density,
    choi_from_affine,
    compose_affine,
    density_from_bloch,
    hermitian_eigenvalues,
    invert_affine,
    min_choi_eigenvalue,
    trace_distance,
)
from .errors import ContractViolationError, QmapError, SingularityError, ValidationError
from .families import (
    DecoherenceProfile,
    DepolarizingFamily,
    MixtureSpec,
    NonUnitalFamily,
    PauliMixtureFamily,
    affine_rep_of,
    affine_trajectory,
    amplitude_damping,
    depolarizing_snapshot,
    exp_profile,
    generalized_amplitude_damping,
    mixture_snapshot,
    nonunital_snapshot,
    pauli_semigroup_snapshot,
    phase_covariant_family,
)
from .rates import (
    Asymptote,
    BlochGenerator,
    NonUnitalRates,
    RateSource,
    UnitalRates,
    asymptotic_rate,
    custom_rate_source,
    dephasing_rate,
    generator_from_trajectory,
    nonunital_rates,
    nonunital_rates_from_generator,
    pauli_rates_from_eigenvalues,
    pauli_rates_from_weights,
    rate_source,
    unital_rates_from_generator,
    weight_rate_term,
)

__version__ = "0.1.0"
