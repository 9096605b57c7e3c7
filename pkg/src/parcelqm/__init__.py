"""Finite-precision quantum states as convex parcels.

States are open convex sets of density matrices carried in two
representations (interval boxes over an observable basis, vertex polytopes),
with interval-valued observables, unitary parcel dynamics, fuzzy measurement
updates and a geometric information account.
"""

from .dynamics import evolve_double, evolve_hrep, evolve_vrep, propagator
from .errors import (
    ConditionError,
    DisjointnessError,
    EmptyIntersectionError,
    PhysicalityError,
    RankDeficiencyError,
    ReconstructionError,
    SchemaError,
    VanishingProbabilityError,
    ZeroVolumeError,
)
from .geometry import VolumeResult
from .intervals import (
    RealInterval,
    chsh_interval,
    chsh_operator,
    correlation_interval,
    entropy_interval,
    expectation_interval,
    expectation_interval_hrep,
    expectation_interval_vrep,
    fidelity_interval,
    probability_interval,
    stddev_interval,
    uncertainty_bound,
    von_neumann_entropy,
    witness_interval,
)
from .measurement import (
    FuzzyPOVM,
    UpdateReport,
    bloch_update_closed_form,
    box_trace_diameter,
    build_fuzzy_povm,
    check_separation,
    check_uniform_positivity,
    eta_threshold_qubit,
    kraus_update_state,
    lipschitz_outer_update,
    nqubit_jacobian,
    qubit_jacobian,
    update_double_parcel,
    update_single_parcel,
)
from .operators import (
    ObservableBasis,
    as_density_matrix,
    as_hermitian,
    bloch_from_qubit,
    complete_hermitian_basis,
    gram_schmidt,
    hs_inner,
    operator_sqrt,
    pauli_product_basis,
    pauli_string_operator,
    pure_state,
    qubit_from_bloch,
    tensor,
    trace_distance,
    trace_norm,
    traceless_basis,
)
from .parcels import (
    DoubleParcel,
    EmptyParcel,
    HyperRectParcel,
    SeparationCertificate,
    VertexParcel,
    experimental_parcel,
    information_double,
    information_single,
    intersect,
    leq_double,
    leq_single,
    mc_psd_volume,
    merge_bases,
    rebox,
    volume,
    witness_mixed,
)

__version__ = "0.1.0"
