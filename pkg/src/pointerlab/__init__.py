"""pointerlab: which observables survive a noisy channel, and what the
environment learns about them.

The library decides membership of a POVM in the preserved set of a quantum
channel by convex feasibility, intersects those sets across the marginals of
a broadcast evolution, assembles the joint pointer observable that simulates
everything broadcast, and ships ready-made decoherence, cloning, and
measurement-copy scenarios plus a config-driven runner.
"""

from .channels import (
    BroadcastModel,
    QuantumChannel,
    adjoint_apply,
    apply,
    channel,
    choi,
    compose,
    dephasing_channel,
    from_dilation,
    identity_channel,
    kraus_from_choi,
    marginal,
    marginals,
    tensor_channel,
)
from .linalg import (
    TOL_HERM,
    TOL_PSD,
    TOL_RECON,
    eigh,
    is_effect,
    is_hermitian,
    is_projector,
    partial_trace,
    tensor,
    unitary_from_hamiltonian,
    validate_density,
)
from .observables import (
    CoarseGrainingWitness,
    DiscreteObservable,
    SimplexCoefficients,
    coarse_grain,
    coarse_graining_witness,
    is_sharp,
    probabilities,
    pullback,
    sharp_observable,
    simplex_coefficients,
    trivial_observable,
    validate_povm,
    validate_stochastic,
)
from .preservation import (
    FEASIBLE,
    INFEASIBLE,
    UNDECIDED,
    IntersectionResult,
    PreservationVerdict,
    SolverOptions,
    correlation_matrix,
    in_intersection,
    joint_pointer_observable,
    marginalize_product,
    preservation_witness,
    sharp_correctability_check,
)
from .scenarios import (
    PAULI,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    CanonicalModelSpec,
    ContainmentReport,
    RedundancyReport,
    canonical_model,
    cloning_channel,
    containment_check,
    decoherence_factor,
    measurement_copy_channel,
    redundancy_report,
    sic_povm,
)

__version__ = "0.1.0"
