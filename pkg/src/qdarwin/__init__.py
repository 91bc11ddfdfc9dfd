"""Simulation toolkit for decoherence, envariance and redundant environmental records."""
__version__ = "0.1.0"

from .qstate import (
    DensityMatrix, DimensionCapError, PureState, SchmidtDecomposition, SubsystemLayout, apply_local_unitary,
    dimension_cap, get_dimension_cap, haar_random_state, partial_trace, reduced_density, schmidt_decompose,
    set_dimension_cap, tensor_product,
)
from .info import (
    EntropyUnit, MeasurementBasis, UnsupportedConfigurationError, conditional_entropy_given_measurement,
    min_discord, mutual_information, observable_mutual_information, quantum_discord,
    shannon_entropy_of_measurement, von_neumann_entropy,
)
from .branch import (
    BranchState, CentralSpinModel, central_spin_state_at, decoherence_factor, reduced_joint_density,
)
from .envariance import (
    FineGrainPlan, SchmidtFrame, SchmidtLocalUnitary, born_probabilities, chain_overlap_invariant,
    fine_grain_to_even, frequency_distribution, repeatability_orthogonality_check, schmidt_counterswap,
    schmidt_swap, verify_envariance,
)
from .models import CnotChainModel, run_cnot_chain, sigma_mu_observable
from .darwinism import (
    FragmentSpec, PIPCurve, RedundancyRangeError, RedundancyResult, decohered_by_fragment,
    partial_information_plot, redundancy_from_pip, redundancy_of_observable,
)
from .gaussian import (
    GaussianState, OhmicBathSpec, QBMModel, discretize_ohmic_bath, evolve_gaussian,
    gaussian_entropy_from_area, qbm_partial_information, qbm_redundancy, symplectic_area,
)
from .kernels import BACKEND
