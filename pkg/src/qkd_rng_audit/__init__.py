"""Security accounting for quantum key distribution with imperfect random number generators."""

from .errors import (
    AuditError,
    BudgetExhaustedError,
    CapacityError,
    DomainError,
    InconsistentPosteriorError,
    InvalidDistributionError,
    SaturationError,
    ShapeError,
)
from .info_metrics import binary_entropy, mutual_information_binary, shannon_entropy
from .rng_models import BitString, RngDistribution, entropy_deficit, probability_of
from .holevo import DiscriminationEnsemble, check_deficit_bound, holevo_bound
from .delta_bound import delta_max, per_outcome_info
from .security_bound import (
    KeyPosterior,
    SecurityBudget,
    corollary_bound,
    entropy_floor,
    eta_from_posterior,
    theorem_bound,
)

__version__ = "0.1.0"
