"""HOM interferometry on frequency-entangled photon pairs.

Outcome probabilities, Fisher information, maximum-likelihood delay
estimation, fringe fitting and a fibre temperature-sensor model.
"""

__version__ = "0.1.0"

from .physics import (  # noqa: E402
    IDEAL,
    BiphotonState,
    ChannelParams,
    OutcomeProbs,
    SpectralGrid,
    angular_from_thz,
    beam_splitter_oracle,
    coincidence_probability,
    detuning_from_wavelengths,
    outcome_probabilities,
)
from .information import (  # noqa: E402
    WorkingPoint,
    cr_bound,
    fisher_information,
    fisher_information_numeric,
    max_fisher,
    qcr_bound,
    quantum_fisher_information,
)
from .estimation import (  # noqa: E402
    CountRecord,
    EstimateResult,
    EstimationError,
    log_likelihood,
    mle_closed_form,
    mle_numeric,
)
from .fringe import FitError, FitResult, FringeScan, bandwidth_conversions, fit_fringe  # noqa: E402
from .montecarlo import (  # noqa: E402
    PrecisionReport,
    TrialConfig,
    run_precision_study,
    sample_counts,
    simulate_fringe,
)
