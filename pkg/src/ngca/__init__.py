"""Non-Gaussian component analysis by relative-entropy descent on the sphere."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .subspace_algebra import (  # noqa: F401
    Subspace,
    check_perturbation_bound,
    orthogonal_complement,
    orthonormalize,
    project,
    random_subspace,
    random_unit_vector,
    subspace_distance,
)
from .instance_model import (  # noqa: F401
    NonGaussianLaw,
    NgcaInstance,
    SampleSet,
    draw_samples,
    isotropize,
    marginal,
    project_samples,
    smooth_with_gaussian,
    synthesize_instance,
)
from .entropy_estimator import (  # noqa: F401
    EntropyEstimate,
    HistogramConfig,
    analytic_relative_entropy,
    default_config,
    estimate_plogp,
    relative_entropy,
    scaled_gaussian,
)
from .sphere_descent import DescentConfig, DescentOutcome, estimate_gradient, grad_des, projected_step  # noqa: F401
from .deflation_driver import (  # noqa: F401
    FullConfig,
    NgcaResult,
    default_full_config,
    full_alg,
    noise_level,
    termination_thresholds,
)
from .cumulant_baseline import cumulant_kernel, joint_cumulant_order3, joint_cumulant_order4  # noqa: F401
