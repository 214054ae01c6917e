"""iblab: an exact laboratory for information-bottleneck objectives on
finite discrete distributions.

Functional core: information primitives (:mod:`iblab.prob`), instance
generators (:mod:`iblab.instances`), trade-off optimization and beta sweeps
(:mod:`iblab.lagrangian`), the disentanglement objective
(:mod:`iblab.disenib`) and exact variational bounds
(:mod:`iblab.variational`). :mod:`iblab.estimators` wraps the optimizers in
a scikit-learn style fit/transform API, and :mod:`iblab.cli` drives
reproducible runs from the command line.
"""

from .disenib import (
    ConsistencyReport,
    DisenIBParams,
    analytic_minimum,
    consistency_check,
    default_card_s,
    default_card_t,
    eval_disenib,
    grad_disenib,
    optimize_disenib,
)
from .errors import (
    BracketError,
    IBLabError,
    ParameterError,
    SupportError,
    ValidationError,
)
from .estimators import DisenIB, IBLagrangian
from .instances import (
    InstanceSpec,
    make_deterministic,
    make_noisy,
    make_random_joint,
    parse_instance_spec,
)
from .lagrangian import (
    EncoderParams,
    IBPoint,
    Surrogate,
    beta_at_compression,
    eval_lagrangian,
    grad_lagrangian,
    optimize_at_beta,
    sweep_beta,
)
from .optim import OptimizerConfig
from .prob import (
    CompositeJoint,
    Distribution,
    Encoder,
    InformationProfile,
    JointXY,
    compose_st,
    compose_xsy,
    compose_xt,
    compose_yt,
    entropy,
    information_triple,
    kl_divergence,
    mutual_information,
)
from .variational import (
    BoundCheck,
    Decoder,
    PriorT,
    Reconstructor,
    bottleneck_prior,
    compression_gap,
    ity_lower_bound,
    ixsy_lower_bound,
    optimal_decoder,
    optimal_reconstructor,
    prediction_gap,
    reconstruction_gap,
    run_bound_checks,
    vib_upper_bound,
)

__version__ = "0.1.0"
