"""Self-training with pseudolabels on two-component rotationally symmetric mixtures.

The heavy lifting lives in the compiled extension ``pseudoboost._core``; this
package re-exports its public names.
"""

from ._core import (  # noqa: F401
    CertificationError,
    ConfigError,
    DegenerateInputError,
    DegeneratePseudolabelerError,
    DimensionError,
    DistParams,
    IterateRecord,
    LossSpec,
    MixtureModel,
    NoiseSpec,
    PipelineAbortError,
    PreconditionError,
    PseudolabelerResult,
    RecursionParams,
    RngStream,
    SelfTrainConfig,
    SupervisedConfig,
    TrainTrace,
    UnsupportedOracleError,
    __version__,
    bayes_optimality_check,
    c_err_threshold,
    certify_params,
    exact_gaussian_err,
    exact_gaussian_err_at_angle,
    mc_err,
    normal_cdf,
    pseudo_gradient,
    recursion_simulate,
    run_cli,
    sample,
    selftrain_run,
    supervised_run,
    surrogate_loss_quadrature,
    theorem2_schedule,
    theorem_schedule,
)

__all__ = [
    "CertificationError",
    "ConfigError",
    "DegenerateInputError",
    "DegeneratePseudolabelerError",
    "DimensionError",
    "DistParams",
    "IterateRecord",
    "LossSpec",
    "MixtureModel",
    "NoiseSpec",
    "PipelineAbortError",
    "PreconditionError",
    "PseudolabelerResult",
    "RecursionParams",
    "RngStream",
    "SelfTrainConfig",
    "SupervisedConfig",
    "TrainTrace",
    "UnsupportedOracleError",
    "__version__",
    "bayes_optimality_check",
    "c_err_threshold",
    "certify_params",
    "exact_gaussian_err",
    "exact_gaussian_err_at_angle",
    "mc_err",
    "normal_cdf",
    "pseudo_gradient",
    "recursion_simulate",
    "run_cli",
    "sample",
    "selftrain_run",
    "supervised_run",
    "surrogate_loss_quadrature",
    "theorem2_schedule",
    "theorem_schedule",
]
