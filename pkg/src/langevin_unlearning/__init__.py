"""Asymmetric noisy-projected-gradient unlearning workbench.

Privacy accounting for forgetting under data with a public/private split:
sampling pipelines, analytic divergence bounds, a variational divergence
estimator, and a membership-posterior attack, behind one CLI.
"""

from .bounds import (
    DataPartition,
    DecisionReport,
    DivergenceBound,
    LsiSchedule,
    NoiseRequirement,
    bound_learn_retrain,
    bound_unlearn,
    decide_unlearn_vs_retrain,
    dinfty_discrete,
    generalization_bound,
    gradient_sensitivity,
    lsi_convex,
    lsi_nonconvex,
    lsi_strongly_convex,
    lsi_universal_compact,
    min_steps_forward,
    public_ratio_threshold,
    required_sigma,
    strongly_convex_initial_bound,
)
from .attack import AttackReport, GaussianFit, run_attack, score_model, ulira_posterior
from .config import ExperimentConfig, load_config
from .experiment import (
    RunArtifact,
    StageError,
    emit_bound_report,
    emit_divergence_curve,
    emit_fig3_curve,
    run_experiment,
)
from .model import (
    Dataset,
    Examples,
    LabeledExample,
    LossProfile,
    ParamVector,
    clipped_mean_gradient,
    derive_profile,
    loss_gradient,
    loss_value,
    project_ball,
)
from .pngd import HyperParams, ModelSampleSet, sample_distribution
from .renyi import (
    DiscriminatorSpec,
    DivergenceEstimate,
    EstimatorConfig,
    estimate_renyi,
    gaussian_renyi_oracle,
    train_discriminator,
)
from .synth import SyntheticShiftSpec, generate_synthetic, ground_truth_dinfty

__all__ = [
    "AttackReport",
    "DataPartition",
    "Dataset",
    "DecisionReport",
    "DiscriminatorSpec",
    "DivergenceBound",
    "DivergenceEstimate",
    "EstimatorConfig",
    "Examples",
    "ExperimentConfig",
    "GaussianFit",
    "HyperParams",
    "LabeledExample",
    "LossProfile",
    "LsiSchedule",
    "ModelSampleSet",
    "NoiseRequirement",
    "ParamVector",
    "RunArtifact",
    "StageError",
    "SyntheticShiftSpec",
    "bound_learn_retrain",
    "bound_unlearn",
    "clipped_mean_gradient",
    "decide_unlearn_vs_retrain",
    "derive_profile",
    "dinfty_discrete",
    "emit_bound_report",
    "emit_divergence_curve",
    "emit_fig3_curve",
    "estimate_renyi",
    "gaussian_renyi_oracle",
    "generalization_bound",
    "generate_synthetic",
    "gradient_sensitivity",
    "ground_truth_dinfty",
    "load_config",
    "loss_gradient",
    "loss_value",
    "lsi_convex",
    "lsi_nonconvex",
    "lsi_strongly_convex",
    "lsi_universal_compact",
    "min_steps_forward",
    "project_ball",
    "public_ratio_threshold",
    "required_sigma",
    "run_attack",
    "run_experiment",
    "sample_distribution",
    "score_model",
    "strongly_convex_initial_bound",
    "train_discriminator",
    "ulira_posterior",
]
