"""Counterfactual panel-data estimation via synthetic interventions."""

from .engine import (
    CounterfactualSet,
    DenoisedBlock,
    SiModel,
    SvtConfig,
    fit_weights,
    predict_counterfactual,
    run_si,
    select_rank,
    self_validation,
    svt,
    top_donors,
)
from .panel import (
    BUCKET_PRESETS,
    MEMO3,
    PAPER4,
    AlignedPanel,
    AlignmentSpec,
    BucketSpec,
    InterventionPartition,
    MobilityScoreSpec,
    Panel,
    UnitSeries,
    align_to_event,
    bucket_interventions,
    build_aligned_panel,
    mobility_score,
)
from .pipeline import RunConfig, run_pipeline
from .projection import ExpFit, Projection, fit_exponential, project_peak

__version__ = "0.1.0"

__all__ = [
    "AlignedPanel",
    "AlignmentSpec",
    "BUCKET_PRESETS",
    "BucketSpec",
    "CounterfactualSet",
    "DenoisedBlock",
    "ExpFit",
    "InterventionPartition",
    "MEMO3",
    "MobilityScoreSpec",
    "PAPER4",
    "Panel",
    "Projection",
    "RunConfig",
    "SiModel",
    "SvtConfig",
    "UnitSeries",
    "align_to_event",
    "bucket_interventions",
    "build_aligned_panel",
    "fit_exponential",
    "fit_weights",
    "mobility_score",
    "predict_counterfactual",
    "project_peak",
    "run_pipeline",
    "run_si",
    "select_rank",
    "self_validation",
    "svt",
    "top_donors",
]
