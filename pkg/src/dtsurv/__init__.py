"""dtsurv: discrete-time survival curves from standard classifiers.

Right-censored records are expanded into per-month binary rows; any
probabilistic classifier trained on them learns the monthly hazard, from
which individualized survival curves with bootstrap bands follow.
"""

from .core import (
    Dataset,
    DatasetStats,
    DtsurvError,
    EmptyDataset,
    ExpandedRow,
    FeatureSchema,
    FeatureVector,
    MONTH_FEATURE,
    MonthGrid,
    SurvivalRecord,
    dataset_stats,
)
from .evaluate import (
    EvalReport,
    HorizonPrediction,
    agreement,
    eligible_for_horizon,
    evaluate_models,
    horizon_scores,
    kaplan_meier,
    roc_auc,
    score_correlation,
    survived_label,
)
from .learners import (
    DecisionTreeHazard,
    ForestParams,
    HazardModel,
    LifeTableHazard,
    MlpHazard,
    MlpParams,
    RandomForestHazard,
    TreeParams,
    load_model,
    save_model,
    train_forest,
    train_life_table,
    train_mlp,
    train_tree,
)
from .survival import (
    DeathPmf,
    HazardCurve,
    SurvivalCurve,
    bootstrap_bands,
    pmf_from_hazard,
    predict_hazard_curve,
    survival_from_hazard,
)
from .synthgen import (
    Censoring,
    ConstantHazard,
    DiscreteWeibullHazard,
    GroupSpec,
    SyntheticSpec,
    TableHazard,
    generate,
    oracle_horizon_auc,
    oracle_survival,
)
from .transform import (
    ExpandedDataset,
    SplitPair,
    balance_ratio,
    expand,
    expand_streaming,
    patient_split,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DtsurvError",
    "EmptyDataset",
    "FeatureSchema",
    "FeatureVector",
    "SurvivalRecord",
    "ExpandedRow",
    "MonthGrid",
    "Dataset",
    "DatasetStats",
    "MONTH_FEATURE",
    "dataset_stats",
    "ExpandedDataset",
    "SplitPair",
    "expand",
    "expand_streaming",
    "patient_split",
    "balance_ratio",
    "HazardModel",
    "TreeParams",
    "ForestParams",
    "MlpParams",
    "DecisionTreeHazard",
    "RandomForestHazard",
    "MlpHazard",
    "LifeTableHazard",
    "train_tree",
    "train_forest",
    "train_mlp",
    "train_life_table",
    "save_model",
    "load_model",
    "HazardCurve",
    "DeathPmf",
    "SurvivalCurve",
    "predict_hazard_curve",
    "pmf_from_hazard",
    "survival_from_hazard",
    "bootstrap_bands",
    "HorizonPrediction",
    "EvalReport",
    "eligible_for_horizon",
    "survived_label",
    "horizon_scores",
    "roc_auc",
    "agreement",
    "score_correlation",
    "kaplan_meier",
    "evaluate_models",
    "SyntheticSpec",
    "GroupSpec",
    "Censoring",
    "ConstantHazard",
    "DiscreteWeibullHazard",
    "TableHazard",
    "generate",
    "oracle_survival",
    "oracle_horizon_auc",
]
