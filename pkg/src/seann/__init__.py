"""seann: submodular-ensemble attribution.

Learns a monotone submodular scoring function from attribution heatmaps
and re-attributes features by their greedy marginal gains, yielding
sharper, less redundant maps than the inputs it ensembles.
"""

from .errors import (
    DimensionError,
    DomainError,
    FormatError,
    InvalidArgument,
    NumericalError,
    SeannError,
    TooLarge,
    UnsupportedArchitecture,
)
from .dsf import (
    DsfArchitecture,
    DsfNetwork,
    SetEvaluator,
    WeightGradient,
    empirical_lipschitz,
    indicator,
    lipschitz_bound,
    project_nonneg,
)
from .submax import GreedyChain, brute_force_maximize, greedy_maximize
from .resample import (
    BinaryMap,
    Heatmap,
    binarize_top,
    downsample_binary,
    downsample_real,
    threshold_grid,
    upsample_nearest,
)
from .classifier import (
    Dataset,
    MlpClassifier,
    forward,
    make_planted_dataset,
    train_classifier,
)
from .baselines import (
    baseline_heatmap,
    input_gradient,
    input_times_gradient,
    integrated_gradients,
    normalize_heatmap,
    smooth_integrated_gradients,
)
from .trainer import (
    TrainConfig,
    TrainingSet,
    TrainReport,
    gap_objective,
    sensitivity_penalties,
    train,
    training_objective,
    training_subgradient,
)
from .attribution import (
    AttributionMap,
    agg_mean,
    assemble_global,
    sea_attribute,
    sea_pipeline,
    top_p_select,
)
from .evaluation import (
    PerturbationCurve,
    aupc,
    jaccard_topk,
    mean_aupc,
    robustness_iou,
)

__version__ = "0.1.0"
