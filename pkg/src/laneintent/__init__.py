"""Lane-change intention toolkit: trajectory ingestion, maneuver labeling,
feature extraction, a verified numerical core, sequence classifiers, and the
evaluation protocol around them."""

__version__ = "0.1.0"

from .ingest import (  # noqa: F401
    DEFAULT_GAP_CAP,
    LATERAL_CONVENTION,
    NeighborContext,
    Sequence,
    SiteGeometry,
    VehicleState,
    neighbors_at,
    parse_trajectory_table,
    split_sequence,
)
from .labeling import (  # noqa: F401
    LabelingConfig,
    LaneChangeEvent,
    Maneuver,
    Segment,
    StepLabel,
    balance_classes,
    detect_events,
    find_cross_points,
    heading_series,
    label_steps,
    maneuver_window,
    package_segments,
)
from .features import (  # noqa: F401
    AUGMENTED_FEATURE_NAMES,
    FEATURE_NAMES,
    FeatureConfig,
    NormalizationStats,
    apply_normalization,
    compute_feature_table,
    ego_features,
    fit_normalization,
    neighbor_features,
    traffic_factor_inputs,
)
from .nn_core import TrainConfig, grad_check  # noqa: F401
from .models import (  # noqa: F401
    ModelSpec,
    build,
    classify,
    load_model,
    predict,
    save_model,
    train,
)
from .evaluate import (  # noqa: F401
    ConfusionMatrix,
    EvalConfig,
    confusion,
    history_sweep,
    prediction_points,
    prediction_time,
)
from .pipeline import (  # noqa: F401
    CorpusConfig,
    build_synthetic_corpus,
    train_on_corpus,
)
from .synthetic import (  # noqa: F401
    LaneChangeScript,
    ScenarioSpec,
    VehicleScript,
    equal_lane_site,
    generate,
    random_scenario,
)
from .config import RunConfig  # noqa: F401
