"""Online one-shot skeleton-based action recognition engine."""

from .errors import (
    DegeneratePoseError,
    MoveseqError,
    ParseError,
    SchemaError,
    UnrecoverableJointError,
)
from .evaluation import GameEval, match_detections, per_class_report, precision_recall_f1, sweep_thresholds
from .features import FeatureLayout, assemble_features, bone_angles, feature_matrix, pairwise_distances
from .matcher import (
    AnchorRepresentation,
    DetectionTimeline,
    Threshold,
    build_anchor,
    classify_segment,
    cosine_distance,
    detect_stream,
    distance_to_anchor,
    dynamic_threshold,
    js_distance,
    static_threshold,
)
from .normalization import FrameTransform, NormalizationConfig, compute_frame_transform, normalize_pose, normalize_sequence
from .pipeline import PipelineConfig, emit_timeline, encode_sequence, prepare_game, run_game
from .skeleton import (
    AnnotationSet,
    GameRecord,
    JointTopology,
    Pose,
    SkeletonSequence,
    kinect25,
    parse_annotations,
    parse_sequence,
    repair_pose,
    resample,
    serialize_sequence,
)
from .tcn import EmbeddingStreamState, TcnConfig, TcnModel, forward_window, init_seeded, load_weights, save_weights, stream_step

__version__ = "0.1.0"
