"""Classification pretraining for the moveseq motion encoder."""

from .augment import augment_frame_skip, augment_hflip, augment_speed, crop_pad_features
from .geometry import feature_matrix, normalize_coords
from .network import Classifier, MotionTcn, NetConfig, export_tensors, import_tensors, stream_embeddings
from .sequences import Sequence, Topology, read_jsonl, write_jsonl
from .training import TrainConfig, TrainingDiverged, TrainReport, load_dataset, pretrain_and_export
from .weights_io import read_weights, write_weights

__version__ = "0.1.0"
