"""Per-pixel centroid voting for panoptic segmentation.

Pipeline stages: radial grid discretization, ground-truth label encoding,
probabilistic vote aggregation into a heatmap, peak-region detection,
backprojection of peaks into instance masks, panoptic fusion, and PQ
evaluation.  Everything downstream of the per-pixel labels is
deterministic, so the pipeline runs both on ground-truth labels (ceiling
measurements) and on externally supplied probability tensors.
"""

from .grid import SCHEMES, CellTable, GridSpec, build_grid, invert_grid, lookup, scheme
from .encode import IGNORE, LabelField, PanopticAnnotation, SegmentInfo, centroid, downsample_annotation, encode_labels
from .aggregate import VoteTensor, aggregate_votes, brute_force_aggregate
from .peaks import PeakRegion, find_peaks
from .backproject import InstanceMask, TopVotes, backproject, claim_masks, top_votes
from .fuse import PanopticMap, SegmentRecord, annotation_to_map, assign_category, fuse, upsample_map
from .metrics import PQStats, evaluate
from .lossnorm import SegmentWeights, normalized_loss, segment_weights
from .synth import SceneSpec, generate, one_hot_votes, oracle_predict, oracle_run

__version__ = "0.1.0"

__all__ = [
    "SCHEMES",
    "CellTable",
    "GridSpec",
    "build_grid",
    "invert_grid",
    "lookup",
    "scheme",
    "IGNORE",
    "LabelField",
    "PanopticAnnotation",
    "SegmentInfo",
    "centroid",
    "downsample_annotation",
    "encode_labels",
    "VoteTensor",
    "aggregate_votes",
    "brute_force_aggregate",
    "PeakRegion",
    "find_peaks",
    "InstanceMask",
    "TopVotes",
    "backproject",
    "claim_masks",
    "top_votes",
    "PanopticMap",
    "SegmentRecord",
    "annotation_to_map",
    "assign_category",
    "fuse",
    "upsample_map",
    "PQStats",
    "evaluate",
    "SegmentWeights",
    "normalized_loss",
    "segment_weights",
    "SceneSpec",
    "generate",
    "one_hot_votes",
    "oracle_predict",
    "oracle_run",
    "__version__",
]
