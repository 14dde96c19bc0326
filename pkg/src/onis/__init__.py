"""Online informative sampling over semantic feature streams.

Keeps a fixed-size set of the most distinctive records from a stream of
unknown length, and scores automated samples against human-picked ones with
the SRUM metric.
"""

__version__ = "0.1.0"

from .core import (
    FeatureVector,
    FrameRecord,
    StreamHeader,
    average_pool,
    max_normalize,
)
from .distances import DistanceKind, distance, distances_to_set, pairwise_matrix
from .errors import (
    BadMagicError,
    FormatVersionError,
    InvariantError,
    MalformedInputError,
    MissingLabelError,
    NonMonotoneIndexError,
    OnisError,
    StreamFormatError,
    TruncatedStreamError,
)
from .featstream import (
    StreamFile,
    detect_format,
    open_stream,
    read_stream,
    write_stream,
    write_stream_jsonl,
)
from .images import histogram_features
from .sampler import (
    OnlineSampler,
    SampleSet,
    SamplerConfig,
    StepOutcome,
    finalize,
    greedy_k_centers,
    observe,
    trim_to_k,
)
from .srum import (
    LabelMap,
    SrumParams,
    SrumReport,
    human_benchmark,
    percent_of_human,
    representative_score,
    srum,
    srum_average,
)
from .synthetic import SyntheticSpec, block_centers, generate_synthetic

__all__ = [
    "__version__",
    "FeatureVector",
    "FrameRecord",
    "StreamHeader",
    "average_pool",
    "max_normalize",
    "DistanceKind",
    "distance",
    "distances_to_set",
    "pairwise_matrix",
    "OnisError",
    "MalformedInputError",
    "StreamFormatError",
    "BadMagicError",
    "FormatVersionError",
    "TruncatedStreamError",
    "NonMonotoneIndexError",
    "MissingLabelError",
    "InvariantError",
    "StreamFile",
    "detect_format",
    "open_stream",
    "read_stream",
    "write_stream",
    "write_stream_jsonl",
    "histogram_features",
    "OnlineSampler",
    "SampleSet",
    "SamplerConfig",
    "StepOutcome",
    "observe",
    "trim_to_k",
    "greedy_k_centers",
    "finalize",
    "LabelMap",
    "SrumParams",
    "SrumReport",
    "representative_score",
    "srum",
    "srum_average",
    "human_benchmark",
    "percent_of_human",
    "SyntheticSpec",
    "block_centers",
    "generate_synthetic",
]
