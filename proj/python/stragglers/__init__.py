"""Straggler-based hard-sample identification for multiclass image datasets.

Thin python surface over the C++ core: dataset construction, the
gyration-radius probes, inversion-point training, the three hard-sample
identifiers and the supporting statistics.
"""

from ._core import (  # noqa: F401
    Dataset,
    HardSampleSet,
    InversionResult,
    NetworkParams,
    RadiiTrace,
    RawDataset,
    StragglerError,
    TrainConfig,
    __version__,
    accuracy,
    class_distribution,
    class_radii,
    combine_shuffle_normalize,
    confidence,
    detect_first_rise,
    energy,
    extract_stragglers,
    gyration_radius_sq,
    identify_by_confidence,
    identify_by_energy,
    identify_random,
    init_params,
    load_idx,
    load_params,
    make_synthetic,
    materialize_split,
    overlap_pct,
    pearson,
    predict,
    record_radii_trace,
    spearman,
    take_subset,
    train_network,
    train_stop_at_inversion,
)
