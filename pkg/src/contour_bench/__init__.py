"""Fragmented-object contour integration benchmark toolkit.

Synthesizes phosphene/segment/contour stimuli from background-removed
object photos, runs zero-shot and decoder-fit model readouts, computes
the behavioral statistics (accuracy curves, log-linear scaling fits,
integration bias), and hosts the 12-AFC human experiment over HTTP.
"""

__version__ = "0.1.0"

from .categories import CATEGORIES
from .filtering import (
    GaborParams,
    OrientationBank,
    ContourMap,
    BinaryImage,
    dc_constant,
    make_gabor_kernel,
    contour_energy,
    dominant_orientation,
    binarize_contours,
)
from .placement import (
    Element,
    PlacementConfig,
    fragmentation_levels,
    saturate_place,
    subsample,
    render_elements,
)
from .pipeline import (
    SourceImage,
    StimulusSpec,
    DatasetManifest,
    PipelineConfig,
    load_source,
    generate_noise_mask,
    build_dataset,
)
from .readout import (
    CategoryMapping,
    ActivationSet,
    DecoderModel,
    DecoderHyper,
    read_actf,
    write_actf,
    zero_shot_predict,
    fit_decoder,
    decoder_predict,
)
from .analysis import (
    FitResult,
    EffectSize,
    RegressionResult,
    BiasSummary,
    condition_accuracy,
    log_linear_fit,
    integration_bias,
    cohens_d,
    pearson,
    multiple_regression,
)
from .reporting import scaling_report
