"""Exposure fusion, haze restoration and DIC evaluation for hot speckle imagery."""

from .dic import DicConfig, DisplacementField, StrainField, edca, match_field, strain, zncc
from .fsim import (
    FsimConstants,
    LogGaborConfig,
    PcMap,
    UndefinedScoreError,
    build_log_gabor,
    fsim,
    phase_congruency,
)
from .fusion import (
    ChannelPair,
    FusionConfig,
    RetinexLayers,
    enhance,
    enhance_channel,
    fuse,
    gamma_correct,
    init_reflection,
    linear_stretch,
    split_channels,
)
from .guided import (
    EdgeClassification,
    EdgeWeightMap,
    GuidedFilterParams,
    classify_edges,
    denoise_gradients,
    edge_weight,
    guided_filter,
    multiscale_filter,
)
from .image import (
    GradientField,
    as_image,
    fft2,
    from_u8,
    gradient,
    ifft2,
    local_mean,
    local_std,
    local_variance,
    mig,
    psnr,
    to_u8,
)
from .imgio import (
    ImageIOError,
    MalformedImageError,
    UnsupportedFormatError,
    read_image,
    read_pgm,
    read_png,
    write_image,
    write_pgm,
    write_png,
)
from .restore import (
    AverageStack,
    RestorationReport,
    TurbulenceParams,
    apply_otf,
    grayscale_average,
    optimize_params,
    snr,
    turbulence_otf,
    wiener_restore,
)
from .synth import (
    ExposureResult,
    HazeSpec,
    SpeckleSpec,
    degrade_exposure,
    degrade_haze,
    gen_speckle,
    gladstone_dale,
    planck_radiance,
)

__version__ = "0.1.0"
