"""Structured multifractal detrended fluctuation analysis toolkit.

Core pipeline: load a price series, transform it to absolute log
fluctuations, detect mean/variance change-points with a penalized cost,
run MF-DFA independently on every regime, and report per-segment
singularity spectra. Companion tools cover surrogate-data attribution,
long-memory estimation and fractional differencing, and an FD-NAR vs
LFD-NAR forecasting comparison.
"""

from .changepoint import (
    ChangePointConfig,
    ChangePointResult,
    default_penalty,
    detect_multiple,
    detect_single,
    segment_cost,
)
from .errors import InputError, NumericalError
from .forecast import (
    ForecastReport,
    ForecastRow,
    NarModel,
    Reconstruction,
    TrainConfig,
    mape,
    pipeline_compare,
    reconstruct,
    train_nar,
)
from .longmemory import (
    FracDiffConfig,
    FracDiffResult,
    LongMemoryEstimate,
    arfima_generate,
    fgn_generate,
    frac_diff,
    frac_diff_weights,
    frac_integrate,
    gph_estimate,
    hurst_dfa,
)
from .mfdfa import (
    FluctuationSurface,
    HurstCurve,
    MfdfaConfig,
    PartitionFunction,
    SegmentReport,
    SingularitySpectrum,
    StructuredReport,
    analytic_delta_alpha,
    analytic_rho,
    analyze_segment,
    default_scale_grid,
    fa_partition,
    fluctuation_surface,
    generalized_hurst,
    generate_cascade,
    s_mfdfa,
    scaling_and_spectrum,
)
from .series import (
    CsvConfig,
    DescriptiveStats,
    FluctSeries,
    OutlierCensus,
    SegmentedSeries,
    TimeSeries,
    describe,
    load_csv,
    outlier_census,
    split_segments,
    to_fluctuations,
)
from .surrogate import (
    SurrogateComparison,
    SurrogateEnsemble,
    make_ensemble,
    phase_surrogate,
    shuffle,
    surrogate_test,
)

__version__ = "0.1.0"

__all__ = [
    "ChangePointConfig",
    "ChangePointResult",
    "CsvConfig",
    "DescriptiveStats",
    "FluctSeries",
    "FluctuationSurface",
    "ForecastReport",
    "ForecastRow",
    "FracDiffConfig",
    "FracDiffResult",
    "HurstCurve",
    "InputError",
    "LongMemoryEstimate",
    "MfdfaConfig",
    "NarModel",
    "NumericalError",
    "OutlierCensus",
    "PartitionFunction",
    "Reconstruction",
    "SegmentReport",
    "SegmentedSeries",
    "SingularitySpectrum",
    "StructuredReport",
    "SurrogateComparison",
    "SurrogateEnsemble",
    "TimeSeries",
    "TrainConfig",
    "analytic_delta_alpha",
    "analytic_rho",
    "analyze_segment",
    "arfima_generate",
    "default_penalty",
    "default_scale_grid",
    "describe",
    "detect_multiple",
    "detect_single",
    "fa_partition",
    "fgn_generate",
    "fluctuation_surface",
    "frac_diff",
    "frac_diff_weights",
    "frac_integrate",
    "generalized_hurst",
    "generate_cascade",
    "gph_estimate",
    "hurst_dfa",
    "load_csv",
    "make_ensemble",
    "mape",
    "outlier_census",
    "phase_surrogate",
    "pipeline_compare",
    "reconstruct",
    "s_mfdfa",
    "scaling_and_spectrum",
    "segment_cost",
    "shuffle",
    "split_segments",
    "surrogate_test",
    "to_fluctuations",
    "train_nar",
    "__version__",
]
