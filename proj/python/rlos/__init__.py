"""Fit r-largest order statistics GEV models and select r."""

from ._rlos import (
    DataError,
    DegenerateDataError,
    FitResult,
    GevParams,
    NsGevParams,
    NumericalError,
    RLosSample,
    TestResult,
    WakebyParams,
    __version__,
    adjust_pvalues,
    contaminate,
    cvm_pvalue,
    cvm_uniform,
    digamma,
    fit_rgev,
    fit_rgev11,
    gev_cdf,
    gev_quantile,
    load_dataset,
    mann_kendall,
    rgev_negloglik,
    run_experiment,
    run_test,
    sample_rgev,
    sample_rgev11,
    sample_wakeby_rlos,
    select,
    wakeby_quantile,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
