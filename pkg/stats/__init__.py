from stats.samples import EmptySampleError, Sample, TestResult
from stats.two_sample import (
    ChiSquareDegenerate,
    chi_square_from_samples,
    chi_square_two_sample,
    ks_two_sample,
)
from stats.intervals import TooFewBatches, batch_mean_ci, mean_se, wilson_interval
from stats.summary import RunningSummary

__all__ = [
    "EmptySampleError", "Sample", "TestResult",
    "ChiSquareDegenerate", "chi_square_from_samples", "chi_square_two_sample",
    "ks_two_sample", "TooFewBatches", "batch_mean_ci", "mean_se",
    "wilson_interval", "RunningSummary",
]
