"""Post-processing SNR of MIMO MMSE receivers with channel estimation error."""

from ._core import (
    LinalgError,
    ber_awgn,
    ce_noise_variance,
    mmse_filter,
    post_noise_cov,
    ppsnr_estimated,
    ppsnr_perfect,
    q_function,
    run_curve,
    self_checks,
)

__version__ = "0.1.0"

__all__ = [
    "LinalgError",
    "ber_awgn",
    "ce_noise_variance",
    "mmse_filter",
    "post_noise_cov",
    "ppsnr_estimated",
    "ppsnr_perfect",
    "q_function",
    "run_curve",
    "self_checks",
]
