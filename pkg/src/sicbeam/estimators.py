"""Scikit-learn style estimator wrappers around the precoder designers.

Each estimator is configured with plain constructor parameters
(``get_params`` / ``set_params`` work as usual), fitted on a channel matrix,
and exposes the designed precoder through trailing-underscore attributes.
``transform`` applies the fitted precoder to baseband symbol blocks and
``score`` evaluates the achievable rate on a (possibly different) channel,
so the estimators compose with model-selection utilities out of the box:

    >>> est = SICHybridPrecoder(n_subarrays=8, snr_db=0.0).fit(channel)
    >>> antenna_signals = est.transform(symbol_blocks)
    >>> est.score(channel)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import (
    analog_steering_precoder,
    optimal_subconnected_precoder,
    svd_precoder,
)
from .channel import ChannelMatrix
from .precoding import sic_precode
from .rate import achievable_rate, db_to_linear
from .validation import check_complex_matrix

__all__ = [
    "SICHybridPrecoder",
    "OptimalSubconnectedPrecoder",
    "FullSVDPrecoder",
    "AnalogSteeringPrecoder",
]


class _PrecoderEstimator(BaseEstimator):
    """Shared fit/transform/score plumbing; subclasses implement ``_design``."""

    def _as_channel(self, X):
        if isinstance(X, ChannelMatrix):
            return X
        return check_complex_matrix(X, "channel")

    def _design(self, channel):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Design the precoder for channel ``X`` (receive x transmit)."""
        channel = self._as_channel(X)
        precoder = self._design(channel)
        self.precoder_ = precoder
        self.matrix_ = np.asarray(getattr(precoder, "matrix", precoder))
        self.n_features_in_ = self.matrix_.shape[0]
        return self

    def transform(self, X):
        """Map symbol blocks ``(n_samples, n_streams)`` to antenna signals."""
        check_is_fitted(self, "matrix_")
        s = np.asarray(X, dtype=np.complex128)
        if s.ndim != 2 or s.shape[1] != self.matrix_.shape[1]:
            raise ValueError(
                f"expected symbol blocks of shape (n_samples, {self.matrix_.shape[1]}), "
                f"got {s.shape}"
            )
        return s @ self.matrix_.T

    def score(self, X, y=None) -> float:
        """Achievable rate of the fitted precoder over channel ``X``."""
        check_is_fitted(self, "matrix_")
        channel = self._as_channel(X)
        return achievable_rate(
            channel, self.matrix_, db_to_linear(self.snr_db), self.matrix_.shape[1]
        )


class SICHybridPrecoder(_PrecoderEstimator):
    """Successive per-subarray hybrid precoder (the low-complexity designer).

    Parameters
    ----------
    n_subarrays : int, optional
        RF-chain count; defaults to the channel's recorded split.
    snr_db : float
        Design (and scoring) SNR in dB.
    iterations : int
        Power-iteration sweeps per subarray.
    update_mode : str
        ``"eigen"`` or ``"exact"`` residual downdates.

    Attributes
    ----------
    analog_ : ndarray of shape (n_subarrays, subarray_size)
        Fitted phase-shifter vectors.
    digital_gains_ : ndarray of shape (n_subarrays,)
        Fitted real RF-chain gains.
    matrix_ : ndarray
        Assembled block-diagonal precoding matrix.
    """

    def __init__(self, n_subarrays=None, snr_db=0.0, iterations=5, update_mode="eigen"):
        self.n_subarrays = n_subarrays
        self.snr_db = snr_db
        self.iterations = iterations
        self.update_mode = update_mode

    def _design(self, channel):
        precoder = sic_precode(
            channel,
            db_to_linear(self.snr_db),
            max_iterations=self.iterations,
            update_mode=self.update_mode,
            n_subarrays=self.n_subarrays,
        )
        self.analog_ = precoder.analog
        self.digital_gains_ = precoder.digital
        return precoder


class OptimalSubconnectedPrecoder(_PrecoderEstimator):
    """Sub-connected performance ceiling: exact per-block eigenvectors."""

    def __init__(self, n_subarrays=None, snr_db=0.0):
        self.n_subarrays = n_subarrays
        self.snr_db = snr_db

    def _design(self, channel):
        return optimal_subconnected_precoder(
            channel, db_to_linear(self.snr_db), n_subarrays=self.n_subarrays
        )


class FullSVDPrecoder(_PrecoderEstimator):
    """Fully-connected benchmark: equal power on the top singular directions."""

    def __init__(self, n_streams=None, snr_db=0.0):
        self.n_streams = n_streams
        self.snr_db = snr_db

    def _design(self, channel):
        return svd_precoder(channel, n_streams=self.n_streams)


class AnalogSteeringPrecoder(_PrecoderEstimator):
    """Analog-only baseline: subarrays beam-steer at the strongest path.

    Requires fitting on a :class:`~sicbeam.channel.ChannelMatrix` carrying
    path metadata and transmit geometry.
    """

    def __init__(self, n_subarrays=None, snr_db=0.0):
        self.n_subarrays = n_subarrays
        self.snr_db = snr_db

    def _design(self, channel):
        return analog_steering_precoder(channel, n_subarrays=self.n_subarrays)
