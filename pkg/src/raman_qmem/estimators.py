"""scikit-learn style wrappers around the memory model.

Signals are passed as 2-D complex arrays, one wavepacket per row, sampled on
``linspace(0, T, n_samples)``. scikit-learn's own ``check_array`` rejects
complex input, so rows are validated here.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DomainError
from .modes import decompose
from .numerics import integrate_samples
from .physical import ControlPulse, SignalWavepacket
from .readin import input_modes, readin
from .readout import ReadoutConfig, retrieval_probability
from .shaping import shape_analytic, shape_optimize


def check_signals(X, n_samples=None):
    """Validate a batch of complex wavepackets; 1-D input is treated as a single row."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise DomainError(f"expected a 2-D array of signals, got shape {X.shape}")
    X = X.astype(complex)
    if not np.all(np.isfinite(X)):
        raise DomainError("signals contain non-finite values")
    if n_samples is not None and X.shape[1] != n_samples:
        raise DomainError(f"signals have {X.shape[1]} samples, estimator was fitted with {n_samples}")
    return X


def _packets(X, tau):
    return [SignalWavepacket.normalized(tau, row) for row in X]


class RamanMemory(TransformerMixin, BaseEstimator):
    """Read-in of signals with a fixed control pulse.

    ``fit`` builds the mode decomposition and the input modes on the signal
    grid (a flat control of energy ``omega_T`` unless ``pulse`` is given).
    ``transform`` returns the overlaps with the input modes, ``predict`` the
    read-in efficiency of each (normalized) row.
    """

    def __init__(self, C=2.0, T=1.0, omega_T=1.0, n=500, num_modes=5, rule="gauss", pulse=None):
        self.C = C
        self.T = T
        self.omega_T = omega_T
        self.n = n
        self.num_modes = num_modes
        self.rule = rule
        self.pulse = pulse

    def fit(self, X, y=None):
        X = check_signals(X)
        m = X.shape[1]
        pulse = self.pulse if self.pulse is not None else ControlPulse.flat(self.omega_T, self.T, m)
        if pulse.tau.size != m:
            raise DomainError("pulse grid does not match the signal length")
        self.decomposition_ = decompose(self.C, self.n, self.num_modes, self.rule)
        self.pulse_ = pulse
        self.tau_ = pulse.tau
        self.input_modes_ = input_modes(self.decomposition_, pulse, None, self.num_modes)
        self.lambdas_ = self.decomposition_.lambdas[: self.input_modes_.shape[0]]
        self.n_features_in_ = m
        return self

    def transform(self, X):
        check_is_fitted(self, "input_modes_")
        X = check_signals(X, self.n_features_in_)
        return integrate_samples(np.conj(X)[:, None, :] * self.input_modes_[None, :, :], self.tau_, axis=2)

    def predict(self, X):
        check_is_fitted(self, "input_modes_")
        X = check_signals(X, self.n_features_in_)
        return np.array([readin(xi, self.decomposition_, self.pulse_, None, self.num_modes).efficiency
                         for xi in _packets(X, self.tau_)])

    def score(self, X, y=None):
        return float(np.mean(self.predict(X)))


class ControlShaper(BaseEstimator):
    """Control pulse that mode-matches one signal, by construction or by search.

    After ``fit`` the pulse is in ``pulse_`` and the achieved read-in
    efficiency in ``efficiency_``; ``predict`` evaluates other signals with it.
    """

    def __init__(self, C=2.0, T=1.0, omega_T=1.0, method="analytic", n=200, num_modes=5, budget=2000,
                 init="flat", seed=0):
        self.C = C
        self.T = T
        self.omega_T = omega_T
        self.method = method
        self.n = n
        self.num_modes = num_modes
        self.budget = budget
        self.init = init
        self.seed = seed

    def fit(self, X, y=None):
        X = check_signals(X)
        if X.shape[0] != 1:
            raise DomainError("ControlShaper fits a single signal")
        tau = np.linspace(0.0, self.T, X.shape[1])
        xi = SignalWavepacket.normalized(tau, X[0])
        self.decomposition_ = decompose(self.C, self.n, self.num_modes)
        if self.method == "analytic":
            res = shape_analytic(xi, self.decomposition_, self.omega_T, None, self.num_modes)
        elif self.method == "optimize":
            res = shape_optimize(xi, self.C, None, self.init, self.budget, self.seed, self.omega_T,
                                 self.decomposition_, num_modes=self.num_modes)
        else:
            raise DomainError(f"method must be 'analytic' or 'optimize', got {self.method!r}")
        self.result_ = res
        self.pulse_ = res.pulse
        self.efficiency_ = res.achieved_efficiency
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "pulse_")
        X = check_signals(X, self.n_features_in_)
        return np.array([readin(xi, self.decomposition_, self.pulse_, None, self.num_modes).efficiency
                         for xi in _packets(X, self.pulse_.tau)])

    def score(self, X, y=None):
        return float(np.mean(self.predict(X)))


class RetrievalModel(BaseEstimator):
    """Retrieval probability as a function of ``(C, C_r)`` rows."""

    def __init__(self, direction="forward", phase_mode="phasematched", qL=0.0, num_modes=15, n=500):
        self.direction = direction
        self.phase_mode = phase_mode
        self.qL = qL
        self.num_modes = num_modes
        self.n = n

    def fit(self, X=None, y=None):
        # validates the geometry once; nothing is learned
        ReadoutConfig(1.0, 1.0, self.direction, self.phase_mode, self.qL, self.num_modes)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != 2:
            raise DomainError("rows must be (C, C_r) pairs")
        return np.array([
            retrieval_probability(ReadoutConfig(float(c), float(cr), self.direction, self.phase_mode,
                                                self.qL, self.num_modes), self.n)
            for c, cr in X
        ])
