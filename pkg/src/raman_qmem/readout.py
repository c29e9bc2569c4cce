"""Retrieval of a stored spin wave by a second control pulse.

Everything is expressed in the normalized position ``u = z/L``. The stored
mode is ``psi(u) = sqrt(C) phi_1(C u)`` and the read-out modes are
``Psi_i(u) = sqrt(C_r) phi_i^r(C_r (1 - u))`` (forward) or
``sqrt(C_r) phi_i^r(C_r u)`` (backward). Overlaps are computed on the nodes of
the read-out quadrature rule, so the read-out modes enter through their exact
node values and ``sum |f_i|**2 <= 1`` holds to rounding.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_scalar
from .errors import DomainError
from .modes import decompose

DIRECTIONS = ("forward", "backward")
PHASE_MODES = ("phasematched", "mismatch", "quasi_phasematched")
MAP_MODES = 15


@dataclass(frozen=True)
class ReadoutConfig:
    """Read-in coupling ``C``, read-out coupling ``C_r`` and the read-out geometry.

    ``qL`` is the dimensionless residual phase slope used when
    ``phase_mode == "mismatch"``; it must be zero otherwise.
    """

    C: float
    C_r: float
    direction: str = "forward"
    phase_mode: str = "phasematched"
    qL: float = 0.0
    num_modes: int = MAP_MODES

    def __post_init__(self):
        check_scalar(self.C, "C", low=0.0, low_inclusive=False)
        check_scalar(self.C_r, "C_r", low=0.0, low_inclusive=False)
        check_int(self.num_modes, "num_modes", low=1)
        check_scalar(self.qL, "qL")
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if self.phase_mode not in PHASE_MODES:
            raise DomainError(f"phase_mode must be one of {PHASE_MODES}, got {self.phase_mode!r}")
        if self.phase_mode != "mismatch" and self.qL != 0.0:
            raise DomainError("qL is only meaningful with phase_mode='mismatch'")
        if self.direction == "backward" and self.phase_mode == "phasematched":
            # the Stark phases add rather than cancel under direction reversal
            raise DomainError("backward read-out is not phasematched; use 'quasi_phasematched' or 'mismatch'")

    @property
    def phase_slope(self):
        return self.qL if self.phase_mode == "mismatch" else 0.0


@dataclass(frozen=True, eq=False)
class ReadoutBasis:
    """Read-out modes sampled at ``u`` (one column per mode) with weights for ``int du``."""

    coupling: float
    direction: str
    u: np.ndarray
    weights: np.ndarray
    modes: np.ndarray
    lambdas: np.ndarray
    tail: float


@dataclass(frozen=True, eq=False)
class Retrieval:
    config: ReadoutConfig
    probability: float
    overlaps: np.ndarray
    stored_efficiency: float
    truncation_bound: float


@dataclass(frozen=True, eq=False)
class RetrievalMap:
    C_axis: np.ndarray
    C_r_axis: np.ndarray
    N_values: np.ndarray
    truncation: np.ndarray

    def argmax_C(self):
        """Read-in coupling maximizing the map at each read-out coupling."""
        return self.C_axis[np.argmax(self.N_values, axis=0)]

    def first_crossing(self, C, level):
        """Smallest ``C_r`` on the axis with ``N(C, C_r) >= level`` (``None`` if never)."""
        i = int(np.argmin(np.abs(self.C_axis - C)))
        hit = np.flatnonzero(self.N_values[i] >= level)
        return None if hit.size == 0 else float(self.C_r_axis[hit[0]])


def stored_mode(decomp, u, qL=0.0, mode=1):
    """Spin-wave mode ``sqrt(C) phi_mode(C u) exp(i qL u)`` at positions ``u`` in ``[0, 1]``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u < -1e-12) or np.any(u > 1 + 1e-12):
        raise DomainError("u must lie in [0, 1]")
    u = np.clip(u, 0.0, 1.0)
    C = decomp.coupling
    psi = np.sqrt(C) * decomp.evaluate(C * u, [mode])[:, 0]
    if qL:
        return psi * np.exp(1j * qL * u)
    return psi


def readout_modes(decomp_r, direction="forward", num_modes=None):
    """Read-out modes on the nodes of ``decomp_r``'s rule, mapped to ``u``."""
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    Cr = decomp_r.coupling
    k = decomp_r.num_modes if num_modes is None else min(num_modes, decomp_r.num_modes)
    v = decomp_r.rule.nodes
    u = 1.0 - v / Cr if direction == "forward" else v / Cr
    spec = np.sort(np.abs(decomp_r.spectrum))[::-1]
    tail = float(spec[k]) if k < spec.size else 0.0
    return ReadoutBasis(
        coupling=Cr,
        direction=direction,
        u=u,
        weights=decomp_r.rule.weights / Cr,
        modes=np.sqrt(Cr) * decomp_r.phi[:, :k],
        lambdas=decomp_r.lambdas[:k],
        tail=tail,
    )


def overlaps(decomp, basis, qL=0.0, mode=1):
    """``f_i = int conj(psi(u)) Psi_i(u) du`` for every read-out mode in ``basis``."""
    psi = stored_mode(decomp, basis.u, qL, mode)
    return (basis.weights * np.conj(psi)) @ basis.modes


def _retrieve(config, decomp, basis, mode=1):
    f = overlaps(decomp, basis, config.phase_slope, mode)
    stored = float(decomp.lambdas[mode - 1] ** 2)
    p2 = np.abs(f) ** 2
    prob = stored * float(np.sum(basis.lambdas**2 * p2))
    bound = stored * basis.tail**2 * max(0.0, 1.0 - float(np.sum(p2)))
    return Retrieval(config, prob, f, stored, bound)


def retrieve(config, n=500, rule="gauss", cache=None, mode=1):
    """Full retrieval record for ``config``; ``mode`` selects the stored spin-wave mode."""
    decomp = decompose(config.C, n, max(mode, 1), rule, cache)
    decomp_r = decompose(config.C_r, n, config.num_modes, rule, cache)
    return _retrieve(config, decomp, readout_modes(decomp_r, config.direction, config.num_modes), mode)


def retrieval_probability(config, n=500, rule="gauss", cache=None):
    """``N = lambda_1**2 sum_i (lambda_i^r)**2 |f_i|**2`` for a stored lowest mode."""
    return retrieve(config, n, rule, cache).probability


def retrieval_map(C_axis, C_r_axis, num_modes=MAP_MODES, n=500, rule="gauss", cache=None, workers=None):
    """Forward phasematched retrieval probability over a ``(C, C_r)`` grid.

    Decompositions are computed once per distinct coupling (through the
    cache) and cells are evaluated on a thread pool.
    """
    C_axis = np.asarray(C_axis, dtype=float)
    C_r_axis = np.asarray(C_r_axis, dtype=float)
    if C_axis.ndim != 1 or C_r_axis.ndim != 1 or C_axis.size == 0 or C_r_axis.size == 0:
        raise DomainError("axes must be non-empty 1-D arrays")
    if np.any(C_axis <= 0) or np.any(C_r_axis <= 0):
        raise DomainError("coupling axes must be positive")
    num_modes = check_int(num_modes, "num_modes", low=1)
    workers = workers or os.cpu_count() or 1

    with ThreadPoolExecutor(max_workers=workers) as pool:
        reads = list(pool.map(lambda c: decompose(c, n, 1, rule, cache), C_axis))
        outs = list(pool.map(lambda c: decompose(c, n, num_modes, rule, cache), C_r_axis))
        bases = [readout_modes(d, "forward", num_modes) for d in outs]

        def cell(ij):
            i, j = ij
            cfg = ReadoutConfig(float(C_axis[i]), float(C_r_axis[j]), num_modes=num_modes)
            r = _retrieve(cfg, reads[i], bases[j])
            return r.probability, r.truncation_bound

        cells = [(i, j) for i in range(C_axis.size) for j in range(C_r_axis.size)]
        results = list(pool.map(cell, cells))

    N = np.empty((C_axis.size, C_r_axis.size))
    T = np.empty_like(N)
    for (i, j), (p, b) in zip(cells, results):
        N[i, j], T[i, j] = p, b
    return RetrievalMap(C_axis, C_r_axis, N, T)


def mismatch_suppression(C, qL_values, n=500, rule="gauss", cache=None):
    """``|f_1|`` against the phase mismatch ``qL`` for backward read-out with ``C_r = C``."""
    C = check_scalar(C, "C", low=0.0, low_inclusive=False)
    qL_values = np.atleast_1d(np.asarray(qL_values, dtype=float))
    decomp = decompose(C, n, 1, rule, cache)
    basis = readout_modes(decomp, "backward", 1)
    return np.array([abs(overlaps(decomp, basis, q)[0]) for q in qL_values])
