"""Storage of a signal wavepacket: input modes, overlaps and read-in efficiency."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ._validation import check_same_grid
from .errors import DomainError
from .numerics import integrate_samples
from .physical import SignalWavepacket, check_coupling, eps_grid, stark_phase

DEFAULT_MODES = 5


@dataclass(frozen=True, eq=False)
class ReadinResult:
    """Outcome of storing one wavepacket.

    ``overlaps[i] = int conj(xi) Phi_{i+1} dtau``; ``spinwave`` samples the
    stored amplitude on ``zeta``; ``truncation_bound`` bounds the efficiency
    carried by modes beyond those retained.
    """

    efficiency: float
    overlaps: np.ndarray
    spinwave: np.ndarray
    zeta: np.ndarray
    zeta_weights: np.ndarray
    leakage: float
    truncation_bound: float


def _stark0(params, pulse):
    if params is None:
        return np.zeros(pulse.tau.size)
    return stark_phase(params, pulse, pulse.tau, 0.0)


def input_modes(decomp, pulse, params=None, num_modes=None):
    """Temporal input modes ``Phi_i(tau)``, one row per mode, on the pulse grid.

    ``Phi_i = sqrt(C/omega(T)) exp(i chi(tau, 0)) Omega(tau) phi_i(C - eps(tau))``.
    Without ``params`` the Stark phase is omitted and the coupling is taken
    from ``decomp``.
    """
    C = decomp.coupling
    if params is not None:
        check_coupling(params, pulse, C)
    k = decomp.usable_modes() if num_modes is None else min(num_modes, decomp.usable_modes())
    if k < 1:
        raise DomainError("no mode of this decomposition is above the extension floor")
    u = C - eps_grid(pulse, C)
    phi = decomp.evaluate(u, list(range(1, k + 1)))
    pref = np.sqrt(C / pulse.omega_T) * np.exp(1j * _stark0(params, pulse)) * pulse.omega_rabi
    return (pref[:, None] * phi).T


def _as_wavepacket_on(xi, tau):
    if xi.tau.shape == tau.shape and np.allclose(xi.tau, tau, rtol=0, atol=1e-12 * max(tau[-1], 1.0)):
        return xi
    t = np.clip(tau, xi.tau[0], xi.tau[-1])
    re = CubicSpline(xi.tau, xi.xi.real)(t)
    im = CubicSpline(xi.tau, xi.xi.imag)(t)
    return SignalWavepacket.normalized(tau, re + 1j * im)


def overlap(xi, mode, tau=None):
    """``int conj(xi(tau)) Phi(tau) dtau`` on a common grid."""
    mode = np.asarray(mode, dtype=complex)
    if tau is not None:
        check_same_grid(xi.tau, tau, "signal and mode grids")
    if mode.shape != xi.tau.shape:
        raise DomainError("mode samples must be on the signal grid")
    return complex(integrate_samples(np.conj(xi.xi) * mode, xi.tau))


def readin(xi, decomp, pulse, params=None, num_modes=DEFAULT_MODES):
    """Read-in efficiency ``sum lambda_i**2 |xi_i|**2`` and the stored spin wave.

    A signal on a different grid is resampled onto the pulse grid by cubic
    interpolation (clamped at the ends) and renormalized.
    """
    xi = _as_wavepacket_on(xi, pulse.tau)
    modes = input_modes(decomp, pulse, params, num_modes)
    k = modes.shape[0]
    ov = integrate_samples(np.conj(xi.xi)[None, :] * modes, xi.tau, axis=1)
    lam = decomp.lambdas[:k]
    eff = float(np.sum(lam**2 * np.abs(ov) ** 2))
    # amplitude of the signal along Phi_i is conj(overlap)
    spin = decomp.phi[:, :k] @ (-decomp.signed_lambdas[:k] * np.conj(ov))
    tail = np.sort(np.abs(decomp.spectrum))[::-1][k:]
    bound = float(np.sum(tail**2) * max(0.0, 1.0 - np.sum(np.abs(ov) ** 2)))
    return ReadinResult(
        efficiency=eff,
        overlaps=ov,
        spinwave=spin,
        zeta=decomp.rule.nodes,
        zeta_weights=decomp.rule.weights,
        leakage=1.0 - eff,
        truncation_bound=bound,
    )


def readin_by_scattering(xi, decomp, pulse, params=None, n=None, strict=True):
    """Same storage computed by direct scattering of the transformed signal.

    Returns ``(stored, transmitted)`` photon numbers. ``strict=False`` drops
    signal where the control vanishes (it is never coupled).
    """
    from .physical import resample_scaled
    from .transport import scatter

    xi = _as_wavepacket_on(xi, pulse.tau)
    field = resample_scaled(params, pulse, xi.xi, decomp.coupling, n or decomp.n, strict=strict)
    b = scatter(field).budget()
    return b.N_beta_out, b.N_alpha_out
