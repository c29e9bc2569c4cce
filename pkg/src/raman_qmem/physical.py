"""Laboratory quantities and their map onto dimensionless memory coordinates.

SI units throughout: detunings and Rabi frequencies in rad/s, lengths in m,
times in s, the signal coupling ``kappa`` in s^-1/2 m^-1/2.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ._validation import as_complex_array, check_grid, check_int, check_scalar
from .errors import DegenerateTransformError, DomainError
from .numerics import cumulative_integral, integrate_samples, sample_rule

# CODATA 2018, 9 significant figures
FINE_STRUCTURE = 7.29735257e-3
HBAR = 1.05457182e-34  # J s
ELECTRON_MASS = 9.10938370e-31  # kg
SPEED_OF_LIGHT = 299792458.0  # m/s

DISPERSIVE_RATIO = 10.0
PHASEMATCH_THRESHOLD = 0.1
OMEGA_FLOOR = 1e-6


@dataclass(frozen=True)
class PhysicalParams:
    """Memory parameters. Ensemble fields are only needed by the ensemble formula."""

    delta: float
    gamma: float
    kappa: float
    L: float
    T: float
    omega_s: float = None
    omega_c: float = None
    f: float = 1.0
    area: float = None
    N_a: float = None
    N_c: float = None

    def __post_init__(self):
        check_scalar(self.delta, "delta", low=0.0, low_inclusive=False)
        check_scalar(self.gamma, "gamma", low=0.0)
        check_scalar(self.kappa, "kappa", low=0.0, low_inclusive=False)
        check_scalar(self.L, "L", low=0.0, low_inclusive=False)
        check_scalar(self.T, "T", low=0.0, low_inclusive=False)
        for name in ("omega_s", "omega_c", "f", "area", "N_a", "N_c"):
            v = getattr(self, name)
            if v is not None:
                check_scalar(v, name, low=0.0, low_inclusive=False)

    @property
    def abs_gamma(self):
        """Modulus of the complex detuning ``Delta - i gamma``."""
        return float(np.hypot(self.delta, self.gamma))

    @property
    def theta(self):
        return float(np.arctan2(self.gamma, self.delta))

    @property
    def dispersive_ok(self):
        return self.gamma == 0 or self.delta / self.gamma >= DISPERSIVE_RATIO

    def omega_T_for(self, C):
        """Pulse energy ``omega(T)`` giving coupling ``C`` with these parameters."""
        C = check_scalar(C, "C", low=0.0, low_inclusive=False)
        return (C * self.abs_gamma / self.kappa) ** 2 / self.L

    def require_dispersive(self):
        if not self.dispersive_ok:
            raise DomainError(
                f"not in the dispersive limit: delta/gamma = {self.delta / self.gamma:.3g} < {DISPERSIVE_RATIO}"
            )

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def scaled_params(C, omega_T=1.0, T=1.0, L=1.0, delta=1e3, gamma=0.0):
    """Dimensionless parameter set with coupling ``C`` at pulse energy ``omega_T``."""
    C = check_scalar(C, "C", low=0.0, low_inclusive=False)
    kappa = C * float(np.hypot(delta, gamma)) / np.sqrt(L * omega_T)
    return PhysicalParams(delta=delta, gamma=gamma, kappa=kappa, L=L, T=T)


@dataclass(frozen=True, eq=False)
class ControlPulse:
    """Rabi-frequency samples on ``[0, T]`` with the running energy ``omega(tau)``."""

    tau: np.ndarray
    omega_rabi: np.ndarray
    cumulative: np.ndarray = None

    def __post_init__(self):
        tau = check_grid(self.tau, "tau")
        if tau[0] != 0.0:
            raise DomainError("control pulses are sampled from tau = 0")
        om = as_complex_array(self.omega_rabi, "omega_rabi")
        if om.shape != tau.shape:
            raise DomainError("omega_rabi must match the tau grid")
        if self.cumulative is None:
            cum = cumulative_integral(np.abs(om) ** 2, tau)
        else:
            cum = np.asarray(self.cumulative, dtype=float)
            if cum.shape != tau.shape:
                raise DomainError("cumulative must match the tau grid")
        if cum[0] != 0.0 or np.any(np.diff(cum) < 0):
            raise DomainError("integrated Rabi frequency must start at 0 and be non-decreasing")
        if not cum[-1] > 0:
            raise DomainError("control pulse carries no energy")
        for name, arr in (("tau", tau), ("omega_rabi", om), ("cumulative", cum)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def T(self):
        return float(self.tau[-1])

    @property
    def omega_T(self):
        return float(self.cumulative[-1])

    @property
    def intensity(self):
        return np.abs(self.omega_rabi) ** 2

    @classmethod
    def flat(cls, omega_T, T=1.0, n=2001):
        """Constant ``|Omega|**2 = omega_T / T``; the running energy is exact."""
        tau = np.linspace(0.0, T, n)
        amp = np.sqrt(omega_T / T)
        return cls(tau, np.full(n, amp, dtype=complex), omega_T * tau / T)

    @classmethod
    def from_intensity(cls, tau, intensity, omega_T=None, phase=None):
        """Pulse from a non-negative intensity profile, optionally rescaled to energy ``omega_T``."""
        tau = np.asarray(tau, dtype=float)
        intensity = np.asarray(intensity, dtype=float)
        if np.any(intensity < 0):
            raise DomainError("intensity must be non-negative")
        cum = cumulative_integral(intensity, tau)
        if omega_T is not None:
            if not cum[-1] > 0:
                raise DomainError("control pulse carries no energy")
            scale = omega_T / cum[-1]
            intensity = intensity * scale
            cum = cum * scale
        amp = np.sqrt(intensity).astype(complex)
        if phase is not None:
            amp = amp * np.exp(1j * np.asarray(phase))
        return cls(tau, amp, cum)


@dataclass(frozen=True, eq=False)
class SignalWavepacket:
    """Single-photon amplitude ``xi(tau)`` normalized on its grid."""

    tau: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        tau = check_grid(self.tau, "tau")
        xi = as_complex_array(self.xi, "xi")
        if xi.shape != tau.shape:
            raise DomainError("xi must match the tau grid")
        norm = integrate_samples(np.abs(xi) ** 2, tau)
        if abs(norm - 1.0) > 1e-8:
            raise DomainError(f"wavepacket norm is {norm:.12g}, expected 1")
        tau.setflags(write=False)
        xi.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "xi", xi)

    @classmethod
    def normalized(cls, tau, xi):
        tau = np.asarray(tau, dtype=float)
        xi = np.asarray(xi, dtype=complex)
        norm = integrate_samples(np.abs(xi) ** 2, tau)
        if not norm > 0:
            raise DomainError("wavepacket is identically zero")
        return cls(tau, xi / np.sqrt(norm))

    @property
    def T(self):
        return float(self.tau[-1])

    @property
    def intensity(self):
        return np.abs(self.xi) ** 2


def gaussian_wavepacket(sigma, tau0, T, n=2001):
    """``xi ~ exp(-2 ln2 ((tau - tau0)/sigma)**2)``: intensity FWHM equals ``sigma``."""
    sigma = check_scalar(sigma, "sigma", low=0.0, low_inclusive=False)
    T = check_scalar(T, "T", low=0.0, low_inclusive=False)
    tau0 = check_scalar(tau0, "tau0", low=0.0, high=T, low_inclusive=False, high_inclusive=False)
    n = check_int(n, "n", low=3)
    tau = np.linspace(0.0, T, n)
    xi = np.exp(-2.0 * np.log(2.0) * ((tau - tau0) / sigma) ** 2)
    return SignalWavepacket.normalized(tau, xi)


def memory_time(pulse, C, tau):
    """``eps(tau) = C omega(tau) / omega(T)``; ``tau`` may be scalar or array."""
    C = check_scalar(C, "C", low=0.0, low_inclusive=False)
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0) or np.any(t > pulse.T) or not np.all(np.isfinite(t)):
        raise DomainError(f"tau must lie in [0, {pulse.T}]")
    eps = C * np.interp(t, pulse.tau, pulse.cumulative) / pulse.omega_T
    return float(eps) if eps.ndim == 0 else eps


def eps_grid(pulse, C):
    """Memory time at every sample of the pulse grid."""
    return C * pulse.cumulative / pulse.omega_T


def coupling_from_fields(params, pulse):
    """``C = |kappa| sqrt(L omega(T)) / |Gamma|``."""
    omega_T = pulse.omega_T if isinstance(pulse, ControlPulse) else float(pulse)
    if not omega_T > 0:
        raise DomainError("omega(T) must be positive")
    return abs(params.kappa) * np.sqrt(params.L * omega_T) / params.abs_gamma


def _ensemble_prefactor():
    return np.pi * FINE_STRUCTURE * HBAR / ELECTRON_MASS


def coupling_from_ensemble(params):
    """Coupling from atom number, control photon number and beam area.

    ``C = (pi alpha_f hbar / m_e) f sqrt(N_a N_c) / (|Gamma| A)``. The
    prefactor enters to the first power; that is the dimensionless form.
    """
    for name in ("area", "N_a", "N_c"):
        if getattr(params, name) is None:
            raise DomainError(f"coupling_from_ensemble needs {name}")
    return _ensemble_prefactor() * params.f * np.sqrt(params.N_a * params.N_c) / (params.abs_gamma * params.area)


def ensemble_kappa(f, N_a, area, L):
    """Signal coupling consistent with the ensemble formula: ``kappa**2 L = P f N_a / A``."""
    return float(np.sqrt(_ensemble_prefactor() * f * N_a / (area * L)))


def ensemble_omega_T(f, N_c, area):
    """Control energy consistent with the ensemble formula: ``omega(T) = P f N_c / A``."""
    return float(_ensemble_prefactor() * f * N_c / area)


def desk_scenario(density=1e20, L=0.02, f=1.0, pulse_energy=100e-9, duration=1e-12, wavelength=852e-9,
                  detuning_factor=10.0, gamma=2 * np.pi * 5.2e6):
    """Warm-vapour storage of a ps photon with Gaussian-optics focusing.

    The beam area is ``c L / omega_s``; the detuning is ``detuning_factor``
    times the transform-limited signal bandwidth (Gaussian, 0.441 time-
    bandwidth product); the interaction window ``T`` is eight durations.
    """
    omega_s = 2 * np.pi * SPEED_OF_LIGHT / wavelength
    omega_c = omega_s
    area = SPEED_OF_LIGHT * L / omega_s
    N_a = density * area * L
    N_c = pulse_energy / (HBAR * omega_c)
    bandwidth = 2 * np.pi * 0.441 / duration
    delta = detuning_factor * bandwidth
    kappa = ensemble_kappa(f, N_a, area, L)
    return PhysicalParams(
        delta=delta, gamma=gamma, kappa=kappa, L=L, T=8 * duration,
        omega_s=omega_s, omega_c=omega_c, f=f, area=area, N_a=N_a, N_c=N_c,
    )


def stark_phase(params, pulse, tau, z):
    """``chi = (omega(tau) + kappa**2 z) / Delta`` in the dispersive limit."""
    params.require_dispersive()
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0) or np.any(t > pulse.T):
        raise DomainError(f"tau must lie in [0, {pulse.T}]")
    w = np.interp(t, pulse.tau, pulse.cumulative)
    chi = (w + params.kappa**2 * np.asarray(z, dtype=float)) / params.delta
    return float(chi) if np.ndim(chi) == 0 else chi


def _omega_mask(pulse, floor):
    mag = np.abs(pulse.omega_rabi)
    return mag >= floor * np.max(mag)


def to_scaled(params, pulse, A, B=None, z=None, C=None, strict=True, floor=OMEGA_FLOOR):
    """Physical boundary data to a ``ScaledField`` on the pulse's memory-time grid.

    ``A`` samples the entrance-face signal on the pulse grid; ``B`` samples the
    initial spin wave on the positions ``z`` (default: zero spin wave on a
    uniform grid). Where ``|Omega|`` is below ``floor * max|Omega|`` the
    transform is singular: with ``strict`` this raises if the signal is
    non-zero there, otherwise those samples are carried unscaled.
    """
    from .transport import ScaledField

    params.require_dispersive()
    C = coupling_from_fields(params, pulse) if C is None else check_scalar(C, "C", low=0.0, low_inclusive=False)
    A = as_complex_array(A, "A")
    if A.shape != pulse.tau.shape:
        raise DomainError("signal samples must be on the pulse grid")
    ok = _omega_mask(pulse, floor)
    if np.any(~ok & (np.abs(A) > 0)):
        msg = "control field vanishes where the signal does not"
        if strict:
            raise DegenerateTransformError(msg)
        warnings.warn(msg + "; carrying those samples unscaled", RuntimeWarning, stacklevel=2)
    chi0 = stark_phase(params, pulse, pulse.tau, 0.0)
    om = np.where(ok, pulse.omega_rabi, 1.0)
    alpha = np.where(ok, np.sqrt(pulse.omega_T / C) * np.exp(-1j * chi0) * A / om, A)
    eps_rule = sample_rule(eps_grid(pulse, C))
    if z is None:
        z = np.linspace(0.0, params.L, pulse.tau.size)
    z = check_grid(z, "z")
    if B is None:
        B = np.zeros(z.size, dtype=complex)
    B = as_complex_array(B, "B")
    if B.shape != z.shape:
        raise DomainError("spin-wave samples must match z")
    beta = np.sqrt(params.L / C) * np.exp(-1j * params.kappa**2 * z / params.delta) * B
    zeta_rule = sample_rule(C * z / params.L)
    return ScaledField(C, eps_rule, alpha, zeta_rule, beta)


def resample_scaled(params, pulse, A, C, n=500, rule="gauss", strict=True):
    """Entrance-face signal as a ``ScaledField`` on an ``n``-node rule over ``[0, C]``.

    Each rule node is pulled back to local time through the (monotone)
    memory-time map and the scaled amplitude is interpolated there.
    ``params=None`` drops the Stark phase. Signal where ``Omega = 0`` never
    couples to the medium: with ``strict`` a vanishing control raises,
    otherwise those samples are dropped (the control must then be non-zero on
    a single contiguous stretch).
    """
    from .numerics import make_rule
    from .transport import ScaledField

    A = as_complex_array(A, "A")
    mag = np.abs(pulse.omega_rabi)
    on = mag > 0
    if not np.all(on):
        if strict:
            raise DegenerateTransformError("resampling needs a control field that never vanishes")
        idx = np.flatnonzero(on)
        if idx.size < 4 or np.any(np.diff(idx) != 1):
            raise DegenerateTransformError("control field must be non-zero on one contiguous stretch")
        warnings.warn("signal outside the control's support is uncoupled and was dropped", stacklevel=2)
    chi0 = np.zeros(pulse.tau.size) if params is None else stark_phase(params, pulse, pulse.tau, 0.0)
    tau, eps = pulse.tau[on], eps_grid(pulse, C)[on]
    alpha = np.sqrt(pulse.omega_T / C) * np.exp(-1j * chi0[on]) * A[on] / pulse.omega_rabi[on]
    r = make_rule(rule, n, 0.0, C)
    t = np.interp(r.nodes, eps, tau)
    a = CubicSpline(tau, alpha.real)(t) + 1j * CubicSpline(tau, alpha.imag)(t)
    return ScaledField.on_rule(C, r, a)


def signal_from_scaled(params, pulse, alpha, C, z=0.0, floor=OMEGA_FLOOR):
    """Physical signal ``A(tau, z)`` from scaled samples on the pulse grid."""
    alpha = as_complex_array(alpha, "alpha")
    if alpha.shape != pulse.tau.shape:
        raise DomainError("scaled samples must be on the pulse grid")
    ok = _omega_mask(pulse, floor)
    chi = stark_phase(params, pulse, pulse.tau, z)
    return np.where(ok, pulse.omega_rabi * np.sqrt(C / pulse.omega_T) * np.exp(1j * chi) * alpha, alpha)


def spinwave_from_scaled(params, pulse, beta, z, tau):
    """Physical spin wave ``B(tau, z)`` from scaled samples at positions ``z``."""
    C = coupling_from_fields(params, pulse)
    chi = stark_phase(params, pulse, tau, np.asarray(z, dtype=float))
    return np.sqrt(C / params.L) * np.exp(1j * chi) * as_complex_array(beta, "beta")


def from_scaled(params, pulse, field, z=None, floor=OMEGA_FLOOR):
    """Inverse of ``to_scaled``: returns ``(A, B)`` on the pulse grid and ``z``."""
    C = field.coupling
    if field.eps_rule.order != pulse.tau.size:
        raise DomainError("field was not sampled on this pulse's grid")
    A = signal_from_scaled(params, pulse, field.alpha0, C, 0.0, floor)
    if z is None:
        z = field.zeta_rule.nodes * params.L / C
    B = np.sqrt(C / params.L) * np.exp(1j * params.kappa**2 * np.asarray(z) / params.delta) * field.beta0
    return A, B


def phasematch_ratio(params, delta_r, N_c_r=None):
    """``(|Delta_r - Delta| / Delta) / (Delta_r / (kappa**2 L))``; small means phasematched.

    ``N_c_r`` is accepted for the report's alternative estimate and does
    not change the ratio.
    """
    delta_r = check_scalar(delta_r, "delta_r", low=0.0, low_inclusive=False)
    shift = abs(delta_r - params.delta) / params.delta
    allowance = delta_r / (params.kappa**2 * params.L)
    return float(shift / allowance)


def phasematch_report(params, delta_r, N_c_r=None, threshold=PHASEMATCH_THRESHOLD):
    ratio = phasematch_ratio(params, delta_r)
    report = {
        "ratio": ratio,
        "threshold": threshold,
        "status": "phasematched" if ratio < threshold else "phase-mismatched",
        "allowance": delta_r / (params.kappa**2 * params.L),
    }
    if N_c_r is not None and params.N_a is not None:
        report["allowance_estimate"] = float(np.sqrt(N_c_r / params.N_a))
    return report


def check_coupling(params, pulse, C, rtol=1e-6):
    """Raise unless ``params`` and ``pulse`` reproduce coupling ``C``."""
    actual = coupling_from_fields(params, pulse)
    if abs(actual - C) > rtol * C:
        raise DomainError(f"pulse and parameters give C = {actual:.9g}, decomposition has C = {C:.9g}")
    return actual
