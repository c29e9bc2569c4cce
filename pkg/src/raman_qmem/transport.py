"""Propagation of signal and spin wave through the memory in scaled coordinates.

The dispersive-limit equations ``d(alpha)/d(zeta) = beta`` and
``d(beta)/d(eps) = -alpha`` on the square ``[0, C]**2`` are solved two ways:
by the closed-form scattering relations (Bessel-kernel convolutions with the
boundary data) and by a box-scheme marching integrator. Each serves as the
other's oracle.
"""

import threading
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._validation import as_complex_array, check_int, check_scalar
from .errors import DomainError
from .kernels import SUB_ORDER, _g1_reg_unchecked, cross_matrix, discretize_g1
from .numerics import QuadratureRule, bessel_j0, gauss_lobatto, interpolate_nodes, make_rule, uniform_rule

MIN_POINTS = 64


@dataclass(frozen=True, eq=False)
class ScaledField:
    """Boundary data: ``alpha0`` on the entrance face, ``beta0`` at ``eps = 0``."""

    coupling: float
    eps_rule: QuadratureRule
    alpha0: np.ndarray
    zeta_rule: QuadratureRule
    beta0: np.ndarray

    def __post_init__(self):
        C = check_scalar(self.coupling, "coupling", low=0.0, low_inclusive=False)
        for name, rule in (("eps_rule", self.eps_rule), ("zeta_rule", self.zeta_rule)):
            if not isinstance(rule, QuadratureRule):
                raise DomainError(f"{name} must be a QuadratureRule")
            if not rule.spans(0.0, C):
                raise DomainError(f"{name} must span [0, {C}]")
            if rule.order < MIN_POINTS:
                raise DomainError(f"{name} needs at least {MIN_POINTS} points")
        a = as_complex_array(self.alpha0, "alpha0")
        b = as_complex_array(self.beta0, "beta0")
        if a.size != self.eps_rule.order or b.size != self.zeta_rule.order:
            raise DomainError("boundary samples do not match their grids")
        object.__setattr__(self, "coupling", C)
        object.__setattr__(self, "alpha0", a)
        object.__setattr__(self, "beta0", b)

    @classmethod
    def on_rule(cls, C, rule, alpha0, beta0=None):
        """Both boundaries sampled on the same rule; ``beta0`` defaults to zero."""
        if beta0 is None:
            beta0 = np.zeros(rule.order, dtype=complex)
        return cls(C, rule, alpha0, rule, beta0)

    @classmethod
    def from_functions(cls, C, alpha0=None, beta0=None, n=500, rule="gauss"):
        """Sample callables (``None`` means identically zero) on an ``n``-node rule."""
        r = make_rule(rule, n, 0.0, C)
        a = np.zeros(n, complex) if alpha0 is None else np.asarray(alpha0(r.nodes), dtype=complex)
        b = np.zeros(n, complex) if beta0 is None else np.asarray(beta0(r.nodes), dtype=complex)
        return cls(C, r, a, r, b)

    def alpha0_at(self, x):
        return interpolate_nodes(self.eps_rule.nodes, self.alpha0, x)

    def beta0_at(self, x):
        return interpolate_nodes(self.zeta_rule.nodes, self.beta0, x)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def scaled(self, factor):
        return ScaledField(self.coupling, self.eps_rule, factor * self.alpha0, self.zeta_rule, factor * self.beta0)

    def _combine(self, other, a, b):
        if other.eps_rule is not self.eps_rule or other.zeta_rule is not self.zeta_rule:
            raise DomainError("fields must share grids")
        return ScaledField(
            self.coupling,
            self.eps_rule,
            a * self.alpha0 + b * other.alpha0,
            self.zeta_rule,
            a * self.beta0 + b * other.beta0,
        )


@dataclass(frozen=True)
class Budget:
    N_alpha_in: float
    N_beta_in: float
    N_alpha_out: float
    N_beta_out: float

    @property
    def total_in(self):
        return self.N_alpha_in + self.N_beta_in

    @property
    def total_out(self):
        return self.N_alpha_out + self.N_beta_out

    @property
    def relative_defect(self):
        scale = max(self.total_in, 1e-300)
        return abs(self.total_out - self.total_in) / scale


@dataclass(frozen=True, eq=False)
class ScatterResult:
    """Exit-face signal ``alpha_C`` (on eps nodes) and final spin wave ``beta_C`` (on zeta nodes)."""

    field: ScaledField
    alpha_C: np.ndarray
    beta_C: np.ndarray

    def budget(self):
        f = self.field
        return Budget(
            float(f.eps_rule.integrate(np.abs(f.alpha0) ** 2)),
            float(f.zeta_rule.integrate(np.abs(f.beta0) ** 2)),
            float(f.eps_rule.integrate(np.abs(self.alpha_C) ** 2)),
            float(f.zeta_rule.integrate(np.abs(self.beta_C) ** 2)),
        )


@dataclass(frozen=True, eq=False)
class FieldMap:
    """Amplitudes on the full grid: ``alpha[i, j] = alpha(eps_i, zeta_j)``."""

    coupling: float
    eps: np.ndarray
    zeta: np.ndarray
    eps_weights: np.ndarray
    zeta_weights: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def intensity(self):
        """``(|alpha|**2, |beta|**2)`` on the grid."""
        return np.abs(self.alpha) ** 2, np.abs(self.beta) ** 2


class _OperatorCache:
    def __init__(self, maxsize=16):
        self._data = {}
        self._lock = threading.Lock()
        self.maxsize = maxsize

    def get(self, C, rule):
        key = (C, rule.kind, rule.order, rule.nodes.tobytes())
        with self._lock:
            hit = self._data.get(key)
        if hit is None:
            hit = discretize_g1(C, rule).entries
            with self._lock:
                if len(self._data) >= self.maxsize:
                    self._data.pop(next(iter(self._data)))
                self._data[key] = hit
        return hit


_g1_cache = _OperatorCache()


def scatter(field):
    """Exit-face amplitudes from the scattering relations.

    ``alpha_C(eps) = int G1(eps - x, C) alpha0(x) + G0(C - x, eps) beta0(x) dx``
    ``beta_C(zeta) = int G1(zeta - x, C) beta0(x) - G0(C - x, zeta) alpha0(x) dx``
    """
    if not isinstance(field, ScaledField):
        raise DomainError("scatter expects a ScaledField")
    C = field.coupling
    er, zr = field.eps_rule, field.zeta_rule
    alpha_C = _g1_cache.get(C, er) @ field.alpha0
    beta_C = _g1_cache.get(C, zr) @ field.beta0
    if np.any(field.beta0):
        alpha_C = alpha_C + cross_matrix(er.nodes, zr, C) @ field.beta0
    if np.any(field.alpha0):
        beta_C = beta_C - cross_matrix(zr.nodes, er, C) @ field.alpha0
    return ScatterResult(field, alpha_C, beta_C)


def storage_operator(C, rule):
    """Real matrix mapping ``alpha0`` node samples to ``beta_C`` node samples (``beta0 = 0``)."""
    return -cross_matrix(rule.nodes, rule, C)


def _grid(points, n, C):
    if points is None:
        r = gauss_lobatto(check_int(n, "grid size", low=2), 0.0, C)
        return r.nodes.copy(), r.weights.copy()
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size < 2 or np.any(np.diff(pts) <= 0):
        raise DomainError("explicit grids must be strictly increasing")
    if pts[0] < 0 or pts[-1] > C * (1 + 1e-12):
        raise DomainError(f"explicit grids must lie in [0, {C}]")
    d = np.diff(pts)
    w = np.zeros_like(pts)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return pts, w


def field_map(field, n_eps=129, n_zeta=129, eps=None, zeta=None, sub_order=SUB_ORDER):
    """Amplitudes at every interior point from the scattering relations.

    The relations are applied on the sub-square ``[0, eps] x [0, zeta]``.
    Default grids are Gauss-Lobatto, so both faces are included and the
    returned weights integrate spectrally.
    """
    if not isinstance(field, ScaledField):
        raise DomainError("field_map expects a ScaledField")
    C = field.coupling
    e, we = _grid(eps, n_eps, C)
    z, wz = _grid(zeta, n_zeta, C)
    t, wt = leggauss(sub_order)
    alpha = np.empty((e.size, z.size), dtype=complex)
    beta = np.empty((e.size, z.size), dtype=complex)
    alpha[:] = field.alpha0_at(e)[:, None]
    beta[:] = field.beta0_at(z)[None, :]
    if np.any(field.alpha0):
        for i, ei in enumerate(e):
            if ei <= 0:
                continue
            s = 0.5 * ei * (t + 1.0)
            ws = 0.5 * ei * wt * field.alpha0_at(s)
            d = (ei - s)[:, None]
            alpha[i] -= ws @ _g1_reg_unchecked(d, z[None, :])
            beta[i] -= ws @ bessel_j0(2.0 * np.sqrt(d * z[None, :]))
    if np.any(field.beta0):
        for j, zj in enumerate(z):
            if zj <= 0:
                continue
            s = 0.5 * zj * (t + 1.0)
            ws = 0.5 * zj * wt * field.beta0_at(s)
            d = (zj - s)[:, None]
            alpha[:, j] += ws @ bessel_j0(2.0 * np.sqrt(d * e[None, :]))
            beta[:, j] -= ws @ _g1_reg_unchecked(d, e[None, :])
    return FieldMap(C, e, z, we, wz, alpha, beta)


def fd_integrate(field, n_eps=256, n_zeta=256):
    """Box-scheme (trapezoidal) marching on the characteristic grid.

    ``n_eps`` and ``n_zeta`` are step counts; the grids have one point more.
    Each cell update is an exact 2x2 solve, so the scheme is implicit,
    unconditionally stable and second-order accurate.
    """
    if not isinstance(field, ScaledField):
        raise DomainError("fd_integrate expects a ScaledField")
    Ne = check_int(n_eps, "n_eps", low=128)
    Nz = check_int(n_zeta, "n_zeta", low=128)
    C = field.coupling
    er = uniform_rule(Ne + 1, 0.0, C, "trapezoid")
    zr = uniform_rule(Nz + 1, 0.0, C, "trapezoid")
    e, z = er.nodes, zr.nodes
    he, hz = C / Ne, C / Nz
    a, b = 0.5 * hz, 0.5 * he
    A = np.zeros((Ne + 1, Nz + 1), dtype=complex)
    B = np.zeros((Ne + 1, Nz + 1), dtype=complex)
    A[:, 0] = field.alpha0_at(e)
    B[0, :] = field.beta0_at(z)
    A[0, 1:] = A[0, 0] + a * np.cumsum(B[0, :-1] + B[0, 1:])
    B[1:, 0] = B[0, 0] - b * np.cumsum(A[:-1, 0] + A[1:, 0])
    for d in range(2, Ne + Nz + 1):
        i = np.arange(max(1, d - Nz), min(Ne, d - 1) + 1)
        j = d - i
        P = A[i, j - 1] + a * B[i, j - 1]
        Q = B[i - 1, j] - b * A[i - 1, j]
        A[i, j] = (P + a * Q) / (1.0 + a * b)
        B[i, j] = Q - b * A[i, j]
    return FieldMap(C, e, z, er.weights.copy(), zr.weights.copy(), A, B)


def excitation_budget(result):
    """Photon and spin-wave numbers on the four faces of the interaction square.

    Accepts a ``FieldMap`` (whose grids must include both faces) or a
    ``ScatterResult``.
    """
    if isinstance(result, ScatterResult):
        return result.budget()
    if not isinstance(result, FieldMap):
        raise DomainError("excitation_budget expects a FieldMap or ScatterResult")
    C = result.coupling
    tol = 1e-12 * C
    for g in (result.eps, result.zeta):
        if abs(g[0]) > tol or abs(g[-1] - C) > tol:
            raise DomainError("field map grids must include 0 and C")
    we, wz = result.eps_weights, result.zeta_weights
    return Budget(
        float(we @ np.abs(result.alpha[:, 0]) ** 2),
        float(wz @ np.abs(result.beta[0, :]) ** 2),
        float(we @ np.abs(result.alpha[:, -1]) ** 2),
        float(wz @ np.abs(result.beta[-1, :]) ** 2),
    )


def endpoint_slices(fmap):
    """``(alpha_C(eps), beta_C(zeta))`` read off the exit faces of a map."""
    return fmap.alpha[:, -1], fmap.beta[-1, :]


def random_smooth_field(C, rng, n=500, rule="gauss", n_terms=8, with_beta=True):
    """Random band-limited complex boundary data, for tests and demonstrations."""
    r = make_rule(rule, n, 0.0, C)
    k = np.arange(n_terms)
    decay = 1.0 / (1.0 + k) ** 2

    def draw():
        c = (rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms)) * decay
        return np.cos(np.pi * np.outer(r.nodes / C, k)) @ c

    a = draw()
    b = draw() if with_beta else np.zeros(n, complex)
    return ScaledField(C, r, a, r, b)
