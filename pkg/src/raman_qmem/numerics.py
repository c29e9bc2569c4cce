"""Special functions, quadrature rules and dense eigen-solvers.

Everything here is a pure function of its arguments.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special

from ._validation import check_int, check_scalar
from .errors import ContractViolation, DomainError, NullModeError

OPEN_KINDS = ("gauss", "midpoint")
CLOSED_KINDS = ("lobatto", "trapezoid", "simpson", "samples")
RULE_KINDS = OPEN_KINDS + CLOSED_KINDS

#: |lambda| below which a mode is treated as numerically null.
EXTENSION_FLOOR = 1e-8


def _bessel_arg(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("Bessel argument must be finite")
    if np.any(x < 0):
        raise DomainError("Bessel argument must be non-negative")
    return x


def bessel_j0(x):
    """J0(x) for finite ``x >= 0`` (scalar or array)."""
    out = special.j0(_bessel_arg(x))
    return float(out) if np.ndim(out) == 0 else out


def bessel_j1(x):
    """J1(x) for finite ``x >= 0`` (scalar or array)."""
    out = special.j1(_bessel_arg(x))
    return float(out) if np.ndim(out) == 0 else out


def j1_ratio(z):
    """Entire function ``2 J1(z) / z`` with value 1 at ``z = 0``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    big = 2.0 * special.j1(zs) / zs
    z2 = z * z
    series = 1.0 - z2 / 8.0 + z2 * z2 / 192.0
    return np.where(small, series, big)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights integrating over ``[a, b]``.

    Gauss and midpoint rules keep every node strictly inside the interval;
    the closed rules (Lobatto, trapezoid, Simpson, raw samples) include the
    endpoints.
    """

    nodes: np.ndarray
    weights: np.ndarray
    a: float
    b: float
    kind: str = "gauss"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise DomainError("nodes and weights must be matching 1-D arrays")
        if self.kind not in RULE_KINDS:
            raise DomainError(f"unknown rule kind {self.kind!r}")
        if np.any(weights < 0):
            raise DomainError("quadrature weights must be non-negative")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def order(self):
        return self.nodes.size

    @property
    def length(self):
        return self.b - self.a

    def integrate(self, values, axis=-1):
        """Apply the rule to samples taken at ``nodes`` along ``axis``."""
        values = np.asarray(values)
        return np.tensordot(np.moveaxis(values, axis, -1), self.weights, axes=([-1], [0]))

    def is_reflection_symmetric(self, rtol=1e-12):
        """True when ``a + b - nodes`` reproduces the nodes in reverse."""
        scale = max(abs(self.a), abs(self.b), 1.0)
        return bool(
            np.allclose(self.a + self.b - self.nodes[::-1], self.nodes, rtol=0, atol=rtol * scale)
            and np.allclose(self.weights[::-1], self.weights, rtol=rtol, atol=0)
        )

    def spans(self, a, b, rtol=1e-9):
        scale = max(abs(a), abs(b), 1e-300)
        return abs(self.a - a) <= rtol * scale and abs(self.b - b) <= rtol * scale


def _check_interval(a, b):
    a = check_scalar(a, "a")
    b = check_scalar(b, "b")
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    return a, b


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre rule with ``n`` nodes on ``[a, b]``."""
    n = check_int(n, "n", low=1)
    a, b = _check_interval(a, b)
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (x + 1.0), half * w, a, b, "gauss")


def gauss_lobatto(n, a=-1.0, b=1.0):
    """Gauss-Lobatto-Legendre rule (endpoints included), exact to degree 2n-3."""
    n = check_int(n, "n", low=2)
    a, b = _check_interval(a, b)
    if n == 2:
        x = np.array([-1.0, 1.0])
    else:
        inner = special.roots_jacobi(n - 2, 1.0, 1.0)[0]
        x = np.concatenate(([-1.0], inner, [1.0]))
    w = 2.0 / (n * (n - 1) * special.eval_legendre(n - 1, x) ** 2)
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (x + 1.0), half * w, a, b, "lobatto")


def uniform_rule(n, a=-1.0, b=1.0, kind="midpoint"):
    """Equispaced rule: ``midpoint`` (n cells), ``trapezoid`` or ``simpson`` (n points)."""
    n = check_int(n, "n", low=1)
    a, b = _check_interval(a, b)
    if kind == "midpoint":
        h = (b - a) / n
        nodes = a + h * (np.arange(n) + 0.5)
        weights = np.full(n, h)
    elif kind == "trapezoid":
        if n < 2:
            raise DomainError("trapezoid rule needs n >= 2")
        nodes = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        weights = np.full(n, h)
        weights[[0, -1]] = 0.5 * h
    elif kind == "simpson":
        if n < 3 or n % 2 == 0:
            raise DomainError("Simpson rule needs an odd n >= 3")
        nodes = np.linspace(a, b, n)
        h = (b - a) / (n - 1)
        weights = np.full(n, 2.0 * h / 3.0)
        weights[1::2] = 4.0 * h / 3.0
        weights[[0, -1]] = h / 3.0
    else:
        raise DomainError(f"unknown uniform rule kind {kind!r}")
    return QuadratureRule(nodes, weights, a, b, kind)


def make_rule(kind, n, a, b):
    """Dispatch on rule kind name."""
    if kind == "gauss":
        return gauss_legendre(n, a, b)
    if kind == "lobatto":
        return gauss_lobatto(n, a, b)
    if kind in ("midpoint", "trapezoid", "simpson"):
        return uniform_rule(n, a, b, kind)
    raise DomainError(f"unknown rule kind {kind!r}")


def sample_rule(points):
    """Trapezoid weights for arbitrary non-decreasing sample points."""
    p = np.asarray(points, dtype=float)
    if p.ndim != 1 or p.size < 2 or np.any(np.diff(p) < 0):
        raise DomainError("sample points must be a non-decreasing 1-D array")
    d = np.diff(p)
    w = np.zeros_like(p)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return QuadratureRule(p, w, p[0], p[-1], "samples")


def integrate_samples(y, t, axis=-1):
    """Composite Simpson integral of samples ``y`` on grid ``t``."""
    return integrate.simpson(y, x=t, axis=axis)


def cumulative_integral(y, t):
    """Running integral from ``t[0]``, starting at exactly 0, non-decreasing for y >= 0."""
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        out = integrate.cumulative_trapezoid(y, t, initial=0.0)
    else:
        out = integrate.cumulative_simpson(y, x=t, initial=0.0)
    if np.all(y >= 0):
        out = np.maximum.accumulate(out)
    return out


def symmetric_eigendecompose(M, rtol=1e-10):
    """Eigenpairs of a real symmetric matrix, ordered by decreasing |eigenvalue|.

    Each eigenvector is signed so that its largest-magnitude component is
    positive (first such component on ties).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("matrix must be square")
    scale = np.max(np.abs(M)) if M.size else 0.0
    if np.max(np.abs(M - M.T), initial=0.0) > rtol * max(scale, 1e-300):
        raise ContractViolation("matrix is not symmetric within tolerance")
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


def nystrom_extend(kernel_row, weights, node_values, eigenvalue, floor=EXTENSION_FLOOR):
    """Natural interpolation of an integral-operator eigenfunction.

    ``kernel_row`` holds K(x, y_k) for one point (1-D) or many points (2-D,
    one row per point); returns ``sum_k w_k K(x, y_k) phi(y_k) / lambda``.
    """
    eigenvalue = float(eigenvalue)
    if not abs(eigenvalue) > floor:
        raise NullModeError(f"|eigenvalue| = {abs(eigenvalue):.3e} is below the floor {floor:.1e}")
    kernel_row = np.asarray(kernel_row, dtype=float)
    return (kernel_row * np.asarray(weights)) @ np.asarray(node_values) / eigenvalue


def lagrange_stencils(nodes, points, order=8, last_index=None):
    """Local Lagrange interpolation stencils.

    Returns ``(index, weight)`` arrays of shape ``(len(points), p)`` such that
    ``f(points) ~ sum(weight * f(nodes)[index], axis=1)``; ``p`` is ``order``
    or fewer when the usable nodes run out. With ``last_index`` only nodes
    ``0..last_index`` enter the stencils, which keeps causal operators
    lower-triangular.
    """
    nodes = np.asarray(nodes, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    hi = nodes.size - 1 if last_index is None else int(last_index)
    p = min(order, hi + 1)
    pos = np.searchsorted(nodes[: hi + 1], points)
    start = np.clip(pos - p // 2, 0, hi + 1 - p)
    index = start[:, None] + np.arange(p)[None, :]
    xs = nodes[index]
    diff = points[:, None] - xs
    weight = np.ones_like(diff)
    for j in range(p):
        for k in range(p):
            if j != k:
                weight[:, j] *= diff[:, k] / (xs[:, j] - xs[:, k])
    return index, weight


def interpolate_nodes(nodes, values, points, order=8):
    """Evaluate the local Lagrange interpolant of ``values`` at ``points``."""
    index, weight = lagrange_stencils(nodes, points, order)
    values = np.asarray(values)
    return np.sum(weight * values[index], axis=1)
