"""Scattering kernels of the dispersive Raman memory and their discretizations.

``G0(p, q) = J0(2 sqrt(pq))`` couples light and spin wave;
``G1(p, q) = delta(p) - Theta(p) J1(2 sqrt(pq)) sqrt(q/p)`` is the transmission
kernel. The delta part of ``G1`` is never sampled: discretized operators carry
it as an exact identity.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._validation import check_scalar
from .errors import DomainError
from .numerics import QuadratureRule, bessel_j0, j1_ratio, lagrange_stencils

#: Gauss points per causal sub-integral.
SUB_ORDER = 48
#: Local interpolation stencil width for causal integrals.
INTERP_ORDER = 8


def _nonneg(p, name):
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError(f"{name} must be finite")
    if np.any(p < 0):
        raise DomainError(f"{name} must be non-negative")
    return p


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def g0(p, q):
    """Light/spin-wave coupling kernel ``J0(2 sqrt(p q))``."""
    p = _nonneg(p, "p")
    q = _nonneg(q, "q")
    return _out(bessel_j0(2.0 * np.sqrt(p * q)))


def g1_regular(p, q):
    """Non-delta part ``J1(2 sqrt(pq)) sqrt(q/p)`` of the transmission kernel.

    Written as ``q * 2 J1(z)/z`` with ``z = 2 sqrt(pq)`` so the ``p -> 0``
    limit (``= q``) needs no special casing.
    """
    p = _nonneg(p, "p")
    q = _nonneg(q, "q")
    return _out(q * j1_ratio(2.0 * np.sqrt(p * q)))


def _g1_reg_unchecked(p, q):
    return q * j1_ratio(2.0 * np.sqrt(np.maximum(p, 0.0) * q))


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """Discretized kernel on a rule over ``[0, C]``.

    For ``kind == "G0"`` ``entries`` is the weight-symmetrized matrix
    ``sqrt(w_i) J0(2 sqrt(x_i x_j)) sqrt(w_j)``. For ``kind == "G1"`` it is the
    operator acting on node samples, ``I - causal``.
    """

    coupling: float
    rule: QuadratureRule
    entries: np.ndarray
    kind: str

    @property
    def causal(self):
        if self.kind != "G1":
            raise AttributeError("only G1 matrices have a causal part")
        return np.eye(self.entries.shape[0]) - self.entries

    def apply(self, f):
        """Act on samples ``f`` at the rule nodes (node values in, node values out)."""
        f = np.asarray(f)
        if self.kind == "G1":
            return self.entries @ f
        sw = np.sqrt(self.rule.weights)
        if f.ndim == 1:
            return (self.entries @ (sw * f)) / sw
        return (self.entries @ (sw[:, None] * f)) / sw[:, None]


def _check_rule(C, rule):
    C = check_scalar(C, "C", low=0.0, low_inclusive=False)
    if not isinstance(rule, QuadratureRule):
        raise DomainError("rule must be a QuadratureRule")
    if not rule.spans(0.0, C):
        raise DomainError(f"rule spans [{rule.a}, {rule.b}], expected [0, {C}]")
    return C


def discretize_g0(C, rule):
    """Symmetrized Nystrom matrix of ``J0(2 sqrt(xy))`` on ``[0, C]``."""
    C = _check_rule(C, rule)
    x = rule.nodes
    sw = np.sqrt(rule.weights)
    K = bessel_j0(2.0 * np.sqrt(np.outer(x, x)))
    M = sw[:, None] * K * sw[None, :]
    M = 0.5 * (M + M.T)
    return KernelMatrix(C, rule, M, "G0")


def causal_operator(nodes, q, lower=0.0, sub_order=SUB_ORDER, interp_order=INTERP_ORDER):
    """Matrix ``Q`` with ``(Q f)_i ~ int_lower^{y_i} g1_regular(y_i - x, q) f(x) dx``.

    ``f`` is known only at ``nodes``; each sub-integral uses Gauss points on
    ``[lower, y_i]`` and a local interpolant built from nodes ``0..i``, so
    ``Q[i, k] == 0`` whenever ``k > i``.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    t, wt = leggauss(sub_order)
    Q = np.zeros((n, n))
    for i, y in enumerate(nodes):
        span = y - lower
        if span <= 0:
            continue
        s = lower + 0.5 * span * (t + 1.0)
        ws = 0.5 * span * wt
        kern = ws * _g1_reg_unchecked(y - s, q)
        index, weight = lagrange_stencils(nodes, s, interp_order, last_index=i)
        np.add.at(Q[i], index.ravel(), (kern[:, None] * weight).ravel())
    return Q


def discretize_g1(C, rule, sub_order=SUB_ORDER, interp_order=INTERP_ORDER):
    """Operator ``f(y) -> f(y) - int_0^y g1_regular(y - x, C) f(x) dx`` on node samples."""
    C = _check_rule(C, rule)
    Q = causal_operator(rule.nodes, C, 0.0, sub_order, interp_order)
    return KernelMatrix(C, rule, np.eye(rule.order) - Q, "G1")


def cross_matrix(targets, rule, C):
    """Weighted matrix ``W[i, k] = w_k J0(2 sqrt((C - x_k) t_i))``.

    Applied to samples on ``rule`` it evaluates ``int G0(C - x, t) f(x) dx``
    at every target ``t``.
    """
    targets = np.asarray(targets, dtype=float)
    p = np.maximum(C - rule.nodes, 0.0)
    return bessel_j0(2.0 * np.sqrt(np.outer(targets, p))) * rule.weights[None, :]
