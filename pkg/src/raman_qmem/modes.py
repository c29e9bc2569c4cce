"""Universal mode decomposition of the read-in kernel.

The symmetric kernel ``J0(2 sqrt(xy))`` on ``[0, C]`` is diagonalized by a
Nystrom discretization. Its eigenfunctions ``phi_i`` are the memory's modes:
the optical input mode ``phi_i(C - eps)`` is stored into the spin-wave mode
``phi_i(zeta)`` with amplitude ``-sign_i * lambda_i`` and transmitted into
``phi_i(eps)`` with amplitude ``sign_i * mu_i``, where
``lambda_i**2 + mu_i**2 = 1``.

Mode numbers ``i`` passed to functions are 1-based (``i = 1`` is the lowest,
best-coupled mode); arrays are ordinary 0-based numpy arrays.
"""

import json
import logging
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import check_int, check_scalar
from .errors import DomainError, NodalModeError, NullModeError
from .kernels import discretize_g0, discretize_g1
from .numerics import (
    EXTENSION_FLOOR,
    QuadratureRule,
    bessel_j0,
    make_rule,
    nystrom_extend,
    symmetric_eigendecompose,
)

log = logging.getLogger(__name__)

CACHE_VERSION = 1
CACHE_FORMAT = "raman_qmem.modes"
CACHE_ENV = "RAMAN_QMEM_CACHE"


@dataclass(frozen=True)
class Mode:
    index: int
    lambda_: float
    mu: float
    sign: float
    phi_values: np.ndarray


@dataclass(frozen=True, eq=False)
class ModeDecomposition:
    """Retained modes of the kernel on ``[0, coupling]``.

    ``phi`` has one column per retained mode holding node values, normalized
    so that ``rule.integrate(phi[:, i]**2) == 1``. ``spectrum`` keeps every
    signed eigenvalue of the discretization, retained or not.
    """

    coupling: float
    rule: QuadratureRule
    lambdas: np.ndarray
    mus: np.ndarray
    signs: np.ndarray
    phi: np.ndarray
    spectrum: np.ndarray

    @property
    def num_modes(self):
        return self.lambdas.size

    @property
    def n(self):
        return self.rule.order

    @property
    def signed_lambdas(self):
        return self.signs * self.lambdas

    @property
    def modes(self):
        return [
            Mode(i + 1, float(self.lambdas[i]), float(self.mus[i]), float(self.signs[i]), self.phi[:, i])
            for i in range(self.num_modes)
        ]

    def _mode_index(self, i):
        i = check_int(i, "mode number", low=1)
        if i > self.num_modes:
            raise DomainError(f"mode {i} not retained (num_modes = {self.num_modes})")
        return i - 1

    def evaluate(self, x, modes=None, floor=EXTENSION_FLOOR):
        """Nystrom-extended mode functions at points ``x``.

        Returns an array of shape ``(len(x), len(modes))``; ``modes`` are
        1-based mode numbers, defaulting to every retained mode.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(x < -1e-12 * self.coupling) or np.any(x > self.coupling * (1 + 1e-12)):
            raise DomainError(f"points must lie in [0, {self.coupling}]")
        x = np.clip(x, 0.0, self.coupling)
        cols = list(range(self.num_modes)) if modes is None else [self._mode_index(i) for i in modes]
        K = bessel_j0(2.0 * np.sqrt(np.outer(x, self.rule.nodes)))
        out = np.empty((x.size, len(cols)))
        for j, c in enumerate(cols):
            out[:, j] = nystrom_extend(K, self.rule.weights, self.phi[:, c], self.signed_lambdas[c], floor)
        return out

    def usable_modes(self, floor=EXTENSION_FLOOR):
        """Number of leading modes whose singular value clears the floor."""
        return int(np.sum(self.lambdas > floor))


def _compute(C, n, num_modes, rule_kind):
    rule = make_rule(rule_kind, n, 0.0, C)
    M = discretize_g0(C, rule).entries
    vals, vecs = symmetric_eigendecompose(M)
    k = num_modes
    lam = np.abs(vals[:k])
    signs = np.where(vals[:k] < 0, -1.0, 1.0)
    phi = vecs[:, :k] / np.sqrt(rule.weights)[:, None]
    mus = np.sqrt(np.clip(1.0 - lam**2, 0.0, None))
    return ModeDecomposition(C, rule, lam, mus, signs, phi, vals.copy())


def _key_of(C, n, rule_kind, num_modes):
    return (f"{C:.9e}", int(n), rule_kind, int(num_modes))


class ModeCache:
    """Thread-safe memo of decompositions, optionally mirrored to disk.

    Disk entries are one file per key: a JSON header line followed by raw
    little-endian float64 arrays. Unreadable or version-mismatched files are
    ignored and overwritten.
    """

    def __init__(self, directory=None):
        self.directory = Path(directory) if directory is not None else None
        self._memory = {}
        self._lock = threading.Lock()

    def _path(self, key):
        ckey, n, rule_kind, k = key
        return self.directory / f"modes_v{CACHE_VERSION}_{rule_kind}_n{n}_k{k}_C{ckey}.bin"

    def get(self, key):
        with self._lock:
            hit = self._memory.get(key)
        if hit is not None or self.directory is None:
            return hit
        hit = read_cache_file(self._path(key), key)
        if hit is not None:
            with self._lock:
                self._memory[key] = hit
        return hit

    def put(self, key, decomp):
        with self._lock:
            self._memory[key] = decomp
        if self.directory is not None:
            try:
                write_cache_file(self._path(key), decomp)
            except OSError as exc:
                log.warning("could not write mode cache entry: %s", exc)

    def clear(self):
        with self._lock:
            self._memory.clear()

    def __len__(self):
        with self._lock:
            return len(self._memory)


_ARRAYS = ("nodes", "weights", "lambdas", "mus", "signs", "phi", "spectrum")


def write_cache_file(path, decomp):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, k = decomp.n, decomp.num_modes
    arrays = {
        "nodes": decomp.rule.nodes,
        "weights": decomp.rule.weights,
        "lambdas": decomp.lambdas,
        "mus": decomp.mus,
        "signs": decomp.signs,
        "phi": decomp.phi.T.ravel(),  # mode-major
        "spectrum": decomp.spectrum,
    }
    header = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "C": repr(float(decomp.coupling)),
        "n": n,
        "rule": decomp.rule.kind,
        "num_modes": k,
        "dtype": "<f8",
        "arrays": [[name, int(arrays[name].size)] for name in _ARRAYS],
    }
    payload = json.dumps(header, sort_keys=True).encode() + b"\n"
    payload += b"".join(np.ascontiguousarray(arrays[name], dtype="<f8").tobytes() for name in _ARRAYS)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".bin")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_cache_file(path, key=None):
    """Load a cache file, returning ``None`` if it is missing, corrupt or stale."""
    try:
        raw = Path(path).read_bytes()
    except OSError:
        return None
    try:
        head, _, body = raw.partition(b"\n")
        header = json.loads(head.decode())
        if header.get("format") != CACHE_FORMAT or header.get("version") != CACHE_VERSION:
            return None
        n, k = int(header["n"]), int(header["num_modes"])
        C = float(header["C"])
        sizes = dict((name, int(size)) for name, size in header["arrays"])
        expected = {"nodes": n, "weights": n, "lambdas": k, "mus": k, "signs": k, "phi": n * k, "spectrum": n}
        if sizes != expected or len(body) != 8 * sum(expected.values()):
            return None
        if key is not None and key != _key_of(C, n, header["rule"], k):
            return None
        flat = np.frombuffer(body, dtype="<f8").astype(float)
        out, pos = {}, 0
        for name in _ARRAYS:
            out[name] = flat[pos : pos + expected[name]]
            pos += expected[name]
        if not np.all(np.isfinite(flat)):
            return None
        rule = QuadratureRule(out["nodes"], out["weights"], 0.0, C, header["rule"])
        return ModeDecomposition(
            C, rule, out["lambdas"], out["mus"], out["signs"], out["phi"].reshape(k, n).T.copy(), out["spectrum"]
        )
    except (ValueError, KeyError, TypeError, UnicodeDecodeError):
        return None


_default_cache = ModeCache(os.environ.get(CACHE_ENV) or None)


def default_cache():
    return _default_cache


def set_default_cache(cache):
    global _default_cache
    _default_cache = cache
    return cache


def decompose(C, n=500, num_modes=5, rule="gauss", cache=None, use_cache=True):
    """Mode decomposition of the read-in kernel at coupling ``C``.

    Uses ``n`` quadrature nodes of the given rule kind and retains
    ``num_modes`` modes. Results are memoized in ``cache`` (the module
    default when ``None``).
    """
    C = check_scalar(C, "C", low=0.0, low_inclusive=False)
    n = check_int(n, "n", low=64)
    num_modes = check_int(num_modes, "num_modes", low=1)
    if num_modes > n:
        raise DomainError(f"num_modes = {num_modes} exceeds grid size n = {n}")
    if not use_cache:
        return _compute(C, n, num_modes, rule)
    cache = default_cache() if cache is None else cache
    key = _key_of(C, n, rule, num_modes)
    hit = cache.get(key)
    if hit is None:
        hit = _compute(C, n, num_modes, rule)
        cache.put(key, hit)
    return hit


@dataclass(frozen=True)
class SweepTable:
    couplings: np.ndarray
    lambdas: np.ndarray  # shape (len(couplings), num_modes)


def singular_value_sweep(C_values, n=500, num_modes=5, rule="gauss", cache=None):
    """Leading singular values as a function of coupling."""
    C_values = np.asarray(C_values, dtype=float)
    if C_values.ndim != 1 or np.any(C_values <= 0):
        raise DomainError("C_values must be a 1-D array of positive couplings")
    rows = [decompose(C, n, num_modes, rule, cache).lambdas for C in C_values]
    return SweepTable(C_values, np.vstack(rows))


@dataclass(frozen=True)
class MuCheck:
    matrix: np.ndarray
    diagonal_residual: np.ndarray
    offdiagonal: np.ndarray

    @property
    def max_diagonal_residual(self):
        return float(np.max(np.abs(self.diagonal_residual)))

    @property
    def max_offdiagonal(self):
        return float(np.max(self.offdiagonal, initial=0.0))


def verify_mu(decomp, modes=None):
    """Project the discretized transmission kernel onto the mode basis.

    ``matrix[i, j] = int int phi_i(zeta) G1(zeta - eps, C) phi_j(C - eps)``,
    which is diagonal with entries ``sign_i * mu_i`` when the decomposition
    holds. Returns the matrix, ``|M_ii| - mu_i`` and the largest off-diagonal
    magnitude in each row.
    """
    rule = decomp.rule
    if not rule.is_reflection_symmetric():
        raise DomainError("verify_mu needs a reflection-symmetric rule")
    k = decomp.num_modes if modes is None else check_int(modes, "modes", low=1)
    phi = decomp.phi[:, :k]
    G1 = discretize_g1(decomp.coupling, rule)
    transmitted = G1.apply(phi[::-1])
    M = np.einsum("k,ki,kj->ij", rule.weights, phi, transmitted)
    diag = np.abs(np.diag(M)) - decomp.mus[:k]
    off = np.abs(M - np.diag(np.diag(M)))
    return MuCheck(M, diag, np.max(off, axis=1))


def mode_function(decomp, i, x, floor=EXTENSION_FLOOR):
    """Continuous ``phi_i(x)`` (1-based ``i``) via Nystrom extension."""
    idx = decomp._mode_index(i)
    if not decomp.lambdas[idx] > floor:
        raise NullModeError(f"mode {i} has lambda = {decomp.lambdas[idx]:.3e} below the floor {floor:.1e}")
    scalar = np.ndim(x) == 0
    out = decomp.evaluate(np.atleast_1d(x), [i], floor)[:, 0]
    return float(out[0]) if scalar else out


def check_nodeless(decomp, n_scan=2000):
    """Raise ``NodalModeError`` unless ``phi_1`` keeps one sign on ``[0, C]``."""
    x = np.linspace(0.0, decomp.coupling, n_scan)
    phi1 = decomp.evaluate(x, [1])[:, 0]
    if not (np.all(phi1 > 0) or np.all(phi1 < 0)):
        raise NodalModeError(f"phi_1 changes sign on [0, {decomp.coupling}]")
    return phi1
