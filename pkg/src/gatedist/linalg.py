"""Dense complex matrix kernel shared by every other module.

Index convention (project wide): a bipartite basis ket ``|ij>`` sits at row
``i * dB + j``, party A being the slow index. Vectorization is row-major, so
``vectorize(u)[i * d + j] == u[i, j]`` and ``|u> = sum_ij u_ij |ij>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ShapeError",
    "DomainError",
    "ConvergenceError",
    "BipartiteGate",
    "local_dim",
    "realign",
    "vectorize",
    "devectorize",
    "partial_trace",
    "reduced_density",
    "nearest_unitary",
    "polar_factor",
    "trace_norm",
    "hs_norm",
    "hs_inner",
    "unitarity_deficit",
    "is_unitary",
    "phase_distance",
    "dagger",
]

UNITARY_TOL = 1e-10
SINGULAR_TOL = 1e-12


class ShapeError(ValueError):
    """Input array has the wrong shape for the requested operation."""


class DomainError(ValueError):
    """Input is well-shaped but outside the mathematical domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iteration ran out of budget before reaching its tolerance.

    ``deficit`` carries the last value of the quantity that was supposed to
    drop below tolerance, so callers can decide whether to reseed.
    """

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def local_dim(n: int) -> int:
    """Return ``d`` such that ``d * d == n``; raise ShapeError otherwise."""
    d = math.isqrt(int(n))
    if d * d != n or d < 1:
        raise ShapeError(f"dimension {n} is not a perfect square")
    return d


def _square(m, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {m.shape}")
    return m


def _dims(m, dims):
    if dims is None:
        d = local_dim(m.shape[0])
        if d < 2:
            raise ShapeError("bipartite operators need local dimension >= 2")
        return d, d
    da, db = (int(x) for x in dims)
    if da * db != m.shape[0]:
        raise ShapeError(f"dims {dims} do not factor size {m.shape[0]}")
    return da, db


def realign(m, dims=None):
    """Realignment ``<ij|M^R|kl> = <ik|M|jl>``.

    For ``dims=(dA, dB)`` the result is ``dA**2 x dB**2``; in particular
    ``realign(kron(a, b)) == outer(vectorize(a), vectorize(b))``.
    """
    m = _square(m)
    da, db = _dims(m, dims)
    return m.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def vectorize(u):
    u = _square(u, "u")
    return u.reshape(-1).copy()


def devectorize(v, d=None):
    v = np.asarray(v)
    if v.ndim != 1:
        raise ShapeError(f"expected a vector, got shape {v.shape}")
    if d is None:
        d = local_dim(v.shape[0])
    elif d * d != v.shape[0]:
        raise ShapeError(f"vector of length {v.shape[0]} is not {d}x{d}")
    return v.reshape(d, d).copy()


def partial_trace(m, party, dims=None):
    """Trace out ``party`` ('A' or 'B') of an operator on ``C^dA (x) C^dB``."""
    m = _square(m)
    da, db = _dims(m, dims)
    t = m.reshape(da, db, da, db)
    party = str(party).upper()
    if party == "B":
        return np.einsum("ijkj->ik", t)
    if party == "A":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"party must be 'A' or 'B', got {party!r}")


def reduced_density(psi, party="A", dims=None):
    """Reduced density matrix of the normalized pure state ``psi``.

    Tracing out B of ``|psi>`` with ``psi = vectorize(W)`` gives ``W W^dagger``.
    """
    psi = np.asarray(psi)
    n = psi.shape[0]
    if dims is None:
        d = local_dim(n)
        dims = (d, d)
    w = psi.reshape(dims) / np.linalg.norm(psi)
    if str(party).upper() == "B":
        return w.T @ w.conj()
    return w @ w.conj().T


def polar_factor(a, singular_tol=SINGULAR_TOL):
    """Unitary polar factor of ``a`` (stacked arrays allowed) via SVD.

    Returns ``(w, degenerate)``. ``degenerate`` is True (elementwise for a
    stack) when the smallest singular value is below ``singular_tol``; the
    factor is then not unique and the SVD's choice is returned.
    """
    a = np.asarray(a)
    left, s, right = np.linalg.svd(a)
    degenerate = s[..., -1] < singular_tol
    return left @ right, degenerate


def nearest_unitary(a, singular_tol=SINGULAR_TOL):
    """Closest unitary to ``a`` in Hilbert-Schmidt distance, ``W X^dagger`` for ``a = W S X^dagger``."""
    w, _ = polar_factor(_square(a, "a"), singular_tol)
    return w


def trace_norm(a):
    return float(np.sum(np.linalg.svd(np.asarray(a), compute_uv=False)))


def hs_norm(a):
    return float(np.linalg.norm(np.asarray(a)))


def hs_inner(a, b):
    """``tr(a^dagger b)``."""
    return complex(np.vdot(np.asarray(a), np.asarray(b)))


def unitarity_deficit(u):
    """``||u u^dagger - I||`` in Hilbert-Schmidt norm."""
    u = np.asarray(u)
    if u.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {u.shape}")
    return float(np.linalg.norm(u @ u.conj().T - np.eye(u.shape[0])))


def is_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_deficit(u) <= tol


def phase_distance(u, w):
    """``min_phi ||e^{i phi} u - w||``, i.e. the distance modulo global phase."""
    u = np.asarray(u)
    w = np.asarray(w)
    z = np.vdot(u, w)
    phase = z / abs(z) if abs(z) > 0 else 1.0
    return float(np.linalg.norm(phase * u - w))


@dataclass(frozen=True, eq=False)
class BipartiteGate:
    """A ``d**2 x d**2`` unitary acting on two ``d``-level systems."""

    matrix: np.ndarray
    d: int
    unitary_tol: float = UNITARY_TOL

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"gate matrix must be square, got shape {m.shape}")
        if self.d < 2 or self.d * self.d != m.shape[0]:
            raise ShapeError(f"matrix of size {m.shape[0]} does not match d={self.d}")
        if not np.all(np.isfinite(m)):
            raise DomainError("gate matrix has non-finite entries")
        deficit = unitarity_deficit(m)
        if deficit > self.unitary_tol:
            raise DomainError(f"gate is not unitary (deficit {deficit:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, matrix, unitary_tol=UNITARY_TOL):
        matrix = np.asarray(matrix)
        return cls(matrix, local_dim(matrix.shape[0]), unitary_tol)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix.copy() if copy else self.matrix
        return self.matrix.astype(dtype)

    @property
    def shape(self):
        return self.matrix.shape
