"""Operator Schmidt data, distance bounds and local-unitary invariants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import swap
from .linalg import DomainError, local_dim, realign, trace_norm

__all__ = [
    "SchmidtData",
    "BoundsReport",
    "operator_schmidt",
    "kd_bounds",
    "kd_lower",
    "operator_entanglement",
    "entangling_power",
    "gate_typicality",
    "linear_entropy",
    "renyi_half",
    "stability_check",
]

EIG_CLAMP = 1e-10
DENSITY_TOL = 1e-8


@dataclass
class SchmidtData:
    """``U = sum_i sqrt(lambdas[i]) basis_a[i] (x) basis_b[i]``.

    ``lambdas`` sum to one and are sorted descending; each basis element has
    ``tr(m m^dagger) = d``. For degenerate ``lambdas`` the basis is the SVD's
    choice and need not consist of unitaries.
    """

    lambdas: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    d: int

    def reconstruct(self):
        terms = np.sqrt(self.lambdas)[:, None, None, None, None] * np.einsum(
            "nik,njl->nijkl", self.basis_a, self.basis_b
        )
        d = self.d
        return terms.sum(axis=0).reshape(d * d, d * d)

    @property
    def rank(self):
        return int(np.sum(self.lambdas > 1e-12))


@dataclass
class BoundsReport:
    kd_star: float
    kd_upper: float
    lambda1: float
    trace_norm_m1a: float
    trace_norm_m1b: float


def operator_schmidt(u, d=None):
    """Operator Schmidt decomposition from the SVD of the realigned gate."""
    u = np.asarray(u)
    if d is None:
        d = local_dim(u.shape[0])
    left, s, right = np.linalg.svd(realign(u, (d, d)))
    lambdas = s**2 / d**2
    basis_a = np.sqrt(d) * left.T.reshape(d * d, d, d)
    basis_b = np.sqrt(d) * right.reshape(d * d, d, d)
    return SchmidtData(lambdas, basis_a, basis_b, d)


def _unitary_gap(m, d):
    """``d - ||m||_1`` for ``||m||_2^2 = d``, written as ``sum (1 - s_i)^2 / 2`` to avoid cancellation."""
    s = np.linalg.svd(m, compute_uv=False)
    return 0.5 * float(np.sum((1 - s) ** 2))


def kd_lower(lambdas, d):
    """``sqrt(2 d^2 (1 - sqrt(l1)))`` evaluated via the tail sum ``1 - l1``."""
    lambdas = np.asarray(lambdas)
    tail = float(np.sum(lambdas[1:]))
    return float(np.sqrt(2 * d * d * tail / (1 + np.sqrt(lambdas[0]))))


def kd_bounds(u, schmidt=None):
    """Lower bound ``sqrt(2d^2 - 2d^2 sqrt(l1))`` and the triangle-inequality upper bound.

    The upper bound uses the leading Schmidt pair of ``schmidt`` (computed from
    ``u`` if not given); when the leading value is degenerate a different but
    equally valid decomposition can tighten it.
    """
    if schmidt is None:
        schmidt = operator_schmidt(u)
    d = schmidt.d
    lam1 = float(schmidt.lambdas[0])
    kd_star = kd_lower(schmidt.lambdas, d)
    ga = _unitary_gap(schmidt.basis_a[0], d)
    gb = _unitary_gap(schmidt.basis_b[0], d)
    # 2 d^2 - 2 (d - ga)(d - gb)
    gap = float(np.sqrt(max(0.0, 2 * d * (ga + gb) - 2 * ga * gb)))
    return BoundsReport(kd_star, kd_star + gap, lam1, d - ga, d - gb)


def operator_entanglement(u):
    """``1 - sum_i lambda_i^2``."""
    lam = operator_schmidt(u).lambdas
    return float(1 - np.sum(lam**2))


def entangling_power(u):
    """Mean linear entropy generated from Haar product inputs.

    ``(d/(d+1))^2 [E(U) + E(US) - E(S)]`` with ``E`` the operator entanglement.
    """
    u = np.asarray(u)
    d = local_dim(u.shape[0])
    s = swap(d)
    e_s = 1 - 1 / d**2
    return float((d / (d + 1)) ** 2 * (operator_entanglement(u) + operator_entanglement(u @ s) - e_s))


def gate_typicality(u):
    """``[E(U) - E(US) + E(S)] / (2 E(S))``; 0 on local gates, 1 on SWAP."""
    u = np.asarray(u)
    d = local_dim(u.shape[0])
    e_s = 1 - 1 / d**2
    return float((operator_entanglement(u) - operator_entanglement(u @ swap(d)) + e_s) / (2 * e_s))


def _density_eigs(rho):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density matrix must be square, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOL:
        raise DomainError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > DENSITY_TOL:
        raise DomainError(f"density matrix trace is {np.trace(rho).real:.6g}, not 1")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -DENSITY_TOL:
        raise DomainError(f"density matrix has negative eigenvalue {w[0]:.3e}")
    return np.where(w < EIG_CLAMP, np.maximum(w, 0.0), w)


def linear_entropy(rho):
    _density_eigs(rho)
    rho = np.asarray(rho)
    return float(1 - np.real(np.vdot(rho, rho)))


def renyi_half(rho):
    """``2 log tr sqrt(rho)``."""
    w = _density_eigs(rho)
    return float(2 * np.log(np.sum(np.sqrt(w))))


def stability_check(u, d_anc, **solver_kw):
    """``K_D^2(U (x) I) / K_D^2(U)`` with the ancilla grouped with party B.

    Returns 0.0 when ``U`` is (numerically) a product gate.
    """
    from .kd import kd_alternating

    u = np.asarray(u)
    d = local_dim(u.shape[0])
    base = kd_alternating(u, **solver_kw)
    big = kd_alternating(np.kron(u, np.eye(d_anc)), dims=(d, d * d_anc), **solver_kw)
    if base.kd**2 < 1e-10:
        return 0.0
    return big.kd**2 / base.kd**2
