"""Distance from a bipartite gate to the nearest local product unitary.

The squared Hilbert-Schmidt distance is ``2 dA dB - 2 max |tr(U^dagger (uA (x) uB))|``.
``kd_alternating`` maximizes the overlap by alternating exact maximizations:
for fixed ``uB`` the best ``uA`` is the unitary polar factor of
``tr_B[U (I (x) uB^dagger)]`` and symmetrically for ``uB``. Each half step
cannot decrease the overlap.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .gates import GateFamilySpec, derive_seed, diagonal_blocks, random_cue
from .linalg import SINGULAR_TOL, DomainError, local_dim, polar_factor, realign
from .measures import BoundsReport, kd_bounds, kd_lower, operator_schmidt

__all__ = [
    "KdResult",
    "DegenerateLandscapeError",
    "MonotonicityError",
    "kd_alternating",
    "kd_two_qubit",
    "kd_closed_form",
    "kd_dual_max",
    "block_diag_overlap",
]

log = logging.getLogger(__name__)

ASCENT_SLACK = 1e-12


class DegenerateLandscapeError(RuntimeError):
    """Every seed started on a zero partial trace and reseeding did not help."""


class MonotonicityError(RuntimeError):
    """The overlap decreased between sweeps, which the update rule forbids."""


@dataclass
class KdResult:
    kd: float
    overlap: float
    ua: np.ndarray
    ub: np.ndarray
    iterations: int
    seeds_tried: int
    converged: bool
    bounds: BoundsReport | None = None
    seed_overlaps: list = field(default_factory=list)
    exceeds_dual_max: bool = False

    @property
    def kd2(self):
        return self.kd**2


def kd_dual_max(d):
    """``sqrt(2 d^2 - 2 d)``, the distance attained by dual-unitary gates."""
    return math.sqrt(2 * d * d - 2 * d)


def _trace_out_b(r, ub):
    """``tr_B[U (I (x) ub^dagger)]`` for a stack of ``ub``."""
    n, db, _ = ub.shape
    da = math.isqrt(r.shape[0])
    return (ub.conj().reshape(n, db * db) @ r.T).reshape(n, da, da)


def _trace_out_a(r, ua):
    """``tr_A[U (ua^dagger (x) I)]`` for a stack of ``ua``."""
    n, da, _ = ua.shape
    db = math.isqrt(r.shape[1])
    return (ua.conj().reshape(n, da * da) @ r).reshape(n, db, db)


def _overlap(t, ua, ub):
    return np.abs(np.einsum("ijkl,sik,sjl->s", t.conj(), ua, ub))


def kd_alternating(u, n_seeds=8, tol=1e-12, max_iter=10_000, seed=0, dims=None,
                   with_bounds=True, max_reseeds=3):
    """Maximize ``|tr(U^dagger (uA (x) uB))|`` by alternating polar projections.

    Parameters
    ----------
    u : array_like
        Unitary on ``C^dA (x) C^dB``.
    n_seeds : int
        Number of starting points for ``uB``. The first is the identity; for
        equal dimensions and ``n_seeds >= 2`` the second is the polar factor of
        the leading operator Schmidt element on B; the rest are CUE samples
        drawn from ``seed``. All seeds run as one batch.
    tol : float
        A seed stops once a sweep raises its overlap by less than ``tol``.
    max_iter : int
        Sweep budget per seed.
    dims : tuple of int, optional
        ``(dA, dB)``; defaults to equal local dimensions.
    with_bounds : bool
        Attach the Schmidt-based bounds (equal dimensions only).

    Returns
    -------
    KdResult
        ``kd**2 == 2 dA dB - 2 overlap``; the local pair is phase-fixed so
        that ``tr(U^dagger (ua (x) ub))`` is real and positive.
    """
    u = np.asarray(u, dtype=complex)
    if dims is None:
        d = local_dim(u.shape[0])
        dims = (d, d)
    da, db = (int(x) for x in dims)
    if da * db != u.shape[0] or n_seeds < 1 or tol <= 0:
        raise ValueError("bad arguments to kd_alternating")
    t = u.reshape(da, db, da, db)
    # r[(i,k),(j,l)] = U[(i,j),(k,l)]; both partial traces become matrix products.
    r = realign(u, (da, db))
    rng = np.random.default_rng(derive_seed(seed, da, db))

    schmidt = operator_schmidt(u, da) if da == db else None
    ub = np.empty((n_seeds, db, db), dtype=complex)
    ub[0] = np.eye(db)
    first_random = 1
    if schmidt is not None and n_seeds > 1:
        # Exact optimum whenever the leading Schmidt pair is unitary (all two-qubit gates).
        ub[1], _ = polar_factor(schmidt.basis_b[0])
        first_random = 2
    for s in range(first_random, n_seeds):
        ub[s] = random_cue(db, rng)
    seeds_tried = n_seeds

    # Orthogonal seeds give tr_B[...] = 0 and an arbitrary polar factor; replace them.
    xa = _trace_out_b(r, ub)
    dead = np.linalg.norm(xa, axis=(1, 2)) < SINGULAR_TOL
    for _ in range(max_reseeds):
        if not dead.any():
            break
        for s in np.flatnonzero(dead):
            ub[s] = random_cue(db, rng)
            seeds_tried += 1
        xa = _trace_out_b(r, ub)
        dead = np.linalg.norm(xa, axis=(1, 2)) < SINGULAR_TOL
    if dead.all():
        raise DegenerateLandscapeError(
            f"all {seeds_tried} seeds give a vanishing partial trace for this gate"
        )

    overlap = np.full(n_seeds, -np.inf)
    overlap[dead] = 0.0
    active = ~dead
    converged = np.zeros(n_seeds, dtype=bool)
    ua = np.broadcast_to(np.eye(da, dtype=complex), (n_seeds, da, da)).copy()
    sweeps = np.zeros(n_seeds, dtype=int)

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ua[idx], _ = polar_factor(_trace_out_b(r, ub[idx]))
        xb = _trace_out_a(r, ua[idx])
        ub[idx], _ = polar_factor(xb)
        # tr(uB^dagger xb) = ||xb||_1 after the polar step.
        new = np.linalg.svd(xb, compute_uv=False).sum(axis=1)
        old = overlap[idx]
        if np.any(new < old - ASCENT_SLACK):
            bad = int(idx[np.argmax(old - new)])
            raise MonotonicityError(
                f"overlap decreased on seed {bad}: {overlap[bad]!r} -> {new[idx == bad][0]!r}"
            )
        overlap[idx] = new
        sweeps[idx] += 1
        done = (new - old) < tol
        converged[idx[done]] = True
        active[idx[done]] = False

    best = int(np.argmax(overlap))
    phase = np.exp(-1j * np.angle(np.einsum("ijkl,ik,jl->", t.conj(), ua[best], ub[best])))
    ua_best = ua[best] * phase
    ub_best = ub[best].copy()
    ov = min(float(_overlap(t, ua_best[None], ub_best[None])[0]), float(da * db))
    # Direct norm: 2 dA dB - 2 ov loses all digits for near-local gates.
    kd = float(np.linalg.norm(u - np.kron(ua_best, ub_best)))

    result = KdResult(
        kd=kd,
        overlap=ov,
        ua=ua_best,
        ub=ub_best,
        iterations=int(sweeps[best]),
        seeds_tried=seeds_tried,
        converged=bool(converged[best]),
        seed_overlaps=[float(x) for x in overlap],
    )
    if with_bounds and da == db:
        result.bounds = kd_bounds(u, schmidt=schmidt)
        if kd > kd_dual_max(da) + 1e-6:
            result.exceeds_dual_max = True
            log.warning("K_D = %.12f exceeds the dual-unitary value %.12f", kd, kd_dual_max(da))
    return result


def kd_two_qubit(u):
    """Exact two-qubit distance ``sqrt(8 - 8 sqrt(lambda_1))``."""
    u = np.asarray(u)
    if u.shape != (4, 4):
        raise DomainError(f"kd_two_qubit needs a 4x4 gate, got {u.shape}")
    return kd_lower(operator_schmidt(u, 2).lambdas, 2)


def _cz_closed_form(d):
    if d == 2:
        return 2 * math.sqrt(2 - math.sqrt(2))
    if d == 3:
        return math.sqrt(18 - 10 * math.sqrt(2))
    return 2.0


def kd_closed_form(spec):
    """Analytic distance for families where one is known, else None."""
    if not isinstance(spec, GateFamilySpec):
        spec = GateFamilySpec.from_dict(spec)
    d, fam, p = spec.d, spec.family, spec.params
    if fam == "identity":
        return 0.0
    if fam in ("swap", "sd_diagonal", "dual_random"):
        return kd_dual_max(d)
    if fam == "frac_swap":
        t = math.pi * float(p["alpha"]) / 2
        inner = d * math.sqrt(d * d * math.cos(t) ** 2 + math.sin(t) ** 2)
        return math.sqrt(max(0.0, 2 * d * d - 2 * inner))
    if fam == "chm_diagonal":
        return math.sqrt(2 * d * d - 2 * d * math.sqrt(d))
    if fam == "u_cz":
        return _cz_closed_form(d)
    if fam == "canonical2q":
        return kd_two_qubit(spec.matrix())
    return None


def block_diag_overlap(u, v, d=None):
    """``2 d^2 - 2 sum_i |tr(u_i^dagger v)|`` over the diagonal blocks ``u_i``.

    For a block-diagonal ``u`` this upper-bounds ``K_D(u)^2`` for every
    unitary probe ``v`` and equals it at the optimal ``v``.
    """
    u = np.asarray(u)
    if d is None:
        d = local_dim(u.shape[0])
    v = np.asarray(v)
    total = sum(abs(np.vdot(b, v)) for b in diagonal_blocks(u, d))
    return float(2 * d * d - 2 * total)
