"""Gate families and seeded random ensembles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    BipartiteGate,
    ConvergenceError,
    DomainError,
    ShapeError,
    is_unitary,
    polar_factor,
    realign,
    unitarity_deficit,
)

__all__ = [
    "PAULI",
    "swap",
    "identity",
    "canonical_two_qubit",
    "frac_swap",
    "fourier_matrix",
    "chm_diagonal",
    "sd_diagonal",
    "u_cz",
    "block_diagonal",
    "diagonal_blocks",
    "random_cue",
    "random_diagonal",
    "random_hermitian",
    "random_dual",
    "near_dual",
    "derive_seed",
    "GateFamilySpec",
    "FAMILIES",
]

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

CHM_TOL = 1e-8


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def derive_seed(master, *keys):
    """Counter-based 64-bit seed for item ``keys`` of a run seeded with ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def swap(d):
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def identity(d):
    return np.eye(d * d, dtype=complex)


def canonical_two_qubit(c1, c2, c3):
    """``exp(i (c1 XX + c2 YY + c3 ZZ))`` as a product of the commuting factors."""
    u = np.eye(4, dtype=complex)
    for c, p in zip((c1, c2, c3), PAULI[1:]):
        pp = np.kron(p, p)
        u = u @ (np.cos(c) * np.eye(4) + 1j * np.sin(c) * pp)
    return u


def frac_swap(d, alpha):
    """``cos(pi a / 2) I + i sin(pi a / 2) S`` for ``a`` in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    t = np.pi * alpha / 2
    return np.cos(t) * identity(d) + 1j * np.sin(t) * swap(d)


def fourier_matrix(d):
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def chm_diagonal(h):
    """Diagonal gate whose ``|jk>`` phase is the phase of ``h[j, k]``.

    ``h`` must be a complex Hadamard matrix (unitary, ``|h_jk| = 1/sqrt(d)``).
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"Hadamard matrix must be square, got {h.shape}")
    d = h.shape[0]
    if np.max(np.abs(np.abs(h) - 1 / np.sqrt(d))) > CHM_TOL or not is_unitary(h, 1e-8):
        raise DomainError("input is not a complex Hadamard matrix")
    return np.diag(np.exp(1j * np.angle(h)).reshape(-1))


def sd_diagonal(d, phases):
    """SWAP times ``diag(exp(i phases))``; self-dual under realignment."""
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if phases.shape[0] != d * d:
        raise ShapeError(f"need {d * d} phases, got {phases.shape[0]}")
    return swap(d) @ np.diag(np.exp(1j * phases))


def u_cz(d):
    u = identity(d)
    u[-1, -1] = -1.0
    return u


def block_diagonal(blocks):
    """``sum_i |i><i| (x) u_i`` for ``d`` unitary ``d x d`` blocks."""
    blocks = [np.asarray(b, dtype=complex) for b in blocks]
    d = len(blocks)
    for b in blocks:
        if b.shape != (d, d):
            raise ShapeError(f"{d} blocks must each be {d}x{d}, got {b.shape}")
        if not is_unitary(b):
            raise DomainError("block is not unitary")
    u = np.zeros((d * d, d * d), dtype=complex)
    for i, b in enumerate(blocks):
        u[i * d:(i + 1) * d, i * d:(i + 1) * d] = b
    return u


def diagonal_blocks(u, d):
    """The ``d`` diagonal ``d x d`` blocks of ``u``."""
    u = np.asarray(u)
    return [u[i * d:(i + 1) * d, i * d:(i + 1) * d] for i in range(d)]


def random_cue(n, seed=None):
    """Haar-random ``n x n`` unitary: QR of a complex Ginibre matrix with R's diagonal phases removed."""
    rng = _rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_diagonal(n, seed=None):
    rng = _rng(seed)
    return np.diag(np.exp(1j * rng.uniform(0.0, 2 * np.pi, n)))


def random_hermitian(n, seed=None):
    """GUE-like Hermitian matrix scaled to unit Hilbert-Schmidt norm."""
    rng = _rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = (a + a.conj().T) / 2
    return h / np.linalg.norm(h)


def random_dual(d, seed=None, max_iter=10_000, tol=1e-10):
    """Dual-unitary gate by alternating unitary projection of ``U`` and ``U^R``.

    Starts from a CUE sample. Raises ConvergenceError (carrying the final
    realignment deficit) if both deficits are not below ``tol`` within
    ``max_iter`` rounds.
    """
    u = random_cue(d * d, seed)
    deficit = np.inf
    for _ in range(max_iter):
        r, _ = polar_factor(realign(u))
        u, _ = polar_factor(realign(r))
        deficit = max(unitarity_deficit(realign(u)), unitarity_deficit(u))
        if deficit < tol:
            return u
    raise ConvergenceError(
        f"dual-unitary projection did not converge in {max_iter} rounds "
        f"(deficit {deficit:.3e})",
        deficit=deficit,
    )


def near_dual(u_dual, eps, seed=None):
    """``u_dual @ exp(i eps H)`` with ``H`` a seeded Hermitian of unit norm."""
    u_dual = np.asarray(u_dual, dtype=complex)
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    if eps == 0:
        return u_dual.copy()
    h = random_hermitian(u_dual.shape[0], seed)
    w, v = np.linalg.eigh(h)
    return u_dual @ (v * np.exp(1j * eps * w)) @ v.conj().T


FAMILIES = (
    "identity",
    "canonical2q",
    "swap",
    "frac_swap",
    "chm_diagonal",
    "sd_diagonal",
    "block_diagonal",
    "u_cz",
    "cue_random",
    "diagonal_random",
    "dual_random",
    "near_dual",
)


def _complex_from(obj):
    return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)


@dataclass
class GateFamilySpec:
    """Declarative handle for a gate family.

    ``params`` by family:

    * canonical2q: ``c1, c2, c3`` (``d`` is forced to 2)
    * frac_swap: ``alpha``
    * chm_diagonal: optional ``hadamard`` as ``{"re": .., "im": ..}``; Fourier if absent
    * sd_diagonal: optional ``phases`` (``d*d`` reals); seeded uniform if absent
    * block_diagonal: optional ``blocks`` as a list of ``{"re", "im"}``; seeded CUE if absent
    * dual_random: optional ``max_iter``, ``tol``, ``restarts``
    * near_dual: ``eps`` plus the dual_random options
    """

    family: str
    d: int = 2
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown gate family {self.family!r}")
        if self.family == "canonical2q":
            self.d = 2
        if int(self.d) < 2:
            raise DomainError(f"local dimension must be >= 2, got {self.d}")
        self.d = int(self.d)
        self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, obj):
        if "family" not in obj:
            raise DomainError("gate spec needs a 'family' key")
        return cls(obj["family"], obj.get("d", 2), dict(obj.get("params", {})), obj.get("seed", 0))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_dict(self):
        return {"family": self.family, "d": self.d, "params": self.params, "seed": self.seed}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def _dual(self):
        p = self.params
        restarts = int(p.get("restarts", 5))
        err = None
        for attempt in range(restarts + 1):
            seed = self.seed if attempt == 0 else derive_seed(self.seed, attempt)
            try:
                return random_dual(self.d, seed, int(p.get("max_iter", 10_000)), float(p.get("tol", 1e-10)))
            except ConvergenceError as exc:
                err = exc
        raise err

    def matrix(self):
        d, p, fam = self.d, self.params, self.family
        if fam == "identity":
            return identity(d)
        if fam == "canonical2q":
            return canonical_two_qubit(float(p.get("c1", 0)), float(p.get("c2", 0)), float(p.get("c3", 0)))
        if fam == "swap":
            return swap(d)
        if fam == "frac_swap":
            return frac_swap(d, float(p["alpha"]))
        if fam == "chm_diagonal":
            h = _complex_from(p["hadamard"]) if "hadamard" in p else fourier_matrix(d)
            if h.shape != (d, d):
                raise ShapeError(f"Hadamard matrix must be {d}x{d}")
            return chm_diagonal(h)
        if fam == "sd_diagonal":
            if "phases" in p:
                return sd_diagonal(d, p["phases"])
            return sd_diagonal(d, _rng(self.seed).uniform(0, 2 * np.pi, d * d))
        if fam == "block_diagonal":
            if "blocks" in p:
                return block_diagonal([_complex_from(b) for b in p["blocks"]])
            rng = _rng(self.seed)
            return block_diagonal([random_cue(d, rng) for _ in range(d)])
        if fam == "u_cz":
            return u_cz(d)
        if fam == "cue_random":
            return random_cue(d * d, self.seed)
        if fam == "diagonal_random":
            return random_diagonal(d * d, self.seed)
        if fam == "dual_random":
            return self._dual()
        if fam == "near_dual":
            return near_dual(self._dual(), float(p.get("eps", 0.1)), derive_seed(self.seed, 0xE5))
        raise DomainError(f"unknown gate family {fam!r}")  # pragma: no cover

    def build(self):
        return BipartiteGate(self.matrix(), self.d)
