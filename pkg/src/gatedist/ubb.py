"""Find maximally entangled pairs connected by a bipartite unitary.

The map alternates ``v_n = P[V |u_n>]`` and ``u_{n+1} = P[V^dagger |v_n>]``,
where ``|u>`` is the row-major vectorization of ``u`` (norm ``sqrt(d)``) and
``P`` the unitary polar factor. The half-step distances
``||V|u_n> - |v_n>||`` and ``||V^dagger|v_n> - |u_{n+1}>||`` never increase.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .gates import derive_seed, random_cue
from .linalg import ConvergenceError, dagger, local_dim, phase_distance, polar_factor
from .measures import linear_entropy, renyi_half

__all__ = [
    "UbbTrace",
    "CycleReport",
    "UbbConvergenceError",
    "ubb_find",
    "ubb_solve",
    "ubb_distance",
    "detect_cycle",
    "trace_rows",
]

log = logging.getLogger(__name__)


@dataclass
class UbbTrace:
    """Record of one run of the map.

    ``d_seq`` holds the half-step distances ``d_0, d_1, d_2, ...``; the
    entropy sequences are per full step, for ``rho_n = V|u_n><u_n|V^dagger``
    reduced to party A and normalized. ``history`` keeps the last ``window``
    iterates ``u_n`` for cycle detection.
    """

    gate: np.ndarray
    d: int
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    d_seq: list = field(default_factory=list)
    residual_seq: list = field(default_factory=list)
    lin_entropy_seq: list = field(default_factory=list)
    renyi_half_seq: list = field(default_factory=list)
    history: deque = field(default_factory=deque)
    converged: bool = False
    steps: int = 0
    seeds_tried: int = 1
    degenerate_steps: int = 0
    stopped_by: str = ""
    rejected: list = field(default_factory=list)

    @property
    def residual(self):
        return self.residual_seq[-1] if self.residual_seq else math.inf

    def states(self):
        """Normalized ``(|Phi_0>, |Phi_1>)`` with ``V|Phi_0> = |Phi_1>`` up to the residual."""
        s = math.sqrt(self.d)
        return self.u.reshape(-1) / s, self.v.reshape(-1) / s


@dataclass
class CycleReport:
    period: int
    fixed_point: bool
    step: int


class UbbConvergenceError(ConvergenceError):
    def __init__(self, message, trace):
        super().__init__(message, deficit=trace.residual)
        self.trace = trace


def ubb_distance(v_gate, u, v):
    """``||V|u> - |v>||`` with unnormalized vectorizations (``<u|u> = d``)."""
    v_gate = np.asarray(v_gate)
    return float(np.linalg.norm(v_gate @ np.asarray(u).reshape(-1) - np.asarray(v).reshape(-1)))


def ubb_find(v_gate, seed=None, u0=None, tol=1e-10, max_iter=100_000, window=64,
             stall_steps=100, stall_abs=1e-14, slow_steps=500, slow_ratio=0.95):
    """Iterate the map from ``u0`` (or a CUE sample drawn from ``seed``).

    Stops when the normalized residual ``||V|u_n> - |v_n>|| / sqrt(d)`` is at
    most ``tol``. Raises UbbConvergenceError with the trace attached when the
    budget runs out or the residual stalls. A stall is either ``stall_steps``
    consecutive steps each improving by less than ``stall_abs``, or the
    residual shrinking by less than a factor ``slow_ratio`` over
    ``slow_steps`` steps; both indicate a fixed point that is not maximally
    entangled, from which only a new seed escapes.
    """
    v_gate = np.asarray(v_gate, dtype=complex)
    d = local_dim(v_gate.shape[0])
    v_dag = dagger(v_gate)
    u = random_cue(d, seed) if u0 is None else np.asarray(u0, dtype=complex)
    sqd = math.sqrt(d)
    trace = UbbTrace(gate=v_gate, d=d, history=deque(maxlen=max(window, 2)))
    stall = 0

    for n in range(max_iter + 1):
        trace.history.append(u)
        w = (v_gate @ u.reshape(-1)).reshape(d, d)
        v, deg = polar_factor(w)
        trace.degenerate_steps += int(deg)
        dist = float(np.linalg.norm(w - v))
        trace.d_seq.append(dist)
        trace.residual_seq.append(dist / sqd)
        rho = w @ w.conj().T / d
        rho = rho / np.trace(rho).real
        trace.lin_entropy_seq.append(linear_entropy(rho))
        trace.renyi_half_seq.append(renyi_half(rho))
        trace.u, trace.v, trace.steps = u, v, n

        if dist / sqd <= tol:
            trace.converged = True
            trace.stopped_by = "tol"
            # One more half step so the history shows the fixed point.
            trace.history.append(polar_factor((v_dag @ v.reshape(-1)).reshape(d, d))[0])
            return trace
        if n == max_iter:
            trace.stopped_by = "max_iter"
            break
        res = trace.residual_seq
        if len(res) > 1 and res[-2] - res[-1] < stall_abs:
            stall += 1
        else:
            stall = 0
        if stall >= stall_steps or (len(res) > slow_steps and res[-1] > slow_ratio * res[-1 - slow_steps]):
            trace.stopped_by = "stall"
            break

        x = (v_dag @ v.reshape(-1)).reshape(d, d)
        u, deg = polar_factor(x)
        trace.degenerate_steps += int(deg)
        trace.d_seq.append(float(np.linalg.norm(x - u)))

    raise UbbConvergenceError(
        f"UBB map stopped ({trace.stopped_by}) after {trace.steps} steps with residual {trace.residual:.3e}",
        trace,
    )


def ubb_solve(v_gate, seed=0, max_seeds=20, **kw):
    """Run ``ubb_find`` with fresh seeds until one converges.

    The first seed is the identity (standard maximally entangled state), then
    CUE samples derived from ``seed``. Failed runs are kept in
    ``trace.rejected``. Raises the last UbbConvergenceError if all seeds fail.
    """
    v_gate = np.asarray(v_gate, dtype=complex)
    d = local_dim(v_gate.shape[0])
    rejected = []
    for k in range(max_seeds):
        u0 = np.eye(d, dtype=complex) if k == 0 else random_cue(d, derive_seed(seed, k))
        try:
            trace = ubb_find(v_gate, u0=u0, **kw)
        except UbbConvergenceError as exc:
            rejected.append(exc.trace)
            continue
        trace.seeds_tried = k + 1
        trace.rejected = rejected
        return trace
    last = rejected[-1]
    last.seeds_tried = max_seeds
    last.rejected = rejected[:-1]
    raise UbbConvergenceError(f"no seed out of {max_seeds} converged", last)


def detect_cycle(trace, window=None, atol=1e-8):
    """Look for a recurrence ``u_{n+p} = u_n`` (modulo phase) among recent iterates.

    Returns None if nothing recurs. A smallest period ``p > 1`` whose members
    are not all equal would be a non-trivial cycle; it is logged and reported
    with ``fixed_point=False``.
    """
    hist = list(trace.history)
    if window is not None:
        hist = hist[-window:]
    if len(hist) < 2:
        return None
    last = hist[-1]
    step = trace.steps + 1 if trace.converged else trace.steps
    for p in range(1, len(hist)):
        if phase_distance(hist[-1 - p], last) < atol:
            cycle = hist[-1 - p:]
            coincide = all(phase_distance(cycle[i], cycle[i + 1]) < atol for i in range(p))
            if p > 1 and not coincide:
                log.warning("period-%d cycle that is not a fixed point; gate:\n%r", p, trace.gate)
            return CycleReport(period=1 if coincide else p, fixed_point=coincide, step=step)
    return None


def trace_rows(trace):
    """Per-step rows ``(step, d_n, linear_entropy, renyi_half)`` for CSV export.

    ``d_n`` is the even half-step distance ``||V|u_n> - |v_n>||``.
    """
    even = trace.d_seq[0::2]
    return [
        (n, even[n], trace.lin_entropy_seq[n], trace.renyi_half_seq[n])
        for n in range(len(trace.lin_entropy_seq))
    ]
