"""Single-gate analysis and the batch experiments behind the CLI."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .gates import (
    canonical_two_qubit,
    derive_seed,
    near_dual,
    random_cue,
    random_diagonal,
    random_dual,
    block_diagonal,
)
from .kd import kd_alternating, kd_closed_form, kd_dual_max, kd_two_qubit
from .linalg import ConvergenceError, DomainError, realign, unitarity_deficit
from .measures import (
    entangling_power,
    gate_typicality,
    kd_bounds,
    operator_entanglement,
    operator_schmidt,
)
from .ubb import UbbConvergenceError, detect_cycle, trace_rows, ubb_solve

EXPERIMENTS = ("scan2q", "ensemble", "ubb-demo", "analyze", "gen")
ENSEMBLE_FAMILIES = ("diagonal", "cue", "near_dual", "block")


@dataclass
class ExperimentConfig:
    experiment: str = "analyze"
    d: int = 3
    samples: int = 1000
    seed: int = 0
    res: int = 17
    eps: float = 0.1
    tol: float | None = None
    max_iter: int | None = None
    n_seeds: int = 8
    jobs: int = 1
    families: tuple = ("diagonal", "cue", "near_dual")
    out: str | None = None
    reproducible: bool = False
    plot: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        for name in ("d", "samples", "n_seeds", "jobs"):
            if int(getattr(self, name)) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.d < 2:
            raise DomainError("d must be at least 2")
        if self.res < 2:
            raise DomainError("grid resolution must be at least 2")
        if self.seed < 0:
            raise DomainError("seed must be non-negative")
        if self.eps <= 0:
            raise DomainError("eps must be positive")
        if self.tol is not None and self.tol <= 0:
            raise DomainError("tol must be positive")
        if self.max_iter is not None and self.max_iter <= 0:
            raise DomainError("max_iter must be positive")
        self.families = tuple(self.families)
        bad = set(self.families) - set(ENSEMBLE_FAMILIES)
        if bad:
            raise DomainError(f"unknown ensemble families {sorted(bad)}")

    @classmethod
    def from_json_file(cls, path, **overrides):
        with open(path) as fh:
            obj = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise DomainError(f"unknown config keys {sorted(unknown)}")
        obj.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**obj)

    def to_dict(self):
        return asdict(self)


def _solver_kw(cfg):
    kw = {"n_seeds": cfg.n_seeds}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    if cfg.max_iter is not None:
        kw["max_iter"] = cfg.max_iter
    return kw


def analyze(gate, spec=None, seed=0, n_seeds=8, tol=1e-12, max_iter=10_000, ubb_seeds=20):
    """JSON-ready report for one gate."""
    u = np.asarray(gate)
    d = gate.d if hasattr(gate, "d") else int(round(math.sqrt(u.shape[0])))
    sd = operator_schmidt(u, d)
    res = kd_alternating(u, n_seeds=n_seeds, tol=tol, max_iter=max_iter, seed=seed)
    report = {
        "d": d,
        "schmidt": [float(x) for x in sd.lambdas],
        "kd_star": res.bounds.kd_star,
        "kd_upper": res.bounds.kd_upper,
        "kd": res.kd,
        "kd_iterations": res.iterations,
        "kd_converged": res.converged,
        "kd_exceeds_dual_max": res.exceeds_dual_max,
        "kd_dual_max": kd_dual_max(d),
        "closed_form": kd_closed_form(spec) if spec is not None else None,
        "duality_deficit": unitarity_deficit(realign(u)),
        "operator_entanglement": operator_entanglement(u),
        "e_p": entangling_power(u),
        "g_t": gate_typicality(u),
    }
    if spec is not None:
        report["spec"] = spec.to_dict()
    try:
        tr = ubb_solve(u, seed=seed, max_seeds=ubb_seeds)
        report.update(ubb_residual=tr.residual, ubb_steps=tr.steps, ubb_seeds=tr.seeds_tried, ubb_converged=True)
    except UbbConvergenceError as exc:
        report.update(ubb_residual=exc.trace.residual, ubb_steps=exc.trace.steps,
                      ubb_seeds=exc.trace.seeds_tried, ubb_converged=False)
    return report


def weyl_grid(res):
    """Points ``pi/4 >= c1 >= c2 >= c3 >= 0`` on a ``res``-point axis grid."""
    c = np.linspace(0.0, np.pi / 4, res)
    for i in range(res):
        for j in range(i + 1):
            for k in range(j + 1):
                yield c[i], c[j], c[k]


SCAN_COLUMNS = ("c1", "c2", "c3", "e_p", "g_t", "kd", "kd_star", "kd_upper")


def scan2q(res=17):
    rows = []
    for c1, c2, c3 in weyl_grid(res):
        u = canonical_two_qubit(c1, c2, c3)
        b = kd_bounds(u)
        rows.append({
            "c1": c1, "c2": c2, "c3": c3,
            "e_p": entangling_power(u), "g_t": gate_typicality(u),
            "kd": kd_two_qubit(u), "kd_star": b.kd_star, "kd_upper": b.kd_upper,
        })
    return rows


ENSEMBLE_COLUMNS = ("family", "index", "seed", "eps", "kd_star2", "kd2", "kd_star", "kd",
                    "kd_upper", "iterations", "converged", "error")


def ensemble_gate(family, d, seed, eps):
    if family == "cue":
        return random_cue(d * d, seed)
    if family == "diagonal":
        return random_diagonal(d * d, seed)
    if family == "near_dual":
        for attempt in range(10):
            try:
                dual = random_dual(d, derive_seed(seed, attempt))
                break
            except ConvergenceError:
                continue
        else:
            raise ConvergenceError("no dual-unitary seed converged")
        return near_dual(dual, eps, derive_seed(seed, 0xE5))
    if family == "block":
        rng = np.random.default_rng(seed)
        return block_diagonal([random_cue(d, rng) for _ in range(d)])
    raise DomainError(f"unknown ensemble family {family!r}")


def _ensemble_row(job):
    family, index, seed, d, eps, kw = job
    row = dict.fromkeys(ENSEMBLE_COLUMNS, math.nan)
    row.update(family=family, index=index, seed=seed, eps=eps if family == "near_dual" else 0.0,
               iterations=0, converged=False, error="")
    try:
        u = ensemble_gate(family, d, seed, eps)
        r = kd_alternating(u, seed=seed, **kw)
        row.update(kd_star=r.bounds.kd_star, kd=r.kd, kd_upper=r.bounds.kd_upper,
                   kd_star2=r.bounds.kd_star**2, kd2=r.kd**2,
                   iterations=r.iterations, converged=r.converged)
    except Exception as exc:  # one bad sample must not abort the run
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _map(func, jobs, n_workers):
    if n_workers <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(func, jobs, chunksize=8))


def ensemble(cfg):
    """K_D and its lower bound over random families; rows ordered by family then index."""
    kw = _solver_kw(cfg)
    jobs = []
    for fi, family in enumerate(cfg.families):
        fam_key = ENSEMBLE_FAMILIES.index(family)
        for i in range(cfg.samples):
            jobs.append((family, i, derive_seed(cfg.seed, fam_key, i), cfg.d, cfg.eps, kw))
    return _map(_ensemble_row, jobs, cfg.jobs)


UBB_COLUMNS = ("sample", "step", "d_n", "linear_entropy", "renyi_half", "delta")
UBB_SUMMARY_COLUMNS = ("sample", "seed", "converged", "seeds_tried", "steps", "residual",
                       "final_delta", "d_monotone", "renyi_monotone", "cycle_period",
                       "cycle_fixed_point", "rejected_cycles_ok")


def _ubb_job(job):
    index, seed, d, gate, kw = job
    v = random_cue(d * d, seed) if gate is None else gate
    try:
        trace = ubb_solve(v, seed=seed, **kw)
        ok = True
    except UbbConvergenceError as exc:
        trace, ok = exc.trace, False
    lin_max = 1 - 1 / d
    steps = [
        {"sample": index, "step": n, "d_n": dn, "linear_entropy": le, "renyi_half": rh, "delta": lin_max - le}
        for n, dn, le, rh in trace_rows(trace)
    ]
    cyc = detect_cycle(trace)
    rejected_ok = all(
        (c is None or c.fixed_point) for c in (detect_cycle(t) for t in trace.rejected)
    )
    summary = {
        "sample": index, "seed": seed, "converged": ok, "seeds_tried": trace.seeds_tried,
        "steps": trace.steps, "residual": trace.residual,
        "final_delta": lin_max - trace.lin_entropy_seq[-1],
        "d_monotone": bool(np.all(np.diff(trace.d_seq) <= 1e-12)),
        "renyi_monotone": bool(np.all(np.diff(trace.renyi_half_seq) >= -1e-12)),
        "cycle_period": None if cyc is None else cyc.period,
        "cycle_fixed_point": None if cyc is None else cyc.fixed_point,
        "rejected_cycles_ok": rejected_ok,
    }
    return steps, summary


def ubb_demo(cfg, gates=None):
    """Run the UBB map on CUE samples (or on ``gates``); returns ``(step_rows, summaries)``."""
    kw = {}
    if cfg.tol is not None:
        kw["tol"] = cfg.tol
    if cfg.max_iter is not None:
        kw["max_iter"] = cfg.max_iter
    n = cfg.samples if gates is None else len(gates)
    jobs = [
        (i, derive_seed(cfg.seed, i), cfg.d, None if gates is None else np.asarray(gates[i]), kw)
        for i in range(n)
    ]
    results = _map(_ubb_job, jobs, cfg.jobs)
    steps = [row for s, _ in results for row in s]
    return steps, [summary for _, summary in results]


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def to_csv(rows, columns, header=None, reproducible=False):
    """CSV text; a ``#`` comment line with a timestamp is prepended unless ``reproducible``."""
    buf = io.StringIO()
    if not reproducible:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        buf.write(f"# gatedist {__version__} {header or ''} generated {stamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()
