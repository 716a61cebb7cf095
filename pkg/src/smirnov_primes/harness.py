"""Experiment orchestration and report emission.

Each experiment kind turns an :class:`ExperimentConfig` into a
:class:`Report`: a list of flat records plus a summary.  Sieve work is
batched so that one pass over ``1..x`` serves every count an experiment
(or a batch of experiments, see :func:`run_experiments`) needs at that
``x``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import asymptotics as asy
from .prime_engine import (
    CAPACITY,
    MAX_OMEGA,
    CapacityError,
    ConstrainedTask,
    CorollaryTask,
    PiTask,
    scan,
    small_primes,
)
from .montecarlo import McConfig, q_mc
from .smirnov_core import BoundaryQuery, q_exact

__all__ = [
    "SCHEMA_VERSION",
    "KINDS",
    "ExperimentConfig",
    "Report",
    "CountStore",
    "central_k_range",
    "run_theorem_experiment",
    "run_corollary_experiment",
    "run_smirnov_convergence",
    "run_heuristic_approx_check",
    "run_envelope_scan",
    "run_experiment",
    "run_experiments",
    "heuristic_lhs",
    "heuristic_rhs",
    "emit_report",
    "render_report",
    "load_report",
]

SCHEMA_VERSION = 1

KINDS = (
    "theorem-N",
    "theorem-M",
    "corollary",
    "smirnov-convergence",
    "heuristic-approx",
    "envelope-scan",
)

COLUMNS = {
    "theorem": [
        "x", "alpha", "beta", "k", "u", "v", "w", "count", "pi_k", "envelope", "ratio",
        "hyp_beta", "hyp_ab", "hyp_w", "hyp_exp1", "hyp_primes",
    ],
    "corollary": [
        "x", "beta", "side", "count", "normalizer", "ratio", "identity_sum",
        "identity_holds", "discrepancy", "beta_in_range",
    ],
    "smirnov-convergence": ["lambda", "m", "q_exact", "limit", "abs_diff", "error_scale", "ratio"],
    "heuristic-approx": ["x", "alpha", "beta", "k", "lhs", "rhs", "ratio"],
    "envelope-scan": ["m", "u", "v", "w", "q_exact", "envelope", "ratio"],
}


def _columns(kind: str) -> list[str]:
    return COLUMNS["theorem" if kind.startswith("theorem") else kind]


@dataclass
class ExperimentConfig:
    kind: str
    x_list: list = field(default_factory=lambda: [10**6])
    alpha: float = 1.0
    beta_list: list = field(default_factory=lambda: [0.0, 1.0, 2.0])
    k_range: list | None = None  # [k_lo, k_hi]; None selects the central range
    eps: float = asy.DEFAULT_EPS
    A: float = asy.DEFAULT_A
    mc_samples: int = 0
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    m_list: list = field(default_factory=lambda: [100, 400, 1600])
    lambda_list: list = field(default_factory=lambda: [0.5, 1.0, 1.5])

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.k_range is not None:
            if len(self.k_range) != 2 or self.k_range[0] > self.k_range[1]:
                raise ValueError("k_range must be [k_lo, k_hi]")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown config fields: {', '.join(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(data)


@dataclass
class Report:
    kind: str
    config: dict
    records: list[dict]
    summary: dict

    def to_dict(self) -> dict:
        return {
            "schema": "smirnov-primes/report",
            "version": SCHEMA_VERSION,
            "kind": self.kind,
            "config": self.config,
            "records": self.records,
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        if data.get("schema") != "smirnov-primes/report":
            raise ValueError("not a report document")
        if data.get("version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report version {data.get('version')}")
        return cls(data["kind"], data["config"], data["records"], data["summary"])


# --------------------------------------------------------------------------
# batched counts
# --------------------------------------------------------------------------


class CountStore:
    """Memo of sieve task results per ``x``; fills gaps with one scan."""

    def __init__(self, cache_dir=None):
        self.cache_dir = cache_dir
        self._results: dict = {}

    def prefetch(self, x: int, tasks: Iterable) -> None:
        missing = {}
        for t in tasks:
            if (x, t.key()) not in self._results:
                missing.setdefault(t.key(), t)
        if missing:
            arrays = scan(x, list(missing.values()), cache_dir=self.cache_dir)
            for key, arr in zip(missing, arrays):
                self._results[(x, key)] = arr

    def get(self, x: int, task) -> np.ndarray:
        self.prefetch(x, [task])
        return self._results[(x, task.key())]


def central_k_range(L: float) -> tuple[int, int]:
    """Integers ``k >= 1`` in ``[L - 2 sqrt(L), L + 2 sqrt(L)]``."""
    r = 2 * math.sqrt(L)
    return max(1, math.ceil(L - r)), math.floor(L + r)


def _k_values(cfg: ExperimentConfig, L: float) -> list[int]:
    lo, hi = cfg.k_range if cfg.k_range is not None else central_k_range(L)
    return list(range(max(1, int(lo)), int(hi) + 1))


def _tasks_for(cfg: ExperimentConfig, x: int) -> list:
    betas = [float(b) for b in cfg.beta_list]
    if cfg.kind == "theorem-N":
        return [PiTask(), ConstrainedTask(cfg.alpha, betas, "lower")]
    if cfg.kind == "theorem-M":
        return [PiTask(), ConstrainedTask(cfg.alpha, betas, "upper")]
    if cfg.kind == "corollary":
        return [
            CorollaryTask(x, betas, "upper"),
            CorollaryTask(x, betas, "lower"),
            ConstrainedTask(1.0, betas, "lower"),
            ConstrainedTask(1.0, [b - 1 for b in betas], "upper"),
        ]
    return []


def _summary(values: Sequence[float]) -> dict:
    if not values:
        return {"cells": 0, "min_ratio": None, "max_ratio": None, "median_ratio": None}
    return {
        "cells": len(values),
        "min_ratio": min(values),
        "max_ratio": max(values),
        "median_ratio": statistics.median(values),
    }


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------


def run_theorem_experiment(cfg: ExperimentConfig, store: CountStore | None = None) -> Report:
    """Ratios ``count / (envelope * pi_k)`` over the ``(x, beta, k)`` grid.

    Cells failing a hypothesis stay in the report but not in the summary.
    """
    if cfg.kind not in ("theorem-N", "theorem-M"):
        raise ValueError(f"not a theorem experiment: {cfg.kind}")
    store = store or CountStore()
    mode = cfg.kind[-1]
    records = []
    for x in cfg.x_list:
        x = int(x)
        L = asy.loglog(x)
        ks = _k_values(cfg, L)
        try:
            pi_row = store.get(x, PiTask())
            task = _tasks_for(cfg, x)[1]
            table = store.get(x, task)
        except CapacityError as exc:
            for beta in cfg.beta_list:
                for k in ks:
                    records.append({"x": x, "alpha": cfg.alpha, "beta": beta, "k": k, "error": str(exc)})
            continue
        for b, beta in enumerate(cfg.beta_list):
            for k in ks:
                records.append(_theorem_cell(cfg, mode, x, beta, k, pi_row, table[b]))
    ok = [r["ratio"] for r in records if r.get("all_hold") and r.get("ratio") is not None]
    return Report(cfg.kind, cfg.to_dict(), records, _summary(ok))


def _theorem_cell(cfg, mode, x, beta, k, pi_row, row) -> dict:
    p = asy.map_params(x, cfg.alpha, beta, k, mode)
    hyp = asy.check_hypotheses(p, cfg.eps, cfg.A)
    count = int(row[k]) if k <= MAX_OMEGA else 0
    pi_k = int(pi_row[k]) if k <= MAX_OMEGA else 0
    env = asy.theorem_envelope(p)
    denom = env * pi_k
    ratio = count / denom if denom > 0 else None
    if mode == "N":
        hyp_beta, hyp_w = hyp.beta_nonneg, hyp.w_ge_1_plus_eps
        degenerate = cfg.alpha * k - beta > p.L
    else:
        hyp_beta, hyp_w = hyp.u_ge_1, hyp.w_ge_0
        degenerate = count == 0
    return {
        "x": x,
        "alpha": cfg.alpha,
        "beta": beta,
        "k": k,
        "u": p.u,
        "v": p.v,
        "w": p.w,
        "count": count,
        "pi_k": pi_k,
        "envelope": env,
        "ratio": ratio,
        "hyp_beta": hyp_beta,
        "hyp_ab": hyp.alpha_minus_beta_le_A,
        "hyp_w": hyp_w,
        "hyp_exp1": hyp.exp1_holds,
        "hyp_primes": hyp.enough_primes.value,
        "flags": hyp.flags(),
        "exp1_lhs": hyp.exp1_lhs,
        "all_hold": hyp.all_hold,
        "degenerate": bool(degenerate),
    }


def run_corollary_experiment(cfg: ExperimentConfig, store: CountStore | None = None) -> Report:
    """Both one-sided ``omega(n, t)`` counts against ``(beta + 1) x / sqrt(loglog x)``.

    Upper side: the count must equal ``sum_k N_k(x; 1, beta)`` exactly.
    Lower side: the count equals the ``M_k(x; 1, beta - 1)`` total over
    ``k >= loglog x - beta``; the rest of that total (``discrepancy``) are
    integers that only fail the ``t -> x`` end of the condition.
    """
    if cfg.kind != "corollary":
        raise ValueError(f"not a corollary experiment: {cfg.kind}")
    store = store or CountStore()
    betas = [float(b) for b in cfg.beta_list]
    records = []
    for x in cfg.x_list:
        x = int(x)
        L = asy.loglog(x)
        up, low, nk, mk = (store.get(x, t) for t in _tasks_for(cfg, x))
        for b, beta in enumerate(betas):
            norm = (beta + 1) * x / math.sqrt(L)
            kmin = _lower_kmin(x, beta)
            sum_n = int(nk[b].sum())
            sum_m_tail = int(mk[b][kmin:].sum())
            disc = int(mk[b][:kmin].sum())
            records.append({
                "x": x, "beta": beta, "side": "upper", "count": int(up[b]),
                "normalizer": norm, "ratio": int(up[b]) / norm,
                "identity_sum": sum_n, "identity_holds": sum_n == int(up[b]),
                "discrepancy": None, "beta_in_range": 0 <= beta <= math.sqrt(L),
            })
            records.append({
                "x": x, "beta": beta, "side": "lower", "count": int(low[b]),
                "normalizer": norm, "ratio": int(low[b]) / norm,
                "identity_sum": sum_m_tail, "identity_holds": sum_m_tail == int(low[b]),
                "discrepancy": disc, "beta_in_range": 0 <= beta <= math.sqrt(L),
            })
    summary = {}
    for side in ("upper", "lower"):
        summary[side] = _summary([r["ratio"] for r in records if r["side"] == side])
    summary["identities_hold"] = all(r["identity_holds"] for r in records)
    return Report(cfg.kind, cfg.to_dict(), records, summary)


def _lower_kmin(x: int, beta: float) -> int:
    """Smallest ``k >= 0`` with ``k >= loglog x - beta``."""
    return CorollaryTask(x, [beta], "lower")._kmin[0]


def run_smirnov_convergence(cfg: ExperimentConfig) -> Report:
    """``Q_m(lam sqrt(m), m)`` against its limit ``1 - exp(-2 lam**2)``."""
    records = []
    for lam in cfg.lambda_list:
        for m in cfg.m_list:
            u = lam * math.sqrt(m)
            q = BoundaryQuery(int(m), u, float(m))
            value = float(q_exact(q, exact=False).value)
            limit = asy.smirnov_limit(lam)
            diff = abs(value - limit)
            scale = (u + q.w) / m
            rec = {
                "lambda": lam, "m": int(m), "q_exact": value, "limit": limit,
                "abs_diff": diff, "error_scale": scale,
                "ratio": diff / scale if scale > 0 else None,
            }
            if cfg.mc_samples > 0:
                est = q_mc(q, McConfig(int(cfg.mc_samples), int(cfg.seed), int(m)))
                rec["p_mc"] = est.p_hat
                rec["mc_stderr"] = est.stderr
            records.append(rec)
    ratios = [r["ratio"] for r in records if r["ratio"] is not None]
    summary = _summary(ratios)
    summary["monotone"] = {
        str(lam): _nonincreasing([r["abs_diff"] for r in records if r["lambda"] == lam])
        for lam in cfg.lambda_list
    }
    return Report(cfg.kind, cfg.to_dict(), records, summary)


def _nonincreasing(xs: Sequence[float]) -> bool:
    return all(b <= a for a, b in zip(xs, xs[1:]))


def heuristic_lhs(x: int, alpha: float, beta: float, r: int) -> float:
    """``sum over p_1 < ... < p_r <= x`` of ``[loglog p_i >= alpha*i - beta for all i] / prod p_i``.

    Level ``i`` weights each prime by ``1/p`` times the level-``i-1`` mass
    of strictly smaller primes, so each level is one cumulative sum.
    """
    if not 1 <= r <= 3:
        raise ValueError("tuple length must be 1, 2 or 3")
    p = small_primes(int(x)).astype(float)
    ll = np.log(np.log(p))
    inv = 1.0 / p
    level = np.where(ll >= alpha * 1 - beta, inv, 0.0)
    for i in range(2, r + 1):
        below = np.concatenate(([0.0], np.cumsum(level)[:-1]))
        level = np.where(ll >= alpha * i - beta, inv * below, 0.0)
    return math.fsum(level.tolist())


def heuristic_rhs(x: int, alpha: float, beta: float, r: int) -> float:
    """``L**r / r! * Q_r(beta/alpha, L/alpha)`` with ``L = loglog x``."""
    L = asy.loglog(x)
    u = max(beta / alpha, 0.0)
    q = BoundaryQuery(r, u, L / alpha)
    return L**r / math.factorial(r) * float(q_exact(q, exact=False).value)


def run_heuristic_approx_check(cfg: ExperimentConfig) -> Report:
    ks = cfg.k_range if cfg.k_range is not None else [2, 4]
    records = []
    for x in cfg.x_list:
        for beta in cfg.beta_list:
            for k in range(int(ks[0]), int(ks[1]) + 1):
                if not 1 <= k - 1 <= 3:
                    raise ValueError("heuristic check needs 1 <= k - 1 <= 3")
                lhs = heuristic_lhs(int(x), cfg.alpha, beta, k - 1)
                rhs = heuristic_rhs(int(x), cfg.alpha, beta, k - 1)
                records.append({
                    "x": int(x), "alpha": cfg.alpha, "beta": beta, "k": k,
                    "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs if rhs > 0 else None,
                })
    return Report(cfg.kind, cfg.to_dict(), records,
                  _summary([r["ratio"] for r in records if r["ratio"] is not None]))


def envelope_grid(m: int) -> list[int]:
    """``u`` (or ``w``) values in ``[1, m]``; ``u <= m`` keeps ``v = m + w - u > 0``."""
    return sorted(v for v in {1, 2, round(math.sqrt(m)), m // 2, m} if 1 <= v <= m)


def run_envelope_scan(cfg: ExperimentConfig) -> Report:
    """``Q_m(u, v) / min(1, uw/m)`` for ``u, w >= 1`` on a per-``m`` grid."""
    records = []
    for m in cfg.m_list:
        m = int(m)
        for u in envelope_grid(m):
            for w in envelope_grid(m):
                q = BoundaryQuery(m, u, m + w - u)
                value = float(q_exact(q, exact=False).value)
                env = min(1.0, u * w / m)
                records.append({
                    "m": m, "u": u, "v": q.v, "w": w, "q_exact": value,
                    "envelope": env, "ratio": value / env,
                })
    return Report(cfg.kind, cfg.to_dict(), records, _summary([r["ratio"] for r in records]))


def run_experiment(cfg: ExperimentConfig, store: CountStore | None = None) -> Report:
    if cfg.kind in ("theorem-N", "theorem-M"):
        return run_theorem_experiment(cfg, store)
    if cfg.kind == "corollary":
        return run_corollary_experiment(cfg, store)
    if cfg.kind == "smirnov-convergence":
        return run_smirnov_convergence(cfg)
    if cfg.kind == "heuristic-approx":
        return run_heuristic_approx_check(cfg)
    return run_envelope_scan(cfg)


def run_experiments(cfgs: Sequence[ExperimentConfig], cache_dir=None) -> list[Report]:
    """Run several configs, sharing one sieve pass per distinct ``x``."""
    store = CountStore(cache_dir)
    wanted: dict[int, list] = {}
    for cfg in cfgs:
        for x in cfg.x_list:
            if int(x) <= CAPACITY:
                wanted.setdefault(int(x), []).extend(_tasks_for(cfg, int(x)))
    for x, tasks in sorted(wanted.items()):
        store.prefetch(x, tasks)
    return [run_experiment(cfg, store) for cfg in cfgs]


# --------------------------------------------------------------------------
# emission
# --------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def render_report(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report.to_dict()), sort_keys=True, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    cols = _columns(report.kind)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(cols)
    for rec in report.records:
        wr.writerow([_cell(rec.get(c)) for c in cols])
    return buf.getvalue()


def emit_report(report: Report, path, fmt: str = "csv") -> Path:
    """Write ``report`` to ``path``; identical reports give identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_report(report, fmt), encoding="utf-8")
    return path


def load_report(path) -> Report:
    return Report.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
