"""SNR sweeps over the capacity bounds, with CSV/JSON emission.

A sweep evaluates a set of bound kinds on a grid of SNR points for one
channel configuration.  Every point is a pure function of the sweep
specification, so the worker pool can split the grid arbitrarily and the
sorted output is identical at any parallelism level.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
import os
from dataclasses import dataclass, field

from . import capacity_lb, capacity_ub, randmat
from .channel import BOUND_KINDS, ChannelConfig
from .errors import DomainError, FadingMacError

__all__ = ["SweepSpec", "PointResult", "run_sweep", "emit_csv", "emit_json"]

CSV_COLUMNS = (
    "snr_db",
    "bound_kind",
    "value",
    "std_error",
    "units",
    "tau",
    "users",
    "antennas",
    "rx",
    "seed",
    "n_samples",
    "runtime_s",
)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a channel, an SNR grid, bound kinds, and budgets."""

    cfg: ChannelConfig
    snr_db: tuple
    bounds: tuple
    seed: int = 0
    units: str = "nats"
    samples_outer: int = 10000
    samples_inner: int = 4000
    quad_points: int = 32
    cache_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "bounds", tuple(self.bounds))
        if not self.snr_db:
            raise DomainError("snr_db must be nonempty")
        if any(a >= b for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise DomainError("snr_db must be strictly increasing")
        if not self.bounds:
            raise DomainError("bounds must be nonempty")
        for kind in self.bounds:
            if kind not in BOUND_KINDS:
                raise DomainError(f"unknown bound kind {kind!r}")
        if self.units not in ("nats", "bits"):
            raise DomainError(f"units must be 'nats' or 'bits', got {self.units!r}")
        if min(self.samples_outer, self.samples_inner, self.quad_points) < 1:
            raise DomainError("sample and quadrature budgets must be positive")


@dataclass
class PointResult:
    """Outcome of one (bound kind, SNR) cell; value is NaN on failure."""

    kind: str
    snr_db: float
    value: float
    std_error: float
    n_samples: int
    runtime_seconds: float
    error: str | None = None
    meta: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.error is not None


def _lb_budget(spec: SweepSpec) -> capacity_lb.LbSampleBudget:
    return capacity_lb.LbSampleBudget(
        outer_samples=spec.samples_outer,
        inner_samples=spec.samples_inner,
        quad_points=spec.quad_points,
        seed=spec.seed,
    )


def _compute_point(spec: SweepSpec, kind: str, snr_db: float):
    rho = 10.0 ** (snr_db / 10.0)
    cfg = spec.cfg
    if kind == "ub_square":
        scfg = capacity_ub.SaddleConfig(seed=spec.seed)
        return capacity_ub.saddle_solve(cfg, rho, "square", scfg)
    if kind == "ub_general":
        cache = None
        if spec.cache_dir is not None:
            cache = randmat.ConstantCache(
                os.path.join(spec.cache_dir, "constants.json")
            )
        mc = randmat.McConfig(seed=spec.seed)
        zeta = randmat.estimate_zeta(cfg.r, cfg.tau - cfg.n, mc, cache)
        oconst = randmat.estimate_order_constant(cfg, rho, mc, cache)
        scfg = capacity_ub.SaddleConfig(seed=spec.seed)
        return capacity_ub.saddle_solve(cfg, rho, "general", scfg, zeta, oconst)
    if kind == "ub_csi":
        return capacity_ub.perfect_csi_ub(
            cfg, rho, n_samples=spec.samples_outer, seed=spec.seed
        )
    if kind == "lb_ustm":
        if all(a == 1 for a in cfg.per_user_antennas):
            return capacity_lb.ustm_lb(cfg, rho, _lb_budget(spec))
        return capacity_lb.ustm_lb_multiantenna(cfg, rho, _lb_budget(spec))
    if kind == "lb_gauss":
        return capacity_lb.gaussian_lb(cfg, rho, _lb_budget(spec))
    if kind == "lb_2user":
        return capacity_lb.two_user_lb(cfg, rho, _lb_budget(spec))
    raise DomainError(f"unknown bound kind {kind!r}")


def _point_worker(args):
    spec, kind, snr_db = args
    try:
        est = _compute_point(spec, kind, snr_db)
        return PointResult(
            kind=kind,
            snr_db=snr_db,
            value=est.value,
            std_error=est.std_error,
            n_samples=est.n_samples,
            runtime_seconds=est.runtime_seconds,
            meta=dict(est.meta),
        )
    except FadingMacError as exc:
        return PointResult(
            kind=kind,
            snr_db=snr_db,
            value=float("nan"),
            std_error=float("nan"),
            n_samples=0,
            runtime_seconds=0.0,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(spec: SweepSpec, parallelism: int = 1):
    """Evaluate every requested (bound, SNR) cell; failures are marked.

    Returns PointResult records sorted by (bound kind, SNR).  Each cell
    is computed independently from the spec, so results do not depend on
    how the pool partitions the grid.
    """
    tasks = [
        (spec, kind, snr) for kind in sorted(spec.bounds) for snr in spec.snr_db
    ]
    if parallelism <= 1:
        results = [_point_worker(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_point_worker, tasks))
    results.sort(key=lambda p: (p.kind, p.snr_db))
    return results


def _unit_scale(units: str) -> float:
    return 1.0 if units == "nats" else 1.0 / LN2


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def emit_csv(results, path, spec: SweepSpec) -> None:
    """Write the sweep table with a fixed column set and row order.

    Values are converted to the requested units.  The runtime_s column is
    written as 0 so repeated runs of the same spec are byte-identical;
    measured runtimes live in the JSON output.
    """
    if not results:
        raise DomainError("emit_csv requires at least one result")
    scale = _unit_scale(spec.units)
    rows = sorted(results, key=lambda p: (p.kind, p.snr_db))
    antennas = ";".join(str(a) for a in spec.cfg.per_user_antennas)
    lines = [",".join(CSV_COLUMNS)]
    for p in rows:
        lines.append(
            ",".join(
                [
                    _fmt(p.snr_db),
                    p.kind,
                    _fmt(p.value * scale),
                    _fmt(p.std_error * scale),
                    spec.units,
                    str(spec.cfg.tau),
                    str(spec.cfg.users),
                    antennas,
                    str(spec.cfg.rx_antennas),
                    str(spec.seed),
                    str(p.n_samples),
                    "0",
                ]
            )
        )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"could not write CSV to {path!r}: {exc}") from exc


def emit_json(results, path, spec: SweepSpec) -> None:
    """Write the full per-point records, including measured runtimes."""
    if not results:
        raise DomainError("emit_json requires at least one result")
    scale = _unit_scale(spec.units)
    records = []
    for p in sorted(results, key=lambda q: (q.kind, q.snr_db)):
        records.append(
            {
                "snr_db": p.snr_db,
                "bound_kind": p.kind,
                "value": p.value * scale,
                "std_error": p.std_error * scale,
                "units": spec.units,
                "tau": spec.cfg.tau,
                "users": spec.cfg.users,
                "antennas": list(spec.cfg.per_user_antennas),
                "rx": spec.cfg.rx_antennas,
                "seed": spec.seed,
                "n_samples": p.n_samples,
                "runtime_s": p.runtime_seconds,
                "error": p.error,
                "meta": p.meta,
            }
        )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(records, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"could not write JSON to {path!r}: {exc}") from exc
