"""Command-line front end for SNR sweeps.

A sweep is described either by a JSON config file, by flags, or both
(flags override the file).  Results go to CSV, JSON, and/or SVG files.

Exit codes: 0 on full success, 2 when some sweep cells failed but the
sweep completed, 1 on configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .channel import BOUND_KINDS, ChannelConfig
from .errors import DomainError, FadingMacError
from .svgplot import emit_plot
from .sweep import SweepSpec, emit_csv, emit_json, run_sweep

__all__ = ["main", "build_spec", "parse_snr_list"]

_CONFIG_KEYS = (
    "snr_db",
    "tau",
    "users",
    "antennas",
    "rx",
    "bounds",
    "seed",
    "units",
    "out_csv",
    "out_json",
    "out_svg",
    "cache_dir",
    "samples_outer",
    "samples_inner",
    "quad_points",
    "parallel",
)


def parse_snr_list(text: str):
    """Parse '0,5,10' or 'start:step:stop' (stop inclusive) into floats."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"SNR range must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise DomainError("SNR range step must be positive")
        out = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-9:
                break
            out.append(round(v, 12))
            k += 1
        return out
    return [float(p) for p in text.split(",") if p.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fadingmac",
        description="Finite-SNR capacity bounds for Rayleigh block-fading "
        "multiple-access channels without a-priori CSI.",
    )
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--snr-db", help="comma list '0,5,10' or range 'start:step:stop'")
    p.add_argument("--tau", type=int, help="coherence interval in channel uses")
    p.add_argument("--users", type=int, help="number of transmitters")
    p.add_argument("--antennas", help="comma list of per-user antenna counts")
    p.add_argument("--rx", type=int, help="receive antenna count")
    p.add_argument(
        "--bounds",
        help="comma list of bound kinds from: " + ", ".join(BOUND_KINDS),
    )
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--units", choices=("nats", "bits"), help="output rate units")
    p.add_argument("--out-csv", help="CSV output path")
    p.add_argument("--out-json", help="JSON output path")
    p.add_argument("--out-svg", help="SVG plot output path")
    p.add_argument("--cache-dir", help="directory for the MC-constant cache")
    p.add_argument("--samples-outer", type=int, help="outer MC draws per point")
    p.add_argument("--samples-inner", type=int, help="inner MC draws per point")
    p.add_argument("--quad-points", type=int, help="base quadrature nodes")
    p.add_argument("--parallel", type=int, help="worker processes (default 1)")
    return p


def _merge_config(args) -> dict:
    merged = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"could not read config {args.config!r}: {exc}")
        if not isinstance(loaded, dict):
            raise DomainError("config file must hold a JSON object")
        for key in loaded:
            if key not in _CONFIG_KEYS:
                raise DomainError(f"unknown config key {key!r}")
        merged.update(loaded)
    overrides = {
        "snr_db": parse_snr_list(args.snr_db) if args.snr_db else None,
        "tau": args.tau,
        "users": args.users,
        "antennas": [int(a) for a in args.antennas.split(",")]
        if args.antennas
        else None,
        "rx": args.rx,
        "bounds": [b.strip() for b in args.bounds.split(",")] if args.bounds else None,
        "seed": args.seed,
        "units": args.units,
        "out_csv": args.out_csv,
        "out_json": args.out_json,
        "out_svg": args.out_svg,
        "cache_dir": args.cache_dir,
        "samples_outer": args.samples_outer,
        "samples_inner": args.samples_inner,
        "quad_points": args.quad_points,
        "parallel": args.parallel,
    }
    for key, val in overrides.items():
        if val is not None:
            merged[key] = val
    return merged


def build_spec(merged: dict) -> SweepSpec:
    """Validate the merged config and assemble the sweep specification."""
    for key in ("tau", "users", "rx", "snr_db", "bounds"):
        if key not in merged:
            raise DomainError(f"missing required setting {key!r}")
    antennas = merged.get("antennas") or [1] * int(merged["users"])
    cfg = ChannelConfig(
        tau=int(merged["tau"]),
        users=int(merged["users"]),
        per_user_antennas=tuple(int(a) for a in antennas),
        rx_antennas=int(merged["rx"]),
    )
    return SweepSpec(
        cfg=cfg,
        snr_db=tuple(float(s) for s in merged["snr_db"]),
        bounds=tuple(merged["bounds"]),
        seed=int(merged.get("seed", 0)),
        units=merged.get("units", "nats"),
        samples_outer=int(merged.get("samples_outer", 10000)),
        samples_inner=int(merged.get("samples_inner", 4000)),
        quad_points=int(merged.get("quad_points", 32)),
        cache_dir=merged.get("cache_dir"),
    )


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        merged = _merge_config(args)
        spec = build_spec(merged)
        parallel = int(merged.get("parallel", 1))
        if parallel < 1:
            raise DomainError("parallel must be >= 1")
        if not any(merged.get(k) for k in ("out_csv", "out_json", "out_svg")):
            raise DomainError(
                "no output requested; set at least one of "
                "--out-csv, --out-json, --out-svg"
            )
    except (DomainError, FadingMacError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    results = run_sweep(spec, parallelism=parallel)
    try:
        if merged.get("out_csv"):
            emit_csv(results, merged["out_csv"], spec)
        if merged.get("out_json"):
            emit_json(results, merged["out_json"], spec)
        if merged.get("out_svg"):
            emit_plot(results, merged["out_svg"], units=spec.units)
    except (OSError, FadingMacError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    failures = [p for p in results if p.failed]
    for p in failures:
        print(
            f"warning: {p.kind} at {p.snr_db} dB failed: {p.error}",
            file=sys.stderr,
        )
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
