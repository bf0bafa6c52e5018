"""Reproducible random-matrix sampling and Monte-Carlo constant estimation.

All randomness flows through counter-based Philox streams keyed by
(master_seed, stream_id), so any partitioning of the work across processes
reproduces the same draws.  The two channel constants with no closed form,

* zeta  -- the expected largest eigenvalue of an r x (tau-n) complex
  Wishart matrix,
* the ordering constant a -- the probability that every nonzero singular
  value of one scaled Gaussian matrix exceeds the largest singular value
  of another,

are estimated once per parameter key and persisted in a JSON cache.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig
from .errors import DomainError

__all__ = [
    "RngStream",
    "McEstimate",
    "McConfig",
    "ConstantCache",
    "sample_cgauss",
    "sample_stiefel",
    "sample_mac_ustm_input",
    "sample_gaussian_input_spectrum",
    "estimate_zeta",
    "estimate_order_constant",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    The draw sequence is a pure function of (master_seed, stream_id);
    distinct stream ids give statistically independent sequences.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.master_seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "RngStream":
        """Stream for indexed work item i: stream_id = base xor i."""
        return RngStream(self.master_seed, (self.stream_id ^ index) & _MASK64)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 2:
            raise DomainError("McEstimate requires n_samples >= 2")


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo budget for the cached constants."""

    n_samples: int = 10**6
    seed: int = 0
    stream_id: int = 0
    block: int = 1 << 12

    def stream(self) -> RngStream:
        return RngStream(self.seed, self.stream_id)


def sample_cgauss(rows: int, cols: int, stream: RngStream) -> np.ndarray:
    """rows x cols matrix of i.i.d. CN(0,1) entries."""
    if rows < 1 or cols < 1:
        raise DomainError("sample_cgauss requires rows, cols >= 1")
    g = stream.generator()
    z = g.standard_normal((rows, cols)) + 1j * g.standard_normal((rows, cols))
    return z / math.sqrt(2.0)


def _cgauss_batch(g: np.random.Generator, count: int, rows: int, cols: int):
    z = g.standard_normal((count, rows, cols)) + 1j * g.standard_normal(
        (count, rows, cols)
    )
    return z / math.sqrt(2.0)


def _stiefel_rows(z: np.ndarray) -> np.ndarray:
    """Orthonormalize the rows of z (n x tau, n <= tau), Haar-uniform.

    QR of z^H with the unique phase convention (positive real diagonal of
    the triangular factor) makes the result exactly Haar on the Stiefel
    manifold, not just uniform up to phases.
    """
    q, r = np.linalg.qr(z.conj().T)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    return (q * phases.conj()).conj().T


def sample_stiefel(n: int, tau: int, stream: RngStream) -> np.ndarray:
    """Haar-uniform n x tau matrix with orthonormal rows."""
    if tau < n:
        raise DomainError(f"sample_stiefel requires tau >= n, got ({n}, {tau})")
    return _stiefel_rows(sample_cgauss(n, tau, stream))


def sample_mac_ustm_input(
    cfg: ChannelConfig, rho: float, stream: RngStream
) -> np.ndarray:
    """Stacked per-user isotropic unitary input, n x tau.

    Each user independently draws a Haar row-orthonormal block and scales
    it by sqrt(tau*rho/n); the total input power tr(X X^H) equals tau*rho
    exactly.
    """
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    scale = math.sqrt(cfg.tau * rho / cfg.n)
    blocks = [
        scale * sample_stiefel(ni, cfg.tau, stream.substream(1 + i))
        for i, ni in enumerate(cfg.per_user_antennas)
    ]
    return np.vstack(blocks)


def sample_gaussian_input_spectrum(
    cfg: ChannelConfig, rho: float, stream: RngStream
) -> np.ndarray:
    """Decreasing singular values of sqrt(rho/n) * G, G n x tau CN(0,1)."""
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    g = sample_cgauss(cfg.n, cfg.tau, stream)
    return np.linalg.svd(g, compute_uv=False) * math.sqrt(rho / cfg.n)


class ConstantCache:
    """JSON-backed store for the Monte-Carlo channel constants.

    Single writer, many readers: writes go to a temporary file in the same
    directory followed by an atomic rename.
    """

    def __init__(self, path):
        self.path = os.fspath(path)
        self._data = None

    def _load(self) -> dict:
        if self._data is None:
            try:
                with open(self.path, encoding="utf-8") as fh:
                    self._data = json.load(fh)
            except FileNotFoundError:
                self._data = {}
        return self._data

    def get(self, key: str):
        rec = self._load().get(key)
        if rec is None:
            return None
        return McEstimate(rec["mean"], rec["std_error"], rec["n_samples"])

    def put(self, key: str, est: McEstimate, master_seed: int) -> None:
        data = self._load()
        data[key] = {
            "mean": est.mean,
            "std_error": est.std_error,
            "n_samples": est.n_samples,
            "master_seed": master_seed,
        }
        directory = os.path.dirname(self.path) or "."
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(data, fh, indent=1, sort_keys=True)
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self._data = data


def zeta_cache_key(r: int, cols: int) -> str:
    return f"zeta:{r}:{cols}"


def order_constant_cache_key(r: int, n: int, tau: int, rho: float) -> str:
    return f"oconst:{r}:{n}:{tau}:{rho!r}"


def _blocked_mc(mc: McConfig, sample_block) -> McEstimate:
    """Run a blocked Monte-Carlo loop with per-block indexed streams.

    sample_block(generator, count) returns a 1-D array of draws.  The block
    layout is a fixed function of the budget, so worker partitioning cannot
    change the result.
    """
    base = mc.stream()
    total = 0.0
    total_sq = 0.0
    count = 0
    block_index = 0
    while count < mc.n_samples:
        take = min(mc.block, mc.n_samples - count)
        g = base.substream(block_index).generator()
        vals = np.asarray(sample_block(g, take), dtype=float)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        count += take
        block_index += 1
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    return McEstimate(mean, math.sqrt(var / count), count)


def estimate_zeta(
    r: int, cols: int, mc: McConfig, cache: ConstantCache | None = None
) -> McEstimate:
    """E[lambda_max(H H^H)] for H r x cols with i.i.d. CN(0,1) entries.

    cols = 0 returns 0 exactly (empty matrix).  Results are cached by
    (r, cols) when a cache is supplied.
    """
    if r < 1 or cols < 0:
        raise DomainError(f"estimate_zeta requires r >= 1, cols >= 0, got ({r}, {cols})")
    if cols == 0:
        return McEstimate(0.0, 0.0, 2)
    key = zeta_cache_key(r, cols)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit

    def block(g, count):
        h = _cgauss_batch(g, count, r, cols)
        sv = np.linalg.svd(h, compute_uv=False)
        return sv[:, 0] ** 2

    est = _blocked_mc(mc, block)
    if cache is not None:
        cache.put(key, est, mc.seed)
    return est


def estimate_order_constant(
    cfg: ChannelConfig, rho: float, mc: McConfig, cache: ConstantCache | None = None
) -> McEstimate:
    """P[smallest nonzero singular value of A > largest of B].

    A is r x n with i.i.d. CN(0, tau*rho/n) entries; B is an independent
    (r - ell) x (tau - ell) CN(0,1) matrix.  When r = ell the B matrix is
    empty and the probability is exactly 1.
    """
    if rho <= 0:
        raise DomainError(f"rho must be positive, got {rho}")
    r, n, tau, ell = cfg.r, cfg.n, cfg.tau, cfg.ell
    if r == ell:
        return McEstimate(1.0, 0.0, 2)
    key = order_constant_cache_key(r, n, tau, rho)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    scale = math.sqrt(tau * rho / n)

    def block(g, count):
        a = scale * _cgauss_batch(g, count, r, n)
        b = _cgauss_batch(g, count, r - ell, tau - ell)
        sv_a = np.linalg.svd(a, compute_uv=False)
        sv_b = np.linalg.svd(b, compute_uv=False)
        return (sv_a[:, ell - 1] > sv_b[:, 0]).astype(float)

    est = _blocked_mc(mc, block)
    if cache is not None:
        cache.put(key, est, mc.seed)
    return est
