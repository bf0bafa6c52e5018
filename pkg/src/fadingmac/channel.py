"""Channel configuration and result containers shared across the bounds."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DimensionError, DomainError

__all__ = ["ChannelConfig", "BoundEstimate", "BOUND_KINDS"]

BOUND_KINDS = ("ub_general", "ub_square", "ub_csi", "lb_ustm", "lb_gauss", "lb_2user")


@dataclass(frozen=True)
class ChannelConfig:
    """A Rayleigh block-fading multiple-access channel.

    tau is the coherence interval in channel uses, users the number of
    transmitters, per_user_antennas their antenna counts, rx_antennas the
    receive array size.  Derived: n is the total transmit antenna count,
    ell = min(n, r), p = max(n, r).
    """

    tau: int
    users: int
    per_user_antennas: tuple
    rx_antennas: int

    def __post_init__(self):
        object.__setattr__(
            self, "per_user_antennas", tuple(int(a) for a in self.per_user_antennas)
        )
        if self.users < 1:
            raise DomainError(f"users must be >= 1, got {self.users}")
        if len(self.per_user_antennas) != self.users:
            raise DimensionError(
                f"expected {self.users} antenna counts, got "
                f"{len(self.per_user_antennas)}"
            )
        if any(a < 1 for a in self.per_user_antennas) or self.rx_antennas < 1:
            raise DomainError("all antenna counts must be >= 1")
        if self.tau < max(self.n, self.rx_antennas):
            raise DomainError(
                f"tau = {self.tau} must be >= max(n, r) = "
                f"{max(self.n, self.rx_antennas)}"
            )

    @property
    def n(self) -> int:
        return sum(self.per_user_antennas)

    @property
    def r(self) -> int:
        return self.rx_antennas

    @property
    def ell(self) -> int:
        return min(self.n, self.rx_antennas)

    @property
    def p(self) -> int:
        return max(self.n, self.rx_antennas)

    @staticmethod
    def single_antenna(tau: int, users: int, rx: int) -> "ChannelConfig":
        """Shorthand for K single-antenna transmitters."""
        return ChannelConfig(tau, users, (1,) * users, rx)


@dataclass
class BoundEstimate:
    """One bound value at one SNR point, in nats per channel use."""

    value: float
    std_error: float
    kind: str
    cfg: ChannelConfig
    rho: float
    seed: int = 0
    n_samples: int = 0
    runtime_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise DomainError(f"unknown bound kind {self.kind!r}")
        if self.std_error < 0:
            raise DomainError("std_error must be >= 0")
