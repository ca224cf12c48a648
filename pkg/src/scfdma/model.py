"""Domain types and the channel-index geometry of interleaved channel blocks.

Conventions used across the package:

* users are 0-based row indices into ``Instance.gains``;
* channels and sub-block positions are 1-based, so channel ``j`` lives in
  column ``j - 1`` of the gain matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

# Relative slack granted to per-channel power against its cap.
FEASIBILITY_RTOL = 1e-9


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class InvalidInstanceError(ParameterError):
    """An Instance fails validation; ``violations`` lists every problem."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("invalid instance: " + "; ".join(self.violations))


class GuardError(RuntimeError):
    """A solver refused an input that exceeds its size guard."""


def _frozen(a: Any, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One uplink allocation problem.

    ``gains`` is the M x N matrix of linear channel power gains and
    ``noise_power`` is the per-channel noise power (PSD times bandwidth).
    """

    M: int
    N: int
    demands: np.ndarray
    gains: np.ndarray
    noise_power: float
    channel_bandwidth: float
    user_power_limit: float
    channel_peak_power_limit: float
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "demands", _frozen(self.demands))
        object.__setattr__(self, "gains", _frozen(np.atleast_2d(self.gains)))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def with_demands(self, demands) -> Instance:
        """Copy of this instance with new demands (a scalar applies to every user)."""
        d = np.broadcast_to(np.asarray(demands, dtype=float), (self.M,))
        return Instance(
            self.M, self.N, d, self.gains, self.noise_power, self.channel_bandwidth,
            self.user_power_limit, self.channel_peak_power_limit, self.metadata,
        )

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.M == other.M and self.N == other.N
            and np.array_equal(self.demands, other.demands)
            and np.array_equal(self.gains, other.gains)
            and self.noise_power == other.noise_power
            and self.channel_bandwidth == other.channel_bandwidth
            and self.user_power_limit == other.user_power_limit
            and self.channel_peak_power_limit == other.channel_peak_power_limit
        )

    __hash__ = None

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "M": int(self.M),
            "N": int(self.N),
            "demands_bps": self.demands.tolist(),
            "gains": self.gains.tolist(),
            "noise_power_w": float(self.noise_power),
            "channel_bandwidth_hz": float(self.channel_bandwidth),
            "user_power_limit_w": float(self.user_power_limit),
            "channel_peak_power_limit_w": float(self.channel_peak_power_limit),
        }
        if self.metadata:
            d["metadata"] = dict(self.metadata)
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Instance:
        required = [
            "M", "N", "demands_bps", "gains", "noise_power_w", "channel_bandwidth_hz",
            "user_power_limit_w", "channel_peak_power_limit_w",
        ]
        missing = [k for k in required if k not in d]
        if missing:
            raise ParameterError(f"instance document missing fields: {', '.join(missing)}")
        return cls(
            M=int(d["M"]),
            N=int(d["N"]),
            demands=d["demands_bps"],
            gains=d["gains"],
            noise_power=float(d["noise_power_w"]),
            channel_bandwidth=float(d["channel_bandwidth_hz"]),
            user_power_limit=float(d["user_power_limit_w"]),
            channel_peak_power_limit=float(d["channel_peak_power_limit_w"]),
            metadata=d.get("metadata", {}),
        )

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def from_json(cls, path: str | Path) -> Instance:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ParameterError(f"{path}: not valid JSON ({e})") from e
        return cls.from_dict(doc)


def validate_instance(instance: Instance) -> list[str]:
    """Return every violated Instance invariant; an empty list means valid."""
    v = []
    M, N = instance.M, instance.N
    if M < 1:
        v.append(f"M >= 1 (got M={M})")
    if N < M:
        v.append(f"N >= M (got M={M}, N={N})")
    if instance.demands.shape != (M,):
        v.append(f"demands must have length M={M} (got shape {instance.demands.shape})")
    elif not np.all(np.isfinite(instance.demands) & (instance.demands > 0)):
        v.append("demands > 0")
    if instance.gains.shape != (M, N):
        v.append(f"gains must be an M x N matrix ({M}x{N}, got {instance.gains.shape})")
    elif not np.all(np.isfinite(instance.gains) & (instance.gains > 0)):
        v.append("gains > 0")
    for name, value in [
        ("user_power_limit", instance.user_power_limit),
        ("channel_peak_power_limit", instance.channel_peak_power_limit),
        ("channel_bandwidth", instance.channel_bandwidth),
        ("noise_power", instance.noise_power),
    ]:
        if not (np.isfinite(value) and value > 0):
            v.append(f"{name} > 0 (got {value})")
    return v


def check_instance(instance: Instance) -> None:
    violations = validate_instance(instance)
    if violations:
        raise InvalidInstanceError(violations)


def block_length(c: int, s: int, M: int) -> int:
    """Span in channels of a block with ``c`` sub-blocks of ``M`` channels and interspace ``s``."""
    return (c - 1) * (M + s) + M


@dataclass(frozen=True, order=True)
class ChannelBlock:
    c: int
    s: int
    q: int

    def length(self, M: int) -> int:
        return block_length(self.c, self.s, M)

    def violations(self, M: int, N: int) -> list[str]:
        c, s, q = self.c, self.s, self.q
        v = []
        if not 1 <= c <= N // M:
            v.append(f"1 <= c <= floor(N/M)={N // M} (got c={c})")
            return v
        if c == 1 and s != 0:
            v.append(f"c = 1 requires s = 0 (got s={s})")
        if c > 1 and not 0 <= s <= (N - c * M) // (c - 1):
            v.append(f"0 <= s <= {(N - c * M) // (c - 1)} (got s={s})")
        if not 0 <= q <= N - self.length(M):
            v.append(f"0 <= q <= N - L = {N - self.length(M)} (got q={q})")
        return v

    def is_valid(self, M: int, N: int) -> bool:
        return not self.violations(M, N)


def channels_of(block: ChannelBlock, position: int, M: int, N: int | None = None) -> tuple[int, ...]:
    """1-based channels of the user sitting at ``position`` (1..M) in every sub-block."""
    if not 1 <= position <= M:
        raise ParameterError(f"position must lie in 1..{M} (got {position})")
    if N is not None and not block.is_valid(M, N):
        raise ParameterError(f"invalid block {block} for M={M}, N={N}: {block.violations(M, N)}")
    if block.c < 1 or block.s < 0 or block.q < 0:
        raise ParameterError(f"invalid block {block}")
    stride = M + block.s
    return tuple(block.q + ell * stride + position for ell in range(block.c))


@dataclass(frozen=True)
class Allocation:
    """An interleaved allocation: ``perm[i]`` is user i's 1-based position in each sub-block."""

    block: ChannelBlock
    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        if sorted(perm) != list(range(1, len(perm) + 1)):
            raise ParameterError(f"perm must be a permutation of 1..{len(perm)} (got {perm})")
        object.__setattr__(self, "perm", perm)

    def channels(self, user: int) -> tuple[int, ...]:
        return channels_of(self.block, self.perm[user], len(self.perm))


@dataclass(frozen=True)
class AllocationResult:
    allocation: Allocation
    per_user_channel_power: tuple[float, ...]
    total_power: float

    def to_dict(self) -> dict:
        b = self.allocation.block
        return {
            "block": {"c": b.c, "s": b.s, "q": b.q},
            "perm": list(self.allocation.perm),
            "channels": [list(self.allocation.channels(i)) for i in range(len(self.allocation.perm))],
            "per_user_channel_power_w": list(self.per_user_channel_power),
            "total_power_w": self.total_power,
        }
