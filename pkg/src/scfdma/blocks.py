"""Enumeration of every feasible interleaved channel block for (M, N)."""

from __future__ import annotations

from typing import Iterator

from .model import ChannelBlock, ParameterError, block_length


def _check(M: int, N: int) -> None:
    if M < 1 or M > N:
        raise ParameterError(f"need 1 <= M <= N (got M={M}, N={N})")


def iter_blocks(M: int, N: int) -> Iterator[ChannelBlock]:
    """Yield blocks in nested-loop order: c=1 shifts first, then c, s, q ascending."""
    _check(M, N)
    for q in range(N - M + 1):
        yield ChannelBlock(1, 0, q)
    for c in range(2, N // M + 1):
        for s in range((N - c * M) // (c - 1) + 1):
            L = block_length(c, s, M)
            for q in range(N - L + 1):
                yield ChannelBlock(c, s, q)


def enumerate_blocks(M: int, N: int) -> list[ChannelBlock]:
    """All channel blocks as a list; ``len()`` of the result is K."""
    return list(iter_blocks(M, N))


def count_blocks_bruteforce(M: int, N: int) -> int:
    """Count valid (c, s, q) triples by scanning a box that contains all of them.

    Deliberately avoids the ranges used by :func:`iter_blocks`: every triple in
    ``[0, N]^3`` is tested against the block invariants directly.
    """
    _check(M, N)
    count = 0
    for c in range(0, N + 1):
        for s in range(0, N + 1):
            for q in range(0, N + 1):
                if c < 1 or c * M > N:
                    continue
                if c == 1 and s != 0:
                    continue
                if c > 1 and s * (c - 1) > N - c * M:
                    continue
                if q + (c - 1) * (M + s) + M > N:
                    continue
                count += 1
    return count


def block_groups(M: int, N: int) -> list[tuple[int, int, int]]:
    """The distinct (c, s) layouts with their number of shifts, in enumeration order."""
    _check(M, N)
    out = [(1, 0, N - M + 1)]
    for c in range(2, N // M + 1):
        for s in range((N - c * M) // (c - 1) + 1):
            out.append((c, s, N - block_length(c, s, M) + 1))
    return out
