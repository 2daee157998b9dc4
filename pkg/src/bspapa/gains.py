"""Proportionate gain rules shared by the whole adaptive filter family.

The filter weights are split into contiguous blocks; each block receives a
gain proportional to its Euclidean norm, floored so that no block ever
stalls at zero, and normalized so the gains average to one.  A group size
of one tap reproduces the classical per-coefficient proportionate rule,
while a single group spanning the whole filter degenerates to a uniform
(identity) gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BlockPartition",
    "StallGuards",
    "GainVector",
    "block_l2_norms",
    "proportionate_gains",
    "block_gains",
]


@dataclass(frozen=True)
class BlockPartition:
    """Split of ``filter_length`` taps into contiguous groups of ``group_size``.

    The split must be exact: a filter length that is not a multiple of the
    group size is rejected rather than padded, since silent zero padding
    would distort the trailing block norm.
    """

    filter_length: int
    group_size: int

    def __post_init__(self) -> None:
        if self.filter_length < 1:
            raise ValueError(f"filter_length must be positive, got {self.filter_length}")
        if not 1 <= self.group_size <= self.filter_length:
            raise ValueError(
                f"group_size must lie in [1, {self.filter_length}], got {self.group_size}"
            )
        if self.filter_length % self.group_size:
            raise ValueError(
                f"filter_length {self.filter_length} is not divisible by "
                f"group_size {self.group_size}"
            )

    @property
    def block_count(self) -> int:
        return self.filter_length // self.group_size


@dataclass(frozen=True)
class StallGuards:
    """Floors that keep proportionate gains strictly positive.

    ``q`` protects the all-zero initialization; ``rho`` keeps small blocks
    adapting when a single block dominates.
    """

    rho: float = 0.01
    q: float = 0.01

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError(f"rho must be strictly positive, got {self.rho}")
        if not self.q > 0:
            raise ValueError(f"q must be strictly positive, got {self.q}")


@dataclass(frozen=True, eq=False)
class GainVector:
    """Per-block proportionate gains together with their partition.

    The gains average to one over the blocks, so the expanded per-tap
    diagonal sums to the filter length.
    """

    block_gains: np.ndarray
    partition: BlockPartition

    def __post_init__(self) -> None:
        gains = np.asarray(self.block_gains, dtype=float)
        if gains.shape != (self.partition.block_count,):
            raise ValueError(
                f"expected {self.partition.block_count} block gains, got shape {gains.shape}"
            )
        object.__setattr__(self, "block_gains", gains)

    def expand(self) -> np.ndarray:
        """Per-tap gain diagonal: each block gain repeated ``group_size`` times."""
        return np.repeat(self.block_gains, self.partition.group_size)


def block_l2_norms(weights, partition: BlockPartition) -> np.ndarray:
    """Euclidean norm of each contiguous block of ``weights``.

    Parameters
    ----------
    weights : array_like
        Weight vector of length ``partition.filter_length``.
    partition : BlockPartition
        Block layout; block ``i`` covers taps ``i*P .. (i+1)*P - 1``.

    Returns
    -------
    ndarray
        Nonnegative norms, one per block.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (partition.filter_length,):
        raise ValueError(
            f"expected a weight vector of length {partition.filter_length}, got shape {w.shape}"
        )
    blocks = w.reshape(partition.block_count, partition.group_size)
    return np.sqrt(np.sum(blocks * blocks, axis=1))


def proportionate_gains(
    block_norms, guards: StallGuards, partition: BlockPartition | None = None
) -> GainVector:
    """Stall-protected proportionate gains from per-block norms.

    Every norm is floored at ``rho`` times the largest norm (itself floored
    at ``q``), and the floored values are normalized by their mean.  All-zero
    norms therefore come out uniform instead of stalling, and the gains are
    strictly positive whenever the guards are.

    Parameters
    ----------
    block_norms : array_like
        Nonnegative per-block norms (or per-tap magnitudes for a one-tap
        grouping).
    guards : StallGuards
        Positive floors ``rho`` and ``q``.
    partition : BlockPartition, optional
        Partition the gains belong to.  Defaults to one tap per block,
        which makes ``expand()`` the identity.

    Returns
    -------
    GainVector
    """
    norms = np.asarray(block_norms, dtype=float)
    if norms.ndim != 1 or norms.size == 0:
        raise ValueError("block_norms must be a nonempty 1-D vector")
    if np.any(norms < 0):
        raise ValueError("block norms must be nonnegative")
    if partition is None:
        partition = BlockPartition(norms.size, 1)
    elif partition.block_count != norms.size:
        raise ValueError(
            f"partition has {partition.block_count} blocks but got {norms.size} norms"
        )
    floor = guards.rho * max(guards.q, float(norms.max()))
    gamma = np.maximum(floor, norms)
    return GainVector(gamma / gamma.mean(), partition)


def block_gains(weights, partition: BlockPartition, guards: StallGuards) -> GainVector:
    """Gains computed directly from a weight vector (norms, then gains)."""
    return proportionate_gains(block_l2_norms(weights, partition), guards, partition)
