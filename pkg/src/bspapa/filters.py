"""Per-sample update engines for the proportionate affine projection family.

Variants
--------
``apa``
    Uniform gains: the plain affine projection update.
``papa`` / ``pnlms``
    Per-tap proportionate gains from coefficient magnitudes.
``bs-papa`` / ``bs-pnlms``
    Block proportionate gains from group Euclidean norms.
``mpapa`` / ``bs-mpapa``
    Memory variants that keep previously weighted regressor columns with
    their historical gains instead of reweighting the whole window every
    sample.

All projection members share one update: with ``W`` the gain-weighted
regressor, ``h += mu * W @ solve(X.T @ W + delta*I, e)``.  They differ only
in how the gains and ``W`` are produced.  The single-projection members
(``pnlms``, ``bs-pnlms``) apply the scalar-normalized form of the same step
and skip the linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.linalg import lu_factor, lu_solve

from .gains import BlockPartition, GainVector, StallGuards, block_l2_norms, proportionate_gains

__all__ = [
    "VARIANTS",
    "SingularSystemError",
    "FilterConfig",
    "FilterState",
    "RegressorHistory",
    "WeightedRegressor",
    "AdaptiveFilter",
    "error_vector",
    "build_weighted_regressor_direct",
    "build_weighted_regressor_efficient",
    "update_memory_regressor",
    "solve_regularized",
    "variant_gains",
    "filter_step",
]

VARIANTS = ("apa", "papa", "bs-papa", "mpapa", "bs-mpapa", "bs-pnlms", "pnlms")

_MEMORY_VARIANTS = frozenset({"mpapa", "bs-mpapa"})
_SCALAR_VARIANTS = frozenset({"pnlms", "bs-pnlms"})
# Members whose gains come straight from per-tap magnitudes rather than
# block norms; their group size is pinned to one tap.
_PER_TAP_VARIANTS = frozenset({"papa", "mpapa", "pnlms"})
_FORCED_GROUP_SIZE = {"apa": "full", "papa": 1, "mpapa": 1, "pnlms": 1}


class SingularSystemError(np.linalg.LinAlgError):
    """Projection system singular to working precision."""

    def __init__(self, message: str, pivot: float):
        super().__init__(message)
        self.pivot = pivot


@dataclass(frozen=True)
class FilterConfig:
    """Static description of one adaptive filter.

    Named special cases pin their implied parameters at construction:
    ``apa`` forces a single full-length block, ``papa``/``mpapa``/``pnlms``
    force one-tap blocks, and the ``*-pnlms`` members require a projection
    order of one.  The block-sparse members need an explicit ``group_size``
    dividing ``filter_length``.

    ``regressor_mode`` selects how the gain-weighted regressor is built for
    the projection members: ``"direct"`` multiplies every entry, while
    ``"efficient"`` computes each product once per block and reuses it
    across the sliding projection window.  Both produce bit-identical
    matrices.
    """

    variant: str
    filter_length: int
    projection_order: int = 1
    group_size: int | None = None
    step_size: float = 0.01
    regularization: float = 0.01
    guards: StallGuards = StallGuards()
    regressor_mode: str = "efficient"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.filter_length < 1:
            raise ValueError(f"filter_length must be positive, got {self.filter_length}")
        if self.projection_order < 1:
            raise ValueError(f"projection_order must be >= 1, got {self.projection_order}")
        # step_size 0 is allowed: it freezes the filter, which is useful as a
        # null reference in benchmark panels.
        if not 0.0 <= self.step_size <= 2.0:
            raise ValueError(f"step_size must lie in [0, 2], got {self.step_size}")
        if self.regularization < 0:
            raise ValueError(f"regularization must be nonnegative, got {self.regularization}")
        if self.regressor_mode not in ("direct", "efficient"):
            raise ValueError(f"regressor_mode must be 'direct' or 'efficient', got {self.regressor_mode!r}")
        forced = _FORCED_GROUP_SIZE.get(self.variant)
        if forced is not None:
            forced = self.filter_length if forced == "full" else forced
            if self.group_size not in (None, forced):
                raise ValueError(
                    f"variant {self.variant!r} implies group_size={forced}, got {self.group_size}"
                )
            object.__setattr__(self, "group_size", forced)
        elif self.group_size is None:
            raise ValueError(f"variant {self.variant!r} requires an explicit group_size")
        if self.variant in _SCALAR_VARIANTS and self.projection_order != 1:
            raise ValueError(
                f"variant {self.variant!r} is the projection_order=1 member, "
                f"got projection_order={self.projection_order}"
            )
        BlockPartition(self.filter_length, self.group_size)  # validates divisibility

    # cached: these are read every sample in the update loop
    @cached_property
    def partition(self) -> BlockPartition:
        return BlockPartition(self.filter_length, self.group_size)

    @property
    def block_count(self) -> int:
        return self.filter_length // self.group_size

    @cached_property
    def is_memory(self) -> bool:
        return self.variant in _MEMORY_VARIANTS

    @cached_property
    def is_scalar(self) -> bool:
        return self.variant in _SCALAR_VARIANTS

    @property
    def multiplications_per_step(self) -> int:
        """Products spent building the weighted regressor each sample."""
        if self.is_memory:
            return self.filter_length
        if self.regressor_mode == "direct" and not self.is_scalar:
            return self.projection_order * self.filter_length
        return (self.group_size + self.projection_order - 1) * self.block_count


@dataclass(eq=False)
class FilterState:
    """Mutable per-stream state: weights plus the memory-variant regressor."""

    weights: np.ndarray
    memory_regressor: np.ndarray | None = None
    step_counter: int = 0

    @classmethod
    def initial(cls, config: FilterConfig) -> "FilterState":
        mem = None
        if config.is_memory:
            mem = np.zeros((config.filter_length, config.projection_order))
        return cls(weights=np.zeros(config.filter_length), memory_regressor=mem)


class RegressorHistory:
    """Sliding input window able to materialize the L-by-M regressor.

    Keeps the most recent ``filter_length + projection_order - 1`` samples
    in a ring buffer mirrored at two offsets, so the newest-first window is
    always one contiguous slice.  Samples earlier than the stream start read
    as zero.
    """

    def __init__(self, filter_length: int, projection_order: int):
        if filter_length < 1:
            raise ValueError(f"filter_length must be positive, got {filter_length}")
        if projection_order < 1:
            raise ValueError(f"projection_order must be >= 1, got {projection_order}")
        self.filter_length = filter_length
        self.projection_order = projection_order
        self._span = filter_length + projection_order - 1
        self._buf = np.zeros(2 * self._span)
        self._head = 0

    def push(self, sample: float) -> None:
        """Append ``sample`` as the newest input x(n)."""
        self._head = (self._head - 1) % self._span
        self._buf[self._head] = sample
        self._buf[self._head + self._span] = sample

    def extend(self, samples) -> None:
        """Push a batch of samples, oldest first."""
        for s in np.asarray(samples, dtype=float).ravel():
            self.push(s)

    def window(self) -> np.ndarray:
        """Newest-first view of the stored samples (valid until the next push)."""
        return self._buf[self._head : self._head + self._span]

    def input_vector(self, delay: int = 0) -> np.ndarray:
        """x(n - delay) as a length-L vector, newest sample first."""
        if not 0 <= delay < self.projection_order:
            raise ValueError(f"delay must lie in [0, {self.projection_order - 1}], got {delay}")
        return self.window()[delay : delay + self.filter_length]

    def regressor_matrix(self) -> np.ndarray:
        """The L-by-M matrix whose column j is the input vector delayed j samples."""
        stacked = sliding_window_view(self.window(), self.filter_length)
        return stacked[: self.projection_order].T


@dataclass(frozen=True, eq=False)
class WeightedRegressor:
    """Gain-weighted regressor plus the number of products spent building it."""

    matrix: np.ndarray
    multiplication_count: int


def error_vector(history: RegressorHistory, desired, weights) -> np.ndarray:
    """A-priori error vector ``d - X.T @ weights``, newest component first.

    ``desired`` must hold the latest M desired samples, newest first.
    """
    d = np.asarray(desired, dtype=float)
    w = np.asarray(weights, dtype=float)
    if d.shape != (history.projection_order,):
        raise ValueError(
            f"expected {history.projection_order} desired samples, got shape {d.shape}"
        )
    if w.shape != (history.filter_length,):
        raise ValueError(
            f"expected a weight vector of length {history.filter_length}, got shape {w.shape}"
        )
    return d - history.regressor_matrix().T @ w


def build_weighted_regressor_direct(gains: GainVector, history: RegressorHistory) -> WeightedRegressor:
    """Weighted regressor by plain row scaling: M*L products."""
    if gains.partition.filter_length != history.filter_length:
        raise ValueError(
            f"gains cover {gains.partition.filter_length} taps but history holds "
            f"{history.filter_length}"
        )
    matrix = gains.expand()[:, None] * history.regressor_matrix()
    return WeightedRegressor(matrix, history.projection_order * history.filter_length)


def build_weighted_regressor_efficient(gains: GainVector, history: RegressorHistory) -> WeightedRegressor:
    """Weighted regressor with per-block product reuse: (P+M-1)*N products.

    Within a block all regressor entries are the block gain times one of
    P+M-1 consecutive input samples, so each product is computed once and
    placed via a sliding window.  The result is bit-exact equal to the
    direct construction.
    """
    if gains.partition.filter_length != history.filter_length:
        raise ValueError(
            f"gains cover {gains.partition.filter_length} taps but history holds "
            f"{history.filter_length}"
        )
    group = gains.partition.group_size
    order = history.projection_order
    span = group + order - 1
    windows = sliding_window_view(history.window(), span)[::group]  # (N, P+M-1)
    products = gains.block_gains[:, None] * windows
    matrix = sliding_window_view(products, order, axis=1).reshape(
        history.filter_length, order
    )
    return WeightedRegressor(matrix, span * gains.partition.block_count)


def update_memory_regressor(state: FilterState, gains: GainVector, newest_input) -> np.ndarray:
    """Shift the memory regressor and weight the newest input column.

    The first column becomes the per-tap gains (from the current weights)
    times x(n); older columns keep the gains they were built with.  Exactly
    L products are spent.
    """
    mem = state.memory_regressor
    if mem is None:
        raise ValueError("memory regressor is only maintained for mpapa/bs-mpapa filters")
    x = np.asarray(newest_input, dtype=float)
    if x.shape != (mem.shape[0],):
        raise ValueError(f"expected an input vector of length {mem.shape[0]}, got shape {x.shape}")
    mem[:, 1:] = mem[:, :-1]
    mem[:, 0] = gains.expand() * x
    return mem


def solve_regularized(matrix, delta: float, rhs) -> np.ndarray:
    """Solve ``(matrix + delta*I) z = rhs`` by LU with partial pivoting.

    One general factorization covers all variants, since the memory members
    produce nonsymmetric systems.  A pivot collapsing to working precision
    raises :class:`SingularSystemError` carrying the offending magnitude.
    """
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError(f"rhs length {b.shape} does not match matrix order {a.shape[0]}")
    if delta < 0:
        raise ValueError(f"regularization must be nonnegative, got {delta}")
    system = a + delta * np.eye(a.shape[0])
    lu, piv = lu_factor(system, check_finite=False)
    pivots = np.abs(lu.diagonal())
    smallest = float(pivots.min())
    if smallest <= a.shape[0] * np.finfo(float).eps * float(pivots.max()):
        raise SingularSystemError(
            f"projection system singular to working precision (pivot {smallest:.3e})",
            pivot=smallest,
        )
    return lu_solve((lu, piv), b, check_finite=False)


def variant_gains(config: FilterConfig, weights) -> GainVector:
    """Gain vector a variant derives from the current weights.

    ``apa`` uses the identity; the per-tap members use coefficient
    magnitudes; the block-sparse members use block Euclidean norms.
    """
    part = config.partition
    if config.variant == "apa":
        return GainVector(np.ones(1), part)
    if config.variant in _PER_TAP_VARIANTS:
        return proportionate_gains(np.abs(np.asarray(weights, dtype=float)), config.guards, part)
    return proportionate_gains(block_l2_norms(weights, part), config.guards, part)


def filter_step(
    config: FilterConfig, state: FilterState, history: RegressorHistory, desired
) -> FilterState:
    """Advance one adaptation step; mutates and returns ``state``.

    ``history`` must already contain x(n); ``desired`` holds the newest M
    desired samples, newest first.  Gains are recomputed from the current
    weights every call.
    """
    if (
        history.filter_length != config.filter_length
        or history.projection_order != config.projection_order
    ):
        raise ValueError("history dimensions do not match the filter config")
    desired = np.asarray(desired, dtype=float)
    if desired.shape != (config.projection_order,):
        raise ValueError(
            f"expected {config.projection_order} desired samples, got shape {desired.shape}"
        )
    weights = state.weights
    gains = variant_gains(config, weights)
    mu = config.step_size
    delta = config.regularization

    if config.is_scalar:
        x = history.input_vector()
        err = desired[0] - float(x @ weights)
        weighted = gains.expand() * x
        denom = float(x @ weighted) + delta
        if denom == 0.0:
            raise SingularSystemError(
                "scalar normalization is zero (silent input with delta=0)", pivot=0.0
            )
        weights += (mu * err / denom) * weighted
    else:
        regressor_t = history.regressor_matrix().T
        err = desired - regressor_t @ weights
        if config.is_memory:
            weighted = update_memory_regressor(state, gains, history.input_vector())
        elif config.regressor_mode == "direct":
            weighted = build_weighted_regressor_direct(gains, history).matrix
        else:
            weighted = build_weighted_regressor_efficient(gains, history).matrix
        gram = regressor_t @ weighted
        correction = solve_regularized(gram, delta, err)
        weights += mu * (weighted @ correction)

    state.step_counter += 1
    return state


class AdaptiveFilter:
    """Streaming wrapper owning state, input history and the desired window.

    One instance adapts over one logical signal stream; distinct instances
    are fully independent.
    """

    def __init__(self, config: FilterConfig):
        self.config = config
        self.reset()

    def reset(self) -> None:
        self.state = FilterState.initial(self.config)
        self.history = RegressorHistory(self.config.filter_length, self.config.projection_order)
        self._desired = np.zeros(self.config.projection_order)

    @property
    def weights(self) -> np.ndarray:
        return self.state.weights

    def process(self, sample: float, desired: float) -> float:
        """Consume one (input, desired) pair and return the a-priori error."""
        self.history.push(sample)
        d = self._desired
        d[1:] = d[:-1]
        d[0] = desired
        prior = desired - float(self.history.input_vector() @ self.state.weights)
        filter_step(self.config, self.state, self.history, d)
        return prior
