"""Synthetic world for system-identification experiments.

Block-sparse impulse responses, white or first-order-colored excitation,
measurement noise calibrated to a target SNR, and the normalized
misalignment metric.  Everything is seeded and deterministic so runs can
be reproduced byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .filters import RegressorHistory

__all__ = [
    "ImpulseResponse",
    "EchoScenario",
    "make_block_sparse_ir",
    "gen_excitation",
    "ar1_filter",
    "echo_output",
    "scale_noise_for_snr",
    "misalignment_db",
]

MISALIGNMENT_FLOOR_DB = -300.0


def _validated_clusters(clusters, filter_length: int) -> tuple[tuple[int, int], ...]:
    """Normalize 1-based inclusive (start, end) ranges; reject bad layouts."""
    spec = []
    for entry in clusters:
        start, end = int(entry[0]), int(entry[1])
        if not 1 <= start <= end <= filter_length:
            raise ValueError(
                f"cluster ({start}, {end}) outside the valid tap range [1, {filter_length}]"
            )
        spec.append((start, end))
    ordered = sorted(spec)
    for (_, prev_end), (next_start, _) in zip(ordered, ordered[1:]):
        if next_start <= prev_end:
            raise ValueError(f"clusters overlap near tap {next_start}")
    return tuple(spec)


@dataclass(frozen=True, eq=False)
class ImpulseResponse:
    """True system coefficients whose support is a set of tap clusters.

    ``cluster_spec`` uses 1-based inclusive tap ranges; taps outside every
    cluster must be exactly zero.
    """

    taps: np.ndarray
    cluster_spec: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 1 or taps.size == 0:
            raise ValueError("taps must be a nonempty 1-D vector")
        spec = _validated_clusters(self.cluster_spec, taps.size)
        mask = np.zeros(taps.size, dtype=bool)
        for start, end in spec:
            mask[start - 1 : end] = True
        if np.any(taps[~mask] != 0.0):
            raise ValueError("taps outside the declared clusters must be exactly zero")
        object.__setattr__(self, "taps", taps)
        object.__setattr__(self, "cluster_spec", spec)

    @property
    def filter_length(self) -> int:
        return self.taps.size

    def support_mask(self) -> np.ndarray:
        mask = np.zeros(self.filter_length, dtype=bool)
        for start, end in self.cluster_spec:
            mask[start - 1 : end] = True
        return mask


def make_block_sparse_ir(filter_length: int, clusters, seed: int) -> ImpulseResponse:
    """Impulse response with standard-normal taps inside the given clusters.

    Cluster taps are drawn in the order the clusters are listed, so the
    response is fully determined by ``(filter_length, clusters, seed)``.
    """
    spec = _validated_clusters(clusters, filter_length)
    rng = np.random.default_rng(seed)
    taps = np.zeros(filter_length)
    for start, end in spec:
        taps[start - 1 : end] = rng.standard_normal(end - start + 1)
    return ImpulseResponse(taps, spec)


def ar1_filter(driving, pole: float) -> np.ndarray:
    """Run ``y(n) = pole * y(n-1) + w(n)`` over ``driving`` with y(-1) = 0."""
    if not -1.0 < pole < 1.0:
        raise ValueError(f"AR(1) pole must satisfy |pole| < 1, got {pole}")
    return lfilter([1.0], [1.0, -pole], np.asarray(driving, dtype=float))


def gen_excitation(n_samples: int, seed: int, kind: str = "white", pole: float | None = None) -> np.ndarray:
    """Seeded excitation: unit-variance white noise, optionally AR(1)-colored.

    ``kind="ar1"`` filters the white sequence through a one-pole recursion,
    which is how colored speech-like test signals are usually produced.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    white = np.random.default_rng(seed).standard_normal(n_samples)
    if kind == "white":
        return white
    if kind == "ar1":
        if pole is None:
            raise ValueError("ar1 excitation requires a pole")
        return ar1_filter(white, pole)
    raise ValueError(f"unknown excitation kind {kind!r}; expected 'white' or 'ar1'")


def echo_output(response: ImpulseResponse, history: RegressorHistory) -> float:
    """Clean (noiseless) system output x(n).T @ h for the current history."""
    if history.filter_length != response.filter_length:
        raise ValueError(
            f"history holds {history.filter_length} taps but the response has "
            f"{response.filter_length}"
        )
    return float(history.input_vector() @ response.taps)


def scale_noise_for_snr(clean_echo, snr_db: float, seed: int) -> np.ndarray:
    """White Gaussian noise scaled so the clean/noise power ratio hits ``snr_db``.

    The scaling uses the realized (empirical) powers of both vectors, so
    the requested SNR holds exactly for this realization rather than in
    expectation.
    """
    clean = np.asarray(clean_echo, dtype=float)
    if clean.size == 0:
        raise ValueError("clean_echo must be nonempty")
    clean_power = float(np.mean(clean * clean))
    if clean_power == 0.0:
        raise ValueError("clean_echo has zero power; SNR scaling is undefined")
    raw = np.random.default_rng(seed).standard_normal(clean.size)
    raw_power = float(np.mean(raw * raw))
    target_power = clean_power / 10.0 ** (snr_db / 10.0)
    return raw * np.sqrt(target_power / raw_power)


def misalignment_db(true_h, est_h) -> float:
    """Normalized misalignment 10*log10(||h - h_est||^2 / ||h||^2), floored at -300 dB."""
    h = np.asarray(true_h, dtype=float)
    w = np.asarray(est_h, dtype=float)
    if h.shape != w.shape:
        raise ValueError(f"shape mismatch: {h.shape} vs {w.shape}")
    denom = float(h @ h)
    if denom == 0.0:
        raise ValueError("true system has zero norm; misalignment is undefined")
    diff = w - h
    ratio = float(diff @ diff) / denom
    if ratio <= 1e-30:
        return MISALIGNMENT_FLOOR_DB
    return max(10.0 * np.log10(ratio), MISALIGNMENT_FLOOR_DB)


@dataclass(frozen=True, eq=False)
class EchoScenario:
    """Schedule of true responses plus the excitation and noise description.

    ``schedule`` lists ``(switch_sample, response)`` pairs sorted by switch
    sample, the first at sample 0; the response stays active until the next
    switch.  ``snr_db=None`` disables measurement noise entirely (useful
    for noiseless sanity checks).
    """

    schedule: tuple
    excitation: str = "ar1"
    pole: float | None = 0.8
    snr_db: float | None = 30.0
    seed: int = 0
    total_samples: int = 1

    def __post_init__(self) -> None:
        entries = tuple((int(s), r) for s, r in self.schedule)
        if not entries:
            raise ValueError("schedule must contain at least one response")
        if entries[0][0] != 0:
            raise ValueError("the first schedule entry must start at sample 0")
        switches = [s for s, _ in entries]
        if any(b <= a for a, b in zip(switches, switches[1:])):
            raise ValueError("schedule switch samples must be strictly increasing")
        length = entries[0][1].filter_length
        if any(r.filter_length != length for _, r in entries):
            raise ValueError("all scheduled responses must share one filter length")
        if self.total_samples < 1:
            raise ValueError(f"total_samples must be >= 1, got {self.total_samples}")
        if switches[-1] >= self.total_samples:
            raise ValueError("schedule switches past the end of the run")
        if self.excitation not in ("white", "ar1"):
            raise ValueError(f"unknown excitation {self.excitation!r}")
        if self.excitation == "ar1":
            if self.pole is None or not -1.0 < self.pole < 1.0:
                raise ValueError(f"ar1 excitation needs a pole with |pole| < 1, got {self.pole}")
        object.__setattr__(self, "schedule", entries)

    @property
    def filter_length(self) -> int:
        return self.schedule[0][1].filter_length

    def segments(self) -> list[tuple[int, int, ImpulseResponse]]:
        """(start, end, response) triples covering [0, total_samples)."""
        starts = [s for s, _ in self.schedule]
        ends = starts[1:] + [self.total_samples]
        return [(s, e, r) for (s, r), e in zip(self.schedule, ends)]
