"""Sub-band FIR filtering of PPG signals and pattern-signal extraction.

The 1-10 Hz band of interest is carved into layered stacks of contiguous
sub-bands ("hyper-filtering"). Each (layer, band) pair yields one filtered
channel; a pattern-signal is the cross-channel vector of one time sample,
which downstream classifiers consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .signal_gen import Label, PpgSignal

__all__ = [
    "PPG_BAND",
    "DEFAULT_BANDS_PER_LAYER",
    "FilterKernel",
    "HyperFilterConfig",
    "ChannelMeta",
    "FilteredStack",
    "PatternSignal",
    "PatternDataset",
    "SignalTooShortError",
    "design_bandpass",
    "apply_filter",
    "subband_edges",
    "hyper_filter",
    "pattern_signals",
]

PPG_BAND = (1.0, 10.0)
DEFAULT_BANDS_PER_LAYER = 11

# Hamming-window FIR transition width rule: taps ~ 3.3 * fs / transition.
_HAMMING_TAP_FACTOR = 3.3
_MAX_TRANSITION_HZ = 0.5


class SignalTooShortError(ValueError):
    """Signal shorter than the longest filter kernel it must absorb."""


@dataclass
class FilterKernel:
    """Linear-phase FIR band-pass kernel with its design band."""

    taps: np.ndarray
    f_lo: float
    f_hi: float
    fs: float

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or self.taps.size % 2 != 1:
            raise ValueError("kernel must be a 1-D array with an odd tap count")
        if not 0 < self.f_lo < self.f_hi < self.fs / 2:
            raise ValueError(
                f"need 0 < f_lo < f_hi < fs/2, got ({self.f_lo}, {self.f_hi}) at fs={self.fs}"
            )


@dataclass(frozen=True)
class HyperFilterConfig:
    """Layered band layout: each layer is a (f_lo, f_hi) range split into
    ``bands_per_layer`` equal-width contiguous sub-bands."""

    layers: tuple[tuple[float, float], ...]
    bands_per_layer: int = DEFAULT_BANDS_PER_LAYER

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "layers", tuple((float(lo), float(hi)) for lo, hi in self.layers)
        )
        if len(self.layers) < 1:
            raise ValueError("config needs at least one layer")
        if self.bands_per_layer < 1:
            raise ValueError("bands_per_layer must be >= 1")
        for lo, hi in self.layers:
            if not (PPG_BAND[0] <= lo < hi <= PPG_BAND[1]):
                raise ValueError(
                    f"layer ({lo}, {hi}) must satisfy {PPG_BAND[0]} <= f_lo < f_hi <= {PPG_BAND[1]}"
                )

    @property
    def n_channels(self) -> int:
        return len(self.layers) * self.bands_per_layer


@dataclass(frozen=True)
class ChannelMeta:
    layer: int
    band: int
    f_lo: float
    f_hi: float
    taps: int


@dataclass
class FilteredStack:
    """All hyper-filtered channels of one signal, channel-major.

    ``channels`` has shape (n_channels, n_samples); channel order is layer
    index then ascending band frequency, matching ``channel_meta``.
    """

    channels: np.ndarray
    channel_meta: list[ChannelMeta]
    fs: float
    label: Label | None = None

    def __post_init__(self) -> None:
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.channels.ndim != 2:
            raise ValueError("channels must be a 2-D (n_channels, n_samples) array")
        if self.channels.shape[0] != len(self.channel_meta):
            raise ValueError("channel_meta must describe every channel")

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_samples(self) -> int:
        return self.channels.shape[1]

    @property
    def max_kernel_taps(self) -> int:
        return max(m.taps for m in self.channel_meta)

    @property
    def default_margin(self) -> int:
        """Edge samples corrupted by the longest kernel's group delay."""
        return (self.max_kernel_taps - 1) // 2


@dataclass
class PatternSignal:
    """Cross-channel intensity vector of one time sample."""

    values: np.ndarray
    label: Label | None = None
    source_index: int = 0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError("pattern values must be 1-D")
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ValueError("pattern values must be finite")


@dataclass
class PatternDataset:
    """Row-per-pattern matrix with integer class labels (see LABEL_INDEX)."""

    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D (rows, channels) array")
        if self.labels.shape != (self.values.shape[0],):
            raise ValueError("labels must be one integer per row")

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    def pattern(self, i: int) -> PatternSignal:
        from .signal_gen import INDEX_LABEL

        return PatternSignal(
            self.values[i].copy(), label=INDEX_LABEL[int(self.labels[i])], source_index=i
        )

    @classmethod
    def from_patterns(cls, patterns: Iterable[PatternSignal]) -> "PatternDataset":
        from .signal_gen import LABEL_INDEX

        pats = list(patterns)
        if not pats:
            raise ValueError("cannot build a dataset from zero patterns")
        if any(p.label is None for p in pats):
            raise ValueError("every pattern needs a class label")
        values = np.stack([p.values for p in pats])
        labels = np.array([LABEL_INDEX[p.label] for p in pats], dtype=np.int64)
        return cls(values, labels)

    def class_counts(self) -> dict[Label, int]:
        from .signal_gen import INDEX_LABEL

        return {lab: int(np.sum(self.labels == i)) for i, lab in enumerate(INDEX_LABEL)}


def _tap_count(fs: float, transition_hz: float) -> int:
    """Smallest odd integer >= 3.3 * fs / transition_hz."""
    n = math.ceil(_HAMMING_TAP_FACTOR * fs / transition_hz)
    return n if n % 2 == 1 else n + 1


def design_bandpass(
    f_lo: float, f_hi: float, fs: float, transition_hz: float = _MAX_TRANSITION_HZ
) -> FilterKernel:
    """Design a windowed-sinc band-pass FIR (Hamming window).

    Built as the difference of two unit-DC-gain low-pass kernels, so the DC
    gain is exactly zero and the passband gain sits within a few tenths of a
    percent of one.
    """
    if not 0 < f_lo < f_hi < fs / 2:
        raise ValueError(f"need 0 < f_lo < f_hi < fs/2, got ({f_lo}, {f_hi}) at fs={fs}")
    if not transition_hz > 0:
        raise ValueError(f"transition_hz must be > 0, got {transition_hz}")

    n = _tap_count(fs, transition_hz)
    mid = (n - 1) // 2
    k = np.arange(n) - mid
    window = np.hamming(n)

    def lowpass(fc: float) -> np.ndarray:
        h = np.where(
            k == 0,
            2.0 * fc / fs,
            np.sin(2 * math.pi * fc * k / fs) / (math.pi * np.where(k == 0, 1, k)),
        )
        h = h * window
        return h / h.sum()

    taps = lowpass(f_hi) - lowpass(f_lo)
    return FilterKernel(taps, f_lo=float(f_lo), f_hi=float(f_hi), fs=float(fs))


def apply_filter(kernel: FilterKernel, signal: PpgSignal) -> PpgSignal:
    """Convolve and compensate the group delay (zero-phase, zero-padded edges).

    Output length equals input length; the first and last (taps-1)/2 samples
    are edge-transient territory.
    """
    x = signal.samples
    if x.size < 1:
        raise ValueError("signal must contain at least one sample")
    mid = (kernel.taps.size - 1) // 2
    full = np.convolve(x, kernel.taps)
    y = full[mid : mid + x.size]
    return PpgSignal(y, fs=signal.fs, label=signal.label)


def subband_edges(layer: tuple[float, float], n_bands: int) -> list[tuple[float, float]]:
    """Split a layer band into contiguous equal-width sub-bands.

    Adjacent bands share the exact same edge value; the first and last edges
    are exactly the layer bounds.
    """
    lo, hi = layer
    if not lo < hi:
        raise ValueError(f"need f_lo < f_hi, got ({lo}, {hi})")
    if n_bands < 1:
        raise ValueError(f"n_bands must be >= 1, got {n_bands}")
    span = hi - lo
    edges = [lo + span * i / n_bands for i in range(n_bands + 1)]
    edges[-1] = hi
    return list(zip(edges[:-1], edges[1:]))


def _band_kernels(config: HyperFilterConfig, fs: float) -> tuple[list[FilterKernel], list[ChannelMeta]]:
    kernels: list[FilterKernel] = []
    meta: list[ChannelMeta] = []
    for layer_idx, layer in enumerate(config.layers):
        for band_idx, (lo, hi) in enumerate(subband_edges(layer, config.bands_per_layer)):
            transition = min(_MAX_TRANSITION_HZ, (hi - lo) / 2)
            kern = design_bandpass(lo, hi, fs, transition)
            kernels.append(kern)
            meta.append(ChannelMeta(layer_idx, band_idx, lo, hi, kern.taps.size))
    return kernels, meta


def hyper_filter(signal: PpgSignal, config: HyperFilterConfig) -> FilteredStack:
    """Filter one signal through every (layer, sub-band) kernel.

    Channels are ordered by layer index then ascending band frequency; the
    label is propagated. Raises SignalTooShortError when the signal cannot
    absorb the longest kernel.
    """
    kernels, meta = _band_kernels(config, signal.fs)
    max_taps = max(k.taps.size for k in kernels)
    if signal.samples.size < max_taps:
        raise SignalTooShortError(
            f"hyper-filtering this band layout needs at least {max_taps} samples, "
            f"got {signal.samples.size}"
        )
    channels = np.stack([apply_filter(k, signal).samples for k in kernels])
    return FilteredStack(channels, meta, fs=signal.fs, label=signal.label)


def pattern_signals(stack: FilteredStack, margin: int | None = None) -> list[PatternSignal]:
    """Extract one cross-channel pattern per retained sample index.

    ``margin`` samples are dropped from each end (default: the stack's
    edge-transient margin); index k of the result reads channel c at
    ``stack.channels[c][margin + k]``.
    """
    if margin is None:
        margin = stack.default_margin
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin}")
    n = stack.n_samples
    if n <= 2 * margin:
        raise ValueError(
            f"stack length {n} leaves no samples inside a margin of {margin}"
        )
    return [
        PatternSignal(stack.channels[:, k].copy(), label=stack.label, source_index=k)
        for k in range(margin, n - margin)
    ]
