"""The three onset detection functions.

Each detector reduces a recording to a series T[n] of non-negative
statistics over a sliding window, designed to spike at note onsets:

* local energy: sum of squared samples per window;
* spectral dissimilarity: band-limited sum of positive frame-to-frame
  STFT magnitude increases;
* dominant spectral dissimilarity: positive frame-to-frame increase of the
  squared maximum band-limited bin magnitude.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .audio import Signal
from .spectral import Spectrogram, band_limit_bins, frame_signal, frame_times

__all__ = [
    "DetectionSeries",
    "DetectorKind",
    "DEFAULT_CUTOFF_HZ",
    "energy_detector",
    "spectral_dissimilarity",
    "dominant_spectral_dissimilarity",
    "periodogram",
    "write_series_csv",
]

DetectorKind = Literal[
    "energy", "spectral_dissimilarity", "dominant_spectral_dissimilarity"
]

# Humming carries essentially no onset information above 1 kHz
# (fundamental 80-200 Hz plus a few harmonics).
DEFAULT_CUTOFF_HZ = 1000.0


@dataclass(frozen=True)
class DetectionSeries:
    """A detection-function series T[n] with per-value time stamps."""

    values: np.ndarray = field(repr=False)
    times: np.ndarray = field(repr=False)
    hop: int
    window_length: int
    detector_kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        times = np.asarray(self.times, dtype=np.float64)
        if len(values) != len(times):
            raise ValueError("values and times must have equal length")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("detection statistics are non-negative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return len(self.values)


def energy_detector(signal: Signal, window_length: int = 4096,
                    hop: int = 512) -> DetectionSeries:
    """Local energy per hopping window: ``T[n] = sum_i x[n*h + i]^2``."""
    if window_length < 1 or hop < 1:
        raise ValueError("window_length and hop must be >= 1")
    if len(signal) < 1:
        raise ValueError("empty signal")
    frames = frame_signal(signal.samples, window_length, hop)
    values = np.einsum("ij,ij->i", frames, frames)
    times = frame_times(len(frames), window_length, hop, signal.sample_rate)
    return DetectionSeries(
        values=values,
        times=times,
        hop=hop,
        window_length=window_length,
        detector_kind="energy",
    )


def _band_magnitudes(spectrogram: Spectrogram, cutoff_hz: float) -> np.ndarray:
    if spectrogram.n_frames < 2:
        raise ValueError("need at least 2 frames")
    k = band_limit_bins(spectrogram, cutoff_hz)
    return np.abs(spectrogram.frames[:, :k])


def spectral_dissimilarity(spectrogram: Spectrogram,
                           cutoff_hz: float = DEFAULT_CUTOFF_HZ) -> DetectionSeries:
    """Sum of positive bin-magnitude increases between consecutive frames,
    restricted to bins at or below ``cutoff_hz``.  T[0] is defined as 0."""
    mags = _band_magnitudes(spectrogram, cutoff_hz)
    diffs = np.diff(mags, axis=0)
    values = np.where(diffs > 0, diffs, 0.0).sum(axis=1)
    values = np.concatenate([[0.0], values])
    return DetectionSeries(
        values=values,
        times=spectrogram.frame_times,
        hop=spectrogram.hop,
        window_length=spectrogram.window_length,
        detector_kind="spectral_dissimilarity",
    )


def dominant_spectral_dissimilarity(
        spectrogram: Spectrogram,
        cutoff_hz: float = DEFAULT_CUTOFF_HZ) -> DetectionSeries:
    """Positive increase of the squared dominant bin magnitude between
    consecutive frames, band-limited to ``cutoff_hz``.  T[0] is 0."""
    mags = _band_magnitudes(spectrogram, cutoff_hz)
    dominant = mags.max(axis=1)
    rises = dominant[1:] > dominant[:-1]
    diffs = dominant[1:] ** 2 - dominant[:-1] ** 2
    values = np.concatenate([[0.0], np.where(rises, diffs, 0.0)])
    return DetectionSeries(
        values=values,
        times=spectrogram.frame_times,
        hop=spectrogram.hop,
        window_length=spectrogram.window_length,
        detector_kind="dominant_spectral_dissimilarity",
    )


def periodogram(window: np.ndarray, f0_bin: int) -> float:
    """Periodogram of one signal window at an integer frequency bin:
    ``I(f0) = |sum_n x[n] exp(-2 pi i f0 n / w)|^2 / w``.

    This is the GLRT statistic for a sinusoid of known frequency in white
    Gaussian noise; its maximum over bins is the unknown-frequency variant.
    """
    window = np.asarray(window, dtype=np.float64)
    w = len(window)
    if w == 0:
        raise ValueError("empty window")
    if not 0 <= f0_bin < w:
        raise ValueError(f"bin {f0_bin} out of range for window length {w}")
    n = np.arange(w)
    s = np.sum(window * np.exp(-2j * np.pi * f0_bin * n / w))
    return float(np.abs(s) ** 2 / w)


def run_detector(signal: Signal, kind: DetectorKind,
                 window_length: int = 4096, hop: int | None = None,
                 cutoff_hz: float = DEFAULT_CUTOFF_HZ) -> DetectionSeries:
    """Dispatch to one of the three detectors with its usual hop default
    (512 samples for energy, 2048 for the spectral detectors)."""
    from .spectral import stft

    if kind == "energy":
        return energy_detector(signal, window_length, 512 if hop is None else hop)
    hop = 2048 if hop is None else hop
    spectrogram = stft(signal, window_length, hop)
    if kind == "spectral_dissimilarity":
        return spectral_dissimilarity(spectrogram, cutoff_hz)
    if kind == "dominant_spectral_dissimilarity":
        return dominant_spectral_dissimilarity(spectrogram, cutoff_hz)
    raise ValueError(f"unknown detector kind: {kind}")


def write_series_csv(series: DetectionSeries, fh) -> None:
    """Emit (time_seconds, value) rows for external plotting."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["time_seconds", "value"])
    for t, v in zip(series.times, series.values):
        writer.writerow([f"{t:.6f}", repr(float(v))])
