"""Discrete Fourier transform, Fourier basis tones and the short-time transform.

The DFT here is unitary (1/sqrt(N) scaling) so that Parseval's identity
holds exactly: ``norm(dft(x)) == norm(x)``.  The short-time transform used
by the spectral detection functions is the plain unnormalized window DFT,
computed frame by frame over a hopping rectangular window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import Signal

__all__ = [
    "Spectrogram",
    "dft",
    "idft",
    "pure_tone",
    "stft",
    "band_limit_bins",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Spectrogram:
    """Complex short-time Fourier coefficients with window/hop metadata.

    ``frames[n, k]`` is the unnormalized window-DFT coefficient of frame
    ``n`` at frequency bin ``k``.  Frame ``n`` covers the sample range
    ``[n * hop, n * hop + window_length)`` and is stamped with the time of
    the window center.
    """

    frames: np.ndarray = field(repr=False)
    window_length: int
    hop: int
    sample_rate: int
    frame_times: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not _is_power_of_two(self.window_length) or self.window_length < 2:
            raise ValueError("window_length must be a power of two >= 2")
        if self.hop < 1:
            raise ValueError("hop must be >= 1")
        if self.frames.ndim != 2 or self.frames.shape[1] != self.window_length:
            raise ValueError("frames must be (n_frames, window_length)")
        if len(self.frame_times) != len(self.frames):
            raise ValueError("frame_times length must match frame count")

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def dft(x) -> np.ndarray:
    """Unitary discrete Fourier transform.

    ``y[k] = (1/sqrt(N)) * sum_n x[n] exp(-2 pi i k n / N)``.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.size == 0:
        raise ValueError("empty input")
    return np.fft.fft(x, norm="ortho")


def idft(y) -> np.ndarray:
    """Inverse of :func:`dft` (unitary scaling)."""
    y = np.asarray(y, dtype=np.complex128)
    if y.size == 0:
        raise ValueError("empty input")
    return np.fft.ifft(y, norm="ortho")


def pure_tone(f: int, n: int) -> np.ndarray:
    """Normalized complex exponential of order ``n`` at frequency bin ``f``.

    Element ``m`` equals ``exp(2 pi i f m / n) / sqrt(n)``.  The tones for
    ``f = 0 .. n-1`` form an orthonormal basis under the complex inner
    product.
    """
    if not 0 <= f < n:
        raise ValueError(f"bin index {f} out of range for order {n}")
    m = np.arange(n)
    return np.exp(2j * np.pi * f * m / n) / np.sqrt(n)


def frame_count(n_samples: int, hop: int) -> int:
    """Number of analysis frames for a signal of ``n_samples``: ceil(n/hop),
    at least 1."""
    return max(1, -(-n_samples // hop))


def frame_signal(samples: np.ndarray, window_length: int, hop: int) -> np.ndarray:
    """Slice a signal into ``ceil(len/hop)`` frames of ``window_length``
    samples starting at multiples of ``hop``, zero-padding past the end."""
    n = frame_count(len(samples), hop)
    padded_len = (n - 1) * hop + window_length
    padded = np.zeros(padded_len, dtype=np.float64)
    padded[: len(samples)] = samples
    view = np.lib.stride_tricks.sliding_window_view(padded, window_length)
    return view[::hop][:n]


def frame_times(n_frames: int, window_length: int, hop: int,
                sample_rate: int) -> np.ndarray:
    """Window-center time stamp for each frame, in seconds."""
    starts = np.arange(n_frames) * hop
    return (starts + window_length / 2) / sample_rate


def stft(signal: Signal, window_length: int = 4096, hop: int = 512) -> Spectrogram:
    """Short-time Fourier transform with a rectangular window.

    Coefficients are the unnormalized window DFT (no 1/sqrt(w) factor), so
    per frame ``sum_k |X_k|^2 == w * sum_m x[m]^2``.  The tail is
    zero-padded so that frame times cover the full recording.
    """
    if not _is_power_of_two(window_length) or window_length < 2:
        raise ValueError("window_length must be a power of two >= 2")
    if hop < 1:
        raise ValueError("hop must be >= 1")
    if len(signal) < 1:
        raise ValueError("empty signal")
    frames = frame_signal(signal.samples, window_length, hop)
    coeffs = np.fft.fft(frames, axis=1)
    times = frame_times(len(frames), window_length, hop, signal.sample_rate)
    return Spectrogram(
        frames=coeffs,
        window_length=window_length,
        hop=hop,
        sample_rate=signal.sample_rate,
        frame_times=times,
    )


def band_limit_bins(spectrogram: Spectrogram, cutoff_hz: float) -> int:
    """Number of low-frequency bins K whose real frequency is at most
    ``cutoff_hz``; detection functions iterate bins ``0 .. K-1``."""
    nyquist = spectrogram.sample_rate / 2
    if not 0 < cutoff_hz <= nyquist:
        raise ValueError(
            f"cutoff {cutoff_hz} Hz outside (0, Nyquist={nyquist}]")
    return int(cutoff_hz * spectrogram.window_length
               // spectrogram.sample_rate) + 1
