import struct
import wave

import numpy as np
import pytest


def write_pcm_wav(path, samples, sample_rate=48000, bits=16, channels=1):
    """Write integer PCM WAV from float samples in [-1, 1]."""
    samples = np.asarray(samples, dtype=np.float64)
    if channels == 2 and samples.ndim == 1:
        samples = np.stack([samples, samples], axis=1)
    flat = samples.reshape(-1)
    if bits == 8:
        raw = np.clip(np.round(flat * 128 + 128), 0, 255).astype(np.uint8)
        payload = raw.tobytes()
    elif bits == 16:
        raw = np.clip(np.round(flat * 32768), -32768, 32767).astype("<i2")
        payload = raw.tobytes()
    elif bits == 24:
        raw = np.clip(np.round(flat * (1 << 23)), -(1 << 23),
                      (1 << 23) - 1).astype(np.int64)
        raw = np.where(raw < 0, raw + (1 << 24), raw)
        b = np.empty((len(raw), 3), dtype=np.uint8)
        b[:, 0] = raw & 0xFF
        b[:, 1] = (raw >> 8) & 0xFF
        b[:, 2] = (raw >> 16) & 0xFF
        payload = b.tobytes()
    else:
        raise ValueError(bits)
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(channels)
        wav.setsampwidth(bits // 8)
        wav.setframerate(sample_rate)
        wav.writeframes(payload)
    return path


def write_float_wav(path, samples, sample_rate=48000, channels=1):
    """Write an IEEE float32 WAV (wave stdlib cannot, so hand-rolled)."""
    samples = np.asarray(samples, dtype="<f4")
    if channels == 2 and samples.ndim == 1:
        samples = np.stack([samples, samples], axis=1)
    payload = samples.reshape(-1).tobytes()
    byte_rate = sample_rate * channels * 4
    fmt = struct.pack("<HHIIHH", 3, channels, sample_rate, byte_rate,
                      channels * 4, 32)
    body = (b"WAVE"
            + b"fmt " + struct.pack("<I", len(fmt)) + fmt
            + b"data" + struct.pack("<I", len(payload)) + payload)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
