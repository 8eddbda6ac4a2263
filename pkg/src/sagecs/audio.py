"""Deterministic 16 kHz mono PCM toolkit.

Samples live as float64 in [-1, 1) internally and are quantized to int16
only on write. Every operation here is pure: buffers are immutable.
"""

from __future__ import annotations

import os
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SAMPLE_RATE = 16000
SAMPLE_WIDTH = 2
CHANNELS = 1

INT16_SCALE = 32768.0
MAX_SAMPLE = 32767 / INT16_SCALE
SILENCE_THRESHOLD = 1e-4


class AudioFormatError(ValueError):
    """A WAV file does not match the fixed 16-bit / 16 kHz / mono format."""


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        if self.sample_rate != SAMPLE_RATE:
            raise AudioFormatError(f"sample_rate {self.sample_rate} != {SAMPLE_RATE}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise AudioFormatError(f"expected mono samples, got shape {arr.shape}")
        if arr.size and not (np.all(np.isfinite(arr)) and np.max(np.abs(arr)) <= 1.0):
            raise ValueError("samples must be finite and within [-1, 1]")
        if arr is self.samples and arr.flags.writeable:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AudioBuffer):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(self.samples, other.samples)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate

    @classmethod
    def from_int16(cls, pcm) -> "AudioBuffer":
        return cls(np.asarray(pcm, dtype=np.int16).astype(np.float64) / INT16_SCALE)

    @classmethod
    def silence(cls, n: int) -> "AudioBuffer":
        return cls(np.zeros(n))

    def slice(self, start: int, stop: int) -> "AudioBuffer":
        if not 0 <= start <= stop <= len(self):
            raise IndexError(f"slice [{start}, {stop}) outside buffer of length {len(self)}")
        return AudioBuffer(self.samples[start:stop])

    def to_int16(self) -> np.ndarray:
        return quantize(self.samples)


def seconds_to_samples(t: float) -> int:
    return int(round(t * SAMPLE_RATE))


def quantize(x: np.ndarray) -> np.ndarray:
    """Float -> int16 with round-half-away-from-zero and clamping."""
    scaled = np.asarray(x, dtype=np.float64) * INT16_SCALE
    rounded = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)
    return np.clip(rounded, -32768, 32767).astype(np.int16)


def read_wav(path) -> AudioBuffer:
    """Read a 16-bit PCM mono 16 kHz WAV file.

    Anything else raises :class:`AudioFormatError` naming the offending
    property. There is no resampling or downmixing.
    """
    try:
        with wave.open(os.fspath(path), "rb") as wf:
            rate = wf.getframerate()
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            if rate != SAMPLE_RATE:
                raise AudioFormatError(f"sample_rate {rate} != {SAMPLE_RATE}")
            if channels != CHANNELS:
                raise AudioFormatError(f"channels {channels} != {CHANNELS}")
            if width != SAMPLE_WIDTH:
                raise AudioFormatError(f"bit_depth {8 * width} != {8 * SAMPLE_WIDTH}")
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: {exc}") from exc
    pcm = np.frombuffer(raw, dtype="<i2")
    return AudioBuffer(pcm.astype(np.float64) / INT16_SCALE)


def write_wav(buffer: AudioBuffer, path) -> None:
    path = Path(path)
    with wave.open(os.fspath(path), "wb") as wf:
        wf.setnchannels(CHANNELS)
        wf.setsampwidth(SAMPLE_WIDTH)
        wf.setframerate(SAMPLE_RATE)
        wf.writeframes(buffer.to_int16().astype("<i2").tobytes())


def _check_range(buffer: AudioBuffer, start: int, stop: int | None) -> tuple[int, int]:
    stop = len(buffer) if stop is None else stop
    if not 0 <= start < stop <= len(buffer):
        raise ValueError(f"empty or out-of-bounds range [{start}, {stop}) for buffer of length {len(buffer)}")
    return start, stop


def rms(buffer: AudioBuffer, start: int = 0, stop: int | None = None) -> float:
    """Root mean square over samples ``[start, stop)``."""
    start, stop = _check_range(buffer, start, stop)
    seg = buffer.samples[start:stop]
    return float(np.sqrt(np.mean(seg * seg)))


def speech_rms(
    buffer: AudioBuffer,
    start: int = 0,
    stop: int | None = None,
    threshold: float = SILENCE_THRESHOLD,
) -> float:
    """RMS over the non-silent samples (``|x| > threshold``) of a range.

    Returns 0.0 when the whole range is silent.
    """
    start, stop = _check_range(buffer, start, stop)
    seg = buffer.samples[start:stop]
    voiced = seg[np.abs(seg) > threshold]
    if voiced.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(voiced * voiced)))


def apply_gain(buffer: AudioBuffer, g: float) -> tuple[AudioBuffer, int]:
    """Scale by ``g`` and clamp into [-1, 1).

    Returns the new buffer and the number of samples that had to be clamped.
    """
    if not g > 0:
        raise ValueError(f"gain must be positive, got {g}")
    if g == 1.0:
        scaled = buffer.samples
    else:
        scaled = buffer.samples * g
    clipped = np.clip(scaled, -1.0, MAX_SAMPLE)
    n_clips = int(np.count_nonzero(clipped != scaled))
    return AudioBuffer(clipped), n_clips


def crossfade_concat(a: AudioBuffer, b: AudioBuffer, xfade: int) -> AudioBuffer:
    """Concatenate with a linear crossfade of ``xfade`` samples.

    The overlap uses weights ``w(i) = (i + 1) / (xfade + 1)`` on ``b``.
    Samples outside the overlap are copied verbatim.
    """
    xfade = int(xfade)
    if xfade < 0:
        raise ValueError(f"xfade must be >= 0, got {xfade}")
    if xfade > min(len(a), len(b)):
        raise ValueError(f"xfade {xfade} exceeds shorter input length {min(len(a), len(b))}")
    na = len(a)
    out = np.empty(na + len(b) - xfade)
    out[: na - xfade] = a.samples[: na - xfade]
    if xfade:
        w = np.arange(1, xfade + 1) / (xfade + 1)
        tail = a.samples[na - xfade :]
        # tail + w*(head - tail) keeps equal inputs exactly equal
        out[na - xfade : na] = tail + w * (b.samples[:xfade] - tail)
    out[na:] = b.samples[xfade:]
    return AudioBuffer(out)
