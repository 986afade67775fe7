"""Deterministic PCM WAV utilities: probing, trimming, fade envelopes.

Only 16-bit PCM RIFF/WAVE is in scope. The parser is a small chunk walker
rather than the stdlib ``wave`` module because the trim path must carry
unknown chunks through unmodified and the probe path cross-checks chunk
sizes against the file, which ``wave`` does not expose.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    FadeTooLongError,
    InsufficientAudioError,
    PreconditionError,
    UnsupportedFormatError,
)


@dataclass(frozen=True)
class AudioAsset:
    """Metadata for a PCM WAV file on disk."""

    path: Path
    sample_rate: int
    channels: int
    duration: float
    format: str = "pcm16"


@dataclass
class _WavData:
    sample_rate: int
    channels: int
    frames: np.ndarray  # int16, shape (n_frames, channels)
    extra_chunks: list[tuple[bytes, bytes]]  # non fmt/data chunks, in order


def _parse_wav(path: Path) -> _WavData:
    raw = path.read_bytes()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise UnsupportedFormatError(f"{path}: not a RIFF/WAVE file")
    riff_size = struct.unpack("<I", raw[4:8])[0]
    if riff_size + 8 > len(raw):
        raise UnsupportedFormatError(f"{path}: RIFF size exceeds file size")
    pos = 12
    fmt = None
    data = None
    extra: list[tuple[bytes, bytes]] = []
    while pos + 8 <= len(raw):
        cid = raw[pos : pos + 4]
        size = struct.unpack("<I", raw[pos + 4 : pos + 8])[0]
        body_end = pos + 8 + size
        if body_end > len(raw):
            raise UnsupportedFormatError(f"{path}: chunk {cid!r} truncated")
        body = raw[pos + 8 : body_end]
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        else:
            extra.append((cid, body))
        pos = body_end + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise UnsupportedFormatError(f"{path}: missing fmt or data chunk")
    if len(fmt) < 16:
        raise UnsupportedFormatError(f"{path}: fmt chunk too short")
    audio_format, channels, sample_rate, _, _, bits = struct.unpack("<HHIIHH", fmt[:16])
    if audio_format != 1 or bits != 16:
        raise UnsupportedFormatError(
            f"{path}: only 16-bit PCM supported (format={audio_format}, bits={bits})"
        )
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"{path}: {channels} channels unsupported")
    frame_bytes = 2 * channels
    if len(data) % frame_bytes != 0:
        raise UnsupportedFormatError(f"{path}: data chunk not frame-aligned")
    frames = np.frombuffer(data, dtype="<i2").reshape(-1, channels)
    return _WavData(sample_rate, channels, frames.copy(), extra)


def _write_wav(
    path: Path,
    sample_rate: int,
    frames: np.ndarray,
    extra_chunks: list[tuple[bytes, bytes]] | None = None,
) -> AudioAsset:
    frames = np.ascontiguousarray(frames, dtype="<i2")
    if frames.ndim == 1:
        frames = frames[:, None]
    channels = frames.shape[1]
    data = frames.tobytes()
    fmt = struct.pack(
        "<HHIIHH", 1, channels, sample_rate, sample_rate * 2 * channels, 2 * channels, 16
    )
    chunks = [(b"fmt ", fmt)]
    chunks.extend(extra_chunks or [])
    chunks.append((b"data", data))
    body = b""
    for cid, cbody in chunks:
        body += cid + struct.pack("<I", len(cbody)) + cbody
        if len(cbody) & 1:
            body += b"\x00"
    blob = b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    return AudioAsset(
        path=path,
        sample_rate=sample_rate,
        channels=channels,
        duration=frames.shape[0] / sample_rate,
    )


def probe(path: str | Path) -> AudioAsset:
    """Parse the WAV header and return validated metadata."""
    path = Path(path)
    if not path.exists():
        raise UnsupportedFormatError(f"{path}: no such file")
    wav = _parse_wav(path)
    return AudioAsset(
        path=path,
        sample_rate=wav.sample_rate,
        channels=wav.channels,
        duration=wav.frames.shape[0] / wav.sample_rate,
    )


def write_pcm(
    path: str | Path,
    samples: np.ndarray,
    sample_rate: int,
    extra_chunks: list[tuple[bytes, bytes]] | None = None,
) -> AudioAsset:
    """Write float samples in [-1, 1] (or int16) as a 16-bit PCM WAV."""
    samples = np.asarray(samples)
    if samples.dtype.kind == "f":
        samples = np.clip(np.round(samples * 32767.0), -32768, 32767).astype("<i2")
    return _write_wav(Path(path), sample_rate, samples, extra_chunks)


def read_pcm(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a WAV as int16 frames (n, channels) plus sample rate."""
    wav = _parse_wav(Path(path))
    return wav.frames, wav.sample_rate


def apply_fades(
    audio: AudioAsset, fade_in_ms: int, fade_out_ms: int, out_path: str | Path
) -> AudioAsset:
    """Apply linear fade-in/out envelopes, writing a new asset.

    Samples outside the fade windows are bit-identical to the input.
    Non-fmt/data chunks are dropped on this rewrite.
    """
    if fade_in_ms < 0 or fade_out_ms < 0:
        raise PreconditionError("fade durations must be non-negative")
    wav = _parse_wav(audio.path)
    n = wav.frames.shape[0]
    n_in = int(round(fade_in_ms / 1000.0 * wav.sample_rate))
    n_out = int(round(fade_out_ms / 1000.0 * wav.sample_rate))
    if n_in + n_out > n:
        raise FadeTooLongError(
            f"fades cover {n_in + n_out} frames but file has only {n}"
        )
    frames = wav.frames.astype(np.float64)
    if n_in > 1:
        ramp = np.arange(n_in, dtype=np.float64) / (n_in - 1)
        frames[:n_in] *= ramp[:, None]
    elif n_in == 1:
        frames[0] = 0.0
    if n_out > 1:
        ramp = np.arange(n_out - 1, -1, -1, dtype=np.float64) / (n_out - 1)
        frames[n - n_out :] *= ramp[:, None]
    elif n_out == 1:
        frames[n - 1] = 0.0
    faded = np.clip(np.round(frames), -32768, 32767).astype("<i2")
    # Outside the windows the rounding above must not perturb anything.
    if n_in < n - n_out:
        faded[n_in : n - n_out] = wav.frames[n_in : n - n_out]
    return _write_wav(Path(out_path), wav.sample_rate, faded)


def trim(audio: AudioAsset, target_seconds: float, out_path: str | Path) -> AudioAsset:
    """Keep the first ``target_seconds``, frame-accurate; extra chunks pass through."""
    wav = _parse_wav(audio.path)
    n = wav.frames.shape[0]
    target_frames = int(round(target_seconds * wav.sample_rate))
    if target_frames > n:
        raise InsufficientAudioError(
            f"need {target_frames} frames, file has {n}"
        )
    return _write_wav(
        Path(out_path), wav.sample_rate, wav.frames[:target_frames], wav.extra_chunks
    )
