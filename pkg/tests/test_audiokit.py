import struct

import numpy as np
import pytest

from soundstage.audiokit import apply_fades, probe, read_pcm, trim, write_pcm
from soundstage.errors import (
    FadeTooLongError,
    InsufficientAudioError,
    UnsupportedFormatError,
)

from .oracles import windowed_rms_oracle


def sine_fixture(path, freq=1000.0, seconds=2.0, sample_rate=44100, channels=1, amp=0.8):
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    sig = amp * np.sin(2 * np.pi * freq * t)
    if channels == 2:
        sig = np.stack([sig, sig], axis=1)
    return write_pcm(path, sig, sample_rate)


class TestProbe:
    def test_stereo_441(self, tmp_path):
        asset = sine_fixture(tmp_path / "a.wav", seconds=2.0, sample_rate=44100, channels=2)
        probed = probe(asset.path)
        assert probed.sample_rate == 44100
        assert probed.channels == 2
        assert probed.duration == pytest.approx(2.0, abs=1 / 44100)

    def test_mono_2205_matches_generator(self, tmp_path):
        asset = sine_fixture(tmp_path / "m.wav", seconds=1.5, sample_rate=22050, channels=1)
        probed = probe(asset.path)
        assert probed.sample_rate == 22050
        assert probed.channels == 1
        assert probed.duration == pytest.approx(1.5, abs=1 / 22050)

    def test_truncated_data_chunk(self, tmp_path):
        asset = sine_fixture(tmp_path / "t.wav")
        raw = asset.path.read_bytes()
        asset.path.write_bytes(raw[:-100])
        with pytest.raises(UnsupportedFormatError):
            probe(asset.path)

    def test_non_pcm_rejected(self, tmp_path):
        asset = sine_fixture(tmp_path / "f.wav")
        raw = bytearray(asset.path.read_bytes())
        # flip the audio-format field in the fmt chunk (offset 12+8 = 20)
        struct.pack_into("<H", raw, 20, 3)
        asset.path.write_bytes(bytes(raw))
        with pytest.raises(UnsupportedFormatError):
            probe(asset.path)

    def test_not_riff(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(b"OGGS" + b"\x00" * 64)
        with pytest.raises(UnsupportedFormatError):
            probe(p)


class TestFades:
    def test_zero_fades_identity(self, tmp_path):
        asset = sine_fixture(tmp_path / "in.wav")
        out = apply_fades(asset, 0, 0, tmp_path / "out.wav")
        assert out.path.read_bytes() == asset.path.read_bytes()

    def test_full_file_fade_in_ramp_endpoints(self, tmp_path):
        sr = 8000
        n = sr  # 1 second
        full = np.full(n, 32767, dtype=np.int16)
        asset = write_pcm(tmp_path / "c.wav", full, sr)
        out = apply_fades(asset, 1000, 0, tmp_path / "o.wav")
        frames, _ = read_pcm(out.path)
        assert frames[0, 0] == 0
        assert frames[-1, 0] == 32767
        mid = frames[n // 2, 0]
        assert abs(int(mid) - 16384) <= 1

    def test_sine_rms_ordering_against_oracle(self, tmp_path):
        sr = 44100
        asset = sine_fixture(tmp_path / "s.wav", freq=1000, seconds=2.0, sample_rate=sr)
        out = apply_fades(asset, 500, 500, tmp_path / "o.wav")
        frames, _ = read_pcm(out.path)
        samples = [int(v) for v in frames[:, 0]]
        half_sec = sr // 2
        first = windowed_rms_oracle(samples, 0, half_sec)
        middle = windowed_rms_oracle(samples, (len(samples) - half_sec) // 2, half_sec)
        assert first < middle

    def test_frame_count_and_shape_preserved(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=1.0, sample_rate=22050, channels=2)
        out = apply_fades(asset, 100, 250, tmp_path / "o.wav")
        in_frames, in_sr = read_pcm(asset.path)
        out_frames, out_sr = read_pcm(out.path)
        assert out_frames.shape == in_frames.shape
        assert out_sr == in_sr

    def test_untouched_region_bit_identical(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=1.0, sample_rate=8000)
        out = apply_fades(asset, 100, 100, tmp_path / "o.wav")
        in_frames, _ = read_pcm(asset.path)
        out_frames, _ = read_pcm(out.path)
        n_in = int(round(0.1 * 8000))
        assert np.array_equal(in_frames[n_in:-n_in], out_frames[n_in:-n_in])

    def test_envelope_monotone(self, tmp_path):
        sr = 8000
        full = np.full(sr, 30000, dtype=np.int16)
        asset = write_pcm(tmp_path / "c.wav", full, sr)
        out = apply_fades(asset, 400, 400, tmp_path / "o.wav")
        frames, _ = read_pcm(out.path)
        n_w = int(round(0.4 * sr))
        head = frames[:n_w, 0].astype(int)
        tail = frames[-n_w:, 0].astype(int)
        assert np.all(np.diff(head) >= 0)
        assert np.all(np.diff(tail) <= 0)

    def test_fades_exceeding_duration(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=0.5, sample_rate=8000)
        with pytest.raises(FadeTooLongError):
            apply_fades(asset, 400, 200, tmp_path / "o.wav")


class TestTrim:
    def test_identity(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=1.0, sample_rate=8000)
        out = trim(asset, 1.0, tmp_path / "o.wav")
        assert out.path.read_bytes() == asset.path.read_bytes()

    def test_frame_count(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=10.0, sample_rate=8000)
        out = trim(asset, 8.0, tmp_path / "o.wav")
        frames, _ = read_pcm(out.path)
        assert frames.shape[0] == 8 * 8000

    def test_round_trip_probe(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=3.0, sample_rate=22050)
        out = trim(asset, 1.7, tmp_path / "o.wav")
        assert probe(out.path).duration == pytest.approx(1.7, abs=1 / 22050)

    def test_trim_idempotent_composition(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=3.0, sample_rate=8000)
        once = trim(asset, 1.0, tmp_path / "a.wav")
        twice = trim(trim(asset, 2.0, tmp_path / "b.wav"), 1.0, tmp_path / "c.wav")
        assert once.path.read_bytes() == twice.path.read_bytes()

    def test_target_beyond_duration(self, tmp_path):
        asset = sine_fixture(tmp_path / "s.wav", seconds=1.0, sample_rate=8000)
        with pytest.raises(InsufficientAudioError):
            trim(asset, 2.0, tmp_path / "o.wav")

    def test_extra_chunks_survive_trim(self, tmp_path):
        sig = np.zeros(8000, dtype=np.int16)
        asset = write_pcm(
            tmp_path / "s.wav", sig, 8000, extra_chunks=[(b"mkFP", b'{"k":1}')]
        )
        out = trim(asset, 0.5, tmp_path / "o.wav")
        assert b"mkFP" in out.path.read_bytes()

    def test_extra_chunks_dropped_on_fade(self, tmp_path):
        sig = np.zeros(8000, dtype=np.int16)
        asset = write_pcm(
            tmp_path / "s.wav", sig, 8000, extra_chunks=[(b"mkFP", b'{"k":1}')]
        )
        out = apply_fades(asset, 10, 10, tmp_path / "o.wav")
        assert b"mkFP" not in out.path.read_bytes()
