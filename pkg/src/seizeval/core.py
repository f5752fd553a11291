"""EEG data model: recordings, labels, montage referencing, windowing, sampling.

Conventions used throughout the package:
  - samples are float32 microvolts, shaped (channels, time)
  - the standard pipeline rate is 200 Hz
  - seizure labels follow the TUH-style type vocabulary; anything not
    covered by an event is implicit background
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Sequence

import numpy as np
from scipy import signal as sps

from .errors import (
    ChannelNotFoundError,
    EmptyStreamError,
    InvalidArgumentError,
    MissingClassError,
)

PIPELINE_RATE_HZ = 200


class Montage(str, Enum):
    UNIPOLAR = "unipolar"
    BIPOLAR = "bipolar"


class SeizureLabel(str, Enum):
    BCKG = "bckg"
    FNSZ = "fnsz"
    GNSZ = "gnsz"
    SPSZ = "spsz"
    CPSZ = "cpsz"
    ABSZ = "absz"
    TNSZ = "tnsz"
    TCSZ = "tcsz"
    SEIZ = "seiz"

    @property
    def is_seizure(self) -> bool:
        return self is not SeizureLabel.BCKG


class WindowClass(str, Enum):
    ICTAL = "ictal"
    NON_ICTAL = "nonictal"


class SignalTypeClass(str, Enum):
    NON_ICTAL_PATIENT = "nonictal_patient"
    NON_ICTAL_CONTROL = "nonictal_control"
    MIXED = "mixed_ictal_nonictal"
    ICTAL = "ictal"


@dataclass
class Recording:
    """Multi-channel sampled signal, channels x time, microvolts."""

    sample_rate_hz: int
    channel_names: list[str]
    samples: np.ndarray
    montage: Montage = Montage.UNIPOLAR

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0:
            raise InvalidArgumentError("sample_rate_hz must be positive")
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 2:
            raise InvalidArgumentError("samples must be 2-D (channels, time)")
        if self.samples.shape[0] != len(self.channel_names):
            raise InvalidArgumentError(
                f"{len(self.channel_names)} channel names for "
                f"{self.samples.shape[0]} sample rows"
            )

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


@dataclass(frozen=True)
class MontageSpec:
    """Ordered (anode, cathode) pairs defining a bipolar derivation."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if len(set(self.pairs)) != len(self.pairs):
            raise InvalidArgumentError("montage pairs must be unique")

    @property
    def channel_names(self) -> list[str]:
        return [f"{a}-{c}" for a, c in self.pairs]


# The 20-pair temporal-central parasagittal chain used for bipolar referencing.
DEFAULT_BIPOLAR_PAIRS: tuple[tuple[str, str], ...] = (
    ("FP1", "F7"), ("F7", "T3"), ("T3", "T5"), ("T5", "O1"),
    ("FP2", "F8"), ("F8", "T4"), ("T4", "T6"), ("T6", "O2"),
    ("T3", "C3"), ("C3", "CZ"), ("CZ", "C4"), ("C4", "T4"),
    ("FP1", "F3"), ("F3", "C3"), ("C3", "P3"), ("P3", "O1"),
    ("FP2", "F4"), ("F4", "C4"), ("C4", "P4"), ("P4", "O2"),
)

DEFAULT_UNIPOLAR_CHANNELS: tuple[str, ...] = (
    "FP1", "FP2", "F3", "F4", "C3", "C4", "P3", "P4", "O1", "O2",
    "F7", "F8", "T3", "T4", "T5", "T6", "FZ", "CZ", "PZ", "A1", "A2", "EKG",
)


@dataclass(frozen=True, order=True)
class Event:
    start_s: float
    stop_s: float
    label: SeizureLabel = SeizureLabel.SEIZ

    def __post_init__(self) -> None:
        if self.start_s < 0 or self.stop_s <= self.start_s:
            raise InvalidArgumentError(
                f"bad event interval [{self.start_s}, {self.stop_s})"
            )

    @property
    def duration_s(self) -> float:
        return self.stop_s - self.start_s

    def overlap_s(self, start_s: float, stop_s: float) -> float:
        return max(0.0, min(self.stop_s, stop_s) - max(self.start_s, start_s))


@dataclass
class LabelTrack:
    """Sorted non-overlapping events; gaps are implicit background."""

    events: list[Event]
    total_duration_s: float

    def __post_init__(self) -> None:
        self.events = sorted(self.events)
        prev_stop = 0.0
        for ev in self.events:
            if ev.start_s < prev_stop:
                raise InvalidArgumentError("events overlap or are unsorted")
            prev_stop = ev.stop_s
        if self.events and self.events[-1].stop_s > self.total_duration_s + 1e-9:
            raise InvalidArgumentError("event extends past total duration")

    @property
    def seizure_events(self) -> list[Event]:
        return [ev for ev in self.events if ev.label.is_seizure]

    def background_intervals(self) -> list[tuple[float, float]]:
        """Maximal positive-length intervals not covered by a seizure event."""
        out = []
        cursor = 0.0
        for ev in self.seizure_events:
            if ev.start_s > cursor:
                out.append((cursor, ev.start_s))
            cursor = max(cursor, ev.stop_s)
        if cursor < self.total_duration_s:
            out.append((cursor, self.total_duration_s))
        return out


@dataclass(frozen=True)
class WindowSpec:
    window_s: float = 4.0
    shift_s: float = 1.0

    def __post_init__(self) -> None:
        if not (self.window_s >= self.shift_s > 0):
            raise InvalidArgumentError("require window_s >= shift_s > 0")

    def window_samples(self, fs: int) -> int:
        return _as_samples(self.window_s, fs, "window_s")

    def shift_samples(self, fs: int) -> int:
        return _as_samples(self.shift_s, fs, "shift_s")


def _as_samples(seconds: float, fs: int, what: str) -> int:
    n = seconds * fs
    if abs(n - round(n)) > 1e-6:
        raise InvalidArgumentError(f"{what}={seconds} is not a whole number of samples at {fs} Hz")
    return int(round(n))


@dataclass(frozen=True)
class Window:
    index: int
    start_s: float
    samples: np.ndarray  # (channels, window_samples), a view into the recording


# ---------------------------------------------------------------------------
# signal operations


def resample(rec: Recording, target_hz: int) -> Recording:
    """Polyphase windowed-sinc resampling (Kaiser beta=8, 64 taps/phase)."""
    if target_hz <= 0:
        raise InvalidArgumentError("target_hz must be positive")
    if target_hz == rec.sample_rate_hz:
        return replace(rec, samples=rec.samples.copy())
    g = math.gcd(target_hz, rec.sample_rate_hz)
    up, down = target_hz // g, rec.sample_rate_hz // g
    half = 32 * max(up, down)
    h = sps.firwin(2 * half + 1, 1.0 / max(up, down), window=("kaiser", 8.0))
    # line padding keeps edges sane for DC and slow trends
    out = sps.resample_poly(
        rec.samples.astype(np.float64), up, down, axis=1, window=h, padtype="line"
    )
    n_out = int(round(rec.n_samples * target_hz / rec.sample_rate_hz))
    out = out[:, :n_out]
    return Recording(
        sample_rate_hz=target_hz,
        channel_names=list(rec.channel_names),
        samples=out.astype(np.float32),
        montage=rec.montage,
    )


def to_bipolar(rec: Recording, spec: MontageSpec | None = None) -> Recording:
    """Derive a bipolar recording by samplewise anode minus cathode."""
    if rec.montage is not Montage.UNIPOLAR:
        raise InvalidArgumentError("to_bipolar expects a unipolar recording")
    if spec is None:
        spec = MontageSpec(DEFAULT_BIPOLAR_PAIRS)
    index = {name: i for i, name in enumerate(rec.channel_names)}
    rows = []
    for anode, cathode in spec.pairs:
        for name in (anode, cathode):
            if name not in index:
                raise ChannelNotFoundError(name)
        rows.append(rec.samples[index[anode]] - rec.samples[index[cathode]])
    return Recording(
        sample_rate_hz=rec.sample_rate_hz,
        channel_names=spec.channel_names,
        samples=np.stack(rows),
        montage=Montage.BIPOLAR,
    )


def n_windows(duration_s: float, spec: WindowSpec, fs: int) -> int:
    total = int(round(duration_s * fs))
    win = spec.window_samples(fs)
    if total < win:
        return 0
    return (total - win) // spec.shift_samples(fs) + 1


def slice_windows(rec: Recording, spec: WindowSpec) -> Iterator[Window]:
    """Yield sliding windows; window k starts at k * shift_s."""
    win = spec.window_samples(rec.sample_rate_hz)
    shift = spec.shift_samples(rec.sample_rate_hz)
    if rec.n_samples < win:
        raise EmptyStreamError(
            f"recording of {rec.duration_s:.3f} s is shorter than one "
            f"{spec.window_s} s window"
        )
    count = (rec.n_samples - win) // shift + 1
    for k in range(count):
        start = k * shift
        yield Window(
            index=k,
            start_s=start / rec.sample_rate_hz,
            samples=rec.samples[:, start : start + win],
        )


def window_label(
    labels: LabelTrack, window_start_s: float, spec: WindowSpec
) -> WindowClass:
    """Ictal iff seizure time inside the window strictly exceeds the shift."""
    stop = window_start_s + spec.window_s
    overlap = sum(ev.overlap_s(window_start_s, stop) for ev in labels.seizure_events)
    return WindowClass.ICTAL if overlap > spec.shift_s else WindowClass.NON_ICTAL


def window_labels(rec: Recording, labels: LabelTrack, spec: WindowSpec) -> np.ndarray:
    """Binary label per sliding window (1 = ictal), aligned with slice_windows."""
    return np.array(
        [
            window_label(labels, w.start_s, spec) is WindowClass.ICTAL
            for w in slice_windows(rec, spec)
        ],
        dtype=bool,
    )


def classify_segment(
    labels: LabelTrack,
    start_s: float,
    stop_s: float,
    is_control: bool = False,
) -> SignalTypeClass:
    """Classify a fixed segment by how it overlaps seizure events."""
    contained = any(
        ev.start_s <= start_s and stop_s <= ev.stop_s for ev in labels.seizure_events
    )
    if contained:
        return SignalTypeClass.ICTAL
    touched = any(ev.overlap_s(start_s, stop_s) > 0 for ev in labels.seizure_events)
    if touched:
        return SignalTypeClass.MIXED
    return (
        SignalTypeClass.NON_ICTAL_CONTROL
        if is_control
        else SignalTypeClass.NON_ICTAL_PATIENT
    )


def balanced_batches(
    segments: Sequence[tuple[object, SignalTypeClass]],
    batch_size: int,
    rng_seed: int,
    n_batches: int | None = None,
) -> list[list[object]]:
    """Batches with equal per-class counts, resampling exhausted classes.

    Each class pool is shuffled once; when a pool runs dry further draws are
    with replacement. The default batch count covers the largest class.
    """
    if batch_size % 4 != 0 or batch_size <= 0:
        raise InvalidArgumentError("batch_size must be a positive multiple of 4")
    per_class = batch_size // 4
    pools: dict[SignalTypeClass, list[object]] = {c: [] for c in SignalTypeClass}
    for item, cls in segments:
        pools[cls].append(item)
    for cls, pool in pools.items():
        if not pool:
            raise MissingClassError(cls.value)
    if n_batches is None:
        n_batches = math.ceil(max(len(p) for p in pools.values()) / per_class)
    rng = np.random.default_rng(rng_seed)
    queues = {}
    for cls, pool in pools.items():
        order = rng.permutation(len(pool))
        queues[cls] = [pool[i] for i in order]
    batches = []
    for _ in range(n_batches):
        batch = []
        for cls in SignalTypeClass:
            for _ in range(per_class):
                if queues[cls]:
                    batch.append(queues[cls].pop())
                else:
                    pool = pools[cls]
                    batch.append(pool[int(rng.integers(len(pool)))])
        order = rng.permutation(len(batch))
        batches.append([batch[i] for i in order])
    return batches


# ---------------------------------------------------------------------------
# synthetic data


@dataclass
class SynthConfig:
    """Desk-scale synthetic EEG: pink-noise background plus spike-wave ictal bursts."""

    duration_s: float = 60.0
    n_channels: int = 20
    sample_rate_hz: int = PIPELINE_RATE_HZ
    background_amplitude_uv: float = 20.0
    ictal_amplitude_uv: float = 100.0
    ictal_base_freq_hz: float = 3.0
    events: list[tuple[float, float]] | None = None
    n_random_events: int = 0
    min_event_s: float = 5.0
    max_event_s: float = 15.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.background_amplitude_uv <= 0:
            raise InvalidArgumentError("background_amplitude_uv must be > 0")
        if self.ictal_amplitude_uv < 0:
            raise InvalidArgumentError("ictal_amplitude_uv must be >= 0")
        if self.duration_s <= 0 or self.n_channels <= 0:
            raise InvalidArgumentError("duration and channel count must be positive")


def _pink_noise(rng: np.random.Generator, n_channels: int, n: int) -> np.ndarray:
    """Unit-RMS 1/f-shaped noise per channel."""
    white = rng.standard_normal((n_channels, n))
    spec = np.fft.rfft(white, axis=1)
    freqs = np.fft.rfftfreq(n)
    scale = np.ones_like(freqs)
    nz = freqs > 0
    scale[nz] = 1.0 / np.sqrt(freqs[nz] / freqs[nz][0])
    shaped = np.fft.irfft(spec * scale, n=n, axis=1)
    rms = np.sqrt(np.mean(shaped**2, axis=1, keepdims=True))
    return shaped / rms


def synth_recording(cfg: SynthConfig) -> tuple[Recording, LabelTrack]:
    """Generate a seeded synthetic recording and its exactly matching labels."""
    rng = np.random.default_rng(cfg.seed)
    fs = cfg.sample_rate_hz
    n = int(round(cfg.duration_s * fs))
    samples = cfg.background_amplitude_uv * _pink_noise(rng, cfg.n_channels, n)

    if cfg.events is not None:
        intervals = [(float(a), float(b)) for a, b in cfg.events]
    else:
        intervals = _place_random_events(rng, cfg)
    for start, stop in intervals:
        if not (0 <= start < stop <= cfg.duration_s):
            raise InvalidArgumentError(
                f"event [{start}, {stop}) outside recording of {cfg.duration_s} s"
            )

    t = np.arange(n) / fs
    for start, stop in intervals:
        i0, i1 = int(round(start * fs)), int(round(stop * fs))
        seg_t = t[i0:i1]
        burst = np.zeros((cfg.n_channels, i1 - i0))
        for harmonic, weight in ((1, 1.0), (2, 0.5), (3, 0.25)):
            phase = rng.uniform(0, 2 * np.pi, size=(cfg.n_channels, 1))
            f = cfg.ictal_base_freq_hz * harmonic
            burst += weight * np.sin(2 * np.pi * f * seg_t[None, :] + phase)
        rms = np.sqrt(np.mean(burst**2)) or 1.0
        samples[:, i0:i1] += cfg.ictal_amplitude_uv * burst / rms

    rec = Recording(
        sample_rate_hz=fs,
        channel_names=[f"CH{i:02d}" for i in range(cfg.n_channels)],
        samples=samples.astype(np.float32),
        montage=Montage.BIPOLAR if cfg.n_channels == 20 else Montage.UNIPOLAR,
    )
    events = [Event(a, b, SeizureLabel.SEIZ) for a, b in intervals]
    return rec, LabelTrack(events=events, total_duration_s=cfg.duration_s)


def _place_random_events(
    rng: np.random.Generator, cfg: SynthConfig
) -> list[tuple[float, float]]:
    intervals: list[tuple[float, float]] = []
    attempts = 0
    while len(intervals) < cfg.n_random_events and attempts < 1000:
        attempts += 1
        length = float(rng.uniform(cfg.min_event_s, cfg.max_event_s))
        if length >= cfg.duration_s:
            continue
        start = float(rng.uniform(0, cfg.duration_s - length))
        start, length = round(start, 3), round(length, 3)
        cand = (start, start + length)
        # keep a 2 s guard band between events
        if all(cand[1] + 2.0 <= a or b + 2.0 <= cand[0] for a, b in intervals):
            intervals.append(cand)
    return sorted(intervals)
