"""Detection-electronics frequency response and Monte Carlo trace synthesis.

Traces are emitted in shot-noise-normalized units: a hypothetical all-pass
vacuum chain at the reference photocurrent has unit per-sample variance.
Absolute volts are never calibrated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gaussian import ChainModel, relative_quadrature_power

REFERENCE_PHOTOCURRENT_A = 3.0e-3


@dataclass(frozen=True)
class FrequencyResponse:
    """Magnitude response of detector + amplifier + oscilloscope.

    A Butterworth-style low-pass magnitude of the given order models the
    detector (|H(f3db)|² = 1/2 exactly); the oscilloscope contributes a
    hard cutoff. Only 3-dB points are specified by hardware datasheets,
    so the shape is a modeling choice and stays configurable.
    """

    detector_f3db: float = 43e9
    scope_cutoff: float = 63e9
    filter_order: int = 4

    def __post_init__(self):
        if self.detector_f3db <= 0 or self.scope_cutoff <= 0:
            raise ValueError("cutoff frequencies must be positive")
        if self.filter_order < 1:
            raise ValueError("filter order must be >= 1")

    def magnitude_squared(self, freqs: np.ndarray) -> np.ndarray:
        """|H(f)|² on the given frequency grid (Hz)."""
        f = np.asarray(freqs, dtype=float)
        h2 = 1.0 / (1.0 + (np.abs(f) / self.detector_f3db) ** (2 * self.filter_order))
        return np.where(np.abs(f) > self.scope_cutoff, 0.0, h2)


@dataclass(frozen=True)
class AcquisitionConfig:
    """Oscilloscope acquisition settings (defaults: 78.2 ns at 160 GS/s)."""

    record_duration: float = 78.2e-9
    samples_per_frame: int = 12512
    frames: int = 8192
    photocurrent: float = 3.0e-3
    clearance_at_43ghz_db: float | None = 20.0

    def __post_init__(self):
        if self.record_duration <= 0:
            raise ValueError("record duration must be positive")
        if self.samples_per_frame < 2:
            raise ValueError("samples_per_frame must be >= 2")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if self.photocurrent <= 0:
            raise ValueError("photocurrent must be positive")

    @property
    def sample_interval(self) -> float:
        return self.record_duration / self.samples_per_frame

    @property
    def sample_rate(self) -> float:
        return self.samples_per_frame / self.record_duration


@dataclass(frozen=True)
class TraceRecord:
    """One sampled homodyne output frame plus acquisition metadata."""

    samples: np.ndarray
    config: AcquisitionConfig
    theta: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1 or len(self.samples) != self.config.samples_per_frame:
            raise ValueError("trace length must equal samples_per_frame")


def electrical_floor(resp: FrequencyResponse, acq: AcquisitionConfig) -> float:
    """Flat one-sided electrical noise floor, set so the shot noise at the
    reference photocurrent clears it by clearance_at_43ghz_db at 43 GHz."""
    if acq.clearance_at_43ghz_db is None:
        return 0.0
    h2_43 = float(resp.magnitude_squared(np.array([43e9]))[0])
    shot_scale = 2.0 / acq.sample_rate  # unit-variance white spectrum
    return h2_43 * shot_scale * 10.0 ** (-acq.clearance_at_43ghz_db / 10.0)


def psd_model(chain: ChainModel, resp: FrequencyResponse, acq: AcquisitionConfig,
              theta: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Analytic one-sided PSD of the homodyne output on the FFT grid.

    S(f) = |H(f)|²·(I/I_ref)·V_rel(θ)·(2/fs) + S_el, with V_rel the chain's
    quadrature variance relative to the pump-off shot reference (flat in f
    for THz-wide sources) and S_el the electrical floor.

    Returns (freqs, power) with freqs the rfft grid of one frame.
    """
    freqs = np.fft.rfftfreq(acq.samples_per_frame, acq.sample_interval)
    v_rel = relative_quadrature_power(chain, theta)
    shot = (acq.photocurrent / REFERENCE_PHOTOCURRENT_A) * (2.0 / acq.sample_rate)
    power = resp.magnitude_squared(freqs) * shot * v_rel + electrical_floor(resp, acq)
    return freqs, power


def model_variance(chain: ChainModel, resp: FrequencyResponse, acq: AcquisitionConfig,
                   theta: float | None = None) -> float:
    """Expected per-sample variance of a synthesized frame, ∫S(f)df."""
    freqs, power = psd_model(chain, resp, acq, theta)
    return float(np.trapezoid(power, freqs))


def frame_seed(master_seed: int, frame_index: int) -> int:
    """Derive the independent 64-bit stream seed for one frame."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(frame_index,))
    return int(ss.generate_state(2, np.uint64)[0])


def synthesize_frame(chain: ChainModel, resp: FrequencyResponse, acq: AcquisitionConfig,
                     theta: float | None = None, seed: int = 0) -> TraceRecord:
    """One reproducible homodyne frame with the analytic target spectrum."""
    th = chain.lo_phase if theta is None else theta
    rng = np.random.default_rng(seed)
    n = acq.samples_per_frame
    fs = acq.sample_rate
    # Synthesize at 2x length, keep the second half.
    n2 = 2 * n
    freqs2 = np.fft.rfftfreq(n2, 1.0 / fs)
    v_rel = relative_quadrature_power(chain, th)
    shot = (acq.photocurrent / REFERENCE_PHOTOCURRENT_A) * (2.0 / fs)
    s2 = resp.magnitude_squared(freqs2) * shot * v_rel + electrical_floor(resp, acq)

    nbins = len(freqs2)
    sigma = np.sqrt(s2 * fs * n2 / 2.0)
    spec = np.empty(nbins, dtype=np.complex128)
    re = rng.standard_normal(nbins)
    im = rng.standard_normal(nbins)
    spec[1:-1] = (sigma[1:-1] / math.sqrt(2.0)) * (re[1:-1] + 1j * im[1:-1])
    # DC and Nyquist are their own mirror images: real, half one-sided weight
    spec[0] = sigma[0] * re[0]
    spec[-1] = sigma[-1] * re[-1]
    samples = np.fft.irfft(spec, n=n2)[n:]
    return TraceRecord(samples=samples, config=acq, theta=th, seed=seed)


def synthesize_frames(chain: ChainModel, resp: FrequencyResponse, acq: AcquisitionConfig,
                      theta: float | None = None, master_seed: int = 0,
                      n_frames: int | None = None, threads: int = 1,
                      first_frame: int = 0) -> list[TraceRecord]:
    """Synthesize an ensemble of frames with per-frame independent RNG streams.

    first_frame offsets the frame indices so large ensembles can be produced
    in chunks while reproducing the exact same streams.
    """
    count = acq.frames if n_frames is None else n_frames
    seeds = [frame_seed(master_seed, first_frame + i) for i in range(count)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(
                lambda s: synthesize_frame(chain, resp, acq, theta, s), seeds))
    return [synthesize_frame(chain, resp, acq, theta, s) for s in seeds]


def extract_wavepacket(trace: TraceRecord, mode_fn: np.ndarray, center_time: float) -> float:
    """Quadrature sample of the wavepacket defined by a temporal mode window.

    mode_fn must be L²-normalized on the sample grid (Σ f²·Δt = 1); the
    returned value is scaled so a full-band vacuum ensemble has variance 1/2.
    """
    mode = np.asarray(mode_fn, dtype=float)
    dt = trace.config.sample_interval
    if abs(float(np.sum(mode ** 2)) * dt - 1.0) > 1e-6:
        raise ValueError("mode function must be L2-normalized on the sample grid")
    start = int(round(center_time / dt))
    if start < 0 or start + len(mode) > len(trace.samples):
        raise IndexError("mode window overruns the trace")
    segment = trace.samples[start:start + len(mode)]
    return float(np.sum(mode * segment) * dt * math.sqrt(trace.config.sample_rate / 2.0))
