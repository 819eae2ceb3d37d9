"""Measurement-side pipeline: averaged spectra, squeezing levels, histograms,
pump-power curve fitting, and the post-amplifier loss sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fitting import FitConvergenceError, levenberg_marquardt
from .gaussian import ChainModel, ChannelSpec, relative_quadrature_power
from .signal_chain import (AcquisitionConfig, FrequencyResponse, TraceRecord,
                           synthesize_frames)

# Oscilloscope artifact region excluded from plateau statistics by default.
DEFAULT_MASK_CENTER_HZ = 34e9
DEFAULT_MASK_WIDTH_HZ = 1e9


@dataclass(frozen=True)
class SpectrumEstimate:
    """Frame-averaged one-sided PSD, optionally carrying its shot reference."""

    freqs: np.ndarray
    power: np.ndarray
    frames_averaged: int
    reference: "SpectrumEstimate | None" = None

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=float))
        object.__setattr__(self, "power", np.asarray(self.power, dtype=float))
        if self.freqs.shape != self.power.shape:
            raise ValueError("freqs and power must have the same shape")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("frequency grid must be strictly increasing")

    def power_db(self) -> np.ndarray:
        return 10.0 * np.log10(self.power)


def averaged_fft(frames: list[TraceRecord], window: str = "rectangular") -> SpectrumEstimate:
    """Power-averaged per-frame periodogram (one-sided, PSD units)."""
    if not frames:
        raise ValueError("need at least one frame")
    n = len(frames[0].samples)
    if any(len(fr.samples) != n for fr in frames):
        raise ValueError("all frames must have equal length")
    fs = frames[0].config.sample_rate
    if window == "rectangular":
        win = np.ones(n)
    elif window == "hann":
        win = np.hanning(n)
    else:
        raise ValueError(f"unknown window {window!r}")
    scale = 1.0 / (fs * np.sum(win ** 2))
    # chunked so full-scale (8192-frame) ensembles stay within memory
    power_sum = np.zeros(n // 2 + 1)
    chunk = 256
    for i in range(0, len(frames), chunk):
        data = np.stack([fr.samples for fr in frames[i:i + chunk]])
        spec = np.fft.rfft(data * win, axis=1)
        power_sum += (np.abs(spec) ** 2).sum(axis=0)
    power = power_sum * (scale / len(frames))
    power[1:-1] *= 2.0  # fold negative frequencies, one-sided convention
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    return SpectrumEstimate(freqs=freqs, power=power, frames_averaged=len(frames))


def relative_level(signal: SpectrumEstimate, shot: SpectrumEstimate) -> SpectrumEstimate:
    """Bin-wise signal/shot ratio with the reference attached."""
    if signal.freqs.shape != shot.freqs.shape or not np.allclose(signal.freqs, shot.freqs):
        raise ValueError("signal and shot spectra must share one frequency grid")
    return SpectrumEstimate(
        freqs=signal.freqs,
        power=signal.power / shot.power,
        frames_averaged=signal.frames_averaged,
        reference=shot,
    )


def artifact_mask(freqs: np.ndarray, center_hz: float = DEFAULT_MASK_CENTER_HZ,
                  width_hz: float = DEFAULT_MASK_WIDTH_HZ) -> np.ndarray:
    """Boolean mask, False inside the excluded artifact window."""
    f = np.asarray(freqs)
    return np.abs(f - center_hz) > width_hz / 2.0


def variance_level(frames: list[TraceRecord], shot_frames: list[TraceRecord]) -> tuple[float, float]:
    """Time-domain noise level of signal vs shot ensembles.

    Returns (level_db, err_db); the error is the standard error across
    frames propagated through the log ratio.
    """
    if len(frames) < 2 or len(shot_frames) < 2:
        raise ValueError("need at least two frames per ensemble")
    v_sig = np.array([np.var(fr.samples) for fr in frames])
    v_shot = np.array([np.var(fr.samples) for fr in shot_frames])
    m_sig, m_shot = v_sig.mean(), v_shot.mean()
    if m_sig <= 0 or m_shot <= 0:
        raise FloatingPointError("degenerate (zero-variance) ensemble")
    se_sig = v_sig.std(ddof=1) / math.sqrt(len(v_sig))
    se_shot = v_shot.std(ddof=1) / math.sqrt(len(v_shot))
    level_db = 10.0 * math.log10(m_sig / m_shot)
    err_db = (10.0 / math.log(10.0)) * math.hypot(se_sig / m_sig, se_shot / m_shot)
    return level_db, err_db


def histogram(frames: list[TraceRecord], bins: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Pooled sample histogram across an ensemble of frames."""
    if bins < 2:
        raise ValueError("need at least two bins")
    data = np.concatenate([fr.samples for fr in frames])
    counts, edges = np.histogram(data, bins=bins)
    return edges, counts


@dataclass(frozen=True)
class SqueezeFitResult:
    """Pump-curve fit output: loss fraction, gain coefficient, diagnostics."""

    big_l: float
    a_coeff: float
    covariance: np.ndarray
    residuals_squeeze: np.ndarray
    residuals_antisqueeze: np.ndarray
    cost: float
    n_iter: int


def _pump_model_and_jacobian(pump_w: np.ndarray, sign: np.ndarray, big_l: float,
                             a_coeff: float) -> tuple[np.ndarray, np.ndarray]:
    root = np.sqrt(np.maximum(a_coeff * pump_w, 0.0))
    e = np.exp(sign * 2.0 * root)
    model = big_l + (1.0 - big_l) * e
    d_l = 1.0 - e
    with np.errstate(divide="ignore", invalid="ignore"):
        d_a = (1.0 - big_l) * e * sign * np.where(pump_w > 0, np.sqrt(pump_w / a_coeff), 0.0)
    return model, np.column_stack([d_l, d_a])


def fit_pump_curve(points: list[tuple[float, float, int]],
                   max_iter: int = 200) -> SqueezeFitResult:
    """Weighted nonlinear least squares of R±(P) = L + (1−L)exp(±2√(aP)).

    points are (pump_w, level_rel, branch) with branch +1 for anti-squeezing
    and −1 for squeezing. Residuals are weighted by 1/level, i.e. constant
    variance on the dB scale. Deterministic multi-start initialization.
    """
    if len(points) < 3:
        raise ValueError("need at least three points")
    pump = np.array([p[0] for p in points], dtype=float)
    level = np.array([p[1] for p in points], dtype=float)
    sign = np.array([p[2] for p in points], dtype=float)
    if np.any(level <= 0):
        raise ValueError("levels must be positive (linear relative power)")
    if not np.all(np.isin(sign, (-1.0, 1.0))):
        raise ValueError("branch must be +1 or -1")
    if len(np.unique(pump)) < 2:
        raise ValueError("points must span at least two pump powers")
    weights = 1.0 / level

    def residual(p):
        model, _ = _pump_model_and_jacobian(pump, sign, p[0], p[1])
        return (model - level) * weights

    def jacobian(p):
        _, jac = _pump_model_and_jacobian(pump, sign, p[0], p[1])
        return jac * weights[:, None]

    bounds = (np.array([0.0, 1e-12]), np.array([1.0 - 1e-9, np.inf]))
    best = None
    last_error: FitConvergenceError | None = None
    for l0 in (0.05, 0.3, 0.6):
        for a0 in _initial_gain_coefficients(pump, level, sign, l0):
            try:
                p, cost, cov, n_iter = levenberg_marquardt(
                    residual, jacobian, np.array([l0, a0]), bounds, max_iter)
            except FitConvergenceError as err:
                last_error = err
                continue
            if best is None or cost < best[1]:
                best = (p, cost, cov, n_iter)
    if best is None:
        assert last_error is not None
        raise last_error
    p, cost, cov, n_iter = best
    model, _ = _pump_model_and_jacobian(pump, sign, p[0], p[1])
    resid = model - level
    return SqueezeFitResult(
        big_l=float(p[0]),
        a_coeff=float(p[1]),
        covariance=cov,
        residuals_squeeze=resid[sign < 0],
        residuals_antisqueeze=resid[sign > 0],
        cost=cost,
        n_iter=n_iter,
    )


def _initial_gain_coefficients(pump, level, sign, l0) -> list[float]:
    """Gain-coefficient starting values from a log-linearization of whichever
    branch is available at the highest nonzero pump power."""
    guesses = []
    for branch in (1.0, -1.0):
        mask = (sign == branch) & (pump > 0)
        if not np.any(mask):
            continue
        i = np.argmax(pump[mask])
        p_ref = pump[mask][i]
        y_ref = level[mask][i]
        inner = (y_ref - l0) / (1.0 - l0)
        if inner <= 0:
            continue
        root = abs(math.log(inner)) / 2.0
        if root > 0:
            guesses.append(root ** 2 / p_ref)
    if not guesses:
        guesses = [1.0]
    return guesses


@dataclass(frozen=True)
class LossSweepRow:
    gain_db: float
    added_loss: float
    squeezing_db_oracle: float
    squeezing_db_mc: float | None = None


def _modified_chain(chain: ChainModel, gain_db: float, added_loss: float) -> ChainModel:
    """Override the amplifier gain and fold added loss into the final loss stage."""
    stages = list(chain.stages)
    psa_idx = [i for i, s in enumerate(stages) if s.kind == "psa"]
    if len(psa_idx) != 1:
        raise ValueError("sweep chain must contain exactly one psa stage")
    loss_after = [i for i in range(psa_idx[0] + 1, len(stages)) if stages[i].kind == "loss"]
    if not loss_after:
        raise ValueError("sweep chain must contain a loss stage after the psa")
    i_psa, i_det = psa_idx[0], loss_after[-1]
    stages[i_psa] = ChannelSpec("psa", {**stages[i_psa].params, "gain_db": float(gain_db)})
    eta = stages[i_det].params["eta"] * (1.0 - added_loss)
    stages[i_det] = ChannelSpec("loss", {"eta": eta})
    return replace(chain, stages=tuple(stages))


def loss_sweep(chain_base: ChainModel, added_loss_grid: list[float],
               gains_db: tuple[float, ...] = (0.0, 35.0),
               monte_carlo: bool = False,
               resp: FrequencyResponse | None = None,
               acq: AcquisitionConfig | None = None,
               mc_frames: int = 256, master_seed: int = 0) -> list[LossSweepRow]:
    """Measured squeezing level vs loss added after the amplifier.

    The oracle route propagates the chain in closed form; the optional Monte
    Carlo route synthesizes traces and measures the level from frame variances.
    """
    if any(not 0.0 <= x < 1.0 for x in added_loss_grid):
        raise ValueError("added loss values must be in [0, 1)")
    rows = []
    for gain_db in gains_db:
        for added in added_loss_grid:
            chain = _modified_chain(chain_base, gain_db, added)
            oracle_db = 10.0 * math.log10(relative_quadrature_power(chain, 0.0))
            mc_db = None
            if monte_carlo:
                resp_ = resp or FrequencyResponse()
                acq_ = acq or AcquisitionConfig(frames=mc_frames)
                sig = synthesize_frames(chain, resp_, acq_, 0.0, master_seed, mc_frames)
                shot = synthesize_frames(chain.without_squeezing(), resp_, acq_, 0.0,
                                         master_seed + 1, mc_frames)
                mc_db, _ = variance_level(sig, shot)
            rows.append(LossSweepRow(gain_db, added, oracle_db, mc_db))
    return rows
