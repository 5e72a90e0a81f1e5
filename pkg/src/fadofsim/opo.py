"""Sub-threshold OPO output: longitudinal mode comb and emission spectrum.

The cavity emits photon pairs into a comb of longitudinal modes spaced by
the free spectral range, symmetric about the degenerate mode, under a
sinc^2 phase-matching envelope.  Each mode is a Lorentzian of width set
by the total cavity decay rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lines import AtomicLineTable
from .spectrum import Spectrum
from .vapor import DEFAULT_OPERATING_OFFSET_HZ

# argument where sinc^2(x) = 1/2, i.e. sin(x)/x = 1/sqrt(2)
_SINC_SQ_HALF = 1.3915573810029747


def _default_degenerate_hz() -> float:
    return AtomicLineTable.rubidium_d1().reference_frequency_hz + DEFAULT_OPERATING_OFFSET_HZ


@dataclass
class OpoConfig:
    """Cavity and pump parameters of the pair source.

    ``gamma1`` and ``gamma2`` are angular decay rates (rad/s); only their
    sum enters the observables here.  ``pair_rate_hz`` is the detected
    pair rate (all detection efficiencies already folded in).
    """

    gamma1: float = 2.0 * np.pi * 6.3e6
    gamma2: float = 2.0 * np.pi * 2.1e6
    roundtrip_s: float = 1.99e-9
    fsr_hz: float = 501e6
    envelope_fwhm_hz: float = 150e9
    degenerate_frequency_hz: float = field(default_factory=_default_degenerate_hz)
    pair_rate_hz: float = 1e4

    def __post_init__(self):
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("decay rates must be positive")
        if self.roundtrip_s <= 0 or self.fsr_hz <= 0:
            raise ValueError("round-trip time and FSR must be positive")
        if self.pair_rate_hz < 0:
            raise ValueError("pair rate cannot be negative")
        product = self.fsr_hz * self.roundtrip_s
        if abs(product - 1.0) > 0.01:
            raise ValueError(
                f"FSR x round-trip = {product:.4f}; inconsistent beyond 1%"
            )
        if self.mode_fwhm_hz >= self.fsr_hz:
            raise ValueError("mode width must be far below the mode spacing")

    @property
    def gamma_sum(self) -> float:
        return self.gamma1 + self.gamma2

    @property
    def mode_fwhm_hz(self) -> float:
        return self.gamma_sum / (2.0 * np.pi)


@dataclass
class ModeComb:
    indices: np.ndarray
    frequencies_hz: np.ndarray
    weights: np.ndarray

    @property
    def n_max(self) -> int:
        return int(self.indices.max())

    def __post_init__(self):
        w0 = self.weights[self.indices == 0]
        if w0.size != 1 or w0[0] != 1.0:
            raise ValueError("degenerate-mode weight must be 1")


def mode_comb(
    cfg: OpoConfig,
    weight_cutoff: float = 1e-3,
    max_modes: int | None = None,
) -> ModeComb:
    """Retained cavity modes under the phase-matching envelope.

    The envelope is sinc^2 with the configured FWHM, normalized to 1 at
    the degenerate mode.  Modes are retained symmetrically out to the
    first index whose weight drops below ``weight_cutoff`` (sidelobe
    revivals beyond that point are not re-admitted).  ``max_modes`` caps
    the index; it is mandatory for an infinite envelope.
    """
    if not 0 < weight_cutoff < 1:
        raise ValueError("weight cutoff must lie in (0, 1)")
    if np.isinf(cfg.envelope_fwhm_hz):
        if max_modes is None:
            raise ValueError("an infinite envelope requires an explicit mode cap")
        n_max = int(max_modes)
    else:
        beta = 2.0 * _SINC_SQ_HALF * cfg.fsr_hz / cfg.envelope_fwhm_hz
        n = 1
        while _sinc_sq(beta * n) >= weight_cutoff:
            n += 1
            if max_modes is not None and n > max_modes:
                break
        n_max = n - 1
        if max_modes is not None:
            n_max = min(n_max, int(max_modes))
    idx = np.arange(-n_max, n_max + 1)
    if np.isinf(cfg.envelope_fwhm_hz):
        weights = np.ones(idx.shape)
    else:
        weights = _sinc_sq(2.0 * _SINC_SQ_HALF * cfg.fsr_hz / cfg.envelope_fwhm_hz * idx)
    return ModeComb(
        indices=idx,
        frequencies_hz=cfg.degenerate_frequency_hz + idx * cfg.fsr_hz,
        weights=weights,
    )


def _sinc_sq(x):
    return np.sinc(np.asarray(x) / np.pi) ** 2


def output_spectrum(comb: ModeComb, cfg: OpoConfig, freq_hz) -> Spectrum:
    """Emission power spectral density: weighted unit-area mode Lorentzians.

    Modes outside the grid are skipped (their density there is
    negligible); the result flags under-resolution when the grid step
    exceeds a quarter linewidth.
    """
    freq = np.asarray(freq_hz, dtype=float)
    step = freq[1] - freq[0]
    hwhm = 0.5 * cfg.mode_fwhm_hz
    psd = np.zeros(freq.shape)
    lo, hi = freq[0], freq[-1]
    for f0, w in zip(comb.frequencies_hz, comb.weights):
        if f0 < lo or f0 > hi:
            continue
        psd += w * (hwhm / np.pi) / ((freq - f0) ** 2 + hwhm**2)
    return Spectrum(
        frequency_hz=freq,
        value=psd,
        kind="psd",
        meta={
            "model": "opo_output",
            "under_resolved": bool(step > cfg.mode_fwhm_hz / 4.0),
        },
    )
