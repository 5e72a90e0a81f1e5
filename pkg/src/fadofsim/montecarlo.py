"""Monte Carlo timestamp generation for the coincidence experiment.

Pairs arrive as a Poisson process; the signal-idler separation is drawn
from the filtered (two-sided exponential) or unfiltered (round-trip
delta comb) correlation law.  Independent background singles top each
channel up to its measured total rate, so the accidental floor of the
analytic histogram model is reproduced exactly.  Everything is
deterministic under the seed; the generator is numpy's PCG64 and its
name is recorded in the stream metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlations import DetectorConfig, Histogram, g2_multi_comb
from .opo import OpoConfig

RNG_ALGORITHM = "PCG64"
TIMESTAMP_UNIT_S = 1e-12


@dataclass
class EventStream:
    """Sorted detection timestamps (seconds) of the two channels."""

    channel1_s: np.ndarray
    channel2_s: np.ndarray
    duration_s: float
    seed: int
    meta: dict = field(default_factory=dict)


def generate_pair_events(
    opo: OpoConfig,
    det: DetectorConfig,
    mode: str,
    duration_s: float,
    seed: int,
    n_modes: int | None = None,
    pair_survival: float = 1.0,
) -> EventStream:
    """Simulate one acquisition.

    ``mode`` selects the pair-separation law: "single" draws from the
    two-sided exponential, "comb" draws a round-trip index from the
    tooth-weight law and sets the separation to exactly n*tau.
    ``pair_survival`` thins pairs as a whole (both photons), modeling a
    resonant blocking cell; background singles are unaffected.  The
    channel-2 electronic offset is added to idler timestamps.  Events
    pushed outside the acquisition window are dropped.
    """
    if not 0.0 <= pair_survival <= 1.0:
        raise ValueError("pair survival must lie in [0, 1]")
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    bg1 = det.r1_hz - opo.pair_rate_hz
    bg2 = det.r2_hz - opo.pair_rate_hz
    if bg1 < 0 or bg2 < 0:
        raise ValueError("singles rates cannot be below the detected pair rate")
    rng = np.random.default_rng(seed)

    n_pairs = rng.poisson(opo.pair_rate_hz * duration_s * pair_survival)
    t_signal = rng.uniform(0.0, duration_s, n_pairs)
    if mode == "single":
        magnitude = rng.exponential(1.0 / opo.gamma_sum, n_pairs)
        sign = rng.integers(0, 2, n_pairs) * 2 - 1
        separation = magnitude * sign
    elif mode == "comb":
        if n_modes is None:
            raise ValueError("comb mode requires the retained mode count")
        teeth = g2_multi_comb(opo, n_modes)
        p = teeth.weights / teeth.weights.sum()
        separation = rng.choice(teeth.delays_s, size=n_pairs, p=p)
    else:
        raise ValueError(f"unknown generation mode {mode!r}")
    t_idler = t_signal + separation + det.offset_s

    n_bg1 = rng.poisson(bg1 * duration_s)
    n_bg2 = rng.poisson(bg2 * duration_s)
    ch1 = np.concatenate([t_signal, rng.uniform(0.0, duration_s, n_bg1)])
    ch2 = np.concatenate([t_idler, rng.uniform(0.0, duration_s, n_bg2)])
    ch1 = np.sort(ch1[(ch1 >= 0.0) & (ch1 < duration_s)])
    ch2 = np.sort(ch2[(ch2 >= 0.0) & (ch2 < duration_s)])
    return EventStream(
        channel1_s=ch1,
        channel2_s=ch2,
        duration_s=duration_s,
        seed=int(seed),
        meta={
            "rng": RNG_ALGORITHM,
            "mode": mode,
            "pair_rate_hz": opo.pair_rate_hz,
            "r1_hz": det.r1_hz,
            "r2_hz": det.r2_hz,
            "offset_s": det.offset_s,
            "pair_survival": pair_survival,
            "n_pairs_generated": int(n_pairs),
        },
    )


def thin_stream(stream: EventStream, survival1: float, survival2: float, seed: int) -> EventStream:
    """Bernoulli-thin each channel photon by photon.

    Models an independent passive loss in front of each detector; a pair
    losing one photon leaves the survivor behind as a background single.
    """
    for s in (survival1, survival2):
        if not 0.0 <= s <= 1.0:
            raise ValueError("survival probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    ch1 = stream.channel1_s[rng.random(stream.channel1_s.size) < survival1]
    ch2 = stream.channel2_s[rng.random(stream.channel2_s.size) < survival2]
    meta = dict(stream.meta)
    meta["thinning"] = (survival1, survival2)
    return EventStream(ch1, ch2, stream.duration_s, stream.seed, meta)


def mc_histogram(stream: EventStream, det: DetectorConfig, n_side_bins: int = 64) -> Histogram:
    """Start multi-stop coincidence histogram of an event stream.

    Both channels are first digitized against the common internal clock
    (arrival assigned to bin floor(t/t_bin), half-open bins); each
    channel-2 event whose clock-index difference from a channel-1 event
    lies within the window is then counted at that difference.  Bins span
    the channel-offset bin +- n_side_bins, matching the analytic layout.
    """
    tb = det.bin_s
    k = det.offset_bin
    i1 = np.floor(stream.channel1_s / tb).astype(np.int64)
    i2 = np.floor(stream.channel2_s / tb).astype(np.int64)
    start = np.searchsorted(i2, i1 + (k - n_side_bins), side="left")
    end = np.searchsorted(i2, i1 + (k + n_side_bins), side="right")
    counts_per = end - start
    total = int(counts_per.sum())
    if total:
        base = np.repeat(start - np.concatenate(([0], np.cumsum(counts_per)[:-1])), counts_per)
        flat = np.arange(total) + base
        rel = i2[flat] - np.repeat(i1, counts_per) - (k - n_side_bins)
        binned = np.bincount(rel, minlength=2 * n_side_bins + 1)
    else:
        binned = np.zeros(2 * n_side_bins + 1, dtype=np.int64)
    floor = tb * det.r1_hz * det.r2_hz * stream.duration_s
    return Histogram(
        bin_index=np.arange(k - n_side_bins, k + n_side_bins + 1),
        counts=binned.astype(float),
        bin_s=tb,
        meta={
            "mode": "monte_carlo",
            "offset_s": det.offset_s,
            "accidental_floor_per_bin": floor,
            "seed": stream.seed,
            "acquisition_s": stream.duration_s,
        },
    )


def coincidences_in_window(hist: Histogram, window_s: float) -> float:
    """Counts within +-window of the peak bin (window 0: the peak bin only)."""
    if window_s < 0:
        raise ValueError("window cannot be negative")
    i_pk = int(np.argmax(hist.counts))
    center = hist.bin_index[i_pk]
    span = np.abs(hist.bin_index - center) * hist.bin_s
    return float(hist.counts[span <= window_s + 1e-15].sum())


def write_stream(stream: EventStream, directory, prefix: str = "timestamps", extra_meta=None) -> dict:
    """Write the binary timestamp files and their JSON sidecar.

    One file per channel of little-endian unsigned 64-bit integers in
    picoseconds, plus ``<prefix>_meta.json`` describing seed, rates, and
    configuration.  Returns the sidecar dictionary.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    counts = {}
    for ch, data in (("ch1", stream.channel1_s), ("ch2", stream.channel2_s)):
        ticks = np.round(data / TIMESTAMP_UNIT_S).astype("<u8")
        p = directory / f"{prefix}_{ch}.bin"
        ticks.tofile(p)
        paths[ch] = p.name
        counts[ch] = int(ticks.size)
    sidecar = {
        "format": "u64-le picoseconds",
        "rng": stream.meta.get("rng", RNG_ALGORITHM),
        "seed": stream.seed,
        "duration_s": stream.duration_s,
        "counts": counts,
        "files": paths,
    }
    for key in ("mode", "pair_rate_hz", "r1_hz", "r2_hz", "offset_s", "pair_survival"):
        if key in stream.meta:
            sidecar[key] = stream.meta[key]
    if extra_meta:
        sidecar.update(extra_meta)
    with open(directory / f"{prefix}_meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
    return sidecar


def read_stream(directory, prefix: str = "timestamps") -> EventStream:
    directory = Path(directory)
    with open(directory / f"{prefix}_meta.json") as fh:
        sidecar = json.load(fh)
    channels = {}
    for ch in ("ch1", "ch2"):
        ticks = np.fromfile(directory / sidecar["files"][ch], dtype="<u8")
        channels[ch] = ticks.astype(float) * TIMESTAMP_UNIT_S
    return EventStream(
        channel1_s=channels["ch1"],
        channel2_s=channels["ch2"],
        duration_s=float(sidecar["duration_s"]),
        seed=int(sidecar["seed"]),
        meta={k: sidecar[k] for k in sidecar if k not in ("files", "counts")},
    )
