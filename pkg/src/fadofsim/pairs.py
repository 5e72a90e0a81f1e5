"""Pair transmission through the filter and spectral-purity bookkeeping.

Signal and idler of a pair sit in mirror modes +n/-n about the degenerate
mode.  The filter transmits a pair with probability eta_n * eta_{-n},
where eta_n is the filter transmission averaged over the Lorentzian
profile of mode n.  These per-pair transmissions give the fraction of
transmitted pairs that are degenerate, and a figure of merit for tuning
the filter: degenerate-pair transmission against total non-degenerate
pair leakage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .opo import ModeComb, OpoConfig, mode_comb
from .spectrum import BoundaryPeakError, Spectrum, filter_metrics, make_frequency_grid
from .vapor import FilterConfig, fadof_transmission

MODE_WINDOW_LINEWIDTHS = 50.0


class ModeOutsideGridError(ValueError):
    def __init__(self, index: int):
        super().__init__(
            f"mode {index}: Lorentzian window not covered by the filter grid"
        )
        self.index = index


@dataclass
class PairTransmissionMap:
    mode_indices: np.ndarray
    mode_eta: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if not np.array_equal(self.mode_indices[::-1], -self.mode_indices):
            raise ValueError("mode indices must be symmetric and ordered -N..N")

    def eta(self, n: int) -> float:
        pos = np.nonzero(self.mode_indices == n)[0]
        if pos.size != 1:
            raise KeyError(f"mode {n} not in map")
        return float(self.mode_eta[pos[0]])

    def pair_transmission(self, n: int) -> float:
        return self.eta(n) * self.eta(-n)

    def weighted_pair_sum(self, include_degenerate: bool = True) -> float:
        """Sum over signed mode index of w_n * eta_n * eta_{-n}."""
        eta_mirror = self.mode_eta[::-1]  # index order is -N..N
        terms = self.weights * self.mode_eta * eta_mirror
        if include_degenerate:
            return float(terms.sum())
        mask = self.mode_indices != 0
        return float(terms[mask].sum())


def pair_transmission_map(
    spectrum: Spectrum, comb: ModeComb, opo: OpoConfig
) -> PairTransmissionMap:
    """Mode-averaged filter transmission for every retained comb mode.

    eta_n is the transmission weighted by the unit-area mode Lorentzian,
    truncated at +-50 linewidths and renormalized over the truncation
    window, integrated by the trapezoid rule on the spectrum grid.  Any
    mode whose window is not fully covered raises ModeOutsideGridError.
    """
    freq = spectrum.frequency_hz
    vals = spectrum.value
    hwhm = 0.5 * opo.mode_fwhm_hz
    half_window = MODE_WINDOW_LINEWIDTHS * opo.mode_fwhm_hz
    etas = np.empty(comb.indices.shape)
    for j, (n, f0) in enumerate(zip(comb.indices, comb.frequencies_hz)):
        if f0 - half_window < freq[0] or f0 + half_window > freq[-1]:
            raise ModeOutsideGridError(int(n))
        sl = slice(
            np.searchsorted(freq, f0 - half_window),
            np.searchsorted(freq, f0 + half_window, side="right"),
        )
        f = freq[sl]
        lor = hwhm / np.pi / ((f - f0) ** 2 + hwhm**2)
        etas[j] = np.trapezoid(lor * vals[sl], f) / np.trapezoid(lor, f)
    return PairTransmissionMap(
        mode_indices=comb.indices.copy(),
        mode_eta=etas,
        weights=comb.weights.copy(),
    )


def resonant_degenerate_fraction(pmap: PairTransmissionMap) -> float:
    """Fraction of transmitted pairs that belong to the degenerate mode."""
    total = pmap.weighted_pair_sum(include_degenerate=True)
    if total <= 0:
        raise ValueError("no transmitted pairs")
    return pmap.pair_transmission(0) * pmap.weights[pmap.mode_indices == 0][0] / total


def spectral_purity(hot_cell_counts: float, filtered_counts: float) -> float:
    """Heralded single-photon spectral purity P = 1 - c_blocked / c_filtered.

    ``hot_cell_counts`` are pair coincidences with the resonant blocking
    cell inserted, ``filtered_counts`` with the filter alone.
    """
    if filtered_counts <= 0:
        raise ValueError("filtered coincidence counts must be positive")
    if hot_cell_counts < 0:
        raise ValueError("coincidence counts cannot be negative")
    return 1.0 - hot_cell_counts / filtered_counts


def overall_degenerate_fraction(resonant_fraction: float, leakage: float) -> float:
    """Degenerate fraction including out-of-band leakage pairs.

    ``leakage`` is the fraction of detected pairs that bypass the filter
    line entirely (e.g. through the polarizer extinction); those pairs
    are never degenerate, so they scale the resonant fraction by
    (1 - leakage).
    """
    if not 0 <= resonant_fraction <= 1:
        raise ValueError("resonant fraction must lie in [0, 1]")
    if not 0 <= leakage <= 1:
        raise ValueError("leakage must lie in [0, 1]")
    return resonant_fraction * (1.0 - leakage)


def extinction_leakage_estimate(pmap: PairTransmissionMap, extinction: float) -> float:
    """Out-of-band pair leakage implied by the polarizer extinction alone.

    Broadband pairs reach the blocked port with probability extinction
    per photon; relative to the degenerate-pair transmission this gives
    extinction^2 * sum(w) / (w0 * eta0^2).  Real setups are typically
    dominated by technical leakage well above this bound.
    """
    degenerate = pmap.pair_transmission(0)
    if degenerate <= 0:
        raise ValueError("degenerate-pair transmission vanishes")
    return min(1.0, extinction**2 * float(pmap.weights.sum()) / degenerate)


@dataclass(frozen=True)
class PurityResult:
    resonant_fraction: float
    leakage: float
    overall_fraction: float
    spectral_purity: float


def purity_summary(pmap: PairTransmissionMap, leakage: float) -> PurityResult:
    resonant = resonant_degenerate_fraction(pmap)
    return PurityResult(
        resonant_fraction=resonant,
        leakage=leakage,
        overall_fraction=overall_degenerate_fraction(resonant, leakage),
        spectral_purity=1.0 - leakage,
    )


@dataclass
class OptimizationResult:
    b_values_t: np.ndarray
    temperatures_k: np.ndarray
    fom: np.ndarray
    eta0: np.ndarray
    sum_nondegenerate: np.ndarray
    peak_offset_hz: np.ndarray
    best_b_t: float
    best_temperature_k: float
    best_fom: float
    meta: dict = field(default_factory=dict)

    def to_csv(self, path, header_lines=()) -> None:
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("B_T,temperature_K,fom,eta0,sum_nondegenerate\n")
            for i, b in enumerate(self.b_values_t):
                for j, t in enumerate(self.temperatures_k):
                    fh.write(
                        f"{b:.6e},{t:.3f},{self.fom[i, j]:.8e},"
                        f"{self.eta0[i, j]:.8e},{self.sum_nondegenerate[i, j]:.8e}\n"
                    )


def optimize_filter(
    base: FilterConfig,
    opo: OpoConfig,
    b_values_t,
    temperatures_k,
    grid_half_span_hz: float = 20e9,
    grid_step_hz: float = 2e6,
    weight_cutoff: float = 1e-3,
    threads: int = 1,
) -> OptimizationResult:
    """Exhaustive grid search of the pair-blocking figure of merit.

    For each (B, T) the filter spectrum is computed, the comb is centered
    on the filter's own transmission peak (the source is tuned to the
    filter in operation), and FOM = w0*eta0^2 / sum_{n!=0} w_n*eta_n*eta_-n.
    The comb is truncated to the modes whose averaging windows fit the
    grid, so every point sees the same mode set.  Points whose spectrum
    has no usable peak are flagged invalid (NaN) and excluded from the
    maximum; ties resolve to the first point in scan order (B outer,
    temperature inner).
    """
    from dataclasses import replace

    b_values_t = np.asarray(b_values_t, dtype=float)
    temperatures_k = np.asarray(temperatures_k, dtype=float)
    grid = make_frequency_grid(
        base.table.reference_frequency_hz, grid_half_span_hz, grid_step_hz
    )
    # worst-case peak offset budget when truncating the comb to the grid
    margin = 6e9 + MODE_WINDOW_LINEWIDTHS * opo.mode_fwhm_hz
    max_modes = int((grid_half_span_hz - margin) / opo.fsr_hz)
    shape = (b_values_t.size, temperatures_k.size)
    fom = np.full(shape, np.nan)
    eta0 = np.full(shape, np.nan)
    nondeg = np.full(shape, np.nan)
    peak_off = np.full(shape, np.nan)
    def evaluate(b: float, temp: float):
        cfg = replace(base, b_field_t=b, temperature_k=temp)
        spec = fadof_transmission(cfg, grid)
        try:
            metrics = filter_metrics(spec)
        except BoundaryPeakError:
            return None
        peak = metrics.peak_frequency_hz
        if abs(peak - base.table.reference_frequency_hz) > 6e9:
            # peak escaped the central margin; comb would leave the grid
            return None
        comb = mode_comb(
            replace(opo, degenerate_frequency_hz=peak),
            weight_cutoff=weight_cutoff,
            max_modes=max_modes,
        )
        pmap = pair_transmission_map(spec, comb, opo)
        e0 = pmap.pair_transmission(0)
        s_nd = pmap.weighted_pair_sum(include_degenerate=False)
        f = e0 / s_nd if s_nd > 0 else np.inf
        return peak - base.table.reference_frequency_hz, pmap.eta(0), s_nd, f

    points = [
        (i, j) for i in range(b_values_t.size) for j in range(temperatures_k.size)
    ]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda ij: evaluate(
                        float(b_values_t[ij[0]]), float(temperatures_k[ij[1]])
                    ),
                    points,
                )
            )
    else:
        results = [
            evaluate(float(b_values_t[i]), float(temperatures_k[j])) for i, j in points
        ]
    n_invalid = 0
    for (i, j), res in zip(points, results):
        if res is None:
            n_invalid += 1
            continue
        peak_off[i, j], eta0[i, j], nondeg[i, j], fom[i, j] = res
    if np.all(np.isnan(fom)):
        raise ValueError("no valid points in the optimization range")
    flat_best = np.nanargmax(fom)
    bi, tj = np.unravel_index(flat_best, shape)
    return OptimizationResult(
        b_values_t=b_values_t,
        temperatures_k=temperatures_k,
        fom=fom,
        eta0=eta0,
        sum_nondegenerate=nondeg,
        peak_offset_hz=peak_off,
        best_b_t=float(b_values_t[bi]),
        best_temperature_k=float(temperatures_k[tj]),
        best_fom=float(fom[bi, tj]),
        meta={"n_invalid": n_invalid, "max_modes": max_modes},
    )
