"""Per-mode pair transmission, purity bookkeeping, and filter optimization."""

import numpy as np
import pytest

from fadofsim.opo import OpoConfig, mode_comb
from fadofsim.pairs import (
    ModeOutsideGridError,
    PairTransmissionMap,
    extinction_leakage_estimate,
    optimize_filter,
    overall_degenerate_fraction,
    pair_transmission_map,
    purity_summary,
    resonant_degenerate_fraction,
    spectral_purity,
)
from fadofsim.spectrum import Spectrum, make_frequency_grid
from fadofsim.vapor import FilterConfig

OPO = OpoConfig()


def _toy_map():
    return PairTransmissionMap(
        mode_indices=np.arange(-2, 3),
        mode_eta=np.array([0.1, 0.2, 0.5, 0.3, 0.4]),
        weights=np.array([0.25, 0.5, 1.0, 0.5, 0.25]),
    )


def test_map_mirror_pair_arithmetic():
    pmap = _toy_map()
    assert pmap.eta(1) == 0.3
    assert pmap.eta(-1) == 0.2
    assert pmap.pair_transmission(1) == pytest.approx(0.06, rel=1e-15)
    assert pmap.pair_transmission(-1) == pmap.pair_transmission(1)
    assert pmap.pair_transmission(0) == pytest.approx(0.25, rel=1e-15)
    assert pmap.weighted_pair_sum() == pytest.approx(0.33, rel=1e-12)
    assert pmap.weighted_pair_sum(include_degenerate=False) == pytest.approx(0.08, rel=1e-12)
    assert resonant_degenerate_fraction(pmap) == pytest.approx(0.25 / 0.33, rel=1e-12)


def test_map_unknown_mode_and_asymmetric_indices():
    pmap = _toy_map()
    with pytest.raises(KeyError, match="mode 3"):
        pmap.eta(3)
    with pytest.raises(ValueError, match="symmetric"):
        PairTransmissionMap(
            mode_indices=np.array([-1, 0, 2]),
            mode_eta=np.ones(3),
            weights=np.ones(3),
        )


def test_transparent_filter_passes_every_mode():
    grid = make_frequency_grid(OPO.degenerate_frequency_hz, 5e9, 1e6)
    spec = Spectrum(frequency_hz=grid, value=np.ones(grid.size))
    comb = mode_comb(OPO, max_modes=5)
    pmap = pair_transmission_map(spec, comb, OPO)
    assert np.allclose(pmap.mode_eta, 1.0, rtol=1e-12)
    # with every eta equal the degenerate share is w0 over the weight sum
    assert resonant_degenerate_fraction(pmap) == pytest.approx(
        1.0 / comb.weights.sum(), rel=1e-12
    )


def test_top_hat_filter_blocks_neighbor_modes():
    # a pass window of one free spectral range transmits the degenerate
    # mode and only Lorentzian wing tails of its neighbors
    f0 = OPO.degenerate_frequency_hz
    grid = make_frequency_grid(f0, 5e9, 1e6)
    vals = (np.abs(grid - f0) <= 0.5 * OPO.fsr_hz).astype(float)
    pmap = pair_transmission_map(Spectrum(frequency_hz=grid, value=vals), mode_comb(OPO, max_modes=5), OPO)
    assert pmap.eta(0) > 0.99
    assert pmap.eta(1) < 5e-3
    assert pmap.eta(2) == 0.0
    ratio = pmap.weighted_pair_sum(include_degenerate=False) / pmap.pair_transmission(0)
    assert ratio < 1e-4
    assert resonant_degenerate_fraction(pmap) > 0.9999


def test_scaling_filter_leaves_resonant_fraction_unchanged():
    grid = make_frequency_grid(OPO.degenerate_frequency_hz, 5e9, 1e6)
    rng = np.random.default_rng(3)
    base_vals = 0.2 + 0.6 * rng.random(grid.size)
    comb = mode_comb(OPO, max_modes=4)
    full = pair_transmission_map(Spectrum(frequency_hz=grid, value=base_vals), comb, OPO)
    half = pair_transmission_map(Spectrum(frequency_hz=grid, value=0.5 * base_vals), comb, OPO)
    assert np.allclose(half.mode_eta, 0.5 * full.mode_eta, rtol=1e-12)
    assert resonant_degenerate_fraction(half) == pytest.approx(
        resonant_degenerate_fraction(full), rel=1e-12
    )


def test_mode_window_must_fit_grid():
    grid = make_frequency_grid(OPO.degenerate_frequency_hz, 1e9, 1e6)
    spec = Spectrum(frequency_hz=grid, value=np.ones(grid.size))
    comb = mode_comb(OPO, max_modes=2)
    with pytest.raises(ModeOutsideGridError, match="mode -2") as err:
        pair_transmission_map(spec, comb, OPO)
    assert err.value.index == -2


def test_spectral_purity_values_and_validation():
    assert spectral_purity(2.0, 100.0) == pytest.approx(0.98, abs=0)
    assert spectral_purity(0.0, 50.0) == 1.0
    with pytest.raises(ValueError, match="positive"):
        spectral_purity(1.0, 0.0)
    with pytest.raises(ValueError, match="negative"):
        spectral_purity(-1.0, 10.0)


def test_overall_fraction_discounts_leakage():
    assert overall_degenerate_fraction(0.98, 0.02) == pytest.approx(0.9604, rel=1e-15)
    assert overall_degenerate_fraction(1.0, 0.0) == 1.0
    with pytest.raises(ValueError, match="resonant"):
        overall_degenerate_fraction(1.2, 0.0)
    with pytest.raises(ValueError, match="leakage"):
        overall_degenerate_fraction(0.5, -0.1)


def test_extinction_leakage_estimate_behaviour():
    pmap = _toy_map()
    lo = extinction_leakage_estimate(pmap, 1e-6)
    hi = extinction_leakage_estimate(pmap, 1e-4)
    assert 0 < lo < hi < 1
    assert hi == pytest.approx(lo * 1e4, rel=1e-9)
    assert extinction_leakage_estimate(pmap, 1.0) == 1.0
    dead = PairTransmissionMap(
        mode_indices=np.arange(-1, 2),
        mode_eta=np.array([0.5, 0.0, 0.5]),
        weights=np.ones(3),
    )
    with pytest.raises(ValueError, match="vanishes"):
        extinction_leakage_estimate(dead, 1e-6)


def test_purity_summary_composition():
    pmap = _toy_map()
    result = purity_summary(pmap, leakage=0.02)
    assert result.resonant_fraction == pytest.approx(0.25 / 0.33, rel=1e-12)
    assert result.overall_fraction == pytest.approx(result.resonant_fraction * 0.98, rel=1e-15)
    assert result.spectral_purity == 0.98
    assert result.leakage == 0.02


def test_optimize_single_point_matches_defaults():
    res = optimize_filter(
        FilterConfig(),
        OPO,
        [4.5e-3],
        [365.0],
        grid_half_span_hz=8e9,
        grid_step_hz=2e6,
    )
    assert res.best_b_t == 4.5e-3
    assert res.best_temperature_k == 365.0
    assert res.best_fom == res.fom[0, 0]
    assert res.best_fom > 100.0
    assert res.eta0[0, 0] == pytest.approx(0.699, rel=1e-2)
    assert res.peak_offset_hz[0, 0] == pytest.approx(-3.926e9, abs=4e6)
    assert res.meta["n_invalid"] == 0


def test_optimize_threads_bitwise_equal():
    kwargs = dict(grid_half_span_hz=8e9, grid_step_hz=4e6)
    serial = optimize_filter(FilterConfig(), OPO, [4.0e-3, 5.0e-3], [360.0, 370.0], **kwargs)
    parallel = optimize_filter(
        FilterConfig(), OPO, [4.0e-3, 5.0e-3], [360.0, 370.0], threads=2, **kwargs
    )
    assert np.array_equal(serial.fom, parallel.fom, equal_nan=True)
    assert np.array_equal(serial.eta0, parallel.eta0, equal_nan=True)
    assert serial.best_fom == parallel.best_fom


def test_optimize_flags_flat_spectrum_points():
    # at zero field the spectrum is the flat extinction floor: no peak
    res = optimize_filter(
        FilterConfig(),
        OPO,
        [0.0, 4.5e-3],
        [365.0],
        grid_half_span_hz=8e9,
        grid_step_hz=4e6,
    )
    assert res.meta["n_invalid"] == 1
    assert np.isnan(res.fom[0, 0])
    assert res.best_b_t == 4.5e-3


def test_optimize_all_invalid_raises():
    with pytest.raises(ValueError, match="no valid points"):
        optimize_filter(
            FilterConfig(),
            OPO,
            [0.0],
            [365.0],
            grid_half_span_hz=8e9,
            grid_step_hz=4e6,
        )


def test_optimize_fom_decreases_with_extinction():
    kwargs = dict(grid_half_span_hz=8e9, grid_step_hz=2e6)
    clean = optimize_filter(FilterConfig(extinction=1.8e-6), OPO, [4.5e-3], [365.0], **kwargs)
    leaky = optimize_filter(FilterConfig(extinction=1.8e-4), OPO, [4.5e-3], [365.0], **kwargs)
    assert leaky.best_fom < clean.best_fom


def test_optimize_csv_export(tmp_path):
    res = optimize_filter(
        FilterConfig(),
        OPO,
        [4.0e-3, 5.0e-3],
        [365.0],
        grid_half_span_hz=8e9,
        grid_step_hz=4e6,
    )
    path = tmp_path / "scan.csv"
    res.to_csv(path, header_lines=("scan: test",))
    lines = path.read_text().splitlines()
    assert lines[0] == "# scan: test"
    assert lines[1] == "B_T,temperature_K,fom,eta0,sum_nondegenerate"
    assert len(lines) == 2 + 2
