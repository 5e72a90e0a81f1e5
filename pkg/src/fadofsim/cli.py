"""Command-line front end.

Each subcommand reads one INI config, runs a reproducible computation,
and writes data files (CSV/JSON/binary) into the output directory; no
plots are produced.  Every output embeds the sha256 hash of the resolved
configuration.  Exit status is 0 only when all outputs were written and
no validity flag was raised (e.g. a degenerate spectrum or a failed
model cross-check); config errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import correlations, montecarlo, pairs
from .config import ConfigError, ExperimentConfig, load_config
from .cvnoise import (
    NoiseModel,
    noise_vs_power_fit,
    quadrature_variance_avg,
    squeezing_through_loss,
)
from .opo import mode_comb, output_spectrum
from .spectrum import BoundaryPeakError, Spectrum, filter_metrics, make_frequency_grid
from .vapor import fadof_transmission, hot_cell_transmission


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)
        fh.write("\n")


def _hash_header(cfg: ExperimentConfig) -> list[str]:
    return [f"config_hash: {cfg.config_hash}"]


def cmd_spectrum(cfg: ExperimentConfig, out: Path, seed: int, threads: int) -> list[str]:
    """Filter, mirrored-filter, product, source, and filtered-source spectra."""
    ref = cfg.filter.table.reference_frequency_hz
    grid = make_frequency_grid(ref, cfg.grid_half_span_hz, cfg.grid_step_hz)
    fadof = fadof_transmission(cfg.filter, grid)
    center = cfg.opo.degenerate_frequency_hz
    # mirror partner of each grid frequency about the source center,
    # evaluated directly (not interpolated)
    mirrored = fadof_transmission(cfg.filter, np.sort(2.0 * center - grid))
    mirror_vals = mirrored.value[::-1]
    product = Spectrum(grid, fadof.value * mirror_vals, kind="transmission")

    comb = mode_comb(cfg.opo, max_modes=int((cfg.grid_half_span_hz - abs(center - ref)) / cfg.opo.fsr_hz) - 1)
    source = output_spectrum(comb, cfg.opo, grid)
    filtered = Spectrum(grid, source.value * fadof.value, kind="density")

    hdr = _hash_header(cfg)
    fadof.to_csv(out / "fadof_spectrum.csv", header_lines=hdr)
    Spectrum(grid, mirror_vals, kind="transmission").to_csv(
        out / "mirror_spectrum.csv", header_lines=hdr
    )
    product.to_csv(out / "pair_product_spectrum.csv", header_lines=hdr)
    source.to_csv(out / "opo_spectrum.csv", value_column="density_per_hz", header_lines=hdr)
    filtered.to_csv(out / "filtered_opo_spectrum.csv", value_column="density_per_hz", header_lines=hdr)

    dirty: list[str] = []
    payload: dict = {
        "config_hash": cfg.config_hash,
        "boundary_peak": False,
        "grid_half_span_hz": cfg.grid_half_span_hz,
        "grid_step_hz": cfg.grid_step_hz,
    }
    try:
        m = filter_metrics(fadof)
        payload.update(
            peak_frequency_hz=m.peak_frequency_hz,
            peak_offset_ghz=(m.peak_frequency_hz - ref) / 1e9,
            peak_transmission=m.peak_transmission,
            fwhm_mhz=m.fwhm_hz / 1e6,
            rejection_db=m.rejection_db,
        )
        print(
            f"filter peak {payload['peak_offset_ghz']:+.3f} GHz from reference, "
            f"transmission {m.peak_transmission:.3f}, FWHM {m.fwhm_hz / 1e6:.1f} MHz"
        )
    except BoundaryPeakError as exc:
        payload["boundary_peak"] = True
        payload["detail"] = str(exc)
        dirty.append("spectrum has no interior transmission peak")
        print("warning: spectrum has no interior transmission peak", file=sys.stderr)
    _write_json(out / "filter_metrics.json", payload)
    return dirty


def _histogram_case(cfg: ExperimentConfig, mode: str, comb_n_side: int):
    label = "on" if mode == "single" else "off"
    n_modes = comb_n_side if mode == "comb" else None
    hist = correlations.detected_histogram(
        cfg.opo, cfg.detector, mode=mode, n_modes=n_modes
    )
    return label, hist


def cmd_g2(cfg: ExperimentConfig, out: Path, seed: int, threads: int, mode: str) -> list[str]:
    """Analytic detected-coincidence histograms, filter on and/or off."""
    comb = mode_comb(cfg.opo)
    cases = []
    if mode in ("on", "both"):
        cases.append(_histogram_case(cfg, "single", comb.n_max))
    if mode in ("off", "both"):
        cases.append(_histogram_case(cfg, "comb", comb.n_max))
    hdr = _hash_header(cfg)
    payload: dict = {
        "config_hash": cfg.config_hash,
        "expected_envelope_fwhm_ns": correlations.g2_single_fwhm(cfg.opo) * 1e9,
        "bin_ns": cfg.detector.bin_s * 1e9,
        "roundtrip_ns": cfg.opo.roundtrip_s * 1e9,
    }
    for label, hist in cases:
        hist.to_csv(out / f"g2_{label}_histogram.csv", header_lines=hdr)
        fwhm = correlations.histogram_envelope_fwhm(hist) * 1e9
        contrast = correlations.tooth_modulation(hist)
        payload[f"{label}_envelope_fwhm_ns"] = fwhm
        payload[f"{label}_tooth_modulation"] = contrast
        print(f"filter {label}: envelope FWHM {fwhm:.2f} ns, tooth modulation {contrast:.3g}")
    _write_json(out / "g2_metrics.json", payload)
    return []


def _chi_square(mc_hist, an_hist, min_expected: float = 5.0) -> dict:
    from scipy.stats import chi2 as chi2_dist

    expected = an_hist.counts
    observed = mc_hist.counts
    usable = expected >= min_expected
    dof = int(usable.sum())
    stat = float(np.sum((observed[usable] - expected[usable]) ** 2 / expected[usable]))
    p = float(chi2_dist.sf(stat, dof)) if dof else float("nan")
    return {
        "chi_square": stat,
        "bins_used": dof,
        "p_value": p,
        "mc_counts_in_used_bins": float(observed[usable].sum()),
        "expected_counts_in_used_bins": float(expected[usable].sum()),
    }


def cmd_simulate(cfg: ExperimentConfig, out: Path, seed: int, threads: int) -> list[str]:
    """Monte Carlo streams, their histograms, model cross-check, purity."""
    det = replace(cfg.detector, acquisition_s=cfg.mc_duration_s)
    comb = mode_comb(cfg.opo)
    children = np.random.SeedSequence(seed).generate_state(4)
    dirty: list[str] = []
    hdr = _hash_header(cfg)

    report: dict = {"config_hash": cfg.config_hash, "seed": seed, "rng": montecarlo.RNG_ALGORITHM}
    for label, gen_mode, child in (("on", "single", children[0]), ("off", "comb", children[1])):
        stream = montecarlo.generate_pair_events(
            cfg.opo, det, gen_mode, cfg.mc_duration_s, int(child), n_modes=comb.n_max
        )
        montecarlo.write_stream(stream, out, prefix=f"timestamps_{label}",
                                extra_meta={"config_hash": cfg.config_hash})
        mc_hist = montecarlo.mc_histogram(stream, det)
        mc_hist.to_csv(out / f"mc_{label}_histogram.csv", header_lines=hdr)
        an_hist = correlations.detected_histogram(
            cfg.opo, det, mode=gen_mode, n_modes=comb.n_max if gen_mode == "comb" else None
        )
        check = _chi_square(mc_hist, an_hist)
        report[label] = check
        if not check["p_value"] > 0.001:
            dirty.append(f"chi-square cross-check failed for filter-{label} case")
    _write_json(out / "chi_square_report.json", report)

    # purity branch: analytic resonant fraction sets the hot-cell pair
    # survival; two Monte Carlo runs close the loop through the counters
    ref = cfg.filter.table.reference_frequency_hz
    grid = make_frequency_grid(ref, cfg.grid_half_span_hz, cfg.grid_step_hz)
    fadof = fadof_transmission(cfg.filter, grid)
    center = cfg.opo.degenerate_frequency_hz
    max_modes = int(
        (cfg.grid_half_span_hz - abs(center - ref)
         - pairs.MODE_WINDOW_LINEWIDTHS * cfg.opo.mode_fwhm_hz) / cfg.opo.fsr_hz
    )
    pmap = pairs.pair_transmission_map(
        fadof, mode_comb(cfg.opo, max_modes=max_modes), cfg.opo
    )
    resonant = pairs.resonant_degenerate_fraction(pmap)
    leakage = cfg.out_of_band_leakage
    if leakage is None:
        leakage = pairs.extinction_leakage_estimate(pmap, cfg.filter.extinction)
    payload: dict = {
        "config_hash": cfg.config_hash,
        "resonant_degenerate_fraction": resonant,
        "out_of_band_leakage": leakage,
        "overall_degenerate_fraction": pairs.overall_degenerate_fraction(resonant, leakage),
        "retained_modes_per_side": int(pmap.mode_indices.max()),
        "hot_cell_enabled": cfg.hot_cell_enabled,
    }
    if cfg.hot_cell_enabled:
        window = det.offset_s  # coincidence window around the offset peak
        filtered = montecarlo.generate_pair_events(
            cfg.opo, det, "single", cfg.mc_duration_s, int(children[2])
        )
        blocked = montecarlo.generate_pair_events(
            cfg.opo, det, "single", cfg.mc_duration_s, int(children[3]),
            pair_survival=1.0 - resonant,
        )
        montecarlo.write_stream(filtered, out, prefix="timestamps_filtered",
                                extra_meta={"config_hash": cfg.config_hash})
        montecarlo.write_stream(blocked, out, prefix="timestamps_hotcell",
                                extra_meta={"config_hash": cfg.config_hash})
        n_side = max(64, int(round(window / det.bin_s)))
        h_f = montecarlo.mc_histogram(filtered, det, n_side_bins=n_side)
        h_b = montecarlo.mc_histogram(blocked, det, n_side_bins=n_side)
        acc = h_f.meta["accidental_floor_per_bin"]
        c_f = montecarlo.coincidences_in_window(h_f, window)
        c_b = montecarlo.coincidences_in_window(h_b, window)
        n_bins = 2 * int(round(window / det.bin_s)) + 1
        c_f_true = max(c_f - acc * n_bins, 0.0)
        c_b_true = max(c_b - acc * n_bins, 0.0)
        purity = pairs.spectral_purity(c_b_true, c_f_true) if c_f_true > 0 else float("nan")
        payload.update(
            coincidence_window_ns=window * 1e9,
            coincidences_filtered=c_f,
            coincidences_hot_cell=c_b,
            accidentals_subtracted_per_run=acc * n_bins,
            spectral_purity_mc=purity,
        )
        print(f"spectral purity (MC): {purity:.4f} "
              f"(analytic resonant fraction {resonant:.4f})")
    _write_json(out / "purity.json", payload)
    print(f"overall degenerate fraction: {payload['overall_degenerate_fraction']:.4f}")
    return dirty


def cmd_optimize(cfg: ExperimentConfig, out: Path, seed: int, threads: int) -> list[str]:
    """Figure-of-merit surface over the (B, temperature) scan grid."""
    result = pairs.optimize_filter(
        cfg.filter,
        cfg.opo,
        cfg.optimize_b_t,
        cfg.optimize_temperatures_k,
        grid_half_span_hz=cfg.optimize_half_span_hz,
        grid_step_hz=cfg.optimize_step_hz,
        threads=threads,
    )
    result.to_csv(out / "fom_surface.csv", header_lines=_hash_header(cfg))
    payload = {
        "config_hash": cfg.config_hash,
        "best_b_mT": result.best_b_t * 1e3,
        "best_temperature_K": result.best_temperature_k,
        "best_fom": result.best_fom,
        "invalid_points": result.meta["n_invalid"],
        "modes_per_side": result.meta["max_modes"],
    }
    _write_json(out / "optimize_result.json", payload)
    print(
        f"best figure of merit {result.best_fom:.3g} at "
        f"B = {result.best_b_t * 1e3:.2f} mT, T = {result.best_temperature_k:.1f} K"
    )
    return [] if result.meta["n_invalid"] == 0 else [
        f"{result.meta['n_invalid']} scan points had no usable transmission peak"
    ]


def cmd_noise(cfg: ExperimentConfig, out: Path, seed: int, threads: int) -> list[str]:
    """Attenuation sweep of the quadrature noise plus the loss table."""
    t_nd = np.linspace(1.0 / cfg.noise_tnd_points, 1.0, cfg.noise_tnd_points)
    variances = np.array([
        quadrature_variance_avg(replace(cfg.noise, attenuation_amplitude=float(t)))
        for t in t_nd
    ])
    power_proxy = (t_nd * abs(cfg.noise.mean_field)) ** 2
    lines = ["t_nd,power_proxy,variance"]
    for t, p, v in zip(t_nd, power_proxy, variances):
        lines.append(f"{t:.6f},{p:.9e},{v:.9e}")
    with open(out / "noise_sweep.csv", "w") as fh:
        fh.write(f"# config_hash: {cfg.config_hash}\n")
        fh.write("\n".join(lines) + "\n")

    fit = noise_vs_power_fit(power_proxy, variances)
    table = [
        {
            "input_db": s_db,
            "transmission": t,
            "output_db": squeezing_through_loss(s_db, t),
        }
        for s_db, t in cfg.squeezing_table
    ]
    payload = {
        "config_hash": cfg.config_hash,
        "shot_noise": fit.shot_noise,
        "linear_coefficient": fit.linear_coefficient,
        "max_abs_residual": float(np.max(np.abs(fit.residuals))),
        "squeezing_through_loss": table,
    }
    _write_json(out / "noise_fit.json", payload)
    print(
        f"noise fit: shot noise {fit.shot_noise:.6f}, "
        f"linear coefficient {fit.linear_coefficient:.6g} per power unit"
    )
    for row in table:
        print(
            f"squeezing {row['input_db']:.2f} dB through T={row['transmission']:.2f}"
            f" -> {row['output_db']:.2f} dB"
        )
    return []


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fadofsim",
        description="Atomic-filter and photon-pair simulation toolkit",
    )
    parser.add_argument("--config", metavar="PATH", help="INI config file (defaults built in)")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, metavar="U64", help="override the config seed")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker threads for grid sweeps")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", help="filter and source spectra plus metrics")
    g2 = sub.add_parser("g2", help="analytic coincidence histograms")
    g2.add_argument("--mode", choices=("on", "off", "both"), default="both",
                    help="filter on (single mode), off (full comb), or both")
    sub.add_parser("simulate", help="Monte Carlo streams and cross-checks")
    sub.add_parser("optimize", help="filter working-point scan")
    sub.add_parser("noise", help="quadrature-noise budget and loss table")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.threads is not None and args.threads < 1:
        print("config error: --threads must be at least 1", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = args.seed if args.seed is not None else cfg.seed
    try:
        if args.command == "spectrum":
            dirty = cmd_spectrum(cfg, out, seed, args.threads)
        elif args.command == "g2":
            dirty = cmd_g2(cfg, out, seed, args.threads, args.mode)
        elif args.command == "simulate":
            dirty = cmd_simulate(cfg, out, seed, args.threads)
        elif args.command == "optimize":
            dirty = cmd_optimize(cfg, out, seed, args.threads)
        else:
            dirty = cmd_noise(cfg, out, seed, args.threads)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for flag in dirty:
        print(f"validity flag: {flag}", file=sys.stderr)
    return 1 if dirty else 0


if __name__ == "__main__":
    sys.exit(main())
