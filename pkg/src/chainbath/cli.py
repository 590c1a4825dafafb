"""Command-line interface.

Subcommands: simulate, phase-diagram, spectrum, zeros, tune-epsilon,
distance-scan.  Exit codes: 0 success, 1 validation error, 2 numerical
failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .errors import NumericalError, ValidationError
from .model import SymmetricPair, derived_quantities, separation
from .spectral import (
    closed_form_zeros,
    locate_zeros_numeric,
    ohmic_fit,
    spectral_density,
    tune_epsilon,
)
from .sweep import (
    SweepConfig,
    apply_profile,
    parse_config,
    preset_config,
    run_distance_scan,
    run_phase_diagram,
    run_time_series,
    _write_csv,
    _write_json,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chainbath",
        description="Gaussian dynamics of two oscillators coupled through a harmonic chain",
    )
    parser.add_argument("--version", action="version", version=f"chainbath {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--preset", metavar="NAME", help="named preset (ohmic-edge, distant-9a)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads")
    common.add_argument(
        "--profile",
        choices=("desk", "paper"),
        default=None,
        help="chain-size profile; presets default to desk",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="time series at a single (r, T)")
    p.add_argument("--r", type=float, default=None, help="squeezing parameter override")
    p.add_argument("--T", type=float, default=None, help="chain temperature override")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "phase-diagram", parents=[common], help="classify the (r, T) grid"
    )
    p.set_defaults(func=_cmd_phase_diagram)

    p = sub.add_parser("spectrum", parents=[common], help="spectral density of the chain")
    p.add_argument(
        "--branch",
        choices=("single", "plus", "minus"),
        default=None,
        help="defaults to 'single' for edge attachments, 'minus' otherwise",
    )
    p.add_argument("--resolution", type=int, default=2048, help="smoothed sample count")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("zeros", parents=[common], help="spectral-density zeros")
    p.add_argument("--numeric", action="store_true", help="cross-check zeros numerically")
    p.add_argument("--resolution", type=int, default=4096, help="numeric scan resolution")
    p.set_defaults(func=_cmd_zeros)

    p = sub.add_parser(
        "tune-epsilon", parents=[common], help="detune the oscillators onto a spectral zero"
    )
    p.add_argument("--branch", choices=("plus", "minus"), default="minus")
    p.add_argument("--k", type=int, default=1, help="zero index within the branch")
    p.set_defaults(func=_cmd_tune_epsilon)

    p = sub.add_parser(
        "distance-scan", parents=[common], help="window-mean E_N against separation"
    )
    p.add_argument(
        "--s-values", required=True, metavar="S1,S2,...",
        help="comma-separated attachment site indices",
    )
    p.add_argument("--r", type=float, default=None, help="squeezing parameter override")
    p.add_argument("--T", type=float, default=None, help="chain temperature override")
    p.set_defaults(func=_cmd_distance_scan)

    return parser


def _load_config(args) -> SweepConfig:
    if args.config and args.preset:
        raise ValidationError("give either --config or --preset, not both")
    if args.config:
        config = parse_config(args.config)
        if args.profile:
            config = apply_profile(config, args.profile)
    else:
        config = preset_config(args.preset) if args.preset else SweepConfig()
        config = apply_profile(config, args.profile or "desk")
    if args.out:
        config = replace(config, output_dir=args.out)
    return config


def _single_cell(config: SweepConfig, r, T) -> SweepConfig:
    r_grid = (float(r),) if r is not None else config.r_grid[:1]
    t_grid = (float(T),) if T is not None else config.T_grid[:1]
    return replace(config, r_grid=r_grid, T_grid=t_grid)


def _cmd_simulate(args) -> None:
    config = _single_cell(_load_config(args), args.r, args.T)
    result = run_time_series(config, num_threads=args.threads)
    print(
        f"r={config.r_grid[0]:g} T={config.T_grid[0]:g}: {result.label.value}, "
        f"eN in [{result.trace.eN_min:.6g}, {result.trace.eN_max:.6g}], "
        f"mean E_N = {result.trace.mean_clamped():.6g}"
    )
    print(f"wrote {os.path.join(config.output_dir, 'timeseries.csv')}")


def _cmd_phase_diagram(args) -> None:
    config = _load_config(args)
    diagram = run_phase_diagram(config, num_threads=args.threads)
    counts = {
        label: int(np.sum(diagram.labels == label)) for label in ("SD", "SDR", "NSD")
    }
    print(
        f"{len(config.r_grid)}x{len(config.T_grid)} cells: "
        + ", ".join(f"{k}={v}" for k, v in counts.items())
    )
    print(f"wrote {os.path.join(config.output_dir, 'e_n.csv')}")


def _default_branch(config: SweepConfig) -> str:
    return "minus" if isinstance(config.model.attachment, SymmetricPair) else "single"


def _cmd_spectrum(args) -> None:
    config = _load_config(args)
    branch = args.branch or _default_branch(config)
    density = spectral_density(config.model, branch)
    grid = np.linspace(
        float(density.frequencies[0]), float(density.frequencies[-1]), args.resolution
    )
    smoothed = density.smoothed(grid)
    _write_csv(
        os.path.join(config.output_dir, "lines.csv"),
        ("omega", "weight"),
        zip(density.frequencies, density.weights),
    )
    _write_csv(
        os.path.join(config.output_dir, "smoothed.csv"),
        ("omega", "J_smoothed"),
        zip(grid, smoothed),
    )
    meta = {
        "branch": branch,
        "model": config.model.to_dict(),
        "mean_bandwidth": float(np.mean(density.line_bandwidths())),
        "n_lines": int(density.frequencies.size),
    }
    try:
        slope, residual = ohmic_fit(density, (0.0, config.model.omega0))
        meta["ohmic_fit"] = {
            "window": [0.0, config.model.omega0],
            "slope": slope,
            "relative_residual": residual,
        }
    except ValidationError:
        meta["ohmic_fit"] = None
    _write_json(os.path.join(config.output_dir, "spectrum_metadata.json"), meta)
    print(f"{branch} branch: {density.frequencies.size} lines")
    print(f"wrote {os.path.join(config.output_dir, 'lines.csv')}")


def _cmd_zeros(args) -> None:
    config = _load_config(args)
    d = separation(config.model)
    if d is None:
        raise ValidationError("zeros requires a symmetric_pair attachment")
    derived = derived_quantities(config.model)
    plus, minus = closed_form_zeros(d / config.model.a, derived.omega_cut)
    rows = []
    for zero_set in (plus, minus):
        for k, phi, omega in zip(zero_set.ks, zero_set.phis, zero_set.zeros):
            rows.append((zero_set.branch, int(k), repr(float(phi)), repr(float(omega))))
    _write_csv(
        os.path.join(config.output_dir, "zeros.csv"),
        ("branch", "k", "phi", "omega"),
        rows,
        raw=True,
    )
    print(f"d = {d:g}: {plus.zeros.size} plus zeros, {minus.zeros.size} minus zeros")
    if args.numeric:
        for branch, zero_set in (("plus", plus), ("minus", minus)):
            density = spectral_density(config.model, branch)
            found = locate_zeros_numeric(density, resolution=args.resolution)
            spacing = density.mean_spacing()
            matched = sum(
                1 for z in zero_set.zeros if np.any(np.abs(found - z) <= spacing)
            ) if found.size else 0
            print(
                f"{branch}: matched {matched}/{zero_set.zeros.size} closed-form zeros "
                f"within one mode spacing ({spacing:.3g})"
            )
    print(f"wrote {os.path.join(config.output_dir, 'zeros.csv')}")


def _cmd_tune_epsilon(args) -> None:
    config = _load_config(args)
    eps = tune_epsilon(config.model, args.branch, args.k)
    tuned = config.model.with_updates(epsilon=eps)
    derived = derived_quantities(tuned)
    print(f"epsilon = {eps!r}")
    print(f"Omega_gamma = {derived.Omega_gamma!r}")
    _write_json(
        os.path.join(config.output_dir, "tune_epsilon.json"),
        {
            "branch": args.branch,
            "k": args.k,
            "epsilon": eps,
            "Omega_gamma": derived.Omega_gamma,
            "model": config.model.to_dict(),
        },
    )


def _cmd_distance_scan(args) -> None:
    config = _single_cell(_load_config(args), args.r, args.T)
    try:
        s_values = [int(s) for s in args.s_values.split(",") if s.strip()]
    except ValueError:
        raise ValidationError("--s-values must be comma-separated integers") from None
    result = run_distance_scan(config, s_values, num_threads=args.threads)
    for s, d, eps, mean_en, label in result.rows:
        print(f"s={s} d={d:g} epsilon={eps:+.6f}: mean E_N = {mean_en:.6g} ({label})")
    if result.skipped:
        print(f"skipped (no real detuning): {list(result.skipped)}")
    print(f"wrote {os.path.join(config.output_dir, 'distance_scan.csv')}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
