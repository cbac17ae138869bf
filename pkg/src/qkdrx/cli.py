"""Command-line entry point.

Exit codes: 0 success, 1 internal error, 2 configuration or flag error,
3 unphysical parameters.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig, TIA_PRESETS, load_preset, parse_config, tia_presets
from .errors import ConfigError, DomainError, InfeasibleBiasError, UnphysicalCovarianceError
from .keyrate import secure_key_rate
from .noise import flat_rsd, integrate_rms, mean_rsd, psd_coefficients
from .receiver import DatasheetEntry, compare_datasheets, nep
from .sweep import SKR_COLUMNS, SweepResult, clearance_table, compare_designs, sweep_clearance, sweep_skr

log = logging.getLogger("qkdrx")

EXIT_OK, EXIT_INTERNAL, EXIT_CONFIG, EXIT_UNPHYSICAL = 0, 1, 2, 3

SUBCOMMANDS = ("noise", "clearance", "keyrate", "sweep-skr", "sweep-clearance",
               "compare-designs", "compare-datasheets")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qkdrx", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="INI file layered on top of the preset")
    p.add_argument("--preset", help="bundled preset name (e.g. mono-1G5, baseline, optimized)")
    p.add_argument("--out", type=Path, help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "md"), default="csv")
    p.add_argument("--refine-cutoff", action="store_true",
                   help="root-find the zero-key distance instead of reporting the grid point")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.preset:
        config = load_preset(args.preset, config)
    if args.config:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        config = parse_config(text, config)
    if args.refine_cutoff:
        config = replace(config, sweep=replace(config.sweep, refine_cutoff=True))
    return replace(config, out=str(args.out) if args.out else None, format=args.format)


def run_noise(cfg: RunConfig) -> SweepResult:
    d = cfg.design()
    a, b = psd_coefficients(d)
    rms = integrate_rms(d, verify=True)
    rsd_flat = flat_rsd(d)
    cols = ("label", "kind", "bandwidth_hz", "r_f_ohm", "i_c_a", "c_total_f",
            "white_psd_a2_per_hz", "quadratic_psd_a2_per_hz3", "i_rms_a",
            "mean_rsd_a_per_sqrt_hz", "flat_rsd_a_per_sqrt_hz", "nep_w_per_sqrt_hz")
    row = (d.label, d.interface.kind.value, d.bandwidth, d.r_f, d.transistor.i_c,
           d.total_capacitance, a, b, rms, mean_rsd(d), rsd_flat,
           nep(rsd_flat, cfg.detector.responsivity))
    return SweepResult("noise", cols, [row], provenance=cfg.provenance())


def run_keyrate(cfg: RunConfig) -> SweepResult:
    scenario = cfg.scenario()
    r = secure_key_rate(scenario)
    cols = SKR_COLUMNS + ("chi_line_snu", "raw_key_fraction_bits", "nu1", "nu2", "nu3", "nu4")
    row = (scenario.channel.length_km, scenario.xi_rx, r.t_channel, r.t_total, r.xi_in,
           r.i_ab, r.chi_be, r.key_fraction, r.skr, r.chi_line, r.raw_key_fraction, *r.nu)
    return SweepResult("keyrate", cols, [row], provenance=cfg.provenance())


def run_sweep_skr(cfg: RunConfig) -> SweepResult:
    s = cfg.sweep
    scenario = cfg.scenario()
    return sweep_skr(s.lengths, s.xi_values, scenario.detector, scenario.protocol,
                     scenario.channel, workers=s.workers, refine_cutoff=s.refine_cutoff,
                     max_points=s.max_points, provenance=cfg.provenance())


def run_compare_datasheets(cfg: RunConfig) -> SweepResult:
    candidate = None
    if cfg.preset in TIA_PRESETS or "tia" in cfg.given:
        d = cfg.design()
        nep_w = nep(flat_rsd(d), cfg.detector.responsivity)
        candidate = DatasheetEntry(d.label or "candidate", d.bandwidth / 1e6, nep_w * 1e12,
                                   cfg.receiver.cmrr_db)
    ranked = compare_datasheets(candidate)
    cols = ("rank", "name", "bw_mhz", "nep_pw_sqrthz", "cmrr_db", "candidate")
    rows = [(i + 1, e.name, e.bandwidth_mhz, e.nep_pw_sqrthz, e.cmrr_db, e.candidate)
            for i, e in enumerate(ranked)]
    return SweepResult("compare_datasheets", cols, rows, provenance=cfg.provenance())


def dispatch(subcommand: str, cfg: RunConfig) -> SweepResult:
    if subcommand == "noise":
        return run_noise(cfg)
    if subcommand == "clearance":
        return clearance_table(cfg.receiver_spec(), cfg.sweep.responsivities, cfg.provenance())
    if subcommand == "keyrate":
        return run_keyrate(cfg)
    if subcommand == "sweep-skr":
        return run_sweep_skr(cfg)
    if subcommand == "sweep-clearance":
        return sweep_clearance(cfg.sweep.rsd_values, cfg.receiver_spec(),
                               cfg.sweep.responsivities, cfg.provenance())
    if subcommand == "compare-designs":
        return compare_designs(tia_presets(cfg.sweep.presets), cfg.provenance())
    if subcommand == "compare-datasheets":
        return run_compare_datasheets(cfg)
    raise ConfigError(f"unknown subcommand {subcommand!r}")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = dispatch(args.subcommand, cfg)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (UnphysicalCovarianceError, InfeasibleBiasError, DomainError) as exc:
        log.error("unphysical parameters: %s", exc)
        return EXIT_UNPHYSICAL
    except Exception:  # noqa: BLE001
        log.exception("internal error")
        return EXIT_INTERNAL

    text = result.to_markdown() if cfg.format == "md" else result.to_csv()
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
