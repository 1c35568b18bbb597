# main.py
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__, settings
from .numerics.common import (
    ConfigValidationError,
    ConfigurationError,
    OutputError,
    QndSimulationError,
    configure_logging,
)
from .sweep_module import list_presets, load_config, preset_config, run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CONFIG_HELP = """\
Sweep configuration (JSON object):
  name            label used in logs (default "sweep")
  base            SystemParams: n_atoms (required), alpha=10, tau=0, n_c=0, n_d=0,
                  chi_bar=0, gamma_bar=0
  tau_grid        {start=0, stop=pi/2, count=201}, count >= 1
  chi_bar_list    attenuation values, each >= 0 (default [0])
  outcome_list    [[n_c, n_d], ...] (default: base outcome)
  tasks           nonempty subset of photon-dist, wigner-conditional,
                  wigner-marginal, entanglement, fidelity, expectations,
                  variances, criteria, basis-probabilities
  snapshot_taus   times for photon-dist, wigner-* and basis-probabilities
                  (default [0])
  n_max           photon grid size per mode (default alpha^2 + 6 alpha)
  basis_pairs     [["z","z"], ["x","x"], ["y","y"]] by default
  wigner          {k_project=N//2, which_bec=1, theta_count=181,
                   phi_count=361, per_panel_scale=false}
  output          {directory="results", format="csv"|"json", precision=12}
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnd-becs",
        description="Entanglement of two BECs by QND measurement: sweeps and figure data",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level (env QND_BECS_LOG_LEVEL)")
    parser.add_argument(
        "--workers", type=int, default=None,
        help="worker processes (env QND_BECS_WORKERS, default 1)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a sweep from a configuration file",
                              epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    run.add_argument("config", type=Path, help="JSON configuration file")
    run.add_argument("--out", default=None, help="output directory (overrides output.directory)")

    preset = commands.add_parser("preset", help="run a named figure preset")
    preset.add_argument("name", help="preset name, e.g. fig5a")
    preset.add_argument("--out", default=None, help="output directory (default QND_BECS_OUTPUT_DIR/<name>)")

    validate = commands.add_parser("validate", help="check a configuration file without running it",
                                   epilog=CONFIG_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    validate.add_argument("config", type=Path, help="JSON configuration file")

    commands.add_parser("list-presets", help="list the available figure presets")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        workers = settings.worker_count(args.workers)

        if args.command == "list-presets":
            for name, description in list_presets():
                print(f"{name:10s} {description}")
            return EXIT_OK

        if args.command == "validate":
            config = load_config(args.config)
            print(f"{args.config}: valid ({len(config.tasks)} tasks, {config.tau_grid.count} tau points)")
            return EXIT_OK

        if args.command == "run":
            config = load_config(args.config)
            manifest = run_sweep(config, output_directory=args.out, workers=workers)
        else:
            out = args.out or str(Path(settings.OUTPUT_DIR) / args.name)
            config = preset_config(args.name, output_directory=out)
            manifest = run_sweep(config, workers=workers)
        print(f"wrote {len(manifest['files'])} tables")
        return EXIT_OK

    except ConfigValidationError as e:
        for error in e.errors:
            print(f"config error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as e:
        logger.error(f"Error in configuration: {str(e)}")
        return EXIT_CONFIG
    except OutputError as e:
        logger.error(f"Error writing output: {str(e)}")
        return EXIT_CONFIG
    except QndSimulationError as e:
        logger.error(f"Error during simulation: {str(e)}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
