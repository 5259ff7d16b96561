"""Command-line driver: ``btc-sense <mode> --config <file> [overrides]``.

Exit codes: 0 success, 1 configuration or input error, 2 integration
failure, 3 output I/O error.
"""

import argparse
import logging
import sys

from . import __version__
from .analysis import FitFailure
from .config import MODES, ConfigError, config_from_dict, load_config
from .integrator import IntegrationFailure
from .runs import RUNNERS


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btc-sense",
        description=(
            "Collective-spin AC-sensing simulator: joint master-equation / "
            "response integration, QFI analysis, sweeps and scans."
        ),
    )
    parser.add_argument("mode", nargs="?", choices=MODES, help="run mode")
    parser.add_argument("--version", action="version", version=f"btc-sense {__version__}")
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--mode", dest="mode_flag", choices=MODES)

    phys = parser.add_argument_group("physical parameters")
    phys.add_argument("--n-spins", type=int)
    phys.add_argument("--omega0", type=float)
    phys.add_argument("--kappa", type=float)
    phys.add_argument("--g", type=float)
    phys.add_argument("--omega-ac", type=float)
    phys.add_argument("--phi", type=float)
    phys.add_argument("--no-ac", dest="ac_on", action="store_const", const=False,
                      help="disable the AC drive in both equations")

    num = parser.add_argument_group("numerics")
    num.add_argument("--t-max", type=float)
    num.add_argument("--t-max-factor", type=float)
    num.add_argument("--n-out", type=int)
    num.add_argument("--rtol", type=float)
    num.add_argument("--atol", type=float)

    run = parser.add_argument_group("run control")
    run.add_argument("--output-dir")
    run.add_argument("--n-workers", type=int)
    run.add_argument("--n-grid", type=_int_list, help="comma-separated N values")
    run.add_argument("--kappa-grid", type=_float_list)
    run.add_argument("--delta-phi-grid", type=_float_list, help="units of pi")
    run.add_argument("--delta-omega-grid", type=_float_list, help="units of kappa")
    run.add_argument("--envelope-threshold", type=float)
    run.add_argument("--mf-dg", type=float)
    run.add_argument("--resonance-arcsin-omega", type=float)
    run.add_argument("--input", dest="fit_inputs", action="append",
                     help="trajectory CSV to fit (repeatable; fit mode)")
    return parser


_OVERRIDE_KEYS = (
    "n_spins", "omega0", "kappa", "g", "omega_ac", "phi", "ac_on",
    "t_max", "t_max_factor", "n_out", "rtol", "atol",
    "output_dir", "n_workers", "n_grid", "kappa_grid",
    "delta_phi_grid", "delta_omega_grid", "envelope_threshold", "mf_dg",
    "resonance_arcsin_omega", "fit_inputs",
)


def _collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    mode = args.mode or args.mode_flag
    if mode is not None:
        overrides["mode"] = mode
    return overrides


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    overrides = _collect_overrides(args)
    try:
        if args.config:
            config = load_config(args.config, overrides)
        else:
            params = {k: overrides.pop(k) for k in list(overrides)
                      if k in ("n_spins", "omega0", "kappa", "g", "omega_ac", "phi",
                               "ac_on", "t_max", "t_max_factor", "n_out", "rtol", "atol")}
            config = config_from_dict({**overrides, "params": params})
    except FileNotFoundError as exc:
        print(f"btc-sense: config error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"btc-sense: config error: {exc}", file=sys.stderr)
        return 1

    try:
        result = RUNNERS[config.mode](config)
    except IntegrationFailure as exc:
        print(f"btc-sense: integration failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, FitFailure, ValueError) as exc:
        print(f"btc-sense: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"btc-sense: I/O error: {exc}", file=sys.stderr)
        return 3
    for name, path in result.get("paths", {}).items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
