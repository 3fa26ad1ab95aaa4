"""
MNL-Bandit Lab

Simulate an assortment-optimizing learner against a multinomial logit customer whose
attraction parameters change over time. Subcommands:

    run           run the configured learner for R replications, write CSV + summary JSON
    sweep         repeat `run` over a grid of horizons, switch counts or variation budgets
    verify        run one named verification suite, write its JSON report
    gen-instance  write a lower-bound instance (schedule file + metadata sidecar)

Exit codes: 0 success, 1 failed verification, 2 configuration error.
"""

import argparse
import json
import os
import sys

import AdversaryGen
import Harness
from LabConfig import LabConfig
from LabErrors import ConfigError, RefusedError
from LabLoggers import setup_lab_logger, LabLogger
from VerifySuites import SUITE_NAMES, run_suite


BASE_NAME = "MNL-Bandit Lab"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=BASE_NAME,
                                     description="Simulate MNL-Bandit learners in non-stationary environments.")
    parser.add_argument('command', choices=('run', 'sweep', 'verify', 'gen-instance'))
    parser.add_argument('--config', required=False, help="YAML or JSON override file")
    parser.add_argument('--seed', type=int, required=False, help="master seed, overrides the config")
    parser.add_argument('--reps', type=int, required=False, help="replications, overrides the config")
    parser.add_argument('--out', required=False, help="output directory, overrides the config")
    parser.add_argument('--suite', choices=SUITE_NAMES, required=False, help="suite for `verify`")
    parser.add_argument('--kind', choices=('switching', 'variation'), default='switching',
                        help="instance family for `gen-instance`")
    parser.add_argument('--switches', type=int, default=1, help="L for switching instances")
    parser.add_argument('--budget', type=float, default=1.0, help="Delta for variation instances")
    parser.add_argument('-l', '--log_file', required=False)
    return parser


def _write_json(data: dict, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def _run(args) -> int:
    Harness.run_experiment(LabConfig().validate())
    return EXIT_OK


def _sweep(args) -> int:
    config = LabConfig().validate()
    parameter, values = LabConfig().sweep_grid()
    result = Harness.sweep(config, parameter, values)
    LabLogger().info(f"Sweep over {parameter}: slope {result.slope}, bound slope {result.bound_slope}")
    return EXIT_OK


def _verify(args) -> int:
    if args.suite is None:
        raise ConfigError("--suite", f"verify needs one of {', '.join(SUITE_NAMES)}")
    report = run_suite(args.suite, LabConfig().verify_settings(), LabConfig().master_seed())
    _write_json(report.to_dict(), os.path.join(LabConfig().output_dir(), f"verify_{args.suite}.json"))
    return EXIT_OK if report.passed else EXIT_FAILED


def _gen_instance(args) -> int:
    config = LabConfig().validate()
    n_items = config.catalog.n_items
    k_cap = config.catalog.capacity
    if args.kind == 'switching':
        instance = AdversaryGen.gen_switching_instance(n_items, k_cap, config.horizon, args.switches, config.master_seed)
    else:
        instance = AdversaryGen.gen_variation_instance(n_items, k_cap, config.horizon, args.budget, config.master_seed)
    path = os.path.join(LabConfig().output_dir(), f"{args.kind}_instance.json")
    AdversaryGen.write_instance(instance, path)
    LabLogger().info(f"Instance written to {path}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)

    try:
        # This is the only place where a config file is passed in. From here, the LabConfig
        # will act like a singleton pattern and continue to use the config file (if one was passed in).
        LabConfig().set_config(args.config)
        if args.seed is not None:
            LabConfig().set_master_seed(args.seed)
        if args.reps is not None:
            LabConfig().set_replications(args.reps)
        if args.out is not None:
            LabConfig().set_output_dir(args.out)
        seed = LabConfig().master_seed()

        # Make sure the output directory exists
        os.makedirs(LabConfig().output_dir(), exist_ok=True)

        with open(os.path.join(LabConfig().output_dir(), "config.yaml"), "w+", encoding="utf-8") as f:
            f.write(str(LabConfig()))

        # Only need to setup the logger once
        setup_lab_logger(LabConfig().log_file(args.log_file))
        logger = LabLogger()
        logger.debug(LabConfig())
        logger.debug("Unrecognized settings:\n" + LabConfig().unrecognized_user_settings_as_str())
        logger.info(f"New {args.command} started with seed {seed}")

        if args.command == 'run':
            return _run(args)
        elif args.command == 'sweep':
            return _sweep(args)
        elif args.command == 'verify':
            return _verify(args)
        return _gen_instance(args)
    except (ConfigError, RefusedError) as e:
        LabLogger().warning(f"Invalid input: {e}")
        print(f"{BASE_NAME}: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
