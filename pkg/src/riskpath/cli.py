"""``riskpath`` command line.

Exit codes: 0 success, 2 configuration, 3 ingest, 4 modeling, 5 evaluation.
"""
import argparse
import sys

from .errors import RiskpathError
from .pipeline import STAGES, load_config, run_pipeline, run_stage

EXIT_CODES = {"config": 2, "ingest": 3, "modeling": 4, "evaluation": 5}


def build_parser():
    parser = argparse.ArgumentParser(prog="riskpath", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=STAGES + ("pipeline",))
    parser.add_argument("--config", required=True,
                        help="YAML config path, or bundled:fixture_config.yaml")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, out=args.out, seed=args.seed)
        if args.command == "pipeline":
            manifest = run_pipeline(cfg)
            written = sorted(manifest["artifacts"])
        else:
            written = run_stage(cfg, args.command)
    except RiskpathError as exc:
        print(f"riskpath: {exc.stage} error: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.stage, 4)
    for name in written:
        print(cfg.output / name)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
