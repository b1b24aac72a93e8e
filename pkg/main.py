import argparse
import logging
import sys
from dataclasses import fields

from config import DEFAULT_OUTPUT_DIR
from gaborkeca.exceptions import GaborKecaError, ParameterError, format_error
from gaborkeca.runner import PipelineRunner
from gaborkeca.settings import PipelineConfig
from utils import save_text

logger = logging.getLogger(__name__)


FLAG_HELP = {
    "measure": "l1 | l2 | mahalanobis | cosine | all",
    "tau": "Rejection threshold (default: sweep)",
    "tau_steps": "Number of thresholds in the sweep",
    "k": "Number of entropy components to keep",
    "kernel": "cosine | gaussian | polynomial",
    "selection": "entropy | eigenvalue",
    "threads": "Worker threads for feature extraction",
}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Flat key=value pipeline config file")
    # one flag per config key, spelled with dashes or underscores; values are coerced like config-file values
    for f in fields(PipelineConfig):
        names = [f"--{f.name.replace('_', '-')}"]
        if "_" in f.name:
            names.append(f"--{f.name}")
        common.add_argument(*names, dest=f.name, default=None, metavar=f.name.upper(), help=FLAG_HELP.get(f.name))
    common.add_argument("--out", default=None, help="Output file (directory for gabor-dump)")
    common.add_argument("--model", default=None, help="Model file path")
    common.add_argument("--checkpoint-dir", default=None, help="Write JSON checkpoints of each step here")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="Warnings only, no progress bars")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="gaborkeca",
        description="Gabor wavelet + kernel entropy component face recognition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dump = sub.add_parser("gabor-dump", parents=[common], help="Write the 40 magnitude responses of an image as PGM")
    dump.add_argument("image")
    extract = sub.add_parser("extract", parents=[common], help="Write one feature row per manifest image")
    extract.add_argument("manifest")
    fit = sub.add_parser("fit", parents=[common], help="Fit KECA + class means on the train entries")
    fit.add_argument("manifest")
    ev = sub.add_parser("eval", parents=[common], help="Run the positive/negative protocol")
    ev.add_argument("manifest")
    predict = sub.add_parser("predict", parents=[common], help="Classify a single image")
    predict.add_argument("image")
    return parser


def setup_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s - %(levelname)s - %(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(level)


def resolve_config(args) -> PipelineConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(PipelineConfig)}
    return PipelineConfig.from_sources(args.config, overrides)


def run(args) -> int:
    config = resolve_config(args)
    runner = PipelineRunner(config, checkpoint_dir=args.checkpoint_dir, progress=not args.quiet)

    if args.command == "gabor-dump":
        runner.gabor_dump(args.image, args.out or f"{DEFAULT_OUTPUT_DIR}/gabor")

    elif args.command == "extract":
        text = runner.cmd_extract(args.manifest)
        if args.out:
            save_text(text, args.out)
        else:
            sys.stdout.write(text)

    elif args.command == "fit":
        if not args.model:
            raise ParameterError("fit needs --model to write the model file")
        runner.cmd_fit(args.manifest, args.model)

    elif args.command == "eval":
        reports, recognition = runner.cmd_eval(args.manifest, args.model)
        if args.out:
            runner.reporter.write_eval(reports, config.to_dict(), recognition, csv_path=args.out)
            sys.stdout.write(runner.reporter.report_table(reports))
        else:
            sys.stdout.write(runner.reporter.report_csv(reports))

    elif args.command == "predict":
        if not args.model:
            raise ParameterError("predict needs --model")
        results = runner.cmd_predict(args.image, args.model)
        for measure, label, dist in results:
            prefix = f"{measure} " if len(results) > 1 else ""
            print(f"{prefix}{label} {dist:.10g}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.quiet)
    try:
        return run(args)
    except GaborKecaError as e:
        print(format_error(e), file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.debug("Unexpected error", exc_info=True)
        print(format_error(e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
