"""Run the positive/negative protocol on a local ORL-format face database.

Usage:
  - Point at a directory holding one sub-directory per identity (s1 ... s40),
    each with that person's PGM images (1.pgm ... 10.pgm).
  - Run: `python scripts/orl_protocol.py /data/orl --n-train 1 2 --n-impostors 5`

The last ``--impostor-identities`` identities (in natural order) are held out
and never enrolled. For every remaining identity the first ``--n-train`` images
train its class, the rest are positive probes, and ``--n-impostors`` images of
held-out identities are drawn with a seeded permutation as negative probes.
One table is printed per training-set size. Results are informational; there
is no pass threshold.
"""
import argparse
import logging
import os
import re
import sys
from pathlib import Path


def _natural_key(name: str):
    return [int(part) if part.isdigit() else part for part in re.split(r"(\d+)", name)]


def load_identities(root: Path, limit: int = None) -> dict:
    from gaborkeca.imageio import load_pgm

    dirs = sorted((d for d in root.iterdir() if d.is_dir()), key=lambda d: _natural_key(d.name))
    if limit:
        dirs = dirs[:limit]
    identities = {}
    for d in dirs:
        files = sorted(d.glob("*.pgm"), key=lambda p: _natural_key(p.stem))
        if files:
            identities[d.name] = [load_pgm(p) for p in files]
    return identities


def split_identities(identities: dict, held_out: int):
    """(enrolled, impostor pool): the last ``held_out`` identities form the pool."""
    labels = sorted(identities, key=_natural_key)
    if not 0 <= held_out < len(labels):
        from gaborkeca.exceptions import ParameterError

        raise ParameterError(f"cannot hold out {held_out} of {len(labels)} identities")
    cut = len(labels) - held_out
    enrolled = {label: identities[label] for label in labels[:cut]}
    pool = {label: identities[label] for label in labels[cut:]}
    return enrolled, pool


def run_size(cfg, enrolled: dict, pool: dict, n_train: int, n_impostors: int, reporter) -> None:
    """Compose, fit and score one training-set size; print one table per measure."""
    from gaborkeca.evaluate import (
        check_roles,
        compute_metrics,
        count_confusion,
        format_percent,
        probe_entries,
        recognition_rate,
        score_embeddings,
        tau_sweep,
    )
    from gaborkeca.imageio import compose_classes
    from gaborkeca.pipeline import GaborKecaPipeline

    dataset = compose_classes(enrolled, n_train, n_impostors, seed=cfg.seed, impostor_pool=pool)
    check_roles(dataset)
    fitted = GaborKecaPipeline(cfg).fit(dataset)
    probes = probe_entries(dataset)
    embeddings = fitted.embed_images([e.image for e in probes])

    print(f"== n_train={n_train}: {len(enrolled)} classes, {len(probes)} probes ==")
    for measure in cfg.measures():
        scores = score_embeddings(fitted, probes, embeddings, measure)
        taus = [cfg.tau] if cfg.tau is not None else tau_sweep(scores, cfg.tau_steps, cfg.tau_min, cfg.tau_max)
        reports = [compute_metrics(count_confusion(scores, tau), measure.value, tau) for tau in taus]
        print(reporter.report_table(reports))
        print(f"{measure.value}: recognition rate {format_percent(recognition_rate(scores))}\n")


def main(argv=None) -> int:
    # Ensure project root is on sys.path so `from config import ...` works when
    # running this script directly (python scripts/orl_protocol.py).
    project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
    if project_root not in sys.path:
        sys.path.insert(0, project_root)

    from gaborkeca.exceptions import GaborKecaError, format_error
    from gaborkeca.report import ReportGenerator
    from gaborkeca.settings import PipelineConfig

    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("root", help="Directory with one sub-directory of PGM images per identity")
    parser.add_argument("--n-train", type=int, nargs="+", default=[1, 2], help="One or more training-set sizes")
    parser.add_argument("--n-impostors", type=int, default=5)
    parser.add_argument("--impostor-identities", type=int, default=10,
                        help="Hold out the last N identities as the impostor pool")
    parser.add_argument("--identities", type=int, default=None, help="Use only the first N identities")
    parser.add_argument("--config", default=None)
    parser.add_argument("--measure", default="all")
    parser.add_argument("--seed", default=None)
    parser.add_argument("--threads", default=None)
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
    try:
        cfg = PipelineConfig.from_sources(
            args.config, {"measure": args.measure, "seed": args.seed, "threads": args.threads}
        )
        identities = load_identities(Path(args.root), args.identities)
        enrolled, pool = split_identities(identities, args.impostor_identities)
        reporter = ReportGenerator()
        for n_train in args.n_train:
            run_size(cfg, enrolled, pool, n_train, args.n_impostors, reporter)
    except GaborKecaError as e:
        print(format_error(e), file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
