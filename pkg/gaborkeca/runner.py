import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from utils import save_json
from .classify import classify
from .evaluate import (
    EvalReport,
    ProbeScore,
    check_probe_labels,
    check_roles,
    compute_metrics,
    count_confusion,
    probe_entries,
    recognition_rate,
    score_embeddings,
    tau_sweep,
)
from .exceptions import ProtocolError
from .features import block_grid
from .gabor import gabor_outputs
from .imageio import Role, load_manifest, load_pgm, save_pgm, to_uint8_rescaled
from .modelfile import load_model, save_model
from .pipeline import FeatureExtractor, FittedPipeline, GaborKecaPipeline
from .report import ReportGenerator
from .settings import PipelineConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Fields a saved model fixes; the current config cannot change them.
MODEL_FIELDS = (
    "image_width", "image_height", "num_scales", "num_orientations", "k_max", "spacing", "sigma",
    "window", "dc_mode", "wrap", "block_size", "kernel", "kernel_sigma", "poly_degree", "poly_offset",
    "normalize_inputs", "k", "energy", "selection", "eig_solver",
)


class PipelineRunner:
    """Runs the CLI commands against one resolved PipelineConfig."""

    def __init__(
        self,
        config: Optional[PipelineConfig] = None,
        checkpoint_dir: Optional[PathLike] = None,
        progress: bool = True,
    ):
        self.config = config or PipelineConfig()
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir else None
        self.progress = progress
        self.reporter = ReportGenerator()

    def notify(self, message: str):
        logger.info(message)

    def _save_checkpoint(self, name: str, data: dict):
        """Save intermediate results to ``<checkpoint_dir>/<name>.json``."""
        if self.checkpoint_dir is None:
            return
        try:
            save_json(data, self.checkpoint_dir / f"{name}.json")
        except OSError as e:
            logger.error(f"Failed to save checkpoint {name}: {e}")

    def _load_manifest(self, manifest: PathLike, config: Optional[PipelineConfig] = None):
        cfg = config or self.config
        return load_manifest(manifest, cfg.image_width, cfg.image_height)

    def _load_model(self, model_path: PathLike) -> FittedPipeline:
        """Load a model, keeping its extraction settings and the current run's threads."""
        fitted = load_model(model_path)
        ignored = [
            f"{name}={getattr(self.config, name)!r} (model {getattr(fitted.config, name)!r})"
            for name in MODEL_FIELDS
            if getattr(self.config, name) != getattr(fitted.config, name)
        ]
        if ignored:
            logger.warning(f"Model {model_path} overrides the configured {', '.join(ignored)}")
        fitted.extractor = FeatureExtractor(replace(fitted.config, threads=self.config.threads), progress=self.progress)
        return fitted

    # --- commands ---------------------------------------------------------

    def gabor_dump(self, image_path: PathLike, out_dir: PathLike) -> List[str]:
        """Write every magnitude response of one image as a rescaled PGM."""
        extractor = FeatureExtractor(self.config, progress=self.progress)
        img = extractor.prepare(load_pgm(image_path))
        out = Path(out_dir)
        paths = []
        for mag in gabor_outputs(img, extractor.bank, wrap=self.config.wrap):
            name = f"gabor_nu{mag.scale}_mu{mag.orientation}.pgm"
            paths.append(save_pgm(to_uint8_rescaled(mag.values), out / name))
        self.notify(f"Wrote {len(paths)} magnitude images to {out}")
        return paths

    def feature_length(self) -> int:
        cfg = self.config
        rows, cols = block_grid(cfg.image_height, cfg.image_width, cfg.block_size)
        return cfg.num_scales * cfg.num_orientations * rows * cols

    def cmd_extract(self, manifest: PathLike) -> str:
        """Feature CSV text with one row per manifest entry."""
        dataset = self._load_manifest(manifest)
        extractor = FeatureExtractor(self.config, progress=self.progress)
        features = extractor.extract_many([e.image for e in dataset], [e.label for e in dataset])
        self.notify(f"Extracted {len(features)} feature vectors of length {self.feature_length()}")
        return self.reporter.features_csv(features, self.feature_length())

    def cmd_fit(self, manifest: PathLike, model_path: PathLike) -> FittedPipeline:
        dataset = self._load_manifest(manifest)
        fitted = GaborKecaPipeline(self.config, progress=self.progress).fit(dataset)
        save_model(model_path, fitted)
        m = fitted.model
        if m.requested_k is not None and m.effective_k < m.requested_k:
            self.notify(f"Model records effective k={m.effective_k} (requested {m.requested_k})")
        self._save_checkpoint("fit", {
            "model": str(model_path),
            "n_train": m.n_train,
            "feature_length": m.feature_length,
            "requested_k": m.requested_k,
            "effective_k": m.effective_k,
            "axes": m.axes,
            "classes": list(fitted.classes.labels),
        })
        return fitted

    def cmd_eval(
        self, manifest: PathLike, model_path: Optional[PathLike] = None
    ) -> Tuple[List[EvalReport], Dict[str, object]]:
        """Score every probe once per measure; one report row per (measure, tau)."""
        cfg = self.config
        if model_path is None:
            dataset = self._load_manifest(manifest)
            check_roles(dataset)
            self.notify(f"No model given; fitting on {len(dataset.by_role(Role.TRAIN))} train entries")
            fitted = GaborKecaPipeline(cfg, progress=self.progress).fit(dataset)
        else:
            fitted = self._load_model(model_path)
            dataset = self._load_manifest(manifest, fitted.config)
            check_probe_labels(dataset, fitted.classes.labels)
        probes = probe_entries(dataset)
        if not probes:
            raise ProtocolError("manifest has no positive-test or negative-test entries")
        embeddings = fitted.embed_images([e.image for e in probes])

        reports: List[EvalReport] = []
        recognition = {}
        for measure in cfg.measures():
            scores: List[ProbeScore] = score_embeddings(fitted, probes, embeddings, measure)
            taus = [cfg.tau] if cfg.tau is not None else tau_sweep(scores, cfg.tau_steps, cfg.tau_min, cfg.tau_max)
            for tau in taus:
                reports.append(compute_metrics(count_confusion(scores, tau), measure.value, tau))
            recognition[measure.value] = recognition_rate(scores)
            self.notify(f"Scored {len(scores)} probes with {measure.value} at {len(taus)} threshold(s)")

        self._save_checkpoint("eval", {
            "manifest": str(manifest),
            "probes": len(probes),
            "rows": [r.as_row() for r in reports],
        })
        return reports, recognition

    def cmd_predict(self, image_path: PathLike, model_path: PathLike) -> List[Tuple[str, str, float]]:
        """(measure, label, distance) of one image for each configured measure."""
        fitted = self._load_model(model_path)
        feature = fitted.extractor.extract(load_pgm(image_path))
        embedding = fitted.embed(feature)
        results = []
        for measure in self.config.measures():
            label, dist = classify(embedding, fitted.classes, measure)
            results.append((measure.value, label, dist))
        return results
