"""
End-to-end pipeline: resize, Gabor magnitudes, block features, KECA, class means.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from . import keca
from .classify import ClassModel, Measure, classify, fit_classes
from .exceptions import ParameterError
from .features import FeatureVector, extract_image
from .gabor import GaborKernel, make_bank
from .imageio import GrayImage, LabeledDataset, Role, resize_bilinear
from .settings import PipelineConfig

logger = logging.getLogger(__name__)


class FeatureExtractor:
    """Per-image feature extraction with an optional thread fan-out."""

    def __init__(self, config: PipelineConfig, progress: bool = True):
        self.config = config
        self.progress = progress
        self._bank: Optional[List[GaborKernel]] = None

    @property
    def bank(self) -> List[GaborKernel]:
        if self._bank is None:
            self._bank = make_bank(self.config.gabor_params())
        return self._bank

    def prepare(self, img: GrayImage) -> GrayImage:
        return resize_bilinear(img, self.config.image_width, self.config.image_height)

    def extract(self, img: GrayImage, label: Optional[str] = None) -> FeatureVector:
        return extract_image(
            self.prepare(img),
            self.bank,
            block_size=self.config.block_size,
            label=label,
            wrap=self.config.wrap,
        )

    def extract_many(
        self,
        images: Sequence[GrayImage],
        labels: Optional[Sequence[Optional[str]]] = None,
        desc: str = "Extracting features",
    ) -> List[FeatureVector]:
        labels = list(labels) if labels is not None else [None] * len(images)
        if len(labels) != len(images):
            raise ParameterError(f"{len(images)} images but {len(labels)} labels")
        if not images:
            return []
        bank = self.bank  # build once before fanning out
        logger.debug(f"Extracting {len(images)} images with {len(bank)} kernels on {self.config.threads} thread(s)")
        with ThreadPoolExecutor(max_workers=self.config.threads) as executor:
            results = executor.map(lambda pair: self.extract(*pair), zip(images, labels))
            return list(tqdm(results, total=len(images), desc=desc, disable=not self.progress, leave=False))


@dataclass(eq=False)
class FittedPipeline:
    config: PipelineConfig
    model: keca.KecaModel
    classes: ClassModel
    extractor: FeatureExtractor = field(default=None, repr=False)

    def __post_init__(self):
        if self.extractor is None:
            self.extractor = FeatureExtractor(self.config)

    def embed(self, feature) -> np.ndarray:
        return keca.project(self.model, feature)

    def embed_images(self, images: Sequence[GrayImage]) -> List[np.ndarray]:
        features = self.extractor.extract_many(images, desc="Embedding probes")
        return [self.embed(f) for f in features]

    def predict(self, img: GrayImage, measure=None) -> Tuple[str, float]:
        measure = Measure.parse(measure or self.config.measures()[0])
        return classify(self.embed(self.extractor.extract(img)), self.classes, measure)


class GaborKecaPipeline:
    def __init__(self, config: Optional[PipelineConfig] = None, progress: bool = True):
        self.config = config or PipelineConfig()
        self.extractor = FeatureExtractor(self.config, progress=progress)

    def fit_features(self, features: Sequence[FeatureVector], labels: Sequence[str]) -> FittedPipeline:
        cfg = self.config
        model = keca.fit(
            features,
            cfg.kernel_spec(),
            k=cfg.k,
            energy=cfg.energy,
            selection=cfg.selection,
            eig_solver=cfg.eig_solver,
        )
        classes = fit_classes(keca.project_train(model), labels)
        return FittedPipeline(config=cfg, model=model, classes=classes, extractor=self.extractor)

    def fit(self, dataset: LabeledDataset) -> FittedPipeline:
        """Fit on the dataset's train entries."""
        train = dataset.by_role(Role.TRAIN)
        if not train:
            raise ParameterError("dataset has no train entries")
        labels = [e.label for e in train]
        features = self.extractor.extract_many([e.image for e in train], labels, desc="Training features")
        fitted = self.fit_features(features, labels)
        logger.info(
            f"Pipeline fitted on {len(train)} images, {len(fitted.classes.labels)} classes, "
            f"k={fitted.model.effective_k}"
        )
        return fitted
