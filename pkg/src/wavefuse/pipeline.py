"""Dataset handling, experiment orchestration, model and report documents.

Dataset layout on disk::

    root/class_<n>/<id>_vis.pgm
    root/class_<n>/<id>_thm.pgm

Class directories are ordered by ``<n>`` and labelled 0, 1, ... in that
order; the directory name is kept as the class name.
"""

from __future__ import annotations

import logging
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import classifier as clf
from .docio import read_json, require, write_json
from .eigenspace import EigenModel, fit_eigenspace, project
from .errors import DatasetError, DimensionMismatchError, SchemaError, VersionError
from .fusion import FusionRule, fuse_images, parse_rule
from .imagery import GrayImage, ImagePair, conform_pair, crop_to, load_image, save_image, vectorize
from .wavelet import SYMMETRIC, make_filter_bank, normalize_mode

log = logging.getLogger(__name__)

MODEL_FORMAT = "wavefuse.model"
MODEL_VERSION = 1
REPORT_FORMAT = "wavefuse.report"
REPORT_VERSION = 1

_CLASS_DIR = re.compile(r"^class_(\d+)$")
_PAIR_FILE = re.compile(r"^(.+)_(vis|thm)\.pgm$")


class ClassSamples(NamedTuple):
    label: int
    name: str
    pairs: list


@dataclass
class PairedDataset:
    classes: list
    image_dims: tuple
    warnings: list = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def class_names(self) -> list:
        return [c.name for c in self.classes]

    def all_pairs(self):
        for c in self.classes:
            yield from c.pairs


# --------------------------------------------------------------------------
# dataset I/O


def scan_dataset(root, policy: str = "strict") -> PairedDataset:
    """Read a paired visual/thermal dataset from ``root``.

    Files without a partner are skipped and listed in ``warnings``. Under
    ``strict`` every image must share one size; ``center_crop`` crops the
    whole dataset to the smallest common size.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    class_dirs = []
    for entry in root.iterdir():
        m = _CLASS_DIR.match(entry.name)
        if m and entry.is_dir():
            class_dirs.append((int(m.group(1)), entry))
    class_dirs.sort()

    warnings, raw = [], []
    for _, cdir in class_dirs:
        found = {}
        for f in sorted(cdir.iterdir()):
            m = _PAIR_FILE.match(f.name)
            if m:
                found.setdefault(m.group(1), {})[m.group(2)] = f
        pairs = []
        for sid in sorted(found):
            files = found[sid]
            if set(files) != {"vis", "thm"}:
                missing = "thm" if "vis" in files else "vis"
                warnings.append(f"{cdir.name}/{sid}: missing _{missing}.pgm, pair skipped")
                continue
            pairs.append((f"{cdir.name}/{sid}", load_image(files["vis"]), load_image(files["thm"])))
        if pairs:
            raw.append((cdir.name, pairs))
        else:
            warnings.append(f"{cdir.name}: no complete pairs, class skipped")
    if not raw:
        raise DatasetError(f"no complete image pairs found under {root}")

    dims = [img.dims for _, pairs in raw for _, v, t in pairs for img in (v, t)]
    target = (min(d[0] for d in dims), min(d[1] for d in dims))
    classes = []
    for label, (name, pairs) in enumerate(raw):
        out = []
        for sid, vis, thm in pairs:
            if policy == "strict":
                conform_pair(vis, thm, "strict")
                if vis.dims != dims[0]:
                    raise DimensionMismatchError(
                        f"{sid}: dims {vis.rows}x{vis.cols} differ from dataset dims {dims[0][0]}x{dims[0][1]}")
            elif policy == "center_crop":
                vis, thm = crop_to(vis, *target), crop_to(thm, *target)
            else:
                raise ValueError(f"unknown conform policy {policy!r}")
            out.append(ImagePair(vis, thm, label, sid))
        classes.append(ClassSamples(label, name, out))
    for w in warnings:
        log.warning(w)
    return PairedDataset(classes, classes[0].pairs[0].visual.dims, warnings)


def write_dataset(dataset: PairedDataset, root) -> None:
    """Write ``dataset`` as 8-bit PGM pairs in the scan layout."""
    root = Path(root)
    for c in dataset.classes:
        cdir = root / c.name
        cdir.mkdir(parents=True, exist_ok=True)
        for pair in c.pairs:
            sid = pair.sample_id.rsplit("/", 1)[-1]
            save_image(pair.visual, cdir / f"{sid}_vis.pgm")
            save_image(pair.thermal, cdir / f"{sid}_thm.pgm")


def _smooth_template(rng, rows, cols, n_freq=5):
    """Random low-frequency cosine pattern rescaled to [0.15, 0.85]."""
    coef = rng.standard_normal((n_freq, n_freq))
    u = np.arange(n_freq)
    coef /= 1.0 + u[:, None] + u[None, :]
    coef[0, 0] = 0.0
    cy = np.cos(np.pi * np.outer(np.arange(rows) + 0.5, u) / rows)
    cx = np.cos(np.pi * np.outer(np.arange(cols) + 0.5, u) / cols)
    t = cy @ coef @ cx.T
    t = (t - t.min()) / (t.max() - t.min())
    return 0.15 + 0.7 * t


def generate_synthetic_dataset(n_classes: int = 10, pairs_per_class: int = 20, dims=(64, 64),
                               noise_sigma: float = 0.01, illumination_spread: float = 0.2,
                               seed: int = 7) -> PairedDataset:
    """Seeded stand-in for a paired face database.

    Each class owns one smooth visual template and one distinct thermal
    template. A visual sample is its template times a random gain drawn
    from ``[1 - spread, 1 + spread]`` plus Gaussian noise; a thermal sample
    is its template plus noise, with no gain. Pixels are clipped to [0, 1].
    """
    rows, cols = dims
    if n_classes < 1 or pairs_per_class < 1:
        raise ValueError("n_classes and pairs_per_class must be positive")
    if rows < 16 or cols < 16:
        raise ValueError(f"dims must be at least 16x16, got {rows}x{cols}")
    if noise_sigma < 0 or not 0 <= illumination_spread < 1:
        raise ValueError("need noise_sigma >= 0 and 0 <= illumination_spread < 1")
    rng = np.random.default_rng(seed)
    classes = []
    for label in range(n_classes):
        vis_t = _smooth_template(rng, rows, cols)
        thm_t = _smooth_template(rng, rows, cols)
        name = f"class_{label + 1}"
        pairs = []
        for i in range(pairs_per_class):
            gain = rng.uniform(1.0 - illumination_spread, 1.0 + illumination_spread)
            vis = vis_t * gain + noise_sigma * rng.standard_normal((rows, cols))
            thm = thm_t + noise_sigma * rng.standard_normal((rows, cols))
            pairs.append(ImagePair(GrayImage(np.clip(vis, 0, 1)), GrayImage(np.clip(thm, 0, 1)),
                                   label, f"{name}/s{i:03d}"))
        classes.append(ClassSamples(label, name, pairs))
    return PairedDataset(classes, (rows, cols))


# --------------------------------------------------------------------------
# configuration and split


@dataclass(frozen=True)
class ExperimentConfig:
    levels: int = 5
    boundary_mode: str = SYMMETRIC
    wavelet: str = "db2"
    rule: str = "average"
    zero_ca: bool = False
    train_per_class: int = 10
    test_per_class: int = 10
    pca_k: int | None = None
    pca_var: float = 0.95
    hidden: int | None = None
    train: clf.TrainConfig = field(default_factory=clf.TrainConfig)
    split_seed: int = 0
    init_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "boundary_mode", normalize_mode(self.boundary_mode))
        parse_rule(self.rule)
        make_filter_bank(self.wavelet)
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if self.train_per_class < 1:
            raise ValueError(f"train_per_class must be >= 1, got {self.train_per_class}")
        if self.test_per_class < 1:
            raise ValueError(f"test_per_class must be >= 1, got {self.test_per_class}")
        if self.hidden is not None and self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")

    @property
    def fusion_rule(self) -> FusionRule:
        return parse_rule(self.rule)

    def to_doc(self):
        return asdict(self)

    @classmethod
    def from_doc(cls, doc):
        try:
            doc = dict(doc)
            doc["train"] = clf.TrainConfig(**doc["train"])
            return cls(**doc)
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"config: {exc}") from exc


def split_dataset(dataset: PairedDataset, train_per_class: int, test_per_class: int, seed: int):
    """Seeded per-class shuffle; first ``train_per_class`` train, next ``test_per_class`` test."""
    if train_per_class < 1 or test_per_class < 1:
        raise ValueError("train_per_class and test_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in dataset.classes:
        need = train_per_class + test_per_class
        if len(c.pairs) < need:
            raise DatasetError(f"{c.name} has {len(c.pairs)} pairs, split needs {need}")
        order = rng.permutation(len(c.pairs))
        train.extend(c.pairs[i] for i in order[:train_per_class])
        test.extend(c.pairs[i] for i in order[train_per_class:need])
    return train, test


def fuse_pairs(pairs, config: ExperimentConfig, workers: int = 1) -> np.ndarray:
    """Fuse each pair and stack the vectorized results as rows."""
    bank = make_filter_bank(config.wavelet)
    rule = config.fusion_rule

    def one(pair):
        return vectorize(fuse_images(pair.visual, pair.thermal, bank, config.boundary_mode,
                                     config.levels, rule, config.zero_ca))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, pairs))
    else:
        rows = [one(p) for p in pairs]
    return np.vstack(rows)


# --------------------------------------------------------------------------
# model document


@dataclass
class ModelDocument:
    config: ExperimentConfig
    image_dims: tuple
    class_names: list
    eigenmodel: EigenModel
    network: clf.MlpNetwork
    training: dict = field(default_factory=dict)

    def to_doc(self):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "config": self.config.to_doc(),
            "image_dims": list(self.image_dims),
            "class_names": list(self.class_names),
            "eigenmodel": self.eigenmodel.to_doc(),
            "network": self.network.to_doc(),
            "training": self.training,
        }

    @classmethod
    def from_doc(cls, doc):
        where = "model document"
        if require(doc, "format", where) != MODEL_FORMAT:
            raise SchemaError(f"{where}: format is {doc['format']!r}, expected {MODEL_FORMAT!r}")
        if require(doc, "version", where) != MODEL_VERSION:
            raise VersionError(doc["version"], MODEL_VERSION)
        model = cls(
            config=ExperimentConfig.from_doc(require(doc, "config", where)),
            image_dims=tuple(int(v) for v in require(doc, "image_dims", where)),
            class_names=list(require(doc, "class_names", where)),
            eigenmodel=EigenModel.from_doc(require(doc, "eigenmodel", where)),
            network=clf.MlpNetwork.from_doc(require(doc, "network", where)),
            training=dict(doc.get("training", {})),
        )
        if model.network.n_inputs != model.eigenmodel.k:
            raise SchemaError(f"{where}: network expects {model.network.n_inputs} inputs, eigenmodel k={model.eigenmodel.k}")
        if model.network.n_outputs != len(model.class_names):
            raise SchemaError(f"{where}: {model.network.n_outputs} outputs for {len(model.class_names)} classes")
        if model.eigenmodel.d != model.image_dims[0] * model.image_dims[1]:
            raise SchemaError(f"{where}: eigenmodel dimension {model.eigenmodel.d} != image size {model.image_dims}")
        return model

    def features(self, fused_vectors) -> np.ndarray:
        return project(self.eigenmodel, fused_vectors)

    def predict_features(self, features) -> np.ndarray:
        return clf.predict(self.network, features)


def save_model(model: ModelDocument, path) -> None:
    write_json(model.to_doc(), path)


def load_model(path) -> ModelDocument:
    return ModelDocument.from_doc(read_json(path))


# --------------------------------------------------------------------------
# reports


@dataclass
class ClassResult:
    class_label: int
    class_name: str
    n_train: int
    n_test: int
    correct: int

    @property
    def recognition_rate(self) -> float:
        return self.correct / self.n_test if self.n_test else 0.0


@dataclass
class ExperimentReport:
    per_class: list
    confusion: np.ndarray
    config: ExperimentConfig
    training: dict = field(default_factory=dict)
    train_ids: list = field(default_factory=list)
    test_ids: list = field(default_factory=list)

    @property
    def total_correct(self) -> int:
        return sum(r.correct for r in self.per_class)

    @property
    def total_tested(self) -> int:
        return sum(r.n_test for r in self.per_class)

    @property
    def overall_rate(self) -> float:
        return self.total_correct / self.total_tested

    def to_doc(self):
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "per_class": [
                {"class_label": r.class_label, "class_name": r.class_name, "n_train": r.n_train,
                 "n_test": r.n_test, "correct": r.correct, "recognition_rate": r.recognition_rate}
                for r in self.per_class
            ],
            "overall_rate": self.overall_rate,
            "total_correct": self.total_correct,
            "total_tested": self.total_tested,
            "confusion": self.confusion.astype(int).tolist(),
            "config": self.config.to_doc(),
            "training": self.training,
            "split": {"train": list(self.train_ids), "test": list(self.test_ids)},
        }

    def format_table(self) -> str:
        """Plain-text table: class, training count, test count, recognition rate."""
        head = f"{'Class':<14}{'Training':>10}{'Testing':>10}{'Recognition':>14}"
        lines = [head, "-" * len(head)]
        for r in self.per_class:
            lines.append(f"{r.class_name:<14}{r.n_train:>10}{r.n_test:>10}{100 * r.recognition_rate:>13.1f}%")
        lines.append("-" * len(head))
        lines.append(f"{'Overall':<14}{sum(r.n_train for r in self.per_class):>10}"
                     f"{self.total_tested:>10}{100 * self.overall_rate:>13.1f}%")
        return "\n".join(lines)


def save_report(report: ExperimentReport, path) -> None:
    write_json(report.to_doc(), path)


def _build_report(labels, preds, class_names, n_train, config, training, train_ids, test_ids):
    n = len(class_names)
    confusion = np.zeros((n, n), dtype=np.int64)
    np.add.at(confusion, (np.asarray(labels), np.asarray(preds)), 1)
    per_class = [ClassResult(i, class_names[i], int(n_train[i]), int(confusion[i].sum()), int(confusion[i, i]))
                 for i in range(n)]
    return ExperimentReport(per_class, confusion, config, training, list(train_ids), list(test_ids))


# --------------------------------------------------------------------------
# experiment


def run_experiment(dataset: PairedDataset, config: ExperimentConfig | None = None, workers: int = 1):
    """Fuse, fit PCA on the training split, train the MLP and score the test split.

    Returns ``(ModelDocument, ExperimentReport)``.
    """
    config = config or ExperimentConfig()
    train_pairs, test_pairs = split_dataset(dataset, config.train_per_class, config.test_per_class,
                                            config.split_seed)
    X_train = fuse_pairs(train_pairs, config, workers)
    X_test = fuse_pairs(test_pairs, config, workers)
    y_train = np.array([p.class_label for p in train_pairs])
    y_test = np.array([p.class_label for p in test_pairs])

    eig = fit_eigenspace(X_train, k=config.pca_k, variance=config.pca_var)
    F_train = project(eig, X_train)
    F_test = project(eig, X_test)
    log.info("eigenspace: k=%d of %d training vectors", eig.k, X_train.shape[0])

    n_classes = dataset.n_classes
    hidden = config.hidden or clf.default_hidden_size(n_classes)
    net = clf.init_network([eig.k, hidden, n_classes], seed=config.init_seed)
    net, train_report = clf.train(net, F_train, clf.one_hot(y_train, n_classes), config.train)
    log.info("training: %d epochs, final mse %.3g", train_report.epochs_run, train_report.final_mse)

    training = {"epochs_run": train_report.epochs_run, "final_mse": train_report.final_mse, "pca_k": eig.k,
                "hidden": hidden}
    model = ModelDocument(config, dataset.image_dims, dataset.class_names, eig, net, training)
    preds = clf.predict(net, F_test)
    report = _build_report(y_test, preds, dataset.class_names, np.bincount(y_train, minlength=n_classes),
                           config, training, [p.sample_id for p in train_pairs], [p.sample_id for p in test_pairs])
    return model, report


def evaluate_model(model: ModelDocument, dataset: PairedDataset, subset: str = "test", workers: int = 1):
    """Score ``model`` on ``dataset``.

    ``subset='test'`` rebuilds the model's own train/test split and scores the
    test part; ``subset='all'`` scores every pair.
    """
    if dataset.image_dims != model.image_dims:
        raise DimensionMismatchError(f"dataset dims {dataset.image_dims} != model dims {model.image_dims}")
    index = {name: i for i, name in enumerate(model.class_names)}
    unknown = [n for n in dataset.class_names if n not in index]
    if unknown:
        raise DatasetError(f"dataset classes unknown to the model: {unknown}")
    cfg = model.config
    if subset == "test":
        train_pairs, pairs = split_dataset(dataset, cfg.train_per_class, cfg.test_per_class, cfg.split_seed)
        train_ids = [p.sample_id for p in train_pairs]
    elif subset == "all":
        pairs, train_ids = list(dataset.all_pairs()), []
    else:
        raise ValueError(f"unknown subset {subset!r}")
    names = dataset.class_names
    labels = np.array([index[names[p.class_label]] for p in pairs])
    preds = model.predict_features(model.features(fuse_pairs(pairs, cfg, workers)))
    n_train = [cfg.train_per_class] * len(model.class_names)
    return _build_report(labels, preds, model.class_names, n_train, cfg, dict(model.training),
                         train_ids, [p.sample_id for p in pairs])
