"""Visual/thermal face recognition by db2 wavelet fusion, PCA and an MLP."""

from .classifier import MlpNetwork, TrainConfig, TrainReport, classify, init_network, train
from .eigenspace import EigenModel, backproject, fit_eigenspace, project
from .fusion import FusionRule, fuse_images, fuse_pyramids, parse_rule
from .imagery import GrayImage, ImagePair, conform_pair, devectorize, load_image, save_image, vectorize
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    ModelDocument,
    PairedDataset,
    evaluate_model,
    generate_synthetic_dataset,
    load_model,
    run_experiment,
    save_model,
    scan_dataset,
)
from .wavelet import (
    DecompositionPyramid,
    FilterBank,
    SubbandQuad,
    decompose,
    dwt2_step,
    idwt2_step,
    make_filter_bank,
    reconstruct,
    zero_approximation,
)

__version__ = "0.1.0"
