"""t-SNE embeddings, SMOTE oversampling and six binary classifiers for
imbalanced tabular data, with SVG figures of the 2-D decision regions."""

__version__ = "0.1.0"

from . import classifiers, data, metrics, pipeline, smote, tsne, viz
from .classifiers import ClassifierSpec, Kind, default_classifiers
from .data import Dataset, generate_synthetic, load_csv, normalize, stratified_split
from .metrics import MetricsReport, evaluate
from .pipeline import PipelineConfig, run_all, run_option
from .smote import SmoteConfig, smote_oversample
from .tsne import TsneConfig, run_tsne

__all__ = [
    "__version__",
    "classifiers",
    "data",
    "metrics",
    "pipeline",
    "smote",
    "tsne",
    "viz",
    "ClassifierSpec",
    "Kind",
    "default_classifiers",
    "Dataset",
    "generate_synthetic",
    "load_csv",
    "normalize",
    "stratified_split",
    "MetricsReport",
    "evaluate",
    "PipelineConfig",
    "run_all",
    "run_option",
    "SmoteConfig",
    "smote_oversample",
    "TsneConfig",
    "run_tsne",
]
