"""Six binary classifiers behind one fit / predict / predict_score interface.

Defaults follow the settings used for the benchmark: KNN k=3, RBF SVM
gamma=2 and C=1, trees of depth 5, a 10-tree forest with one feature per
split, an MLP with alpha=1 trained for 1000 epochs, and AdaBoost on stumps.
"""

from __future__ import annotations

import enum
import pickle
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from ..data import Dataset
from ..errors import DataError
from .adaboost import AdaBoostClassifier, adaboost_stage_weight
from .base import Classifier
from .knn import KNNClassifier
from .mlp import MLPClassifier, loss_and_grad, mlp_backprop_step
from .svm import SVMClassifier, rbf_kernel
from .tree import DecisionTreeClassifier, RandomForestClassifier

__all__ = [
    "Kind",
    "ClassifierSpec",
    "Classifier",
    "TrainedModel",
    "KNNClassifier",
    "SVMClassifier",
    "DecisionTreeClassifier",
    "RandomForestClassifier",
    "MLPClassifier",
    "AdaBoostClassifier",
    "adaboost_stage_weight",
    "mlp_backprop_step",
    "loss_and_grad",
    "rbf_kernel",
    "fit",
    "predict",
    "predict_score",
    "default_classifiers",
    "save_model",
    "load_model",
]

TrainedModel = Classifier


class Kind(str, enum.Enum):
    KNN = "KNN"
    SVM_RBF = "SVM_RBF"
    DECISION_TREE = "DECISION_TREE"
    RANDOM_FOREST = "RANDOM_FOREST"
    MLP = "MLP"
    ADABOOST = "ADABOOST"

    @property
    def label(self) -> str:
        """Short name used in result tables."""
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = text.strip().upper().replace("-", "_")
        for k in cls:
            if key in (k.value, k.label.upper()) or key in _ALIASES.get(k, ()):
                return k
        raise ValueError(f"unknown classifier {text!r}")


_LABELS = {
    Kind.KNN: "KNN",
    Kind.SVM_RBF: "SVM",
    Kind.DECISION_TREE: "DT",
    Kind.RANDOM_FOREST: "RF",
    Kind.MLP: "MLP",
    Kind.ADABOOST: "AdaBoost",
}
_ALIASES = {
    Kind.SVM_RBF: ("RBF_SVM", "RBF"),
    Kind.DECISION_TREE: ("TREE",),
    Kind.RANDOM_FOREST: ("FOREST",),
}
_CLASSES = {
    Kind.KNN: KNNClassifier,
    Kind.SVM_RBF: SVMClassifier,
    Kind.DECISION_TREE: DecisionTreeClassifier,
    Kind.RANDOM_FOREST: RandomForestClassifier,
    Kind.MLP: MLPClassifier,
    Kind.ADABOOST: AdaBoostClassifier,
}
DEFAULTS = {
    Kind.KNN: {"k": 3},
    Kind.SVM_RBF: {"gamma": 2.0, "C": 1.0, "tol": 1e-3, "max_passes": 100},
    Kind.DECISION_TREE: {"max_depth": 5, "min_split": 2},
    Kind.RANDOM_FOREST: {"max_depth": 5, "n_estimators": 10, "max_features": 1, "seed": 0},
    Kind.MLP: {"hidden_units": 100, "alpha": 1.0, "max_epochs": 1000, "seed": 0},
    Kind.ADABOOST: {"n_estimators": 50, "max_depth": 1},
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: Kind
    params: MappingProxyType = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind if isinstance(self.kind, Kind) else Kind.parse(str(self.kind))
        object.__setattr__(self, "kind", kind)
        unknown = set(self.params) - set(_CLASSES[kind]().get_params())
        if unknown:
            raise ValueError(f"unknown {kind.value} parameters: {sorted(unknown)}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def label(self) -> str:
        return self.kind.label

    def resolved(self) -> dict:
        return {**DEFAULTS[self.kind], **self.params}

    def build(self) -> Classifier:
        return _CLASSES[self.kind](**self.resolved())


def default_classifiers(seed: int = 0) -> list[ClassifierSpec]:
    """The six default specs, in table order, with ``seed`` for RF and MLP."""
    specs = []
    for kind in Kind:
        params = {"seed": seed} if "seed" in DEFAULTS[kind] else {}
        specs.append(ClassifierSpec(kind, params))
    return specs


def fit(spec: ClassifierSpec, train: Dataset) -> Classifier:
    return spec.build().fit(train.samples, train.labels)


def predict(model: Classifier, X) -> np.ndarray:
    return model.predict(X)


def predict_score(model: Classifier, X) -> np.ndarray:
    return model.predict_score(X)


MODEL_FORMAT = "embedviz-model"
MODEL_VERSION = 1


def save_model(model: Classifier, path) -> None:
    """Pickle ``model`` inside a small versioned envelope."""
    with open(path, "wb") as fh:
        pickle.dump({"format": MODEL_FORMAT, "version": MODEL_VERSION, "model": model}, fh,
                    protocol=4)


def load_model(path) -> Classifier:
    with open(path, "rb") as fh:
        env = pickle.load(fh)
    if not isinstance(env, dict) or env.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not an embedviz model file")
    if env.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model format version {env.get('version')}")
    return env["model"]
