"""From-scratch classifiers: random forest, extra trees, linear SVM, KNN."""

from .base import (
    CLASSIFIER_KINDS,
    default_params,
    fit_classifier,
    model_from_json,
    model_to_json,
    predict,
)
from .knn import KnnModel, KnnParams, fit_knn
from .search import SearchSpace, random_grid_search
from .svm import SvmModel, SvmParams, fit_linear_svm
from .trees import (
    ForestModel,
    ForestParams,
    Tree,
    fit_extra_trees,
    fit_random_forest,
    tree_depth,
    tree_leaf_count,
)

__all__ = [
    "CLASSIFIER_KINDS",
    "ForestModel",
    "ForestParams",
    "KnnModel",
    "KnnParams",
    "SearchSpace",
    "SvmModel",
    "SvmParams",
    "Tree",
    "default_params",
    "fit_classifier",
    "fit_extra_trees",
    "fit_knn",
    "fit_linear_svm",
    "fit_random_forest",
    "model_from_json",
    "model_to_json",
    "predict",
    "random_grid_search",
    "tree_depth",
    "tree_leaf_count",
]
