"""Feature schema, ingestion, WQI labelling, splitting and diagnostics."""

from .collinearity import VIF_CAP, VifResult, correlation_matrix, vif
from .io import RawTable, build_dataset, clean_impute, load_csv, read_dataset, write_dataset_csv
from .normalize import NormalizerStats, apply_normalizer, fit_normalizer
from .schema import CLASS_NAMES, CLASS_SLUGS, FEATURES, Dataset, WaterSample
from .split import stratified_split, stratified_split_indices
from .synthetic import generate_synthetic
from .wqi import (
    DEFAULT_THRESHOLDS,
    StandardsTable,
    check_thresholds,
    class_name,
    classify_wqi,
    compute_wqi,
    compute_wqi_rows,
)

__all__ = [
    "CLASS_NAMES", "CLASS_SLUGS", "DEFAULT_THRESHOLDS", "Dataset", "FEATURES",
    "NormalizerStats", "RawTable", "StandardsTable", "VIF_CAP", "VifResult", "WaterSample",
    "apply_normalizer", "build_dataset", "check_thresholds", "class_name", "classify_wqi",
    "clean_impute", "compute_wqi", "compute_wqi_rows", "correlation_matrix", "fit_normalizer",
    "generate_synthetic", "load_csv", "read_dataset", "stratified_split",
    "stratified_split_indices", "vif", "write_dataset_csv",
]
