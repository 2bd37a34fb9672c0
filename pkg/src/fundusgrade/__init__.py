"""Classical lesion segmentation and five-grade diabetic retinopathy
classification for color fundus photographs."""

from .classifiers import LABEL_NAMES, Label
from .config import PipelineConfig
from .enhance import ClaheParams, clahe, median_filter
from .features import FeatureVector, assemble_features, moments, scaler_fit, scaler_transform
from .lesions import (
    LesionKind,
    LesionResult,
    detect_exudates,
    detect_microaneurysms,
    detect_vessels,
)
from .raster import BinaryMask, GrayRaster, RgbRaster, resize_bilinear
from .regions import connected_components, filter_components_by_area

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "ClaheParams",
    "FeatureVector",
    "GrayRaster",
    "LABEL_NAMES",
    "Label",
    "LesionKind",
    "LesionResult",
    "PipelineConfig",
    "RgbRaster",
    "assemble_features",
    "clahe",
    "connected_components",
    "detect_exudates",
    "detect_microaneurysms",
    "detect_vessels",
    "filter_components_by_area",
    "median_filter",
    "moments",
    "resize_bilinear",
    "scaler_fit",
    "scaler_transform",
    "__version__",
]
