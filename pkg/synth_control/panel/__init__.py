from .dataset import PanelDataset, validate_panel
from .study import DonorWeights, PredictorWeights, StudySpec, validate_spec

__all__ = [
    "PanelDataset",
    "validate_panel",
    "StudySpec",
    "validate_spec",
    "DonorWeights",
    "PredictorWeights",
]
