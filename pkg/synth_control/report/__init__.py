from .artifacts import ArtifactWriter
from .config import StudyConfig, dump_config, load_config, parse_config
from .schema import (
    FitDocument,
    LooDocument,
    PlaceboSpaceDocument,
    PlaceboTimeDocument,
    PrepReport,
    SwapDocument,
)

__all__ = [
    "ArtifactWriter",
    "FitDocument",
    "LooDocument",
    "PlaceboSpaceDocument",
    "PlaceboTimeDocument",
    "PrepReport",
    "StudyConfig",
    "SwapDocument",
    "dump_config",
    "load_config",
    "parse_config",
]
