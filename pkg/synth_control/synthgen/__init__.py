from .generator import GroundTruth, SynthGenParams, generate, write_synthgen

__all__ = ["GroundTruth", "SynthGenParams", "generate", "write_synthgen"]
