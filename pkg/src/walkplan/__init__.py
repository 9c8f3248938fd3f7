"""walkplan: structured floor plan inference from indoor walk trajectories."""

from .grid import CellLabel, Dfpg, SegmentLabel

__all__ = ["CellLabel", "Dfpg", "SegmentLabel"]
__version__ = "0.1.0"
