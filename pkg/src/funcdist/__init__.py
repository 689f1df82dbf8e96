"""Functional distances between industry production networks."""

from .distance import DistanceMatrix, DistanceRecord, all_pairs, tf_distance, unadjusted_distance
from .neural import NetworkArchitecture, TrainConfig, WeightSet, forward, train, train_last_layer
from .panel import IndustryYearDataset, build_dataset, load_firm_panel

__version__ = "0.1.0"

__all__ = [
    "DistanceMatrix", "DistanceRecord", "IndustryYearDataset", "NetworkArchitecture",
    "TrainConfig", "WeightSet", "all_pairs", "build_dataset", "forward", "load_firm_panel",
    "tf_distance", "train", "train_last_layer", "unadjusted_distance",
]
