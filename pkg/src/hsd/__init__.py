"""Hierarchical sparse-dictionary landmark encoding and place recognition."""

from .hierarchy import HsdNetwork, descriptor_length, encode_landmark, max_pool, train_network
from .sparse import (
    HomeostasisState,
    SparseCode,
    SparseLearnConfig,
    cost,
    encode_mp,
    hebbian_update,
    homeostasis_update,
    learn_dictionary,
    reconstruction_rate,
)
from .topology import SomConfig, SomGrid, assign_atoms, project_code, som_update, som_winner, train_som
from .vpr import (
    PlaceCell,
    PlaceMemory,
    VigilanceConfig,
    azimuth_activity,
    build_pattern,
    localize,
    place_cell_activities,
    vigilance_step,
)

__all__ = [
    "HsdNetwork",
    "HomeostasisState",
    "PlaceCell",
    "PlaceMemory",
    "SomConfig",
    "SomGrid",
    "SparseCode",
    "SparseLearnConfig",
    "VigilanceConfig",
    "assign_atoms",
    "azimuth_activity",
    "build_pattern",
    "cost",
    "descriptor_length",
    "encode_landmark",
    "encode_mp",
    "hebbian_update",
    "homeostasis_update",
    "learn_dictionary",
    "localize",
    "max_pool",
    "place_cell_activities",
    "project_code",
    "reconstruction_rate",
    "som_update",
    "som_winner",
    "train_network",
    "train_som",
    "vigilance_step",
]
