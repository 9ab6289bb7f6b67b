"""Parallel C4.5-style decision tree growth over a farm-with-feedback runtime."""

from .dataset import CaseSubset, Schema, TrainingSet, load_data, load_schema, root_subset
from .parallel import CostModel, build, build_att_test, build_parallel
from .runtime import FarmConfig, farm_run
from .synth import SyntheticSpec, generate
from .tree import DecisionTree, GrowParams, build_sequential

__all__ = [
    "CaseSubset", "CostModel", "DecisionTree", "FarmConfig", "GrowParams", "Schema",
    "SyntheticSpec", "TrainingSet", "build", "build_att_test", "build_parallel",
    "build_sequential", "farm_run", "generate", "load_data", "load_schema", "root_subset",
]
