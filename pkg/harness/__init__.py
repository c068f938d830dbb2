"""
Trajectory generation, balancing schemes and the NVTJ checkpoint format
"""
from harness.balancing import BalancingHistory, compute_weights
from harness.storage import load_trajectory, save_trajectory
from harness.training import run_training
from harness.trajectory import NormStats, Segment, Trajectory, denormalize, merge_trajectories, normalize

__all__ = [
    "BalancingHistory",
    "NormStats",
    "Segment",
    "Trajectory",
    "compute_weights",
    "denormalize",
    "load_trajectory",
    "merge_trajectories",
    "normalize",
    "run_training",
    "save_trajectory",
]
