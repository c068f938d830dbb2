"""
Constrained auto-encoder that embeds a training trajectory in a 2-D latent grid
"""
from visualizer.anchors import AnchorSet, build_anchors
from visualizer.losses import loss_anch, loss_grid, loss_rec, loss_traj
from visualizer.model import VisualizerModel, decode, encode, load_visualizer, save_visualizer
from visualizer.training import TrainingLog, train_visualizer

__all__ = [
    "AnchorSet",
    "TrainingLog",
    "VisualizerModel",
    "build_anchors",
    "decode",
    "encode",
    "load_visualizer",
    "loss_anch",
    "loss_grid",
    "loss_rec",
    "loss_traj",
    "save_visualizer",
    "train_visualizer",
]
