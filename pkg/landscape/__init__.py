"""
Loss and density landscapes over a latent mesh, plus manifold fidelity metrics
"""
from landscape.cka import cka
from landscape.density import density_grid
from landscape.export import grid_to_csv, grid_to_json, load_grid, write_grid
from landscape.fidelity import error_grid, fidelity
from landscape.grid import LandscapeGrid, evaluate_grid, mesh
from landscape.projectors import Projector, load_projector, save_projector

__all__ = [
    "LandscapeGrid",
    "Projector",
    "cka",
    "density_grid",
    "error_grid",
    "evaluate_grid",
    "fidelity",
    "grid_to_csv",
    "grid_to_json",
    "load_grid",
    "load_projector",
    "mesh",
    "save_projector",
    "write_grid",
]
