"""
Linear and kernel projection baselines sharing the visualizer's encode/decode interface
"""
from baselines.kpca import KpcaModel, fit_kpca, kpca_decode, kpca_encode, load_kpca, save_kpca
from baselines.pca import PcaPlane, fit_pca, load_pca, pca_decode, pca_encode, save_pca

__all__ = [
    "KpcaModel",
    "PcaPlane",
    "fit_kpca",
    "fit_pca",
    "kpca_decode",
    "kpca_encode",
    "load_kpca",
    "load_pca",
    "pca_decode",
    "pca_encode",
    "save_kpca",
    "save_pca",
]
