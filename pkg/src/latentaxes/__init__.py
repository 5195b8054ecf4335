"""Attribute-axis reorganization of GAN latent spaces.

A PCA split isolates the high-variance latent coordinates, an autoencoder
maps them to a code whose first K axes are attribute sliders (decorrelated
by an L1 correlation penalty), and a synthetic oracle world lets the whole
editing protocol run and be scored without any pretrained generator.
"""

__version__ = "0.1.0"

from .editor import EditPipeline, edit, encode, decode, set_attribute
from .pca import PcaModel, fit_pca, project, reconstruct
from .gaussianize import AttributeTransform, fit_transform, inv_norm_cdf
from .training import EncoderDecoder, TrainConfig, train
from .oracle import SyntheticWorld, make_world

__all__ = [
    "AttributeTransform",
    "EditPipeline",
    "EncoderDecoder",
    "PcaModel",
    "SyntheticWorld",
    "TrainConfig",
    "decode",
    "edit",
    "encode",
    "fit_pca",
    "fit_transform",
    "inv_norm_cdf",
    "make_world",
    "project",
    "reconstruct",
    "set_attribute",
    "train",
]
