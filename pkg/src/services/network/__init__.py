"""
Network components: parameter layers, residual encoder, implicit decoder and the full model.
"""

from src.services.network.decoder import (
    BasisMlpBank,
    ImplicitDecoder,
    MixtureWeights,
    QueryGrid,
    decode_aliif,
    decode_liif,
    expansion_weights,
    make_query_grid,
    render,
    unfold_features,
)
from src.services.network.encoder import FeatureMap, ResidualEncoder, encode
from src.services.network.model import ModelSpec, SuperResolutionModel, output_size

__all__ = [
    "BasisMlpBank",
    "FeatureMap",
    "ImplicitDecoder",
    "MixtureWeights",
    "ModelSpec",
    "QueryGrid",
    "ResidualEncoder",
    "SuperResolutionModel",
    "decode_aliif",
    "decode_liif",
    "encode",
    "expansion_weights",
    "make_query_grid",
    "output_size",
    "render",
    "unfold_features",
]
