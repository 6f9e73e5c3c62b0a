"""3D moment shape descriptors for voxelized molecules."""

__version__ = "0.1.0"

from ._accel import backend_name
from .basis import HahnParams, hahn_table
from .encoding import DEFAULT_LAYOUT, Layout, deinterleave, interleave
from .moments import (
    FAMILIES,
    FEATURE_COUNT,
    FEATURE_ORDER,
    MomentSet,
    complex_moments_3d,
    compute_moments,
    feature_vector,
    geometric_moments,
    hahn_moments_3d,
    legendre_moments_3d,
    reconstruct_hahn,
    zernike_moments_3d,
)
from .stats import LabeledDataset, class_dispersion
from .voxel import Molecule, VoxelGrid, parse_xyz, read_binvox, voxelize, write_binvox

__all__ = [
    "DEFAULT_LAYOUT",
    "FAMILIES",
    "FEATURE_COUNT",
    "FEATURE_ORDER",
    "HahnParams",
    "LabeledDataset",
    "Layout",
    "Molecule",
    "MomentSet",
    "VoxelGrid",
    "backend_name",
    "class_dispersion",
    "complex_moments_3d",
    "compute_moments",
    "deinterleave",
    "feature_vector",
    "geometric_moments",
    "hahn_moments_3d",
    "hahn_table",
    "interleave",
    "legendre_moments_3d",
    "parse_xyz",
    "read_binvox",
    "reconstruct_hahn",
    "voxelize",
    "write_binvox",
    "zernike_moments_3d",
]
