"""Conical Radon transform: forward projection, filtered back-projection and the Fourier slice route."""

from .core import (
    ConeSinogram,
    ConeSinogramGrid,
    SphereQuadrature,
    VolumeField,
    VolumeGrid,
    field_l2_error,
    make_sphere_quadrature,
)
from .errors import (
    ChecksumError,
    ConeRadonError,
    ConfigError,
    DomainError,
    FormatError,
    LatticeError,
    NumericalError,
    ShapeError,
    SupportError,
    TruncatedFileError,
    TruncationError,
    UnsupportedDimensionError,
    WeightError,
)
from .fileio import read_field, read_sinogram, write_field, write_sinogram
from .forward import RayQuadratureConfig, cone_integral, forward_project, lemma_deviation
from .fourier_slice import (
    SliceSampleSet,
    check_slice_identity,
    random_slice_samples,
    reconstruct_fourier_hankel,
    slice_lhs,
    slice_rhs,
)
from .phantom import Bump, PhantomSpec, eval_phantom, rasterize
from .reconstruct import (
    ReconstructionConfig,
    backproject_angular,
    backproject_spatial,
    filter_sinogram,
    reconstruct,
    reconstruct_fbp,
)
from .transforms import FilterConfig, bessel_j, hankel_transform, riesz_potential
from .config import parse_config

__version__ = "0.1.0"
