"""Gramians, extension functions and maximizer certificates for finite Gabor systems."""

__version__ = "0.1.0"

from .config import Configuration, SymplecticMap, apply_map, classify, normalize_1n, normalize_three, validate
from .errors import (DegenerateConfig, DuplicatePoint, HRTLabError, InvalidSpec, NotApplicable, NotOneN,
                     NumericalGuard, QuadratureFailure, SingularBase, TailBoundTooLarge, ZeroWindow)
from .extension import (ExtensionEvaluator, build_extension, det_identity_residual, eval_F, extension_vector, fhat,
                        integral_F, symmetry_residual)
from .gram import HermitianGram, bochner_phi, collinear_gram_residual, gram_matrix, independence_test, min_eigenvalue
from .quadrature import QuadratureSpec
from .search import Certificate, FieldGrid, certify, escape_radius, find_maximizers, scan
from .transform import TFPoint, covariance_residual, ft_product_residual, orthogonality_residual, stft, stft_gauss_closed
from .window import Window, WindowSpec, eval_window, make_window

__all__ = [
    "Certificate", "Configuration", "DegenerateConfig", "DuplicatePoint", "ExtensionEvaluator", "FieldGrid",
    "HRTLabError", "HermitianGram", "InvalidSpec", "NotApplicable", "NotOneN", "NumericalGuard",
    "QuadratureFailure", "QuadratureSpec", "SingularBase", "SymplecticMap", "TFPoint", "TailBoundTooLarge",
    "Window", "WindowSpec", "ZeroWindow", "apply_map", "bochner_phi", "build_extension", "certify", "classify",
    "collinear_gram_residual", "covariance_residual", "det_identity_residual", "escape_radius", "eval_F",
    "eval_window", "extension_vector", "fhat", "find_maximizers", "ft_product_residual", "gram_matrix",
    "independence_test", "integral_F", "make_window", "min_eigenvalue", "normalize_1n", "normalize_three",
    "orthogonality_residual", "scan", "stft", "stft_gauss_closed", "symmetry_residual", "validate",
]
