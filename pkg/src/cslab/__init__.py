"""Finite-dimensional workbench for C*-correspondences, crossed products and semicircular systems."""
__version__ = "0.1.0"

from .algebra import (AlgElement, LinearMapOnA, MatrixBlockAlgebra, TraceFunctional, center_analysis,
                      choi_positivity, element_arith, expectation_axioms, operator_norm)
from .bimodule import (Correspondence, SemiInnerPresentation, bimodular_isometry, endomorphism_algebra, fuse,
                       generated_subbimodule, generator_openness_probe, is_algebraic_generator, mostow_radius,
                       pp_basis, separation_completion, tensor_by_map)
from .crossed import (CrossedProductAlgebra, FiniteGroup, GroupAction, averaging_map, build_crossed_product,
                      fourier, freeness_infimum, galois_scan, relative_commutant, replete_bimodule, is_replete,
                      simplicity_probe, support, twisted_bimodule)
from .semicircular import (Covariance, TruncatedFock, build_T, central_vectors, creation, fgp_and_generator_check,
                           semicircular_operator, spanning_check, traciality_check, word_moment)
from .tolerances import (CSLabError, ConvergenceError, DepthError, InputDataError, PreconditionError,
                         SchemaError, StructuralError)

__all__ = [
    "AlgElement", "averaging_map", "bimodular_isometry", "build_crossed_product", "build_T",
    "center_analysis", "central_vectors", "choi_positivity", "ConvergenceError", "Correspondence",
    "Covariance", "creation", "CrossedProductAlgebra", "CSLabError", "DepthError", "element_arith",
    "endomorphism_algebra", "expectation_axioms", "fgp_and_generator_check", "FiniteGroup", "fourier",
    "freeness_infimum", "fuse", "galois_scan", "generated_subbimodule", "generator_openness_probe",
    "GroupAction", "InputDataError", "is_algebraic_generator", "is_replete", "LinearMapOnA",
    "MatrixBlockAlgebra", "mostow_radius", "operator_norm", "pp_basis", "PreconditionError",
    "relative_commutant", "replete_bimodule", "SchemaError", "semicircular_operator",
    "SemiInnerPresentation", "separation_completion", "simplicity_probe", "spanning_check",
    "StructuralError", "support", "tensor_by_map", "TraceFunctional", "traciality_check", "TruncatedFock",
    "twisted_bimodule", "word_moment"
]
