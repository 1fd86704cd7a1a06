"""Exact engine for the contact Lie superalgebra over a prime field:
construction, gradings, weight decomposition, derivation and
skew-symmetric super-biderivation spaces, and the inner-ness check."""

__version__ = "0.1.0"

from .contact import (
    ContactAlgebra,
    StructureConstantAlgebra,
    build_contact_algebra,
    contact_bracket,
    weight_decomposition,
)
from .derlab import (
    BilinearTable,
    SolveOptions,
    biderivation_space,
    inner_biderivation,
    project_inner,
    superderivation_space,
    verify_theorem,
)
from .ffield import Fp
from .superspace import Element, Monomial, Space

__all__ = [
    "BilinearTable",
    "ContactAlgebra",
    "Element",
    "Fp",
    "Monomial",
    "SolveOptions",
    "Space",
    "StructureConstantAlgebra",
    "biderivation_space",
    "build_contact_algebra",
    "contact_bracket",
    "inner_biderivation",
    "project_inner",
    "superderivation_space",
    "verify_theorem",
    "weight_decomposition",
    "__version__",
]
