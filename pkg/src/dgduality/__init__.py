"""Derived local and Serre duality computations over connected graded-commutative dg-algebras."""

from .algebra import (DgAlgebra, check_dga, exterior, koszul, parse_algebra, polynomial, quotient,
                      trivial_extension, truncation)
from .bigraded import Bidegree, DimTable, ShiftSpec, Window
from .dgmodule import (ChainMap, PresentedDgModule, cohomology, cone, free_module, hom_complex,
                       k_dual, parse_module, residue_field, shift_twist, smart_truncate_ge,
                       smart_truncate_le, truncate_ge, truncate_lt)
from .duality import (DualityReport, GorensteinCertificate, balanced_check, condition_chi_check,
                      dualizing_module, finiteness_check, gorenstein_detect, local_duality_check,
                      reflexivity_check, serre_duality_check, vanishing_range_check)
from .errors import EngineError, InputError, NotGorenstein, WindowNotCertified, WindowTooSmall
from .homology import (derived_global_sections, ext_qgr, ext_table, local_cohomology_cech,
                       local_cohomology_colim)
from .linalg import Field
from .resolve import betti_table, lift_map, semifree_resolution, verify_resolution

__all__ = [
    "Bidegree", "ChainMap", "DgAlgebra", "DimTable", "DualityReport", "EngineError", "Field",
    "GorensteinCertificate", "InputError", "NotGorenstein", "PresentedDgModule", "ShiftSpec",
    "Window", "WindowNotCertified", "WindowTooSmall", "balanced_check", "betti_table", "check_dga",
    "cohomology", "condition_chi_check", "cone", "derived_global_sections", "dualizing_module",
    "ext_qgr", "ext_table", "exterior", "finiteness_check", "free_module", "gorenstein_detect",
    "hom_complex", "k_dual", "koszul", "lift_map", "local_cohomology_cech",
    "local_cohomology_colim", "local_duality_check", "parse_algebra", "parse_module",
    "polynomial", "quotient", "reflexivity_check", "residue_field", "semifree_resolution",
    "serre_duality_check", "shift_twist", "smart_truncate_ge", "smart_truncate_le",
    "trivial_extension", "truncate_ge", "truncate_lt", "truncation", "vanishing_range_check",
    "verify_resolution",
]
