"""Interpretability and profile reporting."""

from .importance import (
    ImportanceMatrix,
    feature_importance,
    load_importance_csv,
    write_importance_csv,
    write_importance_svg,
)
from .profiles import (
    DEFAULT_MEMBRANES,
    ProfileReport,
    top_bottom_profiles,
    write_profiles_csv,
    write_profiles_svg,
)
from .scaffolds import (
    ACYCLIC_CLASS,
    ScaffoldReport,
    scaffold_report,
    write_scaffolds_csv,
)
from .svg import svg_boxes, svg_heatmap

__all__ = [
    "ACYCLIC_CLASS",
    "DEFAULT_MEMBRANES",
    "ImportanceMatrix",
    "ProfileReport",
    "ScaffoldReport",
    "feature_importance",
    "load_importance_csv",
    "scaffold_report",
    "svg_boxes",
    "svg_heatmap",
    "top_bottom_profiles",
    "write_importance_csv",
    "write_importance_svg",
    "write_profiles_csv",
    "write_profiles_svg",
    "write_scaffolds_csv",
]
