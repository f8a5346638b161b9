from .csvio import format_cell, parse_float, read_csv, render_csv, write_csv
from .percepta import canonical_percepta_columns, preprocess_percepta
from .synth import SynthDataset, assign_folds, synth_dataset
from .tables import (
    ECFP_WIDTH,
    EXPECTED_DIMS,
    DescriptorTable,
    FoldAssignment,
    MeasurementTable,
    NormalizationStats,
    PlateRecord,
    load_descriptor_table,
    load_ecfp_table,
    load_measurements,
    measurement_columns,
    standardize,
    write_descriptor_table,
    write_mean_measurements,
    write_measurements,
)

__all__ = [
    "ECFP_WIDTH",
    "EXPECTED_DIMS",
    "DescriptorTable",
    "FoldAssignment",
    "MeasurementTable",
    "NormalizationStats",
    "PlateRecord",
    "SynthDataset",
    "assign_folds",
    "canonical_percepta_columns",
    "format_cell",
    "load_descriptor_table",
    "load_ecfp_table",
    "load_measurements",
    "measurement_columns",
    "parse_float",
    "preprocess_percepta",
    "read_csv",
    "render_csv",
    "standardize",
    "synth_dataset",
    "write_csv",
    "write_descriptor_table",
    "write_mean_measurements",
    "write_measurements",
]
