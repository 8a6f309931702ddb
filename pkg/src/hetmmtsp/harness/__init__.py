"""File formats, experiment matrices, reference comparison and the CLI."""

from .experiments import (
    ComparisonReport,
    PlotRecord,
    ReferenceTable,
    Stats,
    compare_to_reference,
    config_from_options,
    deviation,
    emit_plot_data,
    load_reference,
    run_matrix,
)
from .formats import ResultRow, parse_instance, read_instance, read_results, save_instance, write_instance
