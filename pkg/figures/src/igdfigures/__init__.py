"""Figure rendering for igd benchmark outputs, via the CSV contract only."""

from .render import (
    CSV_HEADER,
    METHOD_ORDER,
    AllSeriesMissingError,
    FigureSpec,
    PanelSpec,
    figure_spec_from_summaries,
    read_curve,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "METHOD_ORDER",
    "AllSeriesMissingError",
    "FigureSpec",
    "PanelSpec",
    "figure_spec_from_summaries",
    "read_curve",
    "render",
]
