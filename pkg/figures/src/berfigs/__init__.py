"""Plotting front end for the LAS MIMO simulator's result CSVs."""

from .render import FIGURES, MissingSeriesError, PlotSpec, render
from .schema import HEADER, Row, SchemaError, load_rows

__version__ = "0.1.0"
