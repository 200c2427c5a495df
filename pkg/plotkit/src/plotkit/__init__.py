"""Rendering for the band-structure engine's CSV output."""

from .render import EmptyInput, MissingColumn, PlotSpec, break_wraps, render

__version__ = "0.1.0"
