"""Render standard figures from cavity-vacua CSV artifacts.

The renderers read only the documented CSV/JSON outputs of the cavity-vacua
command-line tool; they never import the simulation package itself.
"""

from .io import EmptyDataError, FigplotsError, MissingColumnError, read_table
from .figures import FIGURES, render

__all__ = ["FIGURES", "render", "read_table", "FigplotsError",
           "MissingColumnError", "EmptyDataError"]
