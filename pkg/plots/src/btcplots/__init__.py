"""Figures from btc-sense output files; no physics is recomputed here."""

__version__ = "0.1.0"

from .figures import KINDS, FigureSpec, render
from .io import GridError, SchemaError
