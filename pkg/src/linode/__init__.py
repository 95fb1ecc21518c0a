"""Point transformations, canonical forms and Lie symmetries of linear ODEs."""

__version__ = "0.1.0"
