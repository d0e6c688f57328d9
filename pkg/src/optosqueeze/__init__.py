"""Squeezing of a nanomechanical mirror driven by laser light and broadband squeezed vacuum"""

__version__ = "0.1.0"
