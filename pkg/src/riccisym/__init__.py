"""Lie-symmetry toolkit for the two-dimensional Ricci flow model u^2 u_t + u_y u_x - u u_xy = 0."""

__version__ = "0.1.0"
