"""Numerical laboratory for graphical mean curvature flow with Dirichlet data:
domain geometry, smoothed boolean intersections with curvature-cone control,
an explicit graph-flow solver, barrier oracles, and truncation cascades with
shadow extraction."""

__version__ = "0.1.0"
