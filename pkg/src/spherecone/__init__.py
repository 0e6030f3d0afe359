"""Numerical companion for spheres with curvature bounded below by one.

Modules
-------
sphtrig, profiles
    Spherical trigonometry and rotationally symmetric profiles.
complex
    Piecewise-spherical surfaces glued from geodesic triangles.
geodesics
    Graph-based geodesic distances, diameters and cone-point growth.
conformal
    Conformal metrics on the plane and their quadrature.
verify
    Claim-by-claim verification reports.
"""

__version__ = "0.1.0"
