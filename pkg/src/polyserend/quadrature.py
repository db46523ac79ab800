"""Numerical integration on triangles and convex polygons.

Triangle rules come from a conical (Duffy-style) product of a Gauss-Legendre
rule in one direction and a Gauss-Jacobi rule (weight 1 - x) in the other,
which absorbs the Jacobian of the square-to-triangle collapse exactly.  The
resulting rule on the unit reference triangle {x, y >= 0, x + y <= 1} has
m^2 strictly interior points with positive weights and integrates all
polynomials of total degree 2m - 1 exactly.

Polygon rules triangulate by fanning from the centroid, splitting each fan
triangle at its boundary-edge midpoint, and pushing the reference rule
through the affine map of each piece with the polygon vertex at the
collapsed corner of the conical rule.  The split-and-collapse layout keeps
polynomial exactness and, crucially, clusters points toward the polygon
vertices, where generalized barycentric coordinates lose smoothness; plain
Gauss fans converge only algebraically for such integrands, this layout
restores fast convergence.

``fan_rule`` instead fans from a chosen vertex; aligned with the fan used by
triangulation-kind coordinates it integrates their piecewise-polynomial
integrands exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .geometry import GeometryError, Polygon

__all__ = [
    "QuadratureRule",
    "MAX_DEGREE",
    "triangle_rule",
    "polygon_rule",
    "fan_rule",
    "integrate",
]

MAX_DEGREE = 20


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Points (m, 2) and weights (m,) exact for polynomials up to ``degree``."""

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self) -> None:
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Rule on the reference triangle (0,0), (1,0), (0,1) exact to ``degree``."""
    if not 1 <= degree <= MAX_DEGREE:
        raise GeometryError(f"quadrature degree must be in [1, {MAX_DEGREE}], got {degree}")
    m = (degree + 2) // 2
    x_leg, w_leg = roots_legendre(m)
    x_jac, w_jac = roots_jacobi(m, 1.0, 0.0)
    u = 0.5 * (x_leg + 1.0)          # Gauss-Legendre on [0, 1]
    a = 0.5 * w_leg
    v = 0.5 * (x_jac + 1.0)          # Gauss-Jacobi with weight (1 - v) on [0, 1]
    b = 0.25 * w_jac
    uu, vv = np.meshgrid(u, v, indexing="ij")
    aa, bb = np.meshgrid(a, b, indexing="ij")
    points = np.stack([(uu * (1.0 - vv)).ravel(), vv.ravel()], axis=1)
    weights = (aa * bb).ravel()
    return QuadratureRule(points=points, weights=weights, degree=2 * m - 1)


def _mapped_rule(base: QuadratureRule, A: np.ndarray, B: np.ndarray, C: np.ndarray,
                 keep_tol: float = 0.0) -> QuadratureRule:
    """Push the reference rule through affine maps onto triangles (A_i, B_i, C_i).

    The reference corner (0, 1) -- where the conical rule clusters points --
    lands on C.  Triangles with doubled area <= keep_tol are dropped.
    """
    e1 = B - A
    e2 = C - A
    areas2 = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    if np.any(areas2 < -keep_tol):
        raise GeometryError("negatively oriented triangle in quadrature decomposition")
    keep = areas2 > keep_tol
    x = base.points[:, 0]
    y = base.points[:, 1]
    pts = A[:, None, :] + x[None, :, None] * e1[:, None, :] + y[None, :, None] * e2[:, None, :]
    wts = areas2[:, None] * base.weights[None, :]
    return QuadratureRule(
        points=pts[keep].reshape(-1, 2),
        weights=wts[keep].ravel(),
        degree=base.degree,
    )


def polygon_rule(polygon: Polygon, degree: int) -> QuadratureRule:
    """Rule on a convex polygon: centroid fan split at edge midpoints.

    Each boundary edge contributes two triangles (midpoint, centroid, vertex)
    carrying the conical rule with the polygon vertex at the collapsed
    corner, so points cluster where coordinate-based integrands are least
    smooth.  2n m^2 points for a degree-(2m-1) rule.

    Polygons with collinear (flat) vertices always use the top-order base
    rule: coordinate integrands are markedly rougher around a straight joint,
    and the extra points keep stiffness integrals near machine accuracy
    there.  The returned rule is exact at least to the requested degree
    either way.
    """
    v = polygon.vertices
    nxt = np.roll(v, -1, axis=0)
    prv = np.roll(v, 1, axis=0)
    turn = (v - prv)[:, 0] * (nxt - v)[:, 1] - (v - prv)[:, 1] * (nxt - v)[:, 0]
    if np.any(np.abs(turn) <= 1e-12 * polygon.diameter**2):
        degree = max(degree, MAX_DEGREE)
    base = triangle_rule(degree)
    c = np.broadcast_to(polygon.centroid, v.shape)
    mid = 0.5 * (v + nxt)
    A = np.vstack([mid, c])
    B = np.vstack([c, mid])
    C = np.vstack([v, nxt])
    return _mapped_rule(base, A, B, C)


def fan_rule(polygon: Polygon, degree: int, apex: int = 0) -> QuadratureRule:
    """Rule on a convex polygon fanning from the vertex ``apex``.

    Matches the decomposition used by triangulation-kind coordinates, whose
    basis functions are polynomial on each fan triangle; zero-area fan
    triangles at collinear vertices carry no measure and are skipped.
    """
    base = triangle_rule(degree)
    v = polygon.vertices
    n = polygon.n
    apex %= n
    others = [i for i in range(n) if i != apex and (i + 1) % n != apex]
    A = np.repeat(v[apex][None, :], len(others), axis=0)
    B = v[others]
    C = v[[(i + 1) % n for i in others]]
    return _mapped_rule(base, A, B, C, keep_tol=1e-14 * polygon.diameter**2)


def integrate(rule: QuadratureRule, f) -> float:
    """Integrate a callable f(points) -> (m,) against the rule."""
    return float(np.dot(rule.weights, np.asarray(f(rule.points), dtype=float)))
