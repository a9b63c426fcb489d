"""Quadrature geometries: product-angle samples on S^4 and radial x sphere
grids on annuli in R^5.

Both structures are immutable after construction (node/weight arrays are
marked read-only) so they can be shared freely across threads.  All
reductions over them use numpy's deterministic pairwise summation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_chebyu, roots_jacobi, roots_legendre

from .errors import DomainError, ResolutionError, SingularOriginError

SPHERE_AREA = 8.0 * np.pi**2 / 3.0  # |S^4|
BALL_VOLUME = SPHERE_AREA / 5.0  # |B_1| in R^5


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SphereSamples:
    """Positive quadrature rule on the unit sphere S^4.

    Attributes
    ----------
    level : int
        Resolution parameter; each polar angle gets ``level`` Gauss nodes and
        the azimuth ``2 * level`` uniform nodes.
    nodes : ndarray, shape (n, 5)
        Unit vectors.
    weights : ndarray, shape (n,)
        Strictly positive weights summing to ``8 pi^2 / 3``.
    param : dict
        Angle-grid descriptor: polar angles ``theta1..theta3`` in [0, pi],
        azimuth ``phi`` in [0, 2 pi), and the product ``shape``.
    """

    level: int
    nodes: np.ndarray
    weights: np.ndarray
    param: dict

    def __len__(self) -> int:
        return self.nodes.shape[0]


def build_sphere_samples(level: int) -> SphereSamples:
    """Product Gauss rule on S^4, exact for polynomials of degree <= level.

    In the substituted variables t = cos(theta) the surface measure
    ``sin^3 t1 sin^2 t2 sin t3  dt1 dt2 dt3 dphi`` splits into the Gauss
    weights (1 - t^2), sqrt(1 - t^2) and 1, handled by Gauss-Jacobi(1,1),
    Gauss-Chebyshev (second kind) and Gauss-Legendre nodes respectively;
    plain Gauss-Legendre with the weight folded into the integrand would
    lose polynomial exactness.  The azimuth uses ``2 * level`` uniform
    points, exact for trigonometric degree < 2 * level.

    Raises
    ------
    ResolutionError
        If ``level < 2``.
    """
    if level < 2:
        raise ResolutionError(f"sphere level must be >= 2, got {level}")
    n = int(level)
    t1, w1 = roots_jacobi(n, 1.0, 1.0)
    t2, w2 = roots_chebyu(n)
    t3, w3 = roots_legendre(n)
    m = 2 * n
    phi = 2.0 * np.pi * np.arange(m) / m
    wphi = np.full(m, 2.0 * np.pi / m)

    s1 = np.sqrt(1.0 - t1**2)
    s2 = np.sqrt(1.0 - t2**2)
    s3 = np.sqrt(1.0 - t3**2)

    shape = (n, n, n, m)
    T1 = t1[:, None, None, None]
    S1 = s1[:, None, None, None]
    T2 = t2[None, :, None, None]
    S2 = s2[None, :, None, None]
    T3 = t3[None, None, :, None]
    S3 = s3[None, None, :, None]
    C = np.cos(phi)[None, None, None, :]
    S = np.sin(phi)[None, None, None, :]

    x = np.empty(shape + (5,))
    x[..., 0] = np.broadcast_to(T1, shape)
    x[..., 1] = S1 * T2
    x[..., 2] = S1 * S2 * T3
    x[..., 3] = S1 * S2 * S3 * C
    x[..., 4] = S1 * S2 * S3 * S

    w = (
        w1[:, None, None, None]
        * w2[None, :, None, None]
        * w3[None, None, :, None]
        * wphi[None, None, None, :]
    )

    param = {
        "theta1": np.arccos(t1),
        "theta2": np.arccos(t2),
        "theta3": np.arccos(t3),
        "phi": phi,
        "shape": shape,
    }
    return SphereSamples(
        level=n,
        nodes=_freeze(x.reshape(-1, 5)),
        weights=_freeze(w.reshape(-1)),
        param=param,
    )


@lru_cache(maxsize=8)
def default_sphere(level: int = 16) -> SphereSamples:
    """Shared, cached sphere rule (safe: samples are immutable)."""
    return build_sphere_samples(level)


@dataclass(frozen=True)
class BallGrid:
    """Radial Gauss rule times a sphere rule, covering the annulus
    ``r_min <= |x| <= R`` with measure weight r^4 dr dsigma."""

    R: float
    r_min: float
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    sphere: SphereSamples

    def __len__(self) -> int:
        return self.radial_nodes.size * len(self.sphere)


def build_ball_grid(
    R: float,
    r_min: float | None = None,
    n_radial: int = 32,
    level: int = 16,
    sphere: SphereSamples | None = None,
    breakpoints: tuple[float, ...] = (),
) -> BallGrid:
    """Composite Gauss-Legendre radial rule on [r_min, R] times a sphere rule.

    Parameters
    ----------
    R, r_min : float
        Outer and inner radii; ``r_min`` defaults to ``1e-3 * R``.  Integrands
        homogeneous near the origin are handled by the inner cutoff plus the
        analytic power-law tail applied by :func:`monoflow.quadrature.integrate_ball`.
    n_radial : int
        Gauss-Legendre points per radial panel (>= 4).
    level : int
        Sphere resolution, ignored when ``sphere`` is passed.
    breakpoints : tuple of float
        Optional interior panel boundaries, e.g. knot radii of a piecewise
        cutoff, so the radial rule stays exact across them.

    Raises
    ------
    SingularOriginError
        If ``r_min <= 0`` (the r^4 measure does not excuse non-integrable
        evaluation at the origin).
    """
    if r_min is None:
        r_min = 1e-3 * R
    if r_min <= 0.0:
        raise SingularOriginError(f"inner radius must be positive, got {r_min}")
    if not r_min < R:
        raise DomainError(f"need r_min < R, got r_min={r_min}, R={R}")
    if n_radial < 4:
        raise ResolutionError(f"n_radial must be >= 4, got {n_radial}")
    for b in breakpoints:
        if not (r_min < b < R):
            raise DomainError(f"breakpoint {b} outside ({r_min}, {R})")

    edges = [r_min, *sorted(breakpoints), R]
    t, w = roots_legendre(int(n_radial))
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes.append(half * t + 0.5 * (a + b))
        weights.append(half * w)
    if sphere is None:
        sphere = default_sphere(level)
    return BallGrid(
        R=float(R),
        r_min=float(r_min),
        radial_nodes=_freeze(np.concatenate(nodes)),
        radial_weights=_freeze(np.concatenate(weights)),
        sphere=sphere,
    )
