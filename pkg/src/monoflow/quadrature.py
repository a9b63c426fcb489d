"""Integrals over S^4, spherical shells and balls/annuli in R^5.

Measure convention: dx = r^4 dr dsigma with dsigma the unweighted surface
measure on S^4, so |S^4| = 8 pi^2 / 3 and |B_1| = 8 pi^2 / 15.  All reductions
use numpy's pairwise summation in a fixed order, so repeated runs are
bit-stable.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError, EvaluationError
from .fields import Field, SphericalField
from .grids import BallGrid, SphereSamples


def _sphere_values(f, sphere: SphereSamples) -> np.ndarray:
    if isinstance(f, SphericalField):
        if f.sphere is not sphere and len(f.sphere) != len(sphere):
            raise DomainError("spherical field sampled on a different rule")
        return f.values
    if isinstance(f, Field):
        return f.fn(sphere.nodes)
    if callable(f):
        return np.asarray(f(sphere.nodes), dtype=float)
    return np.asarray(f, dtype=float)


def integrate_sphere(f, sphere: SphereSamples) -> float:
    """Integral of a scalar over S^4: sum of w_i f(sigma_i)."""
    vals = _sphere_values(f, sphere)
    if vals.shape != sphere.weights.shape:
        raise EvaluationError(f"expected scalar samples of shape {sphere.weights.shape}")
    total = float(np.sum(sphere.weights * vals))
    if not np.isfinite(total):
        raise EvaluationError("non-finite integrand on the sphere")
    return total


def integrate_shell(f, r: float, sphere: SphereSamples) -> float:
    """Integral of a scalar field over the sphere |x| = r (surface measure):
    r^4 sum of w_i f(r sigma_i)."""
    if isinstance(f, Field):
        f.check_radius(r)
        vals = f.fn(r * sphere.nodes)
    elif callable(f):
        vals = np.asarray(f(r * sphere.nodes), dtype=float)
    else:
        raise TypeError("integrate_shell needs a Field or a callable")
    total = r**4 * float(np.sum(sphere.weights * vals))
    if not np.isfinite(total):
        raise EvaluationError(f"non-finite integrand on the shell r={r}")
    return total


def power_law_tail(shell_value: float, r_min: float, exponent: float) -> float:
    """Exact integral over the inner ball 0 <= |x| <= r_min of an integrand
    f(r sigma) = r^q g(sigma), given the surface integral of f over |x|=r_min.

    The tail is r_min * (shell integral at r_min) / (q + 5); it exists only
    for q > -5.
    """
    if exponent <= -5.0:
        raise DomainError(f"integrand with radial exponent {exponent} is not integrable")
    return r_min * shell_value / (exponent + 5.0)


def integrate_ball(f, grid: BallGrid, radial_exponent: float | None = None) -> float:
    """Integral of a scalar field over the grid's annulus, optionally
    completed across the inner cutoff.

    Parameters
    ----------
    f : Field or callable
        Scalar integrand, evaluated shell by shell.
    grid : BallGrid
    radial_exponent : float, optional
        When the integrand is homogeneous, f(r sigma) = r^q g(sigma), pass
        q to add the exact power-law integral over (0, r_min); the grid
        itself never evaluates inside the cutoff.
    """
    fn = f.fn if isinstance(f, Field) else f
    if not callable(fn):
        raise TypeError("integrate_ball needs a Field or a callable")
    if isinstance(f, Field):
        lo, hi = f.domain
        if grid.r_min < lo or grid.R > hi:
            raise DomainError("grid annulus exceeds the field domain")
    sph = grid.sphere
    shell_sums = np.empty(grid.radial_nodes.size)
    for k, r in enumerate(grid.radial_nodes):
        vals = fn(r * sph.nodes)
        shell_sums[k] = np.sum(sph.weights * vals)
    total = float(np.sum(grid.radial_weights * grid.radial_nodes**4 * shell_sums))
    if radial_exponent is not None:
        shell = grid.r_min**4 * float(np.sum(sph.weights * fn(grid.r_min * sph.nodes)))
        total += power_law_tail(shell, grid.r_min, radial_exponent)
    if not np.isfinite(total):
        raise EvaluationError("non-finite integrand on the ball grid")
    return total


def shell_reduce(
    grid: BallGrid,
    shell_fn: Callable[[float, np.ndarray], dict[str, np.ndarray]],
    exponents: dict[str, float] | None = None,
) -> dict[str, float]:
    """Accumulate several named scalar integrands over the ball in one sweep.

    ``shell_fn(r, points)`` returns per-node samples for each name; entries of
    ``exponents`` add the exact power-law tail over (0, r_min) for the named
    integrand.  Used by the functionals module so fields and gradients are
    evaluated once per shell.
    """
    sph = grid.sphere
    exponents = exponents or {}
    sums: dict[str, np.ndarray] = {}
    for k, r in enumerate(grid.radial_nodes):
        samples = shell_fn(float(r), r * sph.nodes)
        for key, vals in samples.items():
            if key not in sums:
                sums[key] = np.zeros(grid.radial_nodes.size)
            sums[key][k] = np.sum(sph.weights * vals)
    rw = grid.radial_weights * grid.radial_nodes**4
    out = {key: float(np.sum(rw * s)) for key, s in sums.items()}
    if exponents:
        inner = shell_fn(grid.r_min, grid.r_min * sph.nodes)
        for key, q in exponents.items():
            shell = grid.r_min**4 * float(np.sum(sph.weights * inner[key]))
            out[key] += power_law_tail(shell, grid.r_min, q)
    bad = [k for k, v in out.items() if not np.isfinite(v)]
    if bad:
        raise EvaluationError(f"non-finite ball integrals: {bad}")
    return out
