"""Nearest self-similar field in the scaled Sobolev geometry of a ball.

Degree minus-one fields h(x) = zeta(x/|x|)/|x| form a closed subspace of
W^{1,2}(B_R) under the scaled inner product

    <u, w>_R = (1/R^3) int_{B_R} u.w + (1/R) int_{B_R} grad u : grad w,

and for two such fields the product collapses to an R-independent form on the
sphere (the Gram form below).  Projecting a general field u onto the subspace
therefore reduces to a variational problem for the profile zeta.

Reduction of the data functional (documented so it can be re-derived):
with h_eta(x) = eta(sigma)/|x| and the gradient identity

    d_j h^i = (1/|x|^2) [ (grad_S eta^i)^j - sigma_j eta^i ],

substitute x = r sigma, dx = r^4 dr dsigma:

    (1/R^3) int u . h_eta        = int_S [ R L1(sigma) ] . eta dsigma,
        L1(sigma) = R^-4 int_0^R r^3 u(r sigma) dr,
    (1/R)   int grad u : grad h_eta
        = (1/R) int_S [ G : grad_S eta - (G sigma) . eta ] dsigma,
        G_ij(sigma) = int_0^R r^2 d_j u^i (r sigma) dr,

so L(eta) = int_S [ a . eta + B : grad_S eta ] with a = R L1 - (1/R) G sigma
and B = (1/R) G.  The normal equations  gram(zeta, eta) = L(eta)  are solved
by conjugate gradients over a basis of spherical polynomials (monomials in
sigma with the last exponent at most 1, a linearly independent spanning set),
whose tangential gradients are exact:

    (grad_S s^alpha)^j = alpha_j s^(alpha - e_j) - |alpha| s^alpha s_j.

Raw per-node unknowns would need numerical angular differentiation whose
error (the pullbacks cos-substituted polar grids see are not polynomial)
dwarfs the 1e-8 orthogonality targets; the polynomial space keeps every
piece of the discrete system exact up to quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from . import _spherepoly as sp
from .errors import ConvergenceError, DegenerateError
from .fields import Field, SphericalField, ambient_gradient, spherical_from_poly
from .functionals import scale_invariant_energy
from .grids import SphereSamples, build_sphere_samples, default_sphere
from .quadrature import integrate_sphere
from .sphere_calculus import tangential_gradient

PROJECTION_LEVEL = 10
PROJECTION_DEGREE = 4


def gram_inner(zeta: SphericalField, eta: SphericalField) -> float:
    """R-independent scaled inner product of the self-similar fields with
    profiles zeta and eta:

        (1/3) int zeta.eta + int ( zeta.eta + grad_S zeta : grad_S eta ).
    """
    sphere = zeta.sphere
    mass = 0.0
    stiff = 0.0
    for i in range(5):
        zi = _component(zeta, i)
        ei = _component(eta, i)
        mass += integrate_sphere(zi.values * ei.values, sphere)
        gz = tangential_gradient(zi)
        ge = tangential_gradient(ei)
        stiff += integrate_sphere(
            np.einsum("nj,nj->n", gz.values, ge.values), sphere)
    return (4.0 / 3.0) * mass + stiff


def _component(f: SphericalField, i: int) -> SphericalField:
    vals = f.values[:, i]
    fn = None
    if f.poly is not None:
        return spherical_from_poly(f.sphere, f.poly[i])
    if f.fn is not None:
        base = f.fn
        fn = lambda s, base=base, i=i: np.asarray(base(np.atleast_2d(s)))[:, i]
    return SphericalField(f.sphere, vals, fn=fn)


def radial_moments(u: Field, R: float, sphere: SphereSamples | None = None,
                   n_radial: int = 32,
                   r_min: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """The sphere-resolved radial integrals (L1, G) of the reduction above;
    L1 has shape (n, 5) and G has shape (n, 5, 5) with G[n, i, j] the moment
    of d_j u^i.  Power-law tails complete the integrals across the inner
    cutoff when the field's homogeneity is known."""
    if sphere is None:
        sphere = default_sphere(PROJECTION_LEVEL)
    from scipy.special import roots_legendre

    if r_min is None:
        r_min = 1e-3 * R
    t, w = roots_legendre(n_radial)
    half = 0.5 * (R - r_min)
    radii = half * t + 0.5 * (R + r_min)
    weights = half * w

    n = len(sphere)
    L1 = np.zeros((n, 5))
    G = np.zeros((n, 5, 5))
    for r, wr in zip(radii, weights):
        pts = r * sphere.nodes
        L1 += wr * r**3 * u.fn(pts)
        G += wr * r**2 * _grad(u, pts)
    p = u.radial_degree
    if p is not None:
        pts = r_min * sphere.nodes
        if p + 4.0 > 0.0:
            L1 += r_min**4 * u.fn(pts) / (p + 4.0)
        if p + 2.0 > 0.0:
            G += r_min**3 * _grad(u, pts) / (p + 2.0)
    return L1 / R**4, G


def _grad(u: Field, pts: np.ndarray) -> np.ndarray:
    if u.grad_fn is not None:
        return u.grad_fn(pts)
    return ambient_gradient(u, pts)


def basis_indices(degree: int) -> list[tuple[int, int, int, int, int]]:
    """Monomial exponents with total degree <= degree and last exponent <= 1:
    a linearly independent spanning set for spherical polynomials (the sphere
    relation lets any higher last-coordinate power be reduced away)."""
    out = []
    for alpha in iter_product(*[range(degree + 1)] * 4, range(2)):
        if sum(alpha) <= degree:
            out.append(alpha)
    return sorted(out, key=lambda a: (sum(a), a))


@dataclass(frozen=True)
class ProjectionResult:
    """Minimiser profile and diagnostics of one projection solve."""

    zeta_star: SphericalField
    error_sq: float
    energy: float
    closeness: float
    cg_iters: int
    residual: float
    coefficients: np.ndarray
    degree: int

    def to_json_dict(self) -> dict:
        sph = self.zeta_star.sphere
        return {
            "sphere": {"level": int(sph.level), "n_nodes": int(len(sph))},
            "zeta_star": self.zeta_star.values.tolist(),
            "error_sq": self.error_sq,
            "energy": self.energy,
            "closeness": self.closeness,
            "cg_iters": self.cg_iters,
            "residual": self.residual,
            "degree": self.degree,
        }


def _pcg(A: np.ndarray, b: np.ndarray, rtol: float,
         max_iters: int) -> tuple[np.ndarray, int, float]:
    """Conjugate gradients with diagonal (Jacobi) preconditioning."""
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    d = np.diag(A).copy()
    d[d <= 0.0] = 1.0
    x = np.zeros_like(b)
    r = b.copy()
    z = r / d
    p = z.copy()
    rz = float(r @ z)
    for k in range(1, max_iters + 1):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        res = float(np.linalg.norm(r))
        if res <= rtol * bnorm:
            return x, k, res / bnorm
        z = r / d
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(
        f"conjugate gradients stalled at residual {res / bnorm:.3e} "
        f"after {max_iters} iterations")


def project(u: Field, R: float, degree: int = PROJECTION_DEGREE,
            sphere: SphereSamples | None = None, n_radial: int = 32,
            rtol: float = 1e-10, max_iters: int | None = None,
            r_min: float | None = None) -> ProjectionResult:
    """Profile of the nearest self-similar field to ``u`` on B_R.

    Solves the normal equations ``gram(zeta*, eta) = L(eta)`` for every basis
    element eta of the degree-limited spherical polynomial space, by
    preconditioned conjugate gradients on the assembled SPD system (the weak
    form of (-lap_S + 4/3) zeta = data, channel by channel).  ``r_min``
    shifts the inner quadrature cutoff (default 1e-3 R); shrink it when u
    mixes a singular self-similar part with smooth remainders of unknown
    homogeneity.
    """
    if sphere is None:
        sphere = default_sphere(PROJECTION_LEVEL)
    if max_iters is None:
        max_iters = int(10 * np.sqrt(len(sphere))) + 10

    idx = basis_indices(degree)
    polys = [sp.monomial(a) for a in idx]
    nb = len(polys)
    nodes, w = sphere.nodes, sphere.weights

    V = np.stack([sp.eval_poly(p, nodes) for p in polys])  # (nb, n)
    grads = [sp.tangential_gradient(p) for p in polys]
    grad_mats = [np.stack([sp.eval_poly(g[j], nodes) for g in grads])
                 for j in range(5)]  # five (nb, n) arrays
    gram = (4.0 / 3.0) * (V * w) @ V.T
    for Gj in grad_mats:
        gram += (Gj * w) @ Gj.T

    L1, Gm = radial_moments(u, R, sphere=sphere, n_radial=n_radial, r_min=r_min)
    a = R * L1 - (1.0 / R) * np.einsum("nij,nj->ni", Gm, nodes)
    B = Gm / R

    rhs = np.empty((5, nb))
    for i in range(5):
        rhs[i] = V @ (w * a[:, i])
        for j, Gj in enumerate(grad_mats):
            rhs[i] += Gj @ (w * B[:, i, j])

    coeff = np.empty((5, nb))
    iters = 0
    residual = 0.0
    for i in range(5):
        coeff[i], k, res = _pcg(gram, rhs[i], rtol, max_iters)
        iters = max(iters, k)
        residual = max(residual, res)

    zeta_polys = []
    for i in range(5):
        z = sp.poly()
        for c, p in zip(coeff[i], polys):
            if c != 0.0:
                z = sp.add(z, sp.scale(p, float(c)))
        zeta_polys.append(z)
    zeta_star = spherical_from_poly(sphere, tuple(zeta_polys))

    hstar_sq = float(np.einsum("ik,kl,il->", coeff, gram, coeff))
    pairing = float(np.einsum("ik,ik->", coeff, rhs))
    from .grids import build_ball_grid

    energy_grid = build_ball_grid(R, r_min=r_min, n_radial=n_radial,
                                  sphere=sphere)
    energy = scale_invariant_energy(u, R, grid=energy_grid)
    error_sq = max(energy - 2.0 * pairing + hstar_sq, 0.0)
    closeness = error_sq / energy if energy > 0.0 else 0.0
    return ProjectionResult(zeta_star=zeta_star, error_sq=error_sq,
                            energy=energy, closeness=closeness,
                            cg_iters=iters, residual=residual,
                            coefficients=coeff, degree=degree)


def closeness_ratio(u: Field, R: float, **kwargs) -> float:
    """Scaled squared distance to the self-similar subspace relative to the
    scale-invariant energy:

        [ (1/R^3) int |u - h*|^2 + (1/R) int |grad u - grad h*|^2 ] / M(R).

    Raises
    ------
    DegenerateError
        If M(R) = 0 (the ratio is undefined for the zero field).
    """
    result = project(u, R, **kwargs)
    if result.energy <= 0.0:
        raise DegenerateError("closeness ratio undefined: M(R) = 0")
    return result.closeness
