"""Tangential calculus on S^4 and the residuals of the homogeneous Euler
system in five dimensions.

All spherical derivatives are taken by extending a field off the sphere as a
degree-0 homogeneous function, differentiating in the ambient space, and
projecting onto the tangent space:

    (grad_S f)^j = sum_k (delta_jk - s_j s_k) d_k f(x/|x|)   at |x| = 1.

Fields carrying exact polynomial components use the closed form of that
projection; otherwise central finite differences with step 1e-4 are applied
to the extension.  Every node of the product-angle grids is interior to the
extension's smooth region, so no chart singularities arise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _spherepoly as sp
from .errors import EvaluationError, TangencyError
from .fields import (FD_STEP_SCALE, SphericalField, homogeneous_field,
                     spherical_from_poly)
from .grids import SphereSamples
from .quadrature import integrate_sphere

N_DIM = 5


def dimension_coefficients(n: int = N_DIM) -> dict[str, float]:
    """Dimension-dependent constants of the spherical Euler identities,
    kept in one place so the n = 5 specialisation can be asserted:
    at n = 5 the quartic-splitting coefficient is 1, the Bernoulli mass
    factor is 1 and both right-hand factors vanish."""
    return {
        "normal_balance": float(n - 2),      # (n-2) f + div v = 0
        "bernoulli_mass": float(n - 4),      # int H^2 = (n-4) int H f^2
        "split1_right": float(n - 5),        # int H(|v|^2+2p) = (n-5) int H f^2
        "split2_parts": (n - 2) / 3.0,       # int (v.grad f) f^2 = ((n-2)/3) int f^4
        "split2_right": (n - 5) / 3.0,       # int f^2(|v|^2+2p) = ((n-5)/3) int f^4
        "f_decay": float(n - 3),             # (n-3) int f^2 = 0 at the end
    }


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1)[:, None]


def _fd_scalar_gradient(fn, sigma: np.ndarray, h: float = FD_STEP_SCALE) -> np.ndarray:
    """Ambient gradient of the degree-0 extension of a scalar sphere field,
    projected tangentially; sigma has shape (m, 5)."""
    g = np.empty((sigma.shape[0], 5))
    for j in range(5):
        step = np.zeros_like(sigma)
        step[:, j] = h
        fp = fn(_normalize_rows(sigma + step))
        fm = fn(_normalize_rows(sigma - step))
        g[:, j] = (np.asarray(fp) - np.asarray(fm)) / (2.0 * h)
    g -= sigma * np.einsum("nj,nj->n", sigma, g)[:, None]
    return g


def _fd_jacobian(fn, sigma: np.ndarray, h: float = FD_STEP_SCALE) -> np.ndarray:
    """D[m, i, j] = d_j of the degree-0 extension of component i (ambient,
    unprojected)."""
    out = np.empty((sigma.shape[0], 5, 5))
    for j in range(5):
        step = np.zeros_like(sigma)
        step[:, j] = h
        fp = np.asarray(fn(_normalize_rows(sigma + step)))
        fm = np.asarray(fn(_normalize_rows(sigma - step)))
        out[:, :, j] = (fp - fm) / (2.0 * h)
    return out


def tangential_gradient(f: SphericalField) -> SphericalField:
    """grad_S of a scalar sphere field, as a tangential vector field.

    Polynomial-backed fields get the exact projected gradient; function-backed
    fields use the finite-difference extension.  The result keeps a function
    handle so it can be differentiated again.
    """
    if f.is_vector:
        raise EvaluationError("tangential_gradient expects a scalar field")
    if f.poly is not None:
        comps = sp.tangential_gradient(f.poly[0])
        return spherical_from_poly(f.sphere, comps, tangential=True)
    if f.grad_fn is not None:
        gfn = f.grad_fn
    elif f.fn is not None:
        fn = f.fn

        def gfn(s):
            return _fd_scalar_gradient(fn, np.atleast_2d(s))
    else:
        raise EvaluationError("gradient needs a function-backed spherical field")

    out = SphericalField(f.sphere, gfn(f.sphere.nodes), tangential=True, fn=gfn)
    if not np.all(np.isfinite(out.values)):
        raise EvaluationError("non-finite tangential gradient")
    return out


def sphere_divergence(v: SphericalField) -> SphericalField:
    """div_S of a tangential field: sum_i (grad_S v^i)^i."""
    if not v.is_vector:
        raise EvaluationError("sphere_divergence expects a vector field")
    if not v.tangential:
        radial = np.abs(np.einsum("ni,ni->n", v.sphere.nodes, v.values)).max()
        raise TangencyError(f"input is not tangential (radial part {radial:.3e})")
    if v.poly is not None:
        div = sp.tangential_divergence(list(v.poly))
        return spherical_from_poly(v.sphere, div)
    if v.fn is None:
        raise EvaluationError("divergence needs a function-backed spherical field")

    fn = v.fn

    def dfn(s):
        s = np.atleast_2d(s)
        D = _fd_jacobian(fn, s)
        # trace of the projected Jacobian: tr(D) - sigma . (D sigma)
        return np.einsum("nii->n", D) - np.einsum("ni,nij,nj->n", s, D, s)

    return SphericalField(v.sphere, dfn(v.sphere.nodes), fn=dfn)


# Exact polynomial products are kept only while the pair count stays small;
# beyond that the product is evaluated node-wise (gradients stay exact either
# way, only the symbolic product representation is dropped).
_POLY_PAIR_LIMIT = 50_000


def _product_is_cheap(p: list | tuple, q: list | tuple) -> bool:
    np_, nq = sum(len(c) for c in p), sum(len(c) for c in q)
    return np_ * nq <= _POLY_PAIR_LIMIT


def directional_derivative(v: SphericalField, g: SphericalField) -> SphericalField:
    """(v . grad_S) g for a scalar field g."""
    if v.poly is not None and g.poly is not None:
        grads = sp.tangential_gradient(g.poly[0])
        if _product_is_cheap(v.poly, grads):
            return spherical_from_poly(v.sphere, sp.dot(list(v.poly), grads))
        # Too many terms for a symbolic product: evaluate it instead, and
        # supply (v.grad g)'s own exact gradient by the scalar product rule
        #     grad_S sum_j v^j u_j = sum_j (u_j grad_S v^j + v^j grad_S u_j).
        vpoly = list(v.poly)
        vgrads = [sp.tangential_gradient(p) for p in vpoly]
        ggrads = [sp.tangential_gradient(q) for q in grads]

        def fn(s, vpoly=vpoly, grads=grads):
            s = np.atleast_2d(s)
            out = np.zeros(s.shape[0])
            for j in range(5):
                out += sp.eval_poly(vpoly[j], s) * sp.eval_poly(grads[j], s)
            return out

        def gfn(s, vpoly=vpoly, grads=grads, vgrads=vgrads, ggrads=ggrads):
            s = np.atleast_2d(s)
            out = np.zeros((s.shape[0], 5))
            for j in range(5):
                vj = sp.eval_poly(vpoly[j], s)
                uj = sp.eval_poly(grads[j], s)
                for k in range(5):
                    out[:, k] += uj * sp.eval_poly(vgrads[j][k], s)
                    out[:, k] += vj * sp.eval_poly(ggrads[j][k], s)
            return out

        return SphericalField(v.sphere, fn(v.sphere.nodes), fn=fn, grad_fn=gfn)
    grad = tangential_gradient(g)
    vals = np.einsum("ni,ni->n", v.values, grad.values)
    if v.fn is not None and grad.fn is not None:
        vfn, gfn = v.fn, grad.fn

        def fn(s):
            s = np.atleast_2d(s)
            return np.einsum("ni,ni->n", np.asarray(vfn(s)), gfn(s))

        return SphericalField(v.sphere, vals, fn=fn)
    return SphericalField(v.sphere, vals)


def vector_convection(v: SphericalField) -> np.ndarray:
    """(v . grad_S) v at the nodes, shape (n, 5); not projected, so the
    result carries the normal component -|v|^2 sigma of the ambient
    derivative."""
    if v.poly is not None:
        s = v.sphere.nodes
        vv = v.values
        out = np.empty((len(v.sphere), 5))
        for i, p in enumerate(v.poly):
            grads = sp.tangential_gradient(p)
            gv = np.stack([sp.eval_poly(q, s) for q in grads], axis=-1)
            out[:, i] = np.einsum("nj,nj->n", vv, gv)
        return out
    if v.fn is None:
        raise EvaluationError("convection needs a function-backed spherical field")
    s = v.sphere.nodes
    D = _fd_jacobian(v.fn, s)
    proj = D - np.einsum("nj,nk,nik->nij", s, s, D)
    return np.einsum("nj,nij->ni", v.values, proj)


def homogeneous_divergence(zeta: SphericalField) -> SphericalField:
    """Divergence profile of the degree minus-one field zeta(x/|x|)/|x|.

    With zeta = v + f sigma, f = sigma . zeta, this equals
    ``(N-2) f + div_S v`` for N = 5, i.e. |x|^2 div(zeta(x/|x|)/|x|).
    """
    if not zeta.is_vector:
        raise EvaluationError("homogeneous_divergence expects a vector field")
    coeff = dimension_coefficients()["normal_balance"]
    if zeta.poly is not None:
        z = list(zeta.poly)
        f = sp.radial_component(z)
        v = sp.tangential_part(z)
        out = sp.add(sp.scale(f, coeff), sp.tangential_divergence(v))
        return spherical_from_poly(zeta.sphere, out)
    if zeta.fn is None:
        raise EvaluationError("divergence needs a function-backed spherical field")
    zfn = zeta.fn

    def dfn(s):
        s = np.atleast_2d(s)
        D = _fd_jacobian(zfn, s)
        z = np.asarray(zfn(s))
        f = np.einsum("ni,ni->n", s, z)
        # div_S of the tangential part, written through the full Jacobian:
        # div_S v = tr(P D_v) with v = z - f sigma extended degree-0.
        def vfn(t):
            t = np.atleast_2d(t)
            zz = np.asarray(zfn(t))
            ff = np.einsum("ni,ni->n", t, zz)
            return zz - ff[:, None] * t

        Dv = _fd_jacobian(vfn, s)
        divv = np.einsum("nii->n", Dv) - np.einsum("ni,nij,nj->n", s, Dv, s)
        return coeff * f + divv

    return SphericalField(zeta.sphere, dfn(zeta.sphere.nodes), fn=dfn)


@dataclass(frozen=True)
class EulerTriple:
    """A candidate (v, f, p) profile for the spherical Euler system, with the
    Bernoulli head H = |v|^2 + f^2 + 2p recomputed definitionally."""

    v: SphericalField
    f: SphericalField
    p: SphericalField

    def __post_init__(self):
        if not self.v.tangential:
            raise TangencyError("v must be tangential")

    @property
    def head(self) -> SphericalField:
        vals = (np.einsum("ni,ni->n", self.v.values, self.v.values)
                + self.f.values**2 + 2.0 * self.p.values)
        if self.v.poly is not None and self.f.poly is not None and self.p.poly is not None:
            h = sp.dot(list(self.v.poly), list(self.v.poly))
            h = sp.add(h, sp.mul(self.f.poly[0], self.f.poly[0]))
            h = sp.add(h, sp.scale(self.p.poly[0], 2.0))
            return spherical_from_poly(self.v.sphere, h)
        if self.v.fn is not None and self.f.fn is not None and self.p.fn is not None:
            vfn, ffn, pfn = self.v.fn, self.f.fn, self.p.fn

            def hfn(s):
                s = np.atleast_2d(s)
                vv = np.asarray(vfn(s))
                return (np.einsum("ni,ni->n", vv, vv)
                        + np.asarray(ffn(s))**2 + 2.0 * np.asarray(pfn(s)))

            return SphericalField(self.v.sphere, vals, fn=hfn)
        return SphericalField(self.v.sphere, vals)


def euler_residuals(t: EulerTriple):
    """Node-wise residuals of the spherical Euler system for N = 5:

        r1 = 3 f + div_S v
        r2 = v . grad_S f - H
        r3 = v . grad_S H - 2 f H
        r4 = tangential part of (v . grad_S) v + grad_S p
    """
    H = t.head
    sphere = t.v.sphere
    r1_field = sphere_divergence(t.v)
    r1 = SphericalField(sphere, 3.0 * t.f.values + r1_field.values)
    r2 = SphericalField(sphere, directional_derivative(t.v, t.f).values - H.values)
    r3 = SphericalField(
        sphere,
        directional_derivative(t.v, H).values - 2.0 * t.f.values * H.values,
    )
    conv = vector_convection(t.v)
    gp = tangential_gradient(t.p).values
    w = conv + gp
    w_tan = w - sphere.nodes * np.einsum("ni,ni->n", sphere.nodes, w)[:, None]
    r4 = SphericalField(sphere, w_tan, tangential=True)
    return r1, r2, r3, r4


def split_identity_defects(v: SphericalField) -> tuple[float, float]:
    """Quadrature defects of the two integration-by-parts identities behind
    the quartic splitting, with f and H recomputed from v:

        f = -div_S v / 3,      H = v . grad_S f,
        d1 = int (v.grad f) H + int (div v) f H + int (v.grad H) f,
        d2 = int (v.grad f) f^2 - int f^4.

    Both vanish for smooth fields on the closed manifold; the returned values
    measure the discretisation error only.
    """
    sphere = v.sphere
    div_v = sphere_divergence(v)
    coeff = dimension_coefficients()["normal_balance"]
    if div_v.poly is not None:
        f = spherical_from_poly(sphere, sp.scale(div_v.poly[0], -1.0 / coeff))
    else:
        dfn = div_v.fn

        def ffn(s):
            return -np.asarray(dfn(s)) / coeff

        f = SphericalField(sphere, ffn(sphere.nodes), fn=ffn)
    vgf = directional_derivative(v, f)
    H = vgf
    vgH = directional_derivative(v, H)
    d1 = integrate_sphere(vgf.values * H.values, sphere) \
        + integrate_sphere(div_v.values * f.values * H.values, sphere) \
        + integrate_sphere(vgH.values * f.values, sphere)
    d2 = integrate_sphere(vgf.values * f.values**2, sphere) \
        - dimension_coefficients()["split2_parts"] \
        * integrate_sphere(f.values**4, sphere)
    return d1, d2


def convective_decomposition_defect(zeta: SphericalField,
                                    probes: np.ndarray | None = None,
                                    seed: int = 0,
                                    n_probes: int = 64) -> float:
    """Maximum mismatch between the ambient convective term of the degree
    minus-one field V = zeta(x/|x|)/|x| and its spherical decomposition.

    The ambient side r (V.grad) V is evaluated at |x| = 1 by finite
    differences only (no analytic gradients), the spherical side is

        (1/r^2) [ (v.grad_S)v - |v|^2 sigma + sigma (v.grad_S f) - f^2 sigma ]

    with zeta = v + f sigma and r = 1.  Here (v.grad_S)v is the covariant
    (tangential) convective derivative; its ambient counterpart acquires the
    normal component -|v|^2 sigma written out as the second term.
    """
    sphere = zeta.sphere
    if probes is None:
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(sphere), size=min(n_probes, len(sphere)), replace=False)
        probes = sphere.nodes[idx]
    probes = np.atleast_2d(np.asarray(probes, dtype=float))

    if zeta.poly is not None:
        z = list(zeta.poly)
        fn = lambda s: np.stack([sp.eval_poly(p, s) for p in z], axis=-1)
    elif zeta.fn is not None:
        fn = zeta.fn
    else:
        raise EvaluationError("profile must be function- or polynomial-backed")

    from .fields import Field, ambient_gradient

    def field_fn(x):
        r = np.linalg.norm(x, axis=1)
        return np.asarray(fn(x / r[:, None])) / r[:, None]

    V = Field(kind="vector", fn=field_fn, name="profile_over_r")
    pv = np.asarray(fn(probes))
    grad = ambient_gradient(V, probes, use_analytic=False)
    left = np.einsum("nj,nij->ni", pv, grad)  # (V.grad)V at r = 1

    f_vals = np.einsum("ni,ni->n", probes, pv)
    v_vals = pv - f_vals[:, None] * probes

    def vfn(s):
        s = np.atleast_2d(s)
        zz = np.asarray(fn(s))
        ff = np.einsum("ni,ni->n", s, zz)
        return zz - ff[:, None] * s

    def ffn(s):
        s = np.atleast_2d(s)
        return np.einsum("ni,ni->n", s, np.asarray(fn(s)))

    D = _fd_jacobian(vfn, probes)
    conv = np.einsum("nj,nij->ni", v_vals, D)
    conv_tan = conv - probes * np.einsum("ni,ni->n", probes, conv)[:, None]
    vgf = np.einsum("ni,ni->n", v_vals, _fd_scalar_gradient(ffn, probes))
    right = (conv_tan
             - np.einsum("ni,ni->n", v_vals, v_vals)[:, None] * probes
             + vgf[:, None] * probes
             - f_vals[:, None]**2 * probes)
    return float(np.abs(left - right).max())
