"""Velocity and pressure fields on annuli in R^5, spherical profile fields on
S^4, and the analytic fixture catalog.

Fixture catalog (vector fields, ``kind="vector"``)
    constant(e1..e5)          u = e
    linear_radial()           u = x
    homogeneous(spec...)      u = zeta(x/|x|) / |x| for a profile zeta, below
    rotation_plane(i, j)      u = -x_j e_i + x_i e_j   (0-based axes)
    polynomial(terms)         terms = [[component, [a1..a5], coeff], ...]
    gaussian_bump(e1..e5, w)  u = e exp(-|x|^2 / w^2)

Scalar fixtures (``kind="scalar"``, used for pressures and cutoffs)
    zero()
    constant_scalar(c)
    radial_power(c, p)            P = c |x|^p
    scalar_polynomial(terms)      terms = [[[a1..a5], coeff], ...]
    parabolic_bump(r0)            P = (1 - |x|^2/r0^2)^2 inside |x| <= r0
    bernoulli_pressure(spec..., c)  P = (c - |zeta(sigma)|^2) / (2 |x|^2)

Homogeneous profile specs (first parameter of ``homogeneous`` /
``bernoulli_pressure``)
    ["constant", e1..e5]      zeta = e
    ["radial"]                zeta = sigma
    ["rotation", i, j]        zeta = -s_j e_i + s_i e_j  (divergence-free)
    ["tangent_gradient", k]   zeta = e_k - s_k sigma  (gradient of s_k on S^4)
    ["divfree_axis", k]       zeta = e_k + s_k sigma / 3  (divergence-free
                              with nonzero radial part)

Every fixture carries an analytic gradient; homogeneous fields use the exact
relation  d_j u^i = (1/|x|^2) [ (grad_S zeta^i)^j - s_j zeta^i ].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _spherepoly as sp
from .errors import ConfigError, DomainError, EvaluationError, TangencyError
from .grids import SphereSamples

FD_STEP_SCALE = 1e-4  # central differences, h = 1e-4 * max(1, |x|)


@dataclass(frozen=True)
class Field:
    """A vector or scalar field on an annulus ``domain=(r_lo, r_hi)``.

    ``fn`` maps points of shape (m, 5) to (m, 5) values for vector fields or
    (m,) for scalars.  ``grad_fn`` (optional) returns (m, 5, 5) arrays with
    ``grad[i, j] = d_j u^i``, or (m, 5) for scalars.  ``radial_degree`` is the
    homogeneity degree p with u(t x) = t^p u(x) when the field has one; it
    drives exact power-law tail corrections near the origin.
    """

    kind: str
    fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None
    laplacian_fn: Callable[[np.ndarray], np.ndarray] | None = None
    domain: tuple[float, float] = (0.0, np.inf)
    radial_degree: float | None = None
    support_radius: float | None = None
    name: str = "field"
    params: tuple = ()
    zeta: tuple | None = None  # profile payload of homogeneous fields

    def __call__(self, x: np.ndarray) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        out = self.fn(np.atleast_2d(arr))
        return out[0] if arr.ndim == 1 else out

    @property
    def has_gradient(self) -> bool:
        return self.grad_fn is not None

    def check_radius(self, r: float) -> None:
        lo, hi = self.domain
        if not (lo <= r <= hi):
            raise DomainError(f"radius {r} outside field domain {self.domain}")


def ambient_gradient(
    field: Field,
    x: np.ndarray,
    h: float | None = None,
    use_analytic: bool = True,
) -> np.ndarray:
    """Gradient of ``field`` at point(s) ``x``.

    Uses the analytic gradient when the field supplies one (and
    ``use_analytic`` is not disabled), otherwise second-order central
    differences with step ``h = 1e-4 * max(1, |x|)`` per point.  For vector
    fields the result is ``grad[..., i, j] = d_j u^i``.

    Raises
    ------
    DomainError
        If a difference stencil would leave the field's annulus.
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    single = np.asarray(x).ndim == 1
    if use_analytic and field.grad_fn is not None:
        out = field.grad_fn(pts)
        return out[0] if single else out

    r = np.linalg.norm(pts, axis=1)
    hh = np.full(pts.shape[0], h) if h is not None else FD_STEP_SCALE * np.maximum(1.0, r)
    lo, hi = field.domain
    if np.any(r - hh <= lo) or np.any(r + hh >= hi):
        raise DomainError("finite-difference stencil leaves the field domain")

    cols = []
    for j in range(5):
        step = np.zeros_like(pts)
        step[:, j] = hh
        cols.append((field.fn(pts + step) - field.fn(pts - step)) / (2.0 * hh)[:, None]
                    if field.kind == "vector"
                    else (field.fn(pts + step) - field.fn(pts - step)) / (2.0 * hh))
    if field.kind == "vector":
        out = np.stack(cols, axis=-1)  # (m, i, j)
    else:
        out = np.stack(cols, axis=-1)  # (m, j)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("non-finite values in gradient stencil")
    return out[0] if single else out


# ---------------------------------------------------------------------------
# spherical fields
# ---------------------------------------------------------------------------

TANGENCY_TOL = 1e-10


@dataclass(frozen=True)
class SphericalField:
    """Scalar (n,) or vector (n, 5) samples on a :class:`SphereSamples` rule.

    ``fn`` (optional) evaluates the same field at arbitrary unit vectors,
    which derivative operations require; ``poly`` (optional) carries exact
    polynomial components for closed-form calculus.  Scalar fields may also
    carry ``grad_fn``, an exact tangential-gradient evaluator used in place
    of finite differences (products of polynomial factors keep exactness
    this way without forming large symbolic products).
    """

    sphere: SphereSamples
    values: np.ndarray
    tangential: bool = False
    fn: Callable[[np.ndarray], np.ndarray] | None = None
    poly: tuple | None = None
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not np.all(np.isfinite(v)):
            raise EvaluationError("non-finite spherical field samples")
        if self.tangential:
            if v.ndim != 2:
                raise TangencyError("tangential flag on a scalar field")
            radial = np.abs(np.einsum("ni,ni->n", self.sphere.nodes, v))
            if radial.max(initial=0.0) > TANGENCY_TOL:
                raise TangencyError(
                    f"radial component {radial.max():.3e} exceeds {TANGENCY_TOL}"
                )

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == 2


def spherical_from_function(
    sphere: SphereSamples,
    fn: Callable[[np.ndarray], np.ndarray],
    tangential: bool = False,
) -> SphericalField:
    return SphericalField(sphere, np.asarray(fn(sphere.nodes), dtype=float),
                          tangential=tangential, fn=fn)


def spherical_from_poly(sphere: SphereSamples, components,
                        tangential: bool = False) -> SphericalField:
    """Exact polynomial profile: ``components`` is one Poly (scalar) or a
    5-tuple of Polys (vector)."""
    if isinstance(components, dict):
        pol = (components,)
        fn = lambda s: sp.eval_poly(components, s)
    else:
        pol = tuple(components)
        fn = lambda s: np.stack([sp.eval_poly(p, s) for p in pol], axis=-1)
    return SphericalField(sphere, np.asarray(fn(sphere.nodes), dtype=float),
                          tangential=tangential, fn=fn, poly=pol)


# ---------------------------------------------------------------------------
# homogeneous profiles
# ---------------------------------------------------------------------------


def zeta_profile(spec) -> tuple[sp.Poly, ...]:
    """Resolve a profile spec (see module docstring) to five polynomials."""
    if not spec:
        raise ConfigError("empty homogeneous profile spec")
    name, *params = spec
    e = [sp.coordinate(i) for i in range(5)]
    if name == "constant":
        if len(params) != 5:
            raise ConfigError("constant profile needs five coefficients")
        return tuple(sp.constant(float(c)) for c in params)
    if name == "radial":
        return tuple(e)
    if name == "rotation":
        i, j = (int(p) for p in params)
        comps = [sp.poly() for _ in range(5)]
        comps[i] = sp.scale(e[j], -1.0)
        comps[j] = e[i]
        return tuple(comps)
    if name == "tangent_gradient":
        (k,) = (int(p) for p in params)
        comps = [sp.scale(sp.mul(e[k], e[i]), -1.0) for i in range(5)]
        comps[k] = sp.add(comps[k], sp.constant(1.0))
        return tuple(comps)
    if name == "divfree_axis":
        (k,) = (int(p) for p in params)
        comps = [sp.scale(sp.mul(e[k], e[i]), 1.0 / 3.0) for i in range(5)]
        comps[k] = sp.add(comps[k], sp.constant(1.0))
        return tuple(comps)
    if name == "poly":
        (terms,) = params
        comps = [sp.poly() for _ in range(5)]
        for comp, alpha, coeff in terms:
            comps[int(comp)] = sp.add(comps[int(comp)],
                                      sp.monomial(alpha, float(coeff)))
        return tuple(comps)
    raise ConfigError(f"unknown homogeneous profile {name!r}")


def _normalize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.linalg.norm(x, axis=1)
    if np.any(r == 0.0):
        raise DomainError("evaluation at the origin")
    return x / r[:, None], r


def homogeneous_field(zeta: tuple[sp.Poly, ...]) -> Field:
    """Degree minus-one field u = zeta(x/|x|) / |x| with its exact gradient."""
    grads = [sp.tangential_gradient(z) for z in zeta]

    def fn(x):
        s, r = _normalize(x)
        vals = np.stack([sp.eval_poly(z, s) for z in zeta], axis=-1)
        return vals / r[:, None]

    def grad_fn(x):
        s, r = _normalize(x)
        out = np.empty((x.shape[0], 5, 5))
        for i in range(5):
            zi = sp.eval_poly(zeta[i], s)
            for j in range(5):
                gij = sp.eval_poly(grads[i][j], s)
                out[:, i, j] = (gij - s[:, j] * zi) / r**2
        return out

    return Field(kind="vector", fn=fn, grad_fn=grad_fn, radial_degree=-1.0,
                 name="homogeneous", zeta=zeta)


def _polynomial_vector(terms) -> Field:
    comps = [sp.poly() for _ in range(5)]
    for comp, alpha, coeff in terms:
        comps[int(comp)] = sp.add(comps[int(comp)], sp.monomial(alpha, float(coeff)))
    partials = [[sp.ambient_partial(c, j) for j in range(5)] for c in comps]
    degs = {sum(a) for c in comps for a in c}

    def fn(x):
        return np.stack([sp.eval_poly(c, x) for c in comps], axis=-1)

    def grad_fn(x):
        out = np.empty((x.shape[0], 5, 5))
        for i in range(5):
            for j in range(5):
                out[:, i, j] = sp.eval_poly(partials[i][j], x)
        return out

    degree = degs.pop() if len(degs) == 1 else None
    return Field(kind="vector", fn=fn, grad_fn=grad_fn,
                 radial_degree=float(degree) if degree is not None else None,
                 name="polynomial")


def _scalar_polynomial(terms) -> Field:
    p = sp.poly()
    for alpha, coeff in terms:
        p = sp.add(p, sp.monomial(alpha, float(coeff)))
    partials = [sp.ambient_partial(p, j) for j in range(5)]
    lap = sp.poly()
    for j in range(5):
        lap = sp.add(lap, sp.ambient_partial(partials[j], j))
    degs = {sum(a) for a in p}

    def fn(x):
        return sp.eval_poly(p, x)

    def grad_fn(x):
        return np.stack([sp.eval_poly(q, x) for q in partials], axis=-1)

    degree = degs.pop() if len(degs) == 1 else None
    return Field(kind="scalar", fn=fn, grad_fn=grad_fn,
                 laplacian_fn=lambda x: sp.eval_poly(lap, x),
                 radial_degree=float(degree) if degree is not None else None,
                 name="scalar_polynomial")


def rescaled(field: Field, lam: float, power: float | None = None) -> Field:
    """Zoomed-in copy ``lam^power f(lam x)``.

    ``power`` defaults to 1 for vector (velocity) fields and 2 for scalar
    (pressure) fields, the scaling that maps solutions to solutions.
    """
    if power is None:
        power = 1.0 if field.kind == "vector" else 2.0
    amp = lam**power

    def fn(x):
        return amp * field.fn(lam * x)

    grad_fn = None
    if field.grad_fn is not None:
        def grad_fn(x):
            return amp * lam * field.grad_fn(lam * x)

    lap_fn = None
    if field.laplacian_fn is not None:
        def lap_fn(x):
            return amp * lam**2 * field.laplacian_fn(lam * x)

    lo, hi = field.domain
    return Field(kind=field.kind, fn=fn, grad_fn=grad_fn, laplacian_fn=lap_fn,
                 domain=(lo / lam, hi / lam),
                 radial_degree=field.radial_degree,
                 support_radius=(None if field.support_radius is None
                                 else field.support_radius / lam),
                 name=f"{field.name}_zoom", params=(*field.params, lam))


def fixture_field(name: str, params: list | tuple = ()) -> Field:
    """Build a catalog field; see the module docstring for the schema.

    Raises
    ------
    ConfigError
        For unknown names or malformed parameter lists.
    """
    params = list(params)
    try:
        if name == "constant":
            e = np.asarray(params if params else [1, 0, 0, 0, 0], dtype=float)
            if e.shape != (5,):
                raise ConfigError("constant fixture needs five components")
            return Field(kind="vector",
                         fn=lambda x, e=e: np.broadcast_to(e, (x.shape[0], 5)).copy(),
                         grad_fn=lambda x: np.zeros((x.shape[0], 5, 5)),
                         radial_degree=0.0, name="constant", params=tuple(e))
        if name == "linear_radial":
            eye = np.eye(5)
            return Field(kind="vector", fn=lambda x: x.copy(),
                         grad_fn=lambda x, eye=eye: np.broadcast_to(
                             eye, (x.shape[0], 5, 5)).copy(),
                         radial_degree=1.0, name="linear_radial")
        if name == "homogeneous":
            return homogeneous_field(zeta_profile(params))
        if name == "rotation_plane":
            i, j = (int(p) for p in params)
            g = np.zeros((5, 5))
            g[i, j] = -1.0
            g[j, i] = 1.0

            def fn(x, i=i, j=j):
                out = np.zeros((x.shape[0], 5))
                out[:, i] = -x[:, j]
                out[:, j] = x[:, i]
                return out

            return Field(kind="vector", fn=fn,
                         grad_fn=lambda x, g=g: np.broadcast_to(
                             g, (x.shape[0], 5, 5)).copy(),
                         radial_degree=1.0, name="rotation_plane", params=(i, j))
        if name == "polynomial":
            (terms,) = params
            return _polynomial_vector(terms)
        if name == "gaussian_bump":
            *e, w = params if params else [1, 0, 0, 0, 0, 0.6]
            e = np.asarray(e, dtype=float)
            w = float(w)

            def fn(x, e=e, w=w):
                g = np.exp(-np.sum(x**2, axis=1) / w**2)
                return g[:, None] * e

            def grad_fn(x, e=e, w=w):
                g = np.exp(-np.sum(x**2, axis=1) / w**2)
                return (-2.0 / w**2) * g[:, None, None] * e[None, :, None] * x[:, None, :]

            return Field(kind="vector", fn=fn, grad_fn=grad_fn,
                         name="gaussian_bump", params=(*e, w))
        if name == "zero":
            return Field(kind="scalar", fn=lambda x: np.zeros(x.shape[0]),
                         grad_fn=lambda x: np.zeros((x.shape[0], 5)),
                         laplacian_fn=lambda x: np.zeros(x.shape[0]),
                         name="zero")
        if name == "constant_scalar":
            (c,) = params
            c = float(c)
            return Field(kind="scalar", fn=lambda x: np.full(x.shape[0], c),
                         grad_fn=lambda x: np.zeros((x.shape[0], 5)),
                         laplacian_fn=lambda x: np.zeros(x.shape[0]),
                         radial_degree=0.0, name="constant_scalar", params=(c,))
        if name == "radial_power":
            c, p = (float(v) for v in params)

            def fn(x, c=c, p=p):
                return c * np.linalg.norm(x, axis=1) ** p

            def grad_fn(x, c=c, p=p):
                r = np.linalg.norm(x, axis=1)
                return (c * p) * r[:, None] ** (p - 2.0) * x

            def lap_fn(x, c=c, p=p):
                r = np.linalg.norm(x, axis=1)
                return c * p * (p + 3.0) * r ** (p - 2.0)

            dom = (0.0, np.inf)
            return Field(kind="scalar", fn=fn, grad_fn=grad_fn,
                         laplacian_fn=lap_fn, domain=dom, radial_degree=p,
                         name="radial_power", params=(c, p))
        if name == "scalar_polynomial":
            (terms,) = params
            return _scalar_polynomial(terms)
        if name == "parabolic_bump":
            (r0,) = params
            r0 = float(r0)

            def fn(x, r0=r0):
                q = np.maximum(0.0, 1.0 - np.sum(x**2, axis=1) / r0**2)
                return q**2

            def grad_fn(x, r0=r0):
                q = np.maximum(0.0, 1.0 - np.sum(x**2, axis=1) / r0**2)
                return (-4.0 / r0**2) * q[:, None] * x

            def lap_fn(x, r0=r0):
                r2 = np.sum(x**2, axis=1)
                q = np.maximum(0.0, 1.0 - r2 / r0**2)
                inside = q > 0.0
                # div(-4 q x / r0^2) = -20 q / r0^2 + 8 r^2 / r0^4
                return np.where(inside, -20.0 * q / r0**2 + 8.0 * r2 / r0**4, 0.0)

            return Field(kind="scalar", fn=fn, grad_fn=grad_fn,
                         laplacian_fn=lap_fn, support_radius=r0,
                         name="parabolic_bump", params=(r0,))
        if name == "bernoulli_pressure":
            *spec, c = params
            zeta = zeta_profile(spec)
            c = float(c)
            q = sp.constant(c)
            for z in zeta:
                q = sp.add(q, sp.scale(sp.mul(z, z), -1.0))
            q = sp.scale(q, 0.5)  # P = q(sigma) / |x|^2, |u|^2 + 2P = c / |x|^2
            qgrad = sp.tangential_gradient(q)

            def fn(x, q=q):
                s, r = _normalize(x)
                return sp.eval_poly(q, s) / r**2

            def grad_fn(x, q=q, qgrad=qgrad):
                s, r = _normalize(x)
                qv = sp.eval_poly(q, s)
                out = np.empty((x.shape[0], 5))
                for j in range(5):
                    out[:, j] = (sp.eval_poly(qgrad[j], s) - 2.0 * s[:, j] * qv) / r**3
                return out

            return Field(kind="scalar", fn=fn, grad_fn=grad_fn,
                         radial_degree=-2.0, name="bernoulli_pressure",
                         params=tuple(params))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameters {params!r} for fixture {name!r}: {exc}") from exc
    raise ConfigError(f"unknown fixture {name!r}")
