"""Polynomial calculus on the unit sphere in R^5.

A polynomial is stored as ``{exponent_tuple: coefficient}`` over the five
ambient coordinates.  Restricted to the sphere, the tangential gradient of a
monomial has the closed form

    (grad_S s^a)^j = a_j s^(a - e_j) - |a| s^a s_j,

which is the ambient gradient of the degree-0 homogeneous extension projected
onto the tangent space.  All operations below stay inside the polynomial
class, so fixture profiles admit exact derivatives and divergences.
"""

from __future__ import annotations

import numpy as np

Poly = dict[tuple[int, int, int, int, int], float]

ZERO: Poly = {}

_COEFF_EPS = 0.0  # keep exact rational-ish coefficients; drop true zeros only


def poly(terms: dict | None = None) -> Poly:
    out: Poly = {}
    for a, c in (terms or {}).items():
        key = tuple(int(v) for v in a)
        if len(key) != 5 or any(v < 0 for v in key):
            raise ValueError(f"bad exponent tuple {a!r}")
        if c != 0.0:
            out[key] = out.get(key, 0.0) + float(c)
    return out


def monomial(alpha, coeff: float = 1.0) -> Poly:
    return poly({tuple(alpha): coeff})


def constant(c: float) -> Poly:
    return poly({(0, 0, 0, 0, 0): c})


def coordinate(i: int) -> Poly:
    a = [0, 0, 0, 0, 0]
    a[i] = 1
    return monomial(a)


def add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for a, c in q.items():
        s = out.get(a, 0.0) + c
        if s == 0.0:
            out.pop(a, None)
        else:
            out[a] = s
    return out


def scale(p: Poly, c: float) -> Poly:
    if c == 0.0:
        return {}
    return {a: c * v for a, v in p.items()}


def mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for a, ca in p.items():
        for b, cb in q.items():
            key = tuple(x + y for x, y in zip(a, b))
            s = out.get(key, 0.0) + ca * cb
            if s == 0.0:
                out.pop(key, None)
            else:
                out[key] = s
    return out


def degree(p: Poly) -> int:
    return max((sum(a) for a in p), default=0)


def eval_poly(p: Poly, sigma: np.ndarray) -> np.ndarray:
    """Evaluate at points ``sigma`` of shape (m, 5); returns (m,).

    Powers of each coordinate are built once by cumulative multiplication,
    so a term costs a handful of vector multiplies regardless of degree.
    """
    m = sigma.shape[0]
    out = np.zeros(m)
    if not p:
        return out
    max_exp = [0] * 5
    for a in p:
        for i, e in enumerate(a):
            if e > max_exp[i]:
                max_exp[i] = e
    powers: list[list[np.ndarray]] = []
    for i in range(5):
        tab = [np.ones(m)]
        col = sigma[:, i]
        for _ in range(max_exp[i]):
            tab.append(tab[-1] * col)
        powers.append(tab)
    for a, c in p.items():
        term = None
        for i, e in enumerate(a):
            if e:
                term = powers[i][e] if term is None else term * powers[i][e]
        out += c if term is None else c * term
    return out


def ambient_partial(p: Poly, j: int) -> Poly:
    out: Poly = {}
    for a, c in p.items():
        if a[j]:
            b = list(a)
            b[j] -= 1
            key = tuple(b)
            out[key] = out.get(key, 0.0) + c * a[j]
    return out


def tangential_gradient(p: Poly) -> list[Poly]:
    """Five ambient components of grad_S p, each again a polynomial."""
    comps: list[Poly] = [dict() for _ in range(5)]
    for a, c in p.items():
        deg = sum(a)
        for j in range(5):
            if a[j]:
                b = list(a)
                b[j] -= 1
                key = tuple(b)
                comps[j][key] = comps[j].get(key, 0.0) + c * a[j]
            if deg:
                b = list(a)
                b[j] += 1
                key = tuple(b)
                comps[j][key] = comps[j].get(key, 0.0) - c * deg
    return [{a: v for a, v in comp.items() if v != 0.0} for comp in comps]


def tangential_divergence(v: list[Poly]) -> Poly:
    out: Poly = {}
    for i in range(5):
        gi = tangential_gradient(v[i])[i]
        out = add(out, gi)
    return out


def dot(v: list[Poly], w: list[Poly]) -> Poly:
    out: Poly = {}
    for i in range(5):
        out = add(out, mul(v[i], w[i]))
    return out


def radial_component(v: list[Poly]) -> Poly:
    """sigma . v as a polynomial (degree shifts by one)."""
    out: Poly = {}
    for i in range(5):
        out = add(out, mul(coordinate(i), v[i]))
    return out


def tangential_part(v: list[Poly]) -> list[Poly]:
    """v - sigma (sigma . v), component-wise."""
    f = radial_component(v)
    return [add(v[i], scale(mul(coordinate(i), f), -1.0)) for i in range(5)]
