"""Scale-invariant energy, the almost-monotone frequency functional and its
differential identity, the boundary flux defect, and the local energy-defect
residual for velocity/pressure pairs on balls in R^5.

For a pair (u, P) and radius r the module computes

    M(r)  = int_{B_r} |u|^2 / r^3 + |grad u|^2 / r
    A(r)  = (1/r^3) int (x.grad)|u|^2/2 + (9/4 r^3) int |u|^2
            - (1/r^2) int (|u|^2/2 + P) u.sigma
    D(r)  = int 15|u|^2/(4r^3) + |grad u|^2/(4r) + 3|grad(|x|u)|^2/(4r^3)
            + 3(r^2-|x|^2)|grad u|^2/(4r^3)
    Q(r)  = D(r) without the |grad(|x|u)|^2 bundle
    wp(r) = (1/r^2) int (|u|^2 + 2P) u.sigma
    T(r)  = (1/2r) int_{bd} x.grad|u|^2 dS - int |grad u|^2
            - int_{bd} (u.sigma)(|u|^2/2 + P) dS

obeying, for any smooth pair, the exact differential identity

    A'(r) = D(r)/r + wp(r)/r + T(r)/r^2,

whose residual (A' by central differences) is reported per radius.  T >= 0 is
precisely the shell-wise local energy inequality, so for suitable pairs A is
nondecreasing whenever wp >= 0.

All quantities are pure functions of immutable inputs; profiles over many
radii may be computed concurrently and are assembled in radius order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, EvaluationError, SupportError
from .fields import Field, ambient_gradient
from .grids import BallGrid, build_ball_grid, default_sphere
from .quadrature import integrate_shell, shell_reduce

DEFAULT_N_RADIAL = 32
DEFAULT_LEVEL = 16


def _grid_for(u: Field, r: float, grid: BallGrid | None,
              n_radial: int, level: int) -> BallGrid:
    if grid is not None:
        return grid
    lo, _ = u.domain
    r_min = max(1e-3 * r, lo * (1.0 + 1e-12)) if lo > 0 else 1e-3 * r
    return build_ball_grid(r, r_min, n_radial=n_radial, level=level)


def _gradient_at(u: Field, points: np.ndarray) -> np.ndarray:
    if u.grad_fn is not None:
        return u.grad_fn(points)
    return ambient_gradient(u, points)


def _primitive_integrals(u: Field, P: Field | None, grid: BallGrid,
                         with_grad: bool = True) -> dict[str, float]:
    """One sweep over the grid collecting the integrals every functional is
    assembled from; power-law tails are added for terms whose homogeneity is
    known from the fields."""
    pu = u.radial_degree
    pq = P.radial_degree if P is not None else None

    def shell_fn(r: float, X: np.ndarray) -> dict[str, np.ndarray]:
        s = X / r
        uv = u.fn(X)
        u2 = np.einsum("ni,ni->n", uv, uv)
        udots = np.einsum("ni,ni->n", uv, s)
        out = {"I1": u2, "I5u": 0.5 * u2 * udots}
        if P is not None:
            out["I5p"] = P.fn(X) * udots
        if with_grad:
            G = _gradient_at(u, X)
            g2 = np.einsum("nij,nij->n", G, G)
            xdot = 2.0 * np.einsum("ni,nij,nj->n", uv, G, X)
            radial_stretch = s[:, None, :] * uv[:, :, None] + r * G
            out["I2"] = g2
            out["I3"] = r**2 * g2
            out["I4"] = xdot
            out["I7"] = np.einsum("nij,nij->n", radial_stretch, radial_stretch)
        return out

    exps: dict[str, float] = {}
    if pu is not None:
        exps = {"I1": 2 * pu, "I5u": 3 * pu}
        if with_grad:
            exps.update({"I2": 2 * pu - 2, "I3": 2 * pu, "I4": 2 * pu,
                         "I7": 2 * pu})
        if P is not None and pq is not None:
            exps["I5p"] = pu + pq
    return shell_reduce(grid, shell_fn, exps)


def scale_invariant_energy(u: Field, R: float, grid: BallGrid | None = None,
                           n_radial: int = DEFAULT_N_RADIAL,
                           level: int = DEFAULT_LEVEL) -> float:
    """M(R) = int_{B_R} |u|^2 / R^3 + |grad u|^2 / R."""
    grid = _grid_for(u, R, grid, n_radial, level)
    ints = _primitive_integrals(u, None, grid)
    return ints["I1"] / R**3 + ints["I2"] / R


class MonotonicityQuantities(NamedTuple):
    A: float
    D: float
    Q: float
    wp: float


def monotonicity_quantities(u: Field, P: Field, r: float,
                            grid: BallGrid | None = None,
                            n_radial: int = DEFAULT_N_RADIAL,
                            level: int = DEFAULT_LEVEL) -> MonotonicityQuantities:
    """The frequency functional A, dissipation bundle D, its reduced form Q
    (D minus the 3|grad(|x|u)|^2/(4r^3) term), and the Bernoulli flux wp."""
    grid = _grid_for(u, r, grid, n_radial, level)
    I = _primitive_integrals(u, P, grid)
    I5 = I["I5u"] + I.get("I5p", 0.0)
    A = I["I4"] / (2.0 * r**3) + 2.25 * I["I1"] / r**3 - I5 / r**2
    Q = (3.75 * I["I1"] / r**3 + 0.25 * I["I2"] / r
         + 0.75 * (r**2 * I["I2"] - I["I3"]) / r**3)
    D = Q + 0.75 * I["I7"] / r**3
    wp = 2.0 * I5 / r**2
    return MonotonicityQuantities(A=A, D=D, Q=Q, wp=wp)


def flux_defect(u: Field, P: Field, r: float,
                grid: BallGrid | None = None,
                n_radial: int = DEFAULT_N_RADIAL,
                level: int = DEFAULT_LEVEL) -> float:
    """Boundary energy-balance defect

        T(r) = (1/2r) int_{bd B_r} x.grad|u|^2 dS - int_{B_r} |grad u|^2
               - int_{bd B_r} (u.sigma)(|u|^2/2 + P) dS.

    Nonnegative exactly when the shell-wise local energy inequality holds,
    and identically the residual closing the A' identity for smooth pairs.
    """
    grid = _grid_for(u, r, grid, n_radial, level)
    sphere = grid.sphere

    def xgrad_u2(X):
        uv = u.fn(X)
        G = _gradient_at(u, X)
        return 2.0 * np.einsum("ni,nij,nj->n", uv, G, X)

    def bernoulli_flux(X):
        uv = u.fn(X)
        s = X / np.linalg.norm(X, axis=1)[:, None]
        head = 0.5 * np.einsum("ni,ni->n", uv, uv) + P.fn(X)
        return np.einsum("ni,ni->n", uv, s) * head

    boundary = integrate_shell(xgrad_u2, r, sphere) / (2.0 * r)
    pressure = integrate_shell(bernoulli_flux, r, sphere)
    I = _primitive_integrals(u, None, grid)
    return boundary - I["I2"] - pressure


def A_value(u: Field, P: Field, r: float,
            n_radial: int = DEFAULT_N_RADIAL,
            level: int = DEFAULT_LEVEL) -> float:
    """A(r) alone (used by the derivative stencil)."""
    grid = _grid_for(u, r, None, n_radial, level)
    I = _primitive_integrals(u, P, grid)
    I5 = I["I5u"] + I.get("I5p", 0.0)
    return I["I4"] / (2.0 * r**3) + 2.25 * I["I1"] / r**3 - I5 / r**2


def A_prime_fd(u: Field, P: Field, r: float, dr: float | None = None,
               richardson: bool = False,
               n_radial: int = DEFAULT_N_RADIAL,
               level: int = DEFAULT_LEVEL) -> float:
    """dA/dr by central differences, dr = 1e-3 r by default; the optional
    Richardson pass combines steps dr and dr/2 for fourth-order accuracy."""
    if dr is None:
        dr = 1e-3 * r
    lo, hi = u.domain
    if not (lo <= r - dr and r + dr <= hi):
        from .errors import DomainError
        raise DomainError(f"stencil [{r - dr}, {r + dr}] outside domain {u.domain}")

    def central(step: float) -> float:
        ap = A_value(u, P, r + step, n_radial, level)
        am = A_value(u, P, r - step, n_radial, level)
        return (ap - am) / (2.0 * step)

    if not richardson:
        return central(dr)
    coarse = central(dr)
    fine = central(0.5 * dr)
    return (4.0 * fine - coarse) / 3.0


@dataclass(frozen=True)
class MonotonicityReport:
    """One row of a radial profile; ``identity_defect`` is the residual of
    A' = D/r + wp/r + T/r^2 with A' taken by central differences."""

    r: float
    M: float
    A: float
    D: float
    Q: float
    wp: float
    T: float
    A_prime: float
    identity_defect: float

    CSV_HEADER = "r,M,A,D,Q,wp,T,A_prime,identity_defect"

    def csv_row(self) -> str:
        vals = (self.r, self.M, self.A, self.D, self.Q, self.wp, self.T,
                self.A_prime, self.identity_defect)
        return ",".join(f"{v:.17g}" for v in vals)


def monotonicity_report(u: Field, P: Field, r: float,
                        n_radial: int = DEFAULT_N_RADIAL,
                        level: int = DEFAULT_LEVEL,
                        dr: float | None = None) -> MonotonicityReport:
    grid = _grid_for(u, r, None, n_radial, level)
    I = _primitive_integrals(u, P, grid)
    I5 = I["I5u"] + I.get("I5p", 0.0)
    A = I["I4"] / (2.0 * r**3) + 2.25 * I["I1"] / r**3 - I5 / r**2
    Q = (3.75 * I["I1"] / r**3 + 0.25 * I["I2"] / r
         + 0.75 * (r**2 * I["I2"] - I["I3"]) / r**3)
    D = Q + 0.75 * I["I7"] / r**3
    wp = 2.0 * I5 / r**2
    M = I["I1"] / r**3 + I["I2"] / r
    T = flux_defect(u, P, r, grid=grid)
    Ap = A_prime_fd(u, P, r, dr=dr, n_radial=n_radial, level=level)
    defect = Ap - (D / r + wp / r + T / r**2)
    return MonotonicityReport(r=r, M=M, A=A, D=D, Q=Q, wp=wp, T=T,
                              A_prime=Ap, identity_defect=defect)


def radial_profile(u: Field, P: Field, radii,
                   n_radial: int = DEFAULT_N_RADIAL,
                   level: int = DEFAULT_LEVEL) -> list[MonotonicityReport]:
    """Reports at each radius, assembled in ascending radius order."""
    return [monotonicity_report(u, P, r, n_radial=n_radial, level=level)
            for r in sorted(float(r) for r in radii)]


def profile_to_csv(rows: list[MonotonicityReport]) -> str:
    lines = [MonotonicityReport.CSV_HEADER]
    lines.extend(row.csv_row() for row in rows)
    return "\n".join(lines) + "\n"


def radial_cutoff(r: float, eps: float) -> Field:
    """Smooth radial cutoff: 1 on B_r, 0 outside B_{r+eps}, with a quintic
    smoothstep profile in between (C^2, so the Laplacian exists everywhere).

    With q = (|x| - r)/eps in [0, 1] the profile is 1 - (6q^5 - 15q^4 + 10q^3);
    the gradient is profile'(|x|) x/|x|, pointing radially inward on the
    transition shell with magnitude |s'(q)|/eps.
    """
    if eps <= 0.0:
        raise ValueError(f"cutoff width must be positive, got {eps}")

    def _q(rho):
        return np.clip((rho - r) / eps, 0.0, 1.0)

    def fn(x):
        q = _q(np.linalg.norm(x, axis=1))
        return 1.0 - q**3 * (6.0 * q**2 - 15.0 * q + 10.0)

    def dprofile(rho):
        q = _q(rho)
        return -30.0 * q**2 * (q - 1.0) ** 2 / eps

    def grad_fn(x):
        rho = np.linalg.norm(x, axis=1)
        safe = np.where(rho > 0.0, rho, 1.0)
        return (dprofile(rho) / safe)[:, None] * x

    def lap_fn(x):
        rho = np.linalg.norm(x, axis=1)
        q = _q(rho)
        d2 = -(120.0 * q**3 - 180.0 * q**2 + 60.0 * q) / eps**2
        safe = np.where(rho > 0.0, rho, 1.0)
        return d2 + 4.0 * dprofile(rho) / safe

    return Field(kind="scalar", fn=fn, grad_fn=grad_fn, laplacian_fn=lap_fn,
                 support_radius=r + eps, name="radial_cutoff", params=(r, eps))


def energy_defect_residual(u: Field, P: Field, phi: Field,
                           grid: BallGrid) -> float:
    """Distributional energy-balance residual tested against a cutoff:

        mu(phi) = int (|u|^2/2 + P)(u . grad phi) + (|u|^2/2) lap phi
                  - phi |grad u|^2.

    Vanishes for smooth exact solutions; nonnegative for suitable pairs.
    ``phi`` must carry analytic gradient and Laplacian and be supported
    strictly inside the grid's outer radius.  When u is homogeneous and phi
    is flat near the origin the inner power-law tail is completed exactly.
    """
    if phi.grad_fn is None or phi.laplacian_fn is None:
        raise EvaluationError("cutoff needs analytic gradient and laplacian")
    if phi.support_radius is not None:
        if phi.support_radius > grid.R * (1.0 + 1e-12):
            raise SupportError(
                f"cutoff support {phi.support_radius} exceeds grid radius {grid.R}")
    else:
        edge = np.abs(phi.fn(grid.R * grid.sphere.nodes)).max()
        if edge > 1e-12:
            raise SupportError(f"cutoff is nonzero ({edge:.3e}) at the grid boundary")

    def shell_fn(r, X):
        uv = u.fn(X)
        u2 = np.einsum("ni,ni->n", uv, uv)
        G = _gradient_at(u, X)
        g2 = np.einsum("nij,nij->n", G, G)
        gphi = phi.grad_fn(X)
        rez = ((0.5 * u2 + P.fn(X)) * np.einsum("ni,ni->n", uv, gphi)
               + 0.5 * u2 * phi.laplacian_fn(X) - phi.fn(X) * g2)
        return {"mu": rez}

    exps = {}
    if u.radial_degree is not None:
        # valid because phi is constant near the origin for cutoff inputs
        exps = {"mu": 2 * u.radial_degree - 2}
    return shell_reduce(grid, shell_fn, exps)["mu"]


def eps_regularity_quantity(u: Field, p: Field, R: float,
                            grid: BallGrid | None = None,
                            n_radial: int = DEFAULT_N_RADIAL,
                            level: int = DEFAULT_LEVEL) -> float:
    """Smallness quantity int_{B_R} |u|^3 + |p|^{3/2}."""
    grid = _grid_for(u, R, grid, n_radial, level)

    def shell_fn(r, X):
        uv = u.fn(X)
        return {"u3": np.einsum("ni,ni->n", uv, uv) ** 1.5,
                "p32": np.abs(p.fn(X)) ** 1.5}

    exps = {}
    if u.radial_degree is not None:
        exps["u3"] = 3 * u.radial_degree
    if p.radial_degree is not None:
        exps["p32"] = 1.5 * p.radial_degree
    ints = shell_reduce(grid, shell_fn, exps)
    return ints["u3"] + ints["p32"]


def energy_recurrence_terms(u: Field, p: Field, R: float,
                            n_radial: int = DEFAULT_N_RADIAL,
                            level: int = DEFAULT_LEVEL) -> tuple[float, float, float]:
    """The triple (M(R), M(4R), cubic) entering the dyadic energy recurrence,
    where the cubic term is

        | (1/R^2) int_{B_2R} (|u|^2 + 2p) u . grad phi |

    for the module's standard spherically symmetric cutoff phi, equal to 1 on
    B_R and supported in B_2R (see :func:`radial_cutoff` with r = eps = R).
    """
    phi = radial_cutoff(R, R)
    grid = build_ball_grid(2.0 * R, n_radial=n_radial, level=level,
                           breakpoints=(R,))

    def shell_fn(r, X):
        uv = u.fn(X)
        head = np.einsum("ni,ni->n", uv, uv) + 2.0 * p.fn(X)
        flux = np.einsum("ni,ni->n", uv, phi.grad_fn(X))
        return {"cubic": head * flux}

    cubic = abs(shell_reduce(grid, shell_fn)["cubic"]) / R**2
    m_quarter = scale_invariant_energy(u, R, n_radial=n_radial, level=level)
    m_whole = scale_invariant_energy(u, 4.0 * R, n_radial=n_radial, level=level)
    return m_quarter, m_whole, cubic
