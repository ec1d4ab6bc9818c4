"""Homogenization of Lagrangians and the induced energy-level Finsler metric.

A time-independent Lagrangian L(x, v) extends to a positively 1-homogeneous
function on one more coordinate,

    F(x0, x, u, y) = u * L(x, y / u),    u > 0,

where the added coordinate x0 is cyclic and the momentum conjugate to it is
minus the energy of L. Reducing that single cyclic coordinate at momentum -e
eliminates u through the energy relation E(x, y / u) = e and produces a
1-homogeneous function on the original coordinates,

    F_e(x, y) = s * (L(x, y / s) + e),   where E(x, y / s) = e,

whose geodesics trace exactly the energy-e solutions of L. This module
builds both constructions with exact jets (the eliminated scale is
differentiated implicitly, never by finite differences), plus closed forms
for fiberwise-homogeneous and quadratic-plus-linear Lagrangians, gauge
shifts by exact one-forms, and the pointwise positivity check appropriate
for degenerate (1-homogeneous) velocity Hessians.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .duals import HyperDual, grad_of, seed_first, seed_second, sqrt, value_of
from .errors import DomainError, EnergyUnreachable, NoConvergence
from .expressions import Expression, parse_expression
from .jets import ScalarField, SecondJet
from .lagrangian import (
    LagrangianModel,
    MagneticLagrangian,
    _coeff_matrix,
    _coeff_scalar,
    _coeff_vector,
    _normalize_matrix_spec,
    _normalize_vector_spec,
)

__all__ = [
    "FinslerModel",
    "HomogenizedLagrangian",
    "homogenize",
    "EnergyScaleResult",
    "solve_energy_scale",
    "JacobiFinslerModel",
    "jacobi_finsler",
    "RandersModel",
    "randers_closed_form",
    "randers_global_criterion",
    "poincare_randers",
    "homogeneous_closed_form",
    "gauge_shift",
    "quasi_definite_check",
]


class FinslerModel(ScalarField):
    """A positively 1-homogeneous function of the velocity.

    The velocity Hessian of such a function annihilates y, so strong
    convexity is never available; :func:`quasi_definite_check` is the
    appropriate positivity test.
    """

    family: str = "finsler"

    def describe(self) -> dict:
        return {"family": self.family, "dim": self.dim}


# -- homogenization ------------------------------------------------------------


class HomogenizedLagrangian(FinslerModel):
    """F(x0, x, u, y) = u * L(x, y/u) on the half-space u > 0.

    Coordinate 0 of both position and velocity is the added slot; position 0
    never enters the value (it is cyclic by construction) and velocity 0
    must stay positive. The momentum conjugate to coordinate 0 equals minus
    the energy of the base Lagrangian.
    """

    family = "homogenized"

    def __init__(self, base: LagrangianModel):
        self.base = base
        self.dim = base.dim + 1

    def describe(self) -> dict:
        return {"family": self.family, "dim": self.dim, "base": self.base.describe()}

    def domain_check(self, x, y):
        if y[0] <= 0.0:
            raise DomainError(f"scale velocity must be positive, got {y[0]}")
        self.base.domain_check(np.asarray(x[1:], float), np.asarray(y[1:], float) / y[0])

    def eval(self, x, y) -> SecondJet:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        u = y[0]
        v = y[1:] / u
        j = self.base.eval(x[1:], v)
        n = self.base.dim
        gv = j.d_yy @ v

        d_x = np.zeros(n + 1)
        d_x[1:] = u * j.d_x

        d_y = np.empty(n + 1)
        d_y[0] = j.value - float(j.d_y @ v)
        d_y[1:] = j.d_y

        d_yy = np.empty((n + 1, n + 1))
        d_yy[0, 0] = float(v @ gv) / u
        d_yy[0, 1:] = -gv / u
        d_yy[1:, 0] = -gv / u
        d_yy[1:, 1:] = j.d_yy / u

        d_xy = np.zeros((n + 1, n + 1))
        d_xy[1:, 0] = j.d_x - j.d_xy @ v
        d_xy[1:, 1:] = j.d_xy
        return SecondJet(value=u * j.value, d_x=d_x, d_y=d_y, d_yy=d_yy, d_xy=d_xy)

    def value(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        return y[0] * self.base.value(x[1:], y[1:] / y[0])

    def fiber_jet(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        u = y[0]
        v = y[1:] / u
        val, bd_y, bd_yy = self.base.fiber_jet(x[1:], v)
        gv = bd_yy @ v
        n = self.base.dim
        d_y = np.empty(n + 1)
        d_y[0] = val - float(bd_y @ v)
        d_y[1:] = bd_y
        d_yy = np.empty((n + 1, n + 1))
        d_yy[0, 0] = float(v @ gv) / u
        d_yy[0, 1:] = -gv / u
        d_yy[1:, 0] = -gv / u
        d_yy[1:, 1:] = bd_yy / u
        return u * val, d_y, d_yy


def homogenize(L: LagrangianModel) -> HomogenizedLagrangian:
    """Extend L to a 1-homogeneous function of (u, y) with u > 0."""
    return HomogenizedLagrangian(L)


# -- the energy-scale equation -------------------------------------------------


@dataclass(frozen=True)
class EnergyScaleResult:
    """Root of E(x, y/s) = e with solver diagnostics.

    ``s_x`` and ``s_y`` hold the implicit derivatives of the root with
    respect to position and velocity; they are populated only when the
    solve is asked for them.
    """

    s: float
    residual: float
    iterations: int
    s_x: np.ndarray | None = None
    s_y: np.ndarray | None = None


def solve_energy_scale(
    L: LagrangianModel,
    x,
    y,
    e: float,
    tol: float = 1e-12,
    max_iter: int = 80,
    derivatives: bool = False,
) -> EnergyScaleResult:
    """Solve E(x, y/s) = e for the positive scale s.

    The residual is strictly decreasing in s wherever L is strongly convex
    along the ray, so a sign-change bracket plus safeguarded Newton is
    globally convergent. When the bracket expansion stagnates or runs out of
    fiber domain before a sign change, the requested level does not exist on
    the ray and :class:`EnergyUnreachable` is raised.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    s0 = float(np.linalg.norm(y))
    if s0 == 0.0:
        raise DomainError("the energy scale is undefined on the zero velocity")
    atol = tol * (1.0 + abs(e))
    stall_tol = 1e-14 * (1.0 + abs(e))
    evals = 0

    def probe(s):
        # residual E(x, y/s) - e and the slope quantity q = v.(d_yy v) > 0
        val, d_y, d_yy = L.fiber_jet(x, y / s)
        w = y / s
        return float(w @ d_y) - val - e, float(w @ (d_yy @ w))

    r0, q0 = probe(s0)
    evals += 1
    if abs(r0) <= atol:
        return _finish_scale(L, x, y, s0, r0, evals, derivatives)

    # geometric bracket expansion: the residual decreases in s, so a root
    # needs residual(lo) > 0 > residual(hi) with lo < hi
    if r0 > 0.0:
        lo, hi, r_hi = s0, s0, r0
        prev, stalls = r0, 0
        for _ in range(200):
            hi *= 2.0
            try:
                r_hi, _ = probe(hi)
            except DomainError as exc:
                raise EnergyUnreachable(
                    f"energy level {e} is unreachable along this ray "
                    "(fiber domain ends before the level)"
                ) from exc
            evals += 1
            if r_hi <= 0.0:
                break
            stalls = stalls + 1 if abs(prev - r_hi) <= stall_tol else 0
            if stalls >= 3:
                raise EnergyUnreachable(
                    f"energy level {e} is unreachable along this ray "
                    f"(residual stagnates at {r_hi:.3e} as the scale grows)"
                )
            lo, prev = hi, r_hi
        else:
            raise EnergyUnreachable(f"energy level {e} is unreachable along this ray")
    else:
        lo, hi, r_lo = s0, s0, r0
        prev, stalls = r0, 0
        for _ in range(200):
            lo *= 0.5
            try:
                r_lo, _ = probe(lo)
            except DomainError as exc:
                raise EnergyUnreachable(
                    f"energy level {e} is unreachable along this ray "
                    "(fiber domain ends before the level)"
                ) from exc
            evals += 1
            if r_lo >= 0.0:
                break
            stalls = stalls + 1 if abs(prev - r_lo) <= stall_tol else 0
            if stalls >= 3:
                raise EnergyUnreachable(
                    f"energy level {e} is unreachable along this ray "
                    f"(residual stagnates at {r_lo:.3e} as the scale shrinks)"
                )
            hi, prev = lo, r_lo
        else:
            raise EnergyUnreachable(f"energy level {e} is unreachable along this ray")

    # safeguarded Newton inside the bracket
    s = 0.5 * (lo + hi)
    r = None
    for _ in range(max_iter):
        try:
            r, q = probe(s)
        except DomainError:
            s = 0.5 * (lo + s)
            continue
        evals += 1
        if abs(r) <= atol:
            return _finish_scale(L, x, y, s, r, evals, derivatives)
        if r > 0.0:
            lo = s
        else:
            hi = s
        if q <= 0.0:
            s = 0.5 * (lo + hi)
            continue
        s_new = s + r * s / q
        s = s_new if lo < s_new < hi else 0.5 * (lo + hi)
    raise NoConvergence(
        f"energy scale solve stalled after {max_iter} iterations "
        f"(|residual| = {abs(r):.3e})"
    )


def _finish_scale(L, x, y, s, r, evals, derivatives):
    s_x = s_y = None
    if derivatives:
        v = y / s
        j = L.eval(x, v)
        gv = j.d_yy @ v
        q = float(v @ gv)
        e_x = j.d_xy @ v - j.d_x
        s_y = gv / q
        s_x = s * e_x / q
    return EnergyScaleResult(
        s=float(s), residual=float(r), iterations=evals, s_x=s_x, s_y=s_y
    )


# -- the energy-level Finsler function ------------------------------------------


class JacobiFinslerModel(FinslerModel):
    """F_e(x, y) = s (L(x, y/s) + e) with s the root of E(x, y/s) = e.

    All jets are assembled from a single base-Lagrangian jet at (x, y/s) via
    implicit differentiation of the scale equation. The velocity Hessian
    annihilates y by construction; the value is stationary with respect to
    the eliminated scale, so root-solve error enters the value only at
    second order.
    """

    family = "jacobi"

    def __init__(self, base: LagrangianModel, e: float, tol: float = 1e-12,
                 cache_size: int = 256):
        self.base = base
        self.e = float(e)
        self.dim = base.dim
        self.tol = float(tol)
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = int(cache_size)

    def describe(self) -> dict:
        return {
            "family": self.family,
            "dim": self.dim,
            "energy": self.e,
            "base": self.base.describe(),
        }

    def domain_check(self, x, y):
        y = np.asarray(y, float)
        if float(y @ y) == 0.0:
            raise DomainError("the energy-level metric is undefined on the zero velocity")
        self.base.domain_check(np.asarray(x, float), y)

    def energy_scale(self, x, y) -> float:
        """The eliminated scale s at (x, y), cached per exact input."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        key = (x.tobytes(), y.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        s = solve_energy_scale(self.base, x, y, self.e, tol=self.tol).s
        self._cache[key] = s
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return s

    def eval(self, x, y) -> SecondJet:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        s = self.energy_scale(x, y)
        v = y / s
        j = self.base.eval(x, v)
        gv = j.d_yy @ v
        q = float(v @ gv)
        e_x = j.d_xy @ v - j.d_x
        d_yy = (j.d_yy - np.outer(gv, gv) / q) / s
        return SecondJet(
            value=s * (j.value + self.e),
            d_x=s * j.d_x,
            d_y=j.d_y.copy(),
            d_yy=0.5 * (d_yy + d_yy.T),
            d_xy=j.d_xy - np.outer(e_x, gv) / q,
        )

    def value(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        s = self.energy_scale(x, y)
        return s * (self.base.value(x, y / s) + self.e)

    def fiber_jet(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        s = self.energy_scale(x, y)
        v = y / s
        val, d_y, d_yy_b = self.base.fiber_jet(x, v)
        gv = d_yy_b @ v
        q = float(v @ gv)
        d_yy = (d_yy_b - np.outer(gv, gv) / q) / s
        return s * (val + self.e), d_y.copy(), 0.5 * (d_yy + d_yy.T)

    def level_jet(self, x, y):
        """First jet of the conserved level E_L(x, y) - e.

        Reparametrizing the canonical geodesic flow to hold this function at
        zero reproduces the base Euler-Lagrange flow pointwise in time.
        """
        j = self.base.eval(np.asarray(x, float), np.asarray(y, float))
        y = np.asarray(y, float)
        en = float(y @ j.d_y) - j.value
        return en - self.e, j.d_xy @ y - j.d_x, j.d_yy @ y


def jacobi_finsler(L: LagrangianModel, e: float, tol: float = 1e-12) -> JacobiFinslerModel:
    """The Finsler function whose geodesics are the energy-e solutions of L."""
    return JacobiFinslerModel(L, e, tol=tol)


# -- quadratic-plus-linear closed form ------------------------------------------


class RandersModel(FinslerModel):
    """F = sqrt(y . G(x) y) + B(x) . y with exact analytic jets.

    G must evaluate symmetric positive definite wherever the model is used;
    the one-form B must stay shorter than 1 in the G-inverse norm for the
    fundamental tensor to remain positive (checked pointwise by
    :func:`quasi_definite_check`, not at construction).
    """

    family = "randers"

    def __init__(self, dim: int, metric, beta=None, domain=None):
        if dim < 1:
            raise ValueError("dim must be at least 1")
        self.dim = int(dim)
        self.metric = _normalize_matrix_spec(metric, self.dim)
        self.beta = _normalize_vector_spec(beta, self.dim)
        self._domain = domain

    def domain_check(self, x, y):
        x = np.asarray(x, float)
        if self._domain is not None and not self._domain(x):
            raise DomainError(f"position {x} outside the model domain")
        y = np.asarray(y, float)
        if float(y @ y) == 0.0:
            raise DomainError("a norm-type metric is undefined on the zero velocity")

    def _pieces(self, x, grads):
        g, dg = _coeff_matrix(self.metric, x, grads)
        b, db = _coeff_vector(self.beta, x, grads)
        return g, dg, b, db

    def eval(self, x, y) -> SecondJet:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, dg, b, db = self._pieces(x, grads=True)
        w = g @ y
        a = float(y @ w)
        if a <= 0.0:
            raise DomainError("metric coefficient matrix is not positive along y")
        root = np.sqrt(a)
        da = np.einsum("bij,i,j->b", dg, y, y)
        dgy = np.einsum("bij,j->bi", dg, y)
        d_x = da / (2.0 * root) + db @ y
        d_y = w / root + b
        d_yy = g / root - np.outer(w, w) / (a * root)
        d_xy = dgy / root - np.outer(da, w) / (2.0 * a * root) + db
        return SecondJet(value=root + float(b @ y), d_x=d_x, d_y=d_y,
                         d_yy=d_yy, d_xy=d_xy)

    def value(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, _, b, _ = self._pieces(x, grads=False)
        a = float(y @ (g @ y))
        if a <= 0.0:
            raise DomainError("metric coefficient matrix is not positive along y")
        return float(np.sqrt(a) + b @ y)

    def fiber_jet(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, _, b, _ = self._pieces(x, grads=False)
        w = g @ y
        a = float(y @ w)
        if a <= 0.0:
            raise DomainError("metric coefficient matrix is not positive along y")
        root = np.sqrt(a)
        return root + float(b @ y), w / root + b, g / root - np.outer(w, w) / (a * root)

    def expr(self, xs, ys):
        # generic dual-arithmetic path, used by tests to cross-check eval
        g = self.metric(xs) if callable(self.metric) else self.metric
        acc = 0.0
        n = self.dim
        for i in range(n):
            for j in range(n):
                acc = acc + ys[i] * g[i][j] * ys[j]
        out = sqrt(acc)
        if self.beta is not None:
            b = self.beta(xs) if callable(self.beta) else self.beta
            for i in range(n):
                out = out + b[i] * ys[i]
        return out


def randers_closed_form(L: MagneticLagrangian, e: float) -> RandersModel:
    """Energy-level metric of a quadratic-plus-linear Lagrangian, in closed form.

    For L = 1/2 y.g(x).y + beta.y - V(x) the scale equation solves
    explicitly and F_e = sqrt(2 (e - V) y.g.y) + beta.y. Evaluation where
    V >= e raises DomainError (the level does not reach such points).
    """
    if not isinstance(L, MagneticLagrangian):
        raise TypeError("the closed form needs a quadratic-plus-linear Lagrangian")
    g_spec, b_spec, v_spec = L.metric, L.beta, L.potential
    e = float(e)

    def metric(xs):
        g = g_spec(xs) if callable(g_spec) else g_spec
        if v_spec is None:
            pot = 0.0
        elif callable(v_spec):
            pot = v_spec(xs)
        else:
            pot = float(v_spec)
        f = 2.0 * (e - pot)
        if value_of(f) <= 0.0:
            raise ValueError(f"energy level {e} does not dominate the potential here")
        n = len(xs)
        return [[f * g[i][j] for j in range(n)] for i in range(n)]

    return RandersModel(L.dim, metric, b_spec, domain=L._domain)


def randers_global_criterion(L: MagneticLagrangian, e: float, points) -> tuple[bool, float]:
    """Is the closed-form level metric positive across the sampled chart?

    The one-form stays shorter than the metric part exactly where
    e > 1/2 beta.g^{-1}.beta + V; the criterion compares e against the
    sampled supremum of that bound and returns (holds, supremum).
    """
    worst = -np.inf
    for p in points:
        x = np.asarray(p, float)
        g, _ = _coeff_matrix(L.metric, x, grads=False)
        b, _ = _coeff_vector(L.beta, x, grads=False)
        pot, _ = _coeff_scalar(L.potential, x, grads=False)
        bound = 0.5 * float(b @ np.linalg.solve(g, b)) + pot
        worst = max(worst, bound)
    if not np.isfinite(worst):
        raise ValueError("criterion needs at least one sample point")
    return bool(e > worst), float(worst)


def poincare_randers(tau: float) -> RandersModel:
    """Rotating-form norm metric on the unit disk.

    F = (|y| + tau (x2 y1 - x1 y2)) / (2 (1 - |x|^2)); the quadratic part is
    the disk metric scaled so that, for tau > 0, the energy-(1/tau^2) level
    metric of the magnetic disk Lagrangian equals sqrt(e) times this F.
    """
    tau = float(tau)

    def metric(xs):
        c = 1.0 - (xs[0] * xs[0] + xs[1] * xs[1])
        if value_of(c) <= 0.0:
            raise ValueError("outside the unit disk")
        w = 1.0 / (4.0 * c * c)
        return [[w, 0.0], [0.0, w]]

    def beta(xs):
        c = 1.0 - (xs[0] * xs[0] + xs[1] * xs[1])
        if value_of(c) <= 0.0:
            raise ValueError("outside the unit disk")
        return [tau * xs[1] / (2.0 * c), (-tau) * xs[0] / (2.0 * c)]

    return RandersModel(
        2, metric, beta if tau != 0.0 else None,
        domain=lambda x: float(x @ x) < 1.0,
    )


# -- fiberwise homogeneous closed form ------------------------------------------


class PowerScaledFinsler(FinslerModel):
    """F_e = c L^{1/k} for a fiberwise k-homogeneous base Lagrangian.

    On a degree-k base the energy is (k-1) L, the scale equation solves in
    closed form, and the level metric is a constant multiple of L^{1/k}
    with c = k ((k-1)/e)^{(1-k)/k}. Defined where L > 0.
    """

    family = "power_closed_form"

    def __init__(self, base: LagrangianModel, e: float, degree: float):
        k = float(degree)
        e = float(e)
        if k <= 1.0:
            raise ValueError("the closed form needs homogeneity degree above 1")
        if e <= 0.0:
            raise ValueError("a degree-k kinetic energy only reaches positive levels")
        self.base = base
        self.e = e
        self.degree = k
        self.coefficient = k * ((k - 1.0) / e) ** ((1.0 - k) / k)
        self.dim = base.dim

    def describe(self) -> dict:
        return {
            "family": self.family,
            "dim": self.dim,
            "energy": self.e,
            "degree": self.degree,
            "base": self.base.describe(),
        }

    def domain_check(self, x, y):
        self.base.domain_check(np.asarray(x, float), np.asarray(y, float))

    def _phi(self, q: float):
        if q <= 0.0:
            raise DomainError("the closed form needs a positive base value")
        p = 1.0 / self.degree
        c = self.coefficient
        f0 = c * q**p
        f1 = c * p * q ** (p - 1.0)
        f2 = c * p * (p - 1.0) * q ** (p - 2.0)
        return f0, f1, f2

    def eval(self, x, y) -> SecondJet:
        j = self.base.eval(x, y)
        f0, f1, f2 = self._phi(j.value)
        return SecondJet(
            value=f0,
            d_x=f1 * j.d_x,
            d_y=f1 * j.d_y,
            d_yy=f1 * j.d_yy + f2 * np.outer(j.d_y, j.d_y),
            d_xy=f1 * j.d_xy + f2 * np.outer(j.d_x, j.d_y),
        )

    def value(self, x, y) -> float:
        q = self.base.value(x, y)
        if q <= 0.0:
            raise DomainError("the closed form needs a positive base value")
        return self.coefficient * q ** (1.0 / self.degree)

    def fiber_jet(self, x, y):
        val, d_y, d_yy = self.base.fiber_jet(x, y)
        f0, f1, f2 = self._phi(val)
        return f0, f1 * d_y, f1 * d_yy + f2 * np.outer(d_y, d_y)


def homogeneous_closed_form(L: LagrangianModel, e: float, degree: float | None = None):
    """Closed-form level metric for a fiberwise homogeneous Lagrangian."""
    k = degree if degree is not None else getattr(L, "degree", None)
    if k is None:
        raise ValueError("degree not given and the model does not declare one")
    return PowerScaledFinsler(L, e, k)


# -- gauge shifts ---------------------------------------------------------------


class GaugeShiftedModel(ScalarField):
    """Base model plus the exact one-form df contracted with the velocity.

    Adding a total time derivative leaves the motion equations untouched:
    the d/dt and d/dx contributions of grad(f).y cancel identically. The
    velocity Hessian is unchanged, so convexity properties carry over.
    """

    def __init__(self, base: ScalarField, fn, source: str = "<callable>"):
        self.base = base
        self.dim = base.dim
        self._fn = fn
        self.source = source
        self.family = f"{getattr(base, 'family', 'model')}+exact_form"

    def describe(self) -> dict:
        out = {"family": self.family, "dim": self.dim, "form": self.source}
        if hasattr(self.base, "describe"):
            out["base"] = self.base.describe()
        return out

    def domain_check(self, x, y):
        self.base.domain_check(np.asarray(x, float), np.asarray(y, float))

    def _form_jet(self, x: np.ndarray, second: bool):
        xs = seed_second(x) if second else seed_first(x)
        try:
            z = self._fn(xs)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(str(exc)) from exc
        n = x.shape[0]
        if isinstance(z, HyperDual):
            return z.g.copy(), z.h.copy()
        if second:
            return np.zeros(n), np.zeros((n, n))
        return grad_of(z, n), None

    def eval(self, x, y) -> SecondJet:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        j = self.base.eval(x, y)
        grad, hess = self._form_jet(x, second=True)
        return SecondJet(
            value=j.value + float(grad @ y),
            d_x=j.d_x + hess @ y,
            d_y=j.d_y + grad,
            d_yy=j.d_yy,
            d_xy=j.d_xy + hess,
        )

    def value(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        grad, _ = self._form_jet(x, second=False)
        return self.base.value(x, y) + float(grad @ y)

    def fiber_jet(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        val, d_y, d_yy = self.base.fiber_jet(x, y)
        grad, _ = self._form_jet(x, second=False)
        return val + float(grad @ y), d_y + grad, d_yy


def gauge_shift(model: ScalarField, f) -> GaugeShiftedModel:
    """Add d(f)/dt to a Lagrangian or a 1-homogeneous metric function.

    ``f`` is a position-only function: an expression string, a parsed
    :class:`Expression`, or a callable acting on dual numbers. The returned
    model has identical motion equations; only values and momenta shift.
    """
    if isinstance(f, str):
        f = parse_expression(f, dim=model.dim, allow_velocity=False)
    if isinstance(f, Expression):
        expr = f

        def fn(xs):
            return expr(xs, ())

        return GaugeShiftedModel(model, fn, source=expr.source)
    if callable(f):
        return GaugeShiftedModel(model, f, source=getattr(f, "__name__", "<callable>"))
    raise TypeError("f must be an expression string, Expression, or callable")


# -- positivity for degenerate Hessians ------------------------------------------


def quasi_definite_check(F: ScalarField, x, y, tol: float = 1e-12) -> tuple[bool, float]:
    """Pointwise positivity test for 1-homogeneous metric functions.

    The velocity Hessian of a 1-homogeneous F annihilates y, so the best
    possible outcome is positive semidefinite with a one-dimensional kernel.
    Returns (ok, smallest eigenvalue); ok requires F > 0, the smallest
    eigenvalue above -tol times the spectral scale, and all remaining
    eigenvalues strictly positive.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    j = F.eval(x, y)
    h = 0.5 * (j.d_yy + j.d_yy.T)
    eigs = np.linalg.eigvalsh(h)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    ok = (
        j.value > 0.0
        and eigs[0] >= -tol * scale
        and (len(eigs) == 1 or eigs[1] > 0.0)
    )
    return bool(ok), float(eigs[0])
