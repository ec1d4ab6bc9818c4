"""Lagrangian model families and the Euler-Lagrange flow.

Families provide exact analytic jets assembled from their coefficient
functions; coefficients (metric entries, magnetic one-form components,
potential) may be constants or position-dependent callables written in
generic arithmetic, in which case their position gradients are obtained by
first-order dual propagation. All families also expose the generic
expression path, so the analytic assemblies can be cross-checked against
plain hyper-dual propagation and against finite differences.

The mixed-derivative convention follows :mod:`routhlab.jets`:
``d_xy[i, j]`` differentiates first in ``x[i]``, then in ``v[j]``.
"""

from __future__ import annotations

import numpy as np

from .duals import grad_of, seed_first, sqrt, value_of
from .errors import DomainError, PreconditionError, SingularHessian
from .expressions import Expression, parse_expression
from .integrators import Trajectory, solve_ode
from .jets import ScalarField, SecondJet, chain_jet

__all__ = [
    "LagrangianModel",
    "MagneticLagrangian",
    "MechanicalLagrangian",
    "PowerQuadraticLagrangian",
    "HomogeneousLagrangian",
    "ExpressionLagrangian",
    "poincare_disk_lagrangian",
    "parse_lagrangian",
    "energy",
    "strong_convexity_check",
    "el_acceleration",
    "integrate_el",
]


# -- coefficient evaluation ---------------------------------------------------


def _coeff_matrix(spec, x: np.ndarray, grads: bool):
    """Values (and optionally x-gradients) of an n-by-n coefficient matrix."""
    n = x.shape[0]
    if isinstance(spec, np.ndarray):
        return spec, (np.zeros((n, n, n)) if grads else None)
    xs = seed_first(x) if grads else [float(c) for c in x]
    try:
        rows = spec(xs)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(str(exc)) from exc
    vals = np.empty((n, n))
    dvals = np.zeros((n, n, n)) if grads else None
    for i in range(n):
        for j in range(n):
            z = rows[i][j]
            vals[i, j] = value_of(z)
            if grads:
                dvals[:, i, j] = grad_of(z, n)
    return vals, dvals


def _coeff_vector(spec, x: np.ndarray, grads: bool):
    n = x.shape[0]
    if spec is None:
        return np.zeros(n), (np.zeros((n, n)) if grads else None)
    if isinstance(spec, np.ndarray):
        return spec, (np.zeros((n, n)) if grads else None)
    xs = seed_first(x) if grads else [float(c) for c in x]
    try:
        comps = spec(xs)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(str(exc)) from exc
    vals = np.empty(n)
    dvals = np.zeros((n, n)) if grads else None
    for i in range(n):
        vals[i] = value_of(comps[i])
        if grads:
            dvals[:, i] = grad_of(comps[i], n)
    return vals, dvals


def _coeff_scalar(spec, x: np.ndarray, grads: bool):
    n = x.shape[0]
    if spec is None:
        return 0.0, (np.zeros(n) if grads else None)
    if isinstance(spec, (int, float)):
        return float(spec), (np.zeros(n) if grads else None)
    xs = seed_first(x) if grads else [float(c) for c in x]
    try:
        z = spec(xs)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(str(exc)) from exc
    return value_of(z), (grad_of(z, n) if grads else None)


def _normalize_matrix_spec(spec, dim: int):
    if callable(spec):
        return spec
    m = np.asarray(spec, float)
    if m.shape != (dim, dim):
        raise ValueError(f"metric must be {dim}x{dim}, got {m.shape}")
    if not np.allclose(m, m.T, atol=0.0):
        raise ValueError("constant metric must be symmetric")
    return m


def _normalize_vector_spec(spec, dim: int):
    if spec is None or callable(spec):
        return spec
    b = np.asarray(spec, float)
    if b.shape != (dim,):
        raise ValueError(f"one-form must have {dim} components, got {b.shape}")
    return b


# -- model families -----------------------------------------------------------


class LagrangianModel(ScalarField):
    """A time-independent Lagrangian L(x, v) with second-order jets."""

    family: str = "custom"

    def describe(self) -> dict:
        return {"family": self.family, "dim": self.dim}


class MagneticLagrangian(LagrangianModel):
    """L = 1/2 v.g(x).v + beta(x).v - V(x).

    ``metric`` must evaluate symmetric positive definite on the domain;
    ``domain`` is an optional predicate on position, and evaluation outside
    it raises DomainError.
    """

    family = "magnetic"

    def __init__(self, dim: int, metric, beta=None, potential=None, domain=None):
        if dim < 1:
            raise ValueError("dim must be at least 1")
        self.dim = int(dim)
        self.metric = _normalize_matrix_spec(metric, self.dim)
        self.beta = _normalize_vector_spec(beta, self.dim)
        self.potential = potential
        self._domain = domain

    def domain_check(self, x, y):
        if self._domain is not None and not self._domain(np.asarray(x, float)):
            raise DomainError(f"position {np.asarray(x)} outside the model domain")

    def eval(self, x, y) -> SecondJet:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, dg = _coeff_matrix(self.metric, x, grads=True)
        b, db = _coeff_vector(self.beta, x, grads=True)
        v, dv = _coeff_scalar(self.potential, x, grads=True)
        gy = g @ y
        return SecondJet(
            value=0.5 * float(y @ gy) + float(b @ y) - v,
            d_x=0.5 * np.einsum("bij,i,j->b", dg, y, y) + db @ y - dv,
            d_y=gy + b,
            d_yy=g,
            d_xy=np.einsum("bij,j->bi", dg, y) + db,
        )

    def value(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, _ = _coeff_matrix(self.metric, x, grads=False)
        b, _ = _coeff_vector(self.beta, x, grads=False)
        v, _ = _coeff_scalar(self.potential, x, grads=False)
        return 0.5 * float(y @ (g @ y)) + float(b @ y) - v

    def fiber_jet(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, _ = _coeff_matrix(self.metric, x, grads=False)
        b, _ = _coeff_vector(self.beta, x, grads=False)
        v, _ = _coeff_scalar(self.potential, x, grads=False)
        gy = g @ y
        return 0.5 * float(y @ gy) + float(b @ y) - v, gy + b, g

    def expr(self, xs, ys):
        # generic-arithmetic form, used to cross-check the analytic assembly
        n = self.dim
        rows = self.metric(xs) if callable(self.metric) else self.metric
        acc = 0.0
        for i in range(n):
            for j in range(n):
                gij = rows[i][j]
                if isinstance(gij, (int, float)) and gij == 0.0:
                    continue
                acc = acc + 0.5 * gij * ys[i] * ys[j]
        if self.beta is not None:
            comps = self.beta(xs) if callable(self.beta) else self.beta
            for i in range(n):
                acc = acc + comps[i] * ys[i]
        if self.potential is not None:
            pot = self.potential(xs) if callable(self.potential) else self.potential
            acc = acc - pot
        return acc


class MechanicalLagrangian(MagneticLagrangian):
    """Kinetic-minus-potential Lagrangian: L = 1/2 v.g(x).v - V(x)."""

    family = "simple"

    def __init__(self, dim: int, metric, potential=None, domain=None):
        super().__init__(dim, metric, beta=None, potential=potential, domain=domain)


class PowerQuadraticLagrangian(LagrangianModel):
    """L = (1/2 v.g(x).v)^(k/2), positively homogeneous of degree k in v.

    Strongly convex on the slit v != 0 for k >= 2 and positive definite g.
    """

    family = "k_homogeneous"

    def __init__(self, dim: int, metric, degree: int, domain=None):
        if degree < 2:
            raise ValueError("degree must be at least 2")
        self.dim = int(dim)
        self.metric = _normalize_matrix_spec(metric, self.dim)
        self.degree = int(degree)
        self._domain = domain

    def domain_check(self, x, y):
        if self._domain is not None and not self._domain(np.asarray(x, float)):
            raise DomainError(f"position {np.asarray(x)} outside the model domain")

    def _quad_jet(self, x, y) -> SecondJet:
        g, dg = _coeff_matrix(self.metric, x, grads=True)
        gy = g @ y
        return SecondJet(
            value=0.5 * float(y @ gy),
            d_x=0.5 * np.einsum("bij,i,j->b", dg, y, y),
            d_y=gy,
            d_yy=g,
            d_xy=np.einsum("bij,j->bi", dg, y),
        )

    def eval(self, x, y) -> SecondJet:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        q = self._quad_jet(x, y)
        p = 0.5 * self.degree
        if p == 1.0:
            return q
        if q.value <= 0.0:
            raise DomainError("velocity outside the slit domain (quadratic form not positive)")
        u = q.value
        return chain_jet(q, u**p, p * u ** (p - 1.0), p * (p - 1.0) * u ** (p - 2.0))

    def value(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, _ = _coeff_matrix(self.metric, x, grads=False)
        q = 0.5 * float(y @ (g @ y))
        p = 0.5 * self.degree
        if p == 1.0:
            return q
        if q <= 0.0:
            raise DomainError("velocity outside the slit domain (quadratic form not positive)")
        return q**p

    def fiber_jet(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        g, _ = _coeff_matrix(self.metric, x, grads=False)
        gy = g @ y
        q = 0.5 * float(y @ gy)
        p = 0.5 * self.degree
        if p == 1.0:
            return q, gy, g
        if q <= 0.0:
            raise DomainError("velocity outside the slit domain (quadratic form not positive)")
        f1 = p * q ** (p - 1.0)
        f2 = p * (p - 1.0) * q ** (p - 2.0)
        return q**p, f1 * gy, f1 * g + f2 * np.outer(gy, gy)

    def expr(self, xs, ys):
        n = self.dim
        rows = self.metric(xs) if callable(self.metric) else self.metric
        acc = 0.0
        for i in range(n):
            for j in range(n):
                gij = rows[i][j]
                if isinstance(gij, (int, float)) and gij == 0.0:
                    continue
                acc = acc + 0.5 * gij * ys[i] * ys[j]
        if self.degree == 2:
            return acc
        if self.degree % 2 == 0:
            return acc ** (self.degree // 2)
        return sqrt(acc) ** self.degree


class HomogeneousLagrangian(LagrangianModel):
    """Wraps a field positively homogeneous of integer degree k in velocity.

    The scaling degree is verified on random sample points at construction;
    a wrapped field that fails the Euler scaling test is rejected.
    """

    family = "k_homogeneous"

    def __init__(self, base: ScalarField, degree: int, verify_samples: int = 25, seed: int = 7):
        if degree < 1:
            raise ValueError("degree must be at least 1")
        self.base = base
        self.dim = base.dim
        self.degree = int(degree)
        self._verify_degree(verify_samples, seed)

    def _verify_degree(self, samples: int, seed: int):
        rng = np.random.default_rng(seed)
        checked = 0
        for _ in range(40 * samples):
            if checked >= samples:
                return
            x = rng.uniform(-0.8, 0.8, self.dim)
            y = rng.uniform(0.5, 1.5, self.dim) * rng.choice([-1.0, 1.0], self.dim)
            lam = rng.uniform(0.5, 2.0)
            try:
                a = self.base.value(x, lam * y)
                b = self.base.value(x, y)
            except DomainError:
                continue
            checked += 1
            if abs(a - lam**self.degree * b) > 1e-10 * (1.0 + abs(a)):
                raise PreconditionError(
                    f"field is not homogeneous of degree {self.degree} in velocity"
                )
        if checked == 0:
            raise PreconditionError(
                "could not find in-domain sample points for the degree check"
            )

    def domain_check(self, x, y):
        self.base.domain_check(x, y)

    def eval(self, x, y) -> SecondJet:
        return self.base.eval(x, y)

    def value(self, x, y) -> float:
        return self.base.value(x, y)

    def fiber_jet(self, x, y):
        return self.base.fiber_jet(x, y)


class ExpressionLagrangian(LagrangianModel):
    """Lagrangian defined by parsed expression text in x1..xn, v1..vn."""

    family = "expression"

    def __init__(self, expression: Expression, dim: int, domain=None):
        self.expression = expression
        self.dim = int(dim)
        self._domain = domain

    def domain_check(self, x, y):
        if self._domain is not None and not self._domain(np.asarray(x, float)):
            raise DomainError(f"position {np.asarray(x)} outside the model domain")

    def expr(self, xs, ys):
        return self.expression(xs, ys)

    def describe(self) -> dict:
        d = super().describe()
        d["expression"] = self.expression.source
        return d


def poincare_disk_lagrangian() -> MagneticLagrangian:
    """The unit-disk magnetic model.

    Hyperbolic kinetic term (disk model, curvature -4 normalization) plus the
    rotationally invariant magnetic one-form; defined for |x| < 1:

        L = (v1^2 + v2^2) / (16 (1 - |x|^2)^2) + (x2 v1 - x1 v2) / (2 (1 - |x|^2))
    """

    def metric(xs):
        c = 1 - (xs[0] * xs[0] + xs[1] * xs[1])
        w = 1 / (8 * c * c)
        return [[w, 0.0], [0.0, w]]

    def beta(xs):
        c = 2 * (1 - (xs[0] * xs[0] + xs[1] * xs[1]))
        return [xs[1] / c, -xs[0] / c]

    model = MagneticLagrangian(
        dim=2,
        metric=metric,
        beta=beta,
        potential=None,
        domain=lambda x: float(x @ x) < 1.0,
    )
    model.family = "poincare_magnetic"
    return model


def parse_lagrangian(text: str, dim: int | None = None, domain=None) -> ExpressionLagrangian:
    """Build a Lagrangian from expression text.

    The dimension is inferred from the highest variable index unless declared;
    a declared dimension turns out-of-range indices into ArityError.
    """
    expression = parse_expression(text, dim=dim)
    n = dim if dim is not None else max(expression.max_x, expression.max_v, 1)
    return ExpressionLagrangian(expression, n, domain=domain)


# -- operations ---------------------------------------------------------------


def energy(L: LagrangianModel, x, v) -> float:
    """E_L = v . dL/dv - L at (x, v)."""
    v = np.asarray(v, float)
    val, d_y, _ = L.fiber_jet(np.asarray(x, float), v)
    return float(v @ d_y) - val


def strong_convexity_check(L: LagrangianModel, x, v) -> tuple[bool, float]:
    """Whether the velocity Hessian at (x, v) is positive definite.

    Returns (verdict, smallest eigenvalue); never raises on indefiniteness,
    though evaluation itself may raise DomainError outside the model domain.
    """
    _, _, h = L.fiber_jet(np.asarray(x, float), np.asarray(v, float))
    eigs = np.linalg.eigvalsh(0.5 * (h + h.T))
    smallest = float(eigs[0])
    return smallest > 0.0, smallest


def el_acceleration(L: LagrangianModel, x, v) -> np.ndarray:
    """Acceleration solving g.a = dL/dx - (d2L/dxdv)^T v at (x, v)."""
    x = np.asarray(x, float)
    v = np.asarray(v, float)
    j = L.eval(x, v)
    rhs = j.d_x - j.d_xy.T @ v
    try:
        return np.linalg.solve(j.d_yy, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularHessian(f"velocity Hessian is singular at x={x}, v={v}") from exc


def integrate_el(
    L: LagrangianModel,
    x0,
    v0,
    t_end: float,
    tol: float = 1e-10,
    samples: int = 801,
    max_steps: int = 200_000,
) -> Trajectory:
    """Integrate the Euler-Lagrange flow from (x0, v0) over [0, t_end]."""
    x0 = np.asarray(x0, float)
    v0 = np.asarray(v0, float)
    n = L.dim
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError(f"initial data must have shape ({n},)")
    ok, smallest = strong_convexity_check(L, x0, v0)
    if not ok:
        raise PreconditionError(
            f"L is not strongly convex at the initial state (min eigenvalue {smallest:.3g})"
        )

    def rhs(t, s):
        x = s[:n]
        v = s[n:]
        j = L.eval(x, v)
        try:
            a = np.linalg.solve(j.d_yy, j.d_x - j.d_xy.T @ v)
        except np.linalg.LinAlgError as exc:
            raise SingularHessian(f"velocity Hessian is singular at x={x}") from exc
        return np.concatenate([v, a])

    dense, stats = solve_ode(rhs, np.concatenate([x0, v0]), t_end, tol=tol, max_steps=max_steps)
    times = np.linspace(0.0, t_end, samples)
    states = dense.sample(times)
    positions = states[:, :n]
    velocities = states[:, n:]
    energy_log = np.array(
        [energy(L, positions[i], velocities[i]) for i in range(samples)]
    )
    return Trajectory(
        times=times,
        positions=positions,
        velocities=velocities,
        energy_log=energy_log,
        stats=stats,
        dense=dense,
        meta={"kind": "euler_lagrange"},
    )
