"""Second-order jets of scalar fields on position-velocity space.

A :class:`SecondJet` collects exactly the partial derivatives the dynamics
equations consume: value, d_x, d_y, the velocity Hessian d_yy, and the mixed
block d_xy. The pure position Hessian is never needed by any implemented
equation and is deliberately not part of the type.

Index convention: ``d_xy[i, j]`` is the derivative first in ``x[i]``, then in
``y[j]`` (rows indexed by position, columns by velocity).

:func:`jet` computes jets by hyper-dual forward propagation; fields may
override their ``eval`` with an exact analytic assembly, which tests
cross-check against both the dual path and the independent finite-difference
oracle :func:`fd_jet`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .duals import seed_second, value_of
from .errors import DomainError, StencilDomainError

__all__ = ["SecondJet", "ScalarField", "jet", "fd_jet", "chain_jet", "FD_STEP"]

#: default finite-difference step scale (cube root of machine epsilon)
FD_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class SecondJet:
    """Value and partial derivatives of a scalar field at one (x, y) point."""

    value: float
    d_x: np.ndarray
    d_y: np.ndarray
    d_yy: np.ndarray
    d_xy: np.ndarray

    @property
    def dim(self) -> int:
        return self.d_y.shape[0]


class ScalarField:
    """A scalar function of (x, y) on an n-dimensional configuration space.

    Subclasses either provide ``expr`` (generic arithmetic usable with dual
    numbers) and inherit dual-propagation ``eval``, or override ``eval``
    directly with an exact assembly. ``domain_check`` raises
    :class:`DomainError` outside the declared domain and is consulted by
    every evaluation path.
    """

    dim: int = 0

    # -- domain ---------------------------------------------------------

    def domain_check(self, x: np.ndarray, y: np.ndarray) -> None:
        pass

    def in_domain(self, x, y) -> bool:
        try:
            self.domain_check(np.asarray(x, float), np.asarray(y, float))
        except DomainError:
            return False
        return True

    # -- evaluation paths -------------------------------------------------

    def expr(self, x, y):
        raise NotImplementedError(f"{type(self).__name__} defines no expression form")

    def eval(self, x: np.ndarray, y: np.ndarray) -> SecondJet:
        """Second-order jet at (x, y) via hyper-dual propagation of expr."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        n = self.dim
        seeds = seed_second(np.concatenate([x, y]))
        try:
            out = self.expr(seeds[:n], seeds[n:])
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(str(exc)) from exc
        val = value_of(out)
        if hasattr(out, "h"):
            g, h = out.g, out.h
        else:
            g = np.zeros(2 * n)
            h = np.zeros((2 * n, 2 * n))
        return SecondJet(
            value=val,
            d_x=np.array(g[:n]),
            d_y=np.array(g[n:]),
            d_yy=np.array(h[n:, n:]),
            d_xy=np.array(h[:n, n:]),
        )

    def value(self, x, y) -> float:
        """Plain float evaluation; independent of the dual machinery."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        self.domain_check(x, y)
        try:
            return float(value_of(self.expr([float(c) for c in x], [float(c) for c in y])))
        except NotImplementedError:
            return self.eval(x, y).value
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(str(exc)) from exc

    def fiber_jet(self, x, y):
        """(value, d_y, d_yy) only; hook for cheaper velocity-direction solves."""
        j = self.eval(np.asarray(x, float), np.asarray(y, float))
        return j.value, j.d_y, j.d_yy

    def first_jet(self, x, y):
        """(value, d_x, d_y); used where the field acts as a level function."""
        j = self.eval(np.asarray(x, float), np.asarray(y, float))
        return j.value, j.d_x, j.d_y


def jet(field: ScalarField, x, y) -> SecondJet:
    """Full second-order jet of field at (x, y), with input/output validation."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape != (field.dim,) or y.shape != (field.dim,):
        raise ValueError(
            f"expected x and y of shape ({field.dim},), got {x.shape} and {y.shape}"
        )
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite coordinates")
    j = field.eval(x, y)
    if not np.isfinite(j.value):
        raise DomainError(f"field value is not finite at x={x}, y={y}")
    return j


def _snap(base: float, step: float) -> float:
    # make the step exactly representable relative to the base coordinate,
    # so that (base + h) - (base - h) == 2h holds bitwise
    t = base + step
    return t - base


def fd_jet(field: ScalarField, x, y, h: float | None = None) -> SecondJet:
    """Central-difference jet of field at (x, y).

    Steps scale per coordinate as ``h * max(1, |coordinate|)`` with the
    cube-root-of-epsilon default, and are snapped to exactly representable
    offsets. Stencil points that leave the field's domain raise
    :class:`StencilDomainError`.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = field.dim
    base = FD_STEP if h is None else float(h)

    def f(xx, yy):
        try:
            return field.value(xx, yy)
        except DomainError as exc:
            raise StencilDomainError(
                f"stencil point left the domain: x={xx}, y={yy}: {exc}"
            ) from exc

    hx = np.array([_snap(x[i], base * max(1.0, abs(x[i]))) for i in range(n)])
    hy = np.array([_snap(y[i], base * max(1.0, abs(y[i]))) for i in range(n)])

    val = f(x, y)

    def shift(dx_i=None, dx_s=0.0, dy_i=None, dy_s=0.0):
        xx = x.copy()
        yy = y.copy()
        if dx_i is not None:
            xx[dx_i] += dx_s
        if dy_i is not None:
            yy[dy_i] += dy_s
        return f(xx, yy)

    d_x = np.zeros(n)
    d_y = np.zeros(n)
    for i in range(n):
        d_x[i] = (shift(dx_i=i, dx_s=hx[i]) - shift(dx_i=i, dx_s=-hx[i])) / (2 * hx[i])
        d_y[i] = (shift(dy_i=i, dy_s=hy[i]) - shift(dy_i=i, dy_s=-hy[i])) / (2 * hy[i])

    d_yy = np.zeros((n, n))
    for i in range(n):
        fp = shift(dy_i=i, dy_s=hy[i])
        fm = shift(dy_i=i, dy_s=-hy[i])
        d_yy[i, i] = (fp - 2 * val + fm) / (hy[i] * hy[i])
        for jdx in range(i + 1, n):
            pp = _shift2(f, x, y, n + i, hy[i], n + jdx, hy[jdx])
            pm = _shift2(f, x, y, n + i, hy[i], n + jdx, -hy[jdx])
            mp = _shift2(f, x, y, n + i, -hy[i], n + jdx, hy[jdx])
            mm = _shift2(f, x, y, n + i, -hy[i], n + jdx, -hy[jdx])
            d_yy[i, jdx] = d_yy[jdx, i] = (pp - pm - mp + mm) / (4 * hy[i] * hy[jdx])

    d_xy = np.zeros((n, n))
    for i in range(n):
        for jdx in range(n):
            pp = _shift2(f, x, y, i, hx[i], n + jdx, hy[jdx])
            pm = _shift2(f, x, y, i, hx[i], n + jdx, -hy[jdx])
            mp = _shift2(f, x, y, i, -hx[i], n + jdx, hy[jdx])
            mm = _shift2(f, x, y, i, -hx[i], n + jdx, -hy[jdx])
            d_xy[i, jdx] = (pp - pm - mp + mm) / (4 * hx[i] * hy[jdx])

    return SecondJet(value=val, d_x=d_x, d_y=d_y, d_yy=d_yy, d_xy=d_xy)


def _shift2(f, x, y, slot_a, step_a, slot_b, step_b):
    n = x.shape[0]
    xx = x.copy()
    yy = y.copy()
    for slot, step in ((slot_a, step_a), (slot_b, step_b)):
        if slot < n:
            xx[slot] += step
        else:
            yy[slot - n] += step
    return f(xx, yy)


def chain_jet(j: SecondJet, f0: float, f1: float, f2: float) -> SecondJet:
    """Jet of phi(field) from the field's jet and phi's derivatives at j.value."""
    return SecondJet(
        value=f0,
        d_x=f1 * j.d_x,
        d_y=f1 * j.d_y,
        d_yy=f1 * j.d_yy + f2 * np.outer(j.d_y, j.d_y),
        d_xy=f1 * j.d_xy + f2 * np.outer(j.d_x, j.d_y),
    )
