"""Forward-mode automatic differentiation scalars.

Two truncated Taylor types over a fixed set of m seed variables:

* :class:`Grad` carries value and gradient (first order).
* :class:`HyperDual` carries value, gradient, and full symmetric Hessian
  (second order, hyper-dual style: one evaluation pass yields every mixed
  partial).

Arithmetic is exact propagation to the carried order. Hessians stay
symmetric by construction because every update is either a symmetric matrix
or an ``outer(a, b) + outer(b, a)`` pair.

Math functions (:func:`sqrt`, :func:`exp`, ...) dispatch on type so the same
model code runs on plain floats, :class:`Grad`, or :class:`HyperDual`.
"""

from __future__ import annotations

import math
import numbers

import numpy as np

__all__ = [
    "Grad",
    "HyperDual",
    "seed_first",
    "seed_second",
    "value_of",
    "grad_of",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
]


def _as_float(z):
    if isinstance(z, (numbers.Real, np.floating, np.integer)):
        return float(z)
    return None


class Grad:
    """First-order scalar: value plus gradient over m seed variables."""

    __slots__ = ("v", "g")

    def __init__(self, v: float, g: np.ndarray):
        self.v = v
        self.g = g

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Grad):
            return Grad(self.v + other.v, self.g + other.g)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return Grad(self.v + c, self.g)

    __radd__ = __add__

    def __neg__(self):
        return Grad(-self.v, -self.g)

    def __sub__(self, other):
        if isinstance(other, Grad):
            return Grad(self.v - other.v, self.g - other.g)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return Grad(self.v - c, self.g)

    def __rsub__(self, other):
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return Grad(c - self.v, -self.g)

    def __mul__(self, other):
        if isinstance(other, Grad):
            return Grad(self.v * other.v, self.g * other.v + other.g * self.v)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return Grad(self.v * c, self.g * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Grad):
            val = self.v / other.v
            return Grad(val, (self.g - val * other.g) / other.v)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return Grad(self.v / c, self.g / c)

    def __rtruediv__(self, other):
        c = _as_float(other)
        if c is None:
            return NotImplemented
        val = c / self.v
        return Grad(val, (-val / self.v) * self.g)

    def __pow__(self, p):
        if isinstance(p, Grad):
            return exp(p * log(self))
        c = _as_float(p)
        if c is None:
            return NotImplemented
        return _pow_const(self, c)

    def __rpow__(self, base):
        c = _as_float(base)
        if c is None:
            return NotImplemented
        if c <= 0.0:
            raise ValueError("power with non-positive base and varying exponent")
        return exp(self * math.log(c))

    def chain(self, f0: float, f1: float, _f2: float = 0.0) -> "Grad":
        return Grad(f0, f1 * self.g)

    def __repr__(self):
        return f"Grad({self.v!r})"


class HyperDual:
    """Second-order scalar: value, gradient, and symmetric Hessian."""

    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray):
        self.v = v
        self.g = g
        self.h = h

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.v + other.v, self.g + other.g, self.h + other.h)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return HyperDual(self.v + c, self.g, self.h)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.v, -self.g, -self.h)

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.v - other.v, self.g - other.g, self.h - other.h)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return HyperDual(self.v - c, self.g, self.h)

    def __rsub__(self, other):
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return HyperDual(c - self.v, -self.g, -self.h)

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            og = np.outer(self.g, other.g)
            return HyperDual(
                self.v * other.v,
                self.g * other.v + other.g * self.v,
                self.h * other.v + other.h * self.v + og + og.T,
            )
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return HyperDual(self.v * c, self.g * c, self.h * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            bv = other.v
            val = self.v / bv
            g = (self.g - val * other.g) / bv
            og = np.outer(g, other.g)
            h = (self.h - val * other.h - og - og.T) / bv
            return HyperDual(val, g, h)
        c = _as_float(other)
        if c is None:
            return NotImplemented
        return HyperDual(self.v / c, self.g / c, self.h / c)

    def __rtruediv__(self, other):
        c = _as_float(other)
        if c is None:
            return NotImplemented
        bv = self.v
        val = c / bv
        g = (-val / bv) * self.g
        og = np.outer(g, self.g)
        h = (-val * self.h - og - og.T) / bv
        return HyperDual(val, g, h)

    def __pow__(self, p):
        if isinstance(p, HyperDual):
            return exp(p * log(self))
        c = _as_float(p)
        if c is None:
            return NotImplemented
        return _pow_const(self, c)

    def __rpow__(self, base):
        c = _as_float(base)
        if c is None:
            return NotImplemented
        if c <= 0.0:
            raise ValueError("power with non-positive base and varying exponent")
        return exp(self * math.log(c))

    def chain(self, f0: float, f1: float, f2: float) -> "HyperDual":
        """Compose with a scalar map given its value and two derivatives at self.v."""
        return HyperDual(f0, f1 * self.g, f1 * self.h + f2 * np.outer(self.g, self.g))

    def __repr__(self):
        return f"HyperDual({self.v!r})"


def _pow_const(z, p: float):
    v = z.v
    if p == int(p):
        pi = int(p)
        if pi == 0:
            return z.chain(1.0, 0.0, 0.0)
        if pi == 1:
            return z
        if pi == 2:
            return z.chain(v * v, 2.0 * v, 2.0)
        f0 = v ** pi
        f1 = pi * v ** (pi - 1)
        f2 = pi * (pi - 1) * v ** (pi - 2)
        return z.chain(f0, f1, f2)
    if v < 0.0:
        raise ValueError("negative base with fractional exponent")
    f0 = v ** p
    f1 = p * v ** (p - 1.0)
    f2 = p * (p - 1.0) * v ** (p - 2.0)
    return z.chain(f0, f1, f2)


# -- seeds and accessors ----------------------------------------------------


def seed_first(values) -> list:
    """Lift values to Grad variables; the i-th gets unit gradient slot i."""
    values = [float(v) for v in values]
    m = len(values)
    eye = np.eye(m)
    return [Grad(values[i], eye[i].copy()) for i in range(m)]


def seed_second(values) -> list:
    """Lift values to HyperDual variables with identity gradients, zero Hessians."""
    values = [float(v) for v in values]
    m = len(values)
    eye = np.eye(m)
    return [HyperDual(values[i], eye[i].copy(), np.zeros((m, m))) for i in range(m)]


def value_of(z) -> float:
    if isinstance(z, (Grad, HyperDual)):
        return z.v
    return float(z)


def grad_of(z, m: int) -> np.ndarray:
    if isinstance(z, (Grad, HyperDual)):
        return z.g
    return np.zeros(m)


# -- elementary functions ----------------------------------------------------


def sqrt(z):
    if isinstance(z, (Grad, HyperDual)):
        if z.v <= 0.0:
            raise ValueError("sqrt of non-positive value")
        s = math.sqrt(z.v)
        return z.chain(s, 0.5 / s, -0.25 / (s * z.v))
    return math.sqrt(z)


def exp(z):
    if isinstance(z, (Grad, HyperDual)):
        f = math.exp(z.v)
        return z.chain(f, f, f)
    return math.exp(z)


def log(z):
    if isinstance(z, (Grad, HyperDual)):
        if z.v <= 0.0:
            raise ValueError("log of non-positive value")
        return z.chain(math.log(z.v), 1.0 / z.v, -1.0 / (z.v * z.v))
    return math.log(z)


def sin(z):
    if isinstance(z, (Grad, HyperDual)):
        s, c = math.sin(z.v), math.cos(z.v)
        return z.chain(s, c, -s)
    return math.sin(z)


def cos(z):
    if isinstance(z, (Grad, HyperDual)):
        s, c = math.sin(z.v), math.cos(z.v)
        return z.chain(c, -s, -c)
    return math.cos(z)
