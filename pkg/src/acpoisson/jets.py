"""Truncated second-order jet arithmetic over the five chart variables.

A :class:`Jet` carries value, gradient (5 slots) and Hessian (5x5) payloads,
each a numpy array whose trailing shape is a point batch.  Arithmetic applies
exact chain rules, so derivatives are exact up to floating rounding and
Hessians are symmetric by construction.  ``grad``/``hess`` are ``None`` when
the evaluation order does not request them.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import DomainError

NVARS = 5

# half-width of the guard band around the cutoff branch point t = 1
CUTOFF_GUARD = 1e-9
CUTOFF_NUDGE = 1e-6


class Jet:
    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad=None, hess=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = grad
        self.hess = hess

    @property
    def order(self):
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    # constructors -------------------------------------------------------

    @staticmethod
    def constant(c, shape, order):
        g = np.zeros((NVARS,) + shape) if order >= 1 else None
        h = np.zeros((NVARS, NVARS) + shape) if order >= 2 else None
        return Jet(np.broadcast_to(np.asarray(float(c)), shape).copy(), g, h)

    @staticmethod
    def coordinate(k, values, order):
        values = np.asarray(values, dtype=float)
        shape = values.shape
        g = h = None
        if order >= 1:
            g = np.zeros((NVARS,) + shape)
            g[k] = 1.0
        if order >= 2:
            h = np.zeros((NVARS, NVARS) + shape)
        return Jet(values.copy(), g, h)

    # arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value + other, self.grad, self.hess)
        g = None if self.grad is None else self.grad + other.grad
        h = None if self.hess is None else self.hess + other.hess
        return Jet(self.value + other.value, g, h)

    __radd__ = __add__

    def __neg__(self):
        g = None if self.grad is None else -self.grad
        h = None if self.hess is None else -self.hess
        return Jet(-self.value, g, h)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.value - other, self.grad, self.hess)
        g = None if self.grad is None else self.grad - other.grad
        h = None if self.hess is None else self.hess - other.hess
        return Jet(self.value - other.value, g, h)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            g = None if self.grad is None else self.grad * other
            h = None if self.hess is None else self.hess * other
            return Jet(self.value * other, g, h)
        v = self.value * other.value
        g = h = None
        if self.grad is not None:
            g = self.grad * other.value + other.grad * self.value
        if self.hess is not None:
            h = (
                self.hess * other.value
                + other.hess * self.value
                + _outer(self.grad, other.grad)
                + _outer(other.grad, self.grad)
            )
        return Jet(v, g, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        if np.any(other.value == 0.0):
            raise DomainError("division by zero")
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        if np.any(self.value == 0.0):
            raise DomainError("division by zero")
        return self._reciprocal() * other

    def _reciprocal(self):
        inv = 1.0 / self.value
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def powi(self, n: int):
        """Integer power; 0**0 == 1 by the constant-exponent convention."""
        v = self.value
        if n == 0:
            return Jet.constant(1.0, v.shape, self.order)
        if n == 1:
            return self
        if n < 0 and np.any(v == 0.0):
            raise DomainError("zero raised to a negative power")
        f = _safe_pow(v, n)
        if self.grad is None:
            return Jet(f)
        d1 = n * _safe_pow(v, n - 1)
        d2 = n * (n - 1) * _safe_pow(v, n - 2) if self.hess is not None else None
        return self._chain(f, d1, d2)

    def _chain(self, f, d1, d2):
        """Compose with a scalar function given by value/derivatives at self.value."""
        g = h = None
        if self.grad is not None:
            g = d1 * self.grad
        if self.hess is not None:
            h = d1 * self.hess + d2 * _outer(self.grad, self.grad)
        return Jet(f, g, h)


def _outer(a, b):
    return np.einsum("i...,j...->ij...", a, b)


def _safe_pow(v, n):
    if n == 0:
        return np.ones_like(v)
    if n > 0:
        return v**n
    return 1.0 / (v ** (-n))


# builtin scalar functions ----------------------------------------------------


def _jet_sin(x):
    s, c = np.sin(x.value), np.cos(x.value)
    return x._chain(s, c, -s)


def _jet_cos(x):
    s, c = np.sin(x.value), np.cos(x.value)
    return x._chain(c, -s, -c)


def _jet_tan(x):
    c = np.cos(x.value)
    if np.any(c == 0.0):
        raise DomainError("tan at a pole")
    t = np.tan(x.value)
    sec2 = 1.0 + t * t
    return x._chain(t, sec2, 2.0 * t * sec2)


def _jet_exp(x):
    f = np.exp(x.value)
    return x._chain(f, f, f)


def _jet_ln(x):
    if np.any(x.value <= 0.0):
        raise DomainError("ln of a non-positive value")
    inv = 1.0 / x.value
    return x._chain(np.log(x.value), inv, -inv * inv)


def _jet_sqrt(x):
    if np.any(x.value <= 0.0):
        raise DomainError("sqrt of a non-positive value")
    r = np.sqrt(x.value)
    return x._chain(r, 0.5 / r, -0.25 / (r * x.value))


def _jet_tanh(x):
    t = np.tanh(x.value)
    sech2 = 1.0 - t * t
    return x._chain(t, sech2, -2.0 * t * sech2)


def _jet_cutoff(x):
    """Smooth bump factor: exp(-t/(1-t)) for t < 1, identically 0 for t >= 1.

    cutoff(0) == 1 and every derivative tends to 0 from both sides at t = 1.
    Points inside the guard band around t = 1 are nudged off the branch point.
    """
    t = np.array(x.value, dtype=float)
    near = np.abs(t - 1.0) <= CUTOFF_GUARD
    if np.any(near):
        warnings.warn(
            "cutoff evaluated within 1e-9 of the branch point t=1; "
            "argument perturbed by 1e-6",
            RuntimeWarning,
            stacklevel=3,
        )
        below = t < 1.0
        t = np.where(near & below, 1.0 - CUTOFF_NUDGE, t)
        t = np.where(near & ~below, 1.0 + CUTOFF_NUDGE, t)
    inside = t < 1.0
    # evaluate the smooth branch with the argument clamped away from 1
    ts = np.where(inside, t, 0.0)
    u = 1.0 - ts
    s = -ts / u
    f = np.exp(s)
    d1 = f * (-1.0 / (u * u))
    d2 = f * (1.0 / u**4 - 2.0 / u**3)
    f = np.where(inside, f, 0.0)
    d1 = np.where(inside, d1, 0.0)
    d2 = np.where(inside, d2, 0.0)
    shifted = Jet(t, x.grad, x.hess)
    return shifted._chain(f, d1, d2)


BUILTIN_JET_RULES = {
    "sin": _jet_sin,
    "cos": _jet_cos,
    "tan": _jet_tan,
    "exp": _jet_exp,
    "ln": _jet_ln,
    "sqrt": _jet_sqrt,
    "tanh": _jet_tanh,
    "cutoff": _jet_cutoff,
}
