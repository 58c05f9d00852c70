"""Bessel evaluations restricted to the two orders the kernel formulas need.

Order zero is delegated to scipy's cephes routines; order one half uses the
elementary closed forms

    J_{1/2}(z) = sqrt(2/(pi z)) sin z,      Y_{1/2}(z) = -sqrt(2/(pi z)) cos z.

The second-kind normalization is the standard one fixed by the Wronskian
J_m Y_m' - J_m' Y_m = 2/(pi z); with that choice the constant appearing in the
order-zero series of Y_0 is the Euler-Mascheroni constant, exposed here as
Y0_SERIES_CONSTANT.  Any other order raises: nothing in this package ever
needs one, and silently extrapolating would hide errors.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.special import j0, j1, y0, y1

SUPPORTED_ORDERS = (Fraction(0), Fraction(1, 2))

# Normalization constant of the Y_0 log series under the standard Wronskian
# convention (Euler-Mascheroni).
Y0_SERIES_CONSTANT = float(np.euler_gamma)


def _check_order(order) -> Fraction:
    m = Fraction(order)
    if m not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported Bessel order {order}; only 0 and 1/2 are provided")
    return m


def _check_positive(z):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("Bessel evaluations here require z > 0")
    return z


def bessel_j(order, z):
    """First-kind Bessel J_m(z) for m in {0, 1/2}, z > 0 (scalar or array)."""
    m = _check_order(order)
    z = _check_positive(z)
    if m == 0:
        out = j0(z)
    else:
        out = np.sqrt(2.0 / (np.pi * z)) * np.sin(z)
    return out if out.ndim else float(out)


def bessel_y(order, z):
    """Second-kind Bessel Y_m(z) for m in {0, 1/2}, z > 0 (scalar or array)."""
    m = _check_order(order)
    z = _check_positive(z)
    if m == 0:
        out = y0(z)
    else:
        out = -np.sqrt(2.0 / (np.pi * z)) * np.cos(z)
    return out if out.ndim else float(out)


def bessel_j_deriv(order, z):
    """d/dz J_m(z).  Order 0 uses J_0' = -J_1; order 1/2 the closed form."""
    m = _check_order(order)
    z = _check_positive(z)
    if m == 0:
        out = -j1(z)
    else:
        out = np.sqrt(2.0 / (np.pi * z)) * (np.cos(z) - np.sin(z) / (2.0 * z))
    return out if out.ndim else float(out)


def bessel_y_deriv(order, z):
    """d/dz Y_m(z).  Order 0 uses Y_0' = -Y_1; order 1/2 the closed form."""
    m = _check_order(order)
    z = _check_positive(z)
    if m == 0:
        out = -y1(z)
    else:
        out = np.sqrt(2.0 / (np.pi * z)) * (np.sin(z) + np.cos(z) / (2.0 * z))
    return out if out.ndim else float(out)


def gamma_half_integer(x) -> float:
    """Gamma at positive half-integers via Gamma(1/2) = sqrt(pi) and recursion."""
    x = Fraction(x)
    if x <= 0 or x.denominator not in (1, 2):
        raise ValueError(f"need a positive half-integer, got {x}")
    if x.denominator == 1:
        return float(math.factorial(int(x) - 1))
    out = math.sqrt(math.pi)
    step = Fraction(1, 2)
    while step < x:
        out *= float(step)
        step += 1
    return out
