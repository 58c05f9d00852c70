"""Fundamental solutions of the Dirac operator at frequency lambda.

On R^n (n = 2, 3) the kernel has the form

    G(x) = (g'(r)/r) x . gamma + lambda g(r) gamma,        r = |x|,

where g solves the radial equation g'' + ((n-1)/r) g' + lambda^2 g = 0 with
the delta-normalizing singularity at the origin.  The module evaluates g and
its derivatives, the kernel, its leading singular part, and checks the
defining distributional identity

    integral <(D - lambda) psi(x), G(x) gamma> dx = <psi(0), gamma>

by adaptive spherical-shell quadrature for compactly supported test spinors.
A lattice-periodic counterpart is assembled as a truncated Fourier mode sum.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .clifford import clifford_mul, make_fiber
from .special import (
    Y0_SERIES_CONSTANT,
    bessel_j,
    bessel_j_deriv,
    bessel_y,
    bessel_y_deriv,
)
from .torus import TorusSpinGeometry


class QuadratureError(RuntimeError):
    """Shell quadrature failed to settle; carries the last two refinements."""

    def __init__(self, message, values):
        super().__init__(message)
        self.values = tuple(values)


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("radius must be positive")
    return r


def f_lambda(n: int, lam: float, r):
    """Radial profile g of the fundamental solution.

    n=2, lam=0:  -ln(r) / (2 pi)
    n=2, lam!=0: -Y_0(|lam| r)/4 + (ln|lam| - ln 2 + c)/(2 pi) J_0(|lam| r)
                 with c the Euler-Mascheroni constant, so the log singularity
                 carries the lam=0 normalization exactly.
    n=3, lam=0:  1 / (4 pi r)
    n=3, lam!=0: cos(lam r) / (4 pi r)
    """
    r = _check_radius(r)
    lam = float(lam)
    if n == 2:
        if lam == 0.0:
            return -np.log(r) / (2.0 * np.pi)
        a = abs(lam)
        cfac = (np.log(a) - np.log(2.0) + Y0_SERIES_CONSTANT) / (2.0 * np.pi)
        return -bessel_y(0, a * r) / 4.0 + cfac * bessel_j(0, a * r)
    if n == 3:
        if lam == 0.0:
            return 1.0 / (4.0 * np.pi * r)
        return np.cos(lam * r) / (4.0 * np.pi * r)
    raise ValueError(f"ambient dimension must be 2 or 3, got {n}")


def f_lambda_deriv(n: int, lam: float, r):
    """First radial derivative g'(r), analytically coded per branch."""
    r = _check_radius(r)
    lam = float(lam)
    if n == 2:
        if lam == 0.0:
            return -1.0 / (2.0 * np.pi * r)
        a = abs(lam)
        cfac = (np.log(a) - np.log(2.0) + Y0_SERIES_CONSTANT) / (2.0 * np.pi)
        return a * (-bessel_y_deriv(0, a * r) / 4.0 + cfac * bessel_j_deriv(0, a * r))
    if n == 3:
        if lam == 0.0:
            return -1.0 / (4.0 * np.pi * r**2)
        c, s = np.cos(lam * r), np.sin(lam * r)
        return -(lam * s) / (4.0 * np.pi * r) - c / (4.0 * np.pi * r**2)
    raise ValueError(f"ambient dimension must be 2 or 3, got {n}")


def f_lambda_deriv2(n: int, lam: float, r):
    """Second radial derivative g''(r) via order-one Bessel recurrences."""
    r = _check_radius(r)
    lam = float(lam)
    if n == 2:
        if lam == 0.0:
            return 1.0 / (2.0 * np.pi * r**2)
        a = abs(lam)
        z = a * r
        cfac = (np.log(a) - np.log(2.0) + Y0_SERIES_CONSTANT) / (2.0 * np.pi)
        # u0'' = -u0 + u1/z for both kinds of order zero.
        ypp = -bessel_y(0, z) - bessel_y_deriv(0, z) / z
        jpp = -bessel_j(0, z) - bessel_j_deriv(0, z) / z
        return a**2 * (-ypp / 4.0 + cfac * jpp)
    if n == 3:
        if lam == 0.0:
            return 1.0 / (2.0 * np.pi * r**3)
        c, s = np.cos(lam * r), np.sin(lam * r)
        return (
            -(lam**2) * c / (4.0 * np.pi * r)
            + 2.0 * lam * s / (4.0 * np.pi * r**2)
            + 2.0 * c / (4.0 * np.pi * r**3)
        )
    raise ValueError(f"ambient dimension must be 2 or 3, got {n}")


def ode_residual(n: int, lam: float, r):
    """g'' + ((n-1)/r) g' + lam^2 g with the analytic derivative formulas."""
    r = _check_radius(r)
    return (
        f_lambda_deriv2(n, lam, r)
        + (n - 1) / r * f_lambda_deriv(n, lam, r)
        + lam**2 * f_lambda(n, lam, r)
    )


class GreenKernel:
    """Frequency-lambda fundamental solution on R^n."""

    def __init__(self, n: int, lam: float):
        if n not in (2, 3):
            raise ValueError(f"ambient dimension must be 2 or 3, got {n}")
        self.n = n
        self.lam = float(lam)
        self.fiber = make_fiber(n)


def _batched_fiber(kern, x, sigma):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = x.reshape(1, -1) if single else x
    if x2.shape[-1] != kern.n:
        raise ValueError(f"points must have {kern.n} components")
    sigma = np.asarray(sigma, dtype=np.complex128)
    if sigma.shape != (kern.fiber.N,):
        raise ValueError(f"fiber vector must have shape ({kern.fiber.N},)")
    return x2, sigma, single


def green_eval(kern: GreenKernel, x, sigma):
    """Kernel column G(x) sigma; x is one point or a batch (M, n)."""
    x2, sigma, single = _batched_fiber(kern, x, sigma)
    r = np.linalg.norm(x2, axis=-1)
    radial = f_lambda_deriv(kern.n, kern.lam, r) / r
    sig_b = np.broadcast_to(sigma, x2.shape[:1] + sigma.shape)
    out = radial[:, None] * clifford_mul(kern.fiber, x2, sig_b)
    out = out + (kern.lam * f_lambda(kern.n, kern.lam, r))[:, None] * sig_b
    return out[0] if single else out


def green_leading(kern: GreenKernel, x, sigma):
    """Leading singular part of G(x) sigma near the origin.

    n=2: -(x . gamma) sigma / (2 pi r^2) - (lam / (2 pi)) ln(r) sigma
    n=3: -(x . gamma) sigma / (4 pi r^3) + (lam / (4 pi r)) sigma
    """
    x2, sigma, single = _batched_fiber(kern, x, sigma)
    r = np.linalg.norm(x2, axis=-1)
    sig_b = np.broadcast_to(sigma, x2.shape[:1] + sigma.shape)
    xg = clifford_mul(kern.fiber, x2, sig_b)
    if kern.n == 2:
        out = -xg / (2.0 * np.pi * r[:, None] ** 2)
        out = out - (kern.lam / (2.0 * np.pi)) * np.log(r)[:, None] * sig_b
    else:
        out = -xg / (4.0 * np.pi * r[:, None] ** 3)
        out = out + (kern.lam / (4.0 * np.pi * r))[:, None] * sig_b
    return out[0] if single else out


def expansion_remainder(kern: GreenKernel, x, sigma):
    """G(x) sigma minus its leading singular part.

    Bounded by C r |ln r| for n=2 and by a constant for n=3 as r -> 0.
    """
    return green_eval(kern, x, sigma) - green_leading(kern, x, sigma)


# -- test spinors for the distributional identity ---------------------------


class AnalyticSpinor:
    """Closed-form compactly-supported-in-practice test spinor on R^n."""

    def __init__(self, label, n, support_radius, value_fn, dirac_fn):
        self.label = label
        self.n = n
        self.support_radius = float(support_radius)
        self._value = value_fn
        self._dirac = dirac_fn
        self.fiber = make_fiber(n)

    def value(self, x):
        return self._value(np.asarray(x, dtype=float))

    def dirac_value(self, x):
        return self._dirac(np.asarray(x, dtype=float))


def gaussian_spinor(n: int, sigma, decay: float = 1.0, kind: str = "const"):
    """Gaussian e^{-a r^2} profiles with closed-form Dirac images.

    kind="const":  psi = e^{-a r^2} sigma,            D psi = -2a e^{-a r^2} x . sigma
    kind="vector": psi = e^{-a r^2} x . sigma,
                   D psi = (2a |x|^2 - n) e^{-a r^2} sigma
                   (using x . (x . sigma) = -|x|^2 sigma)
    kind="coord":  psi = x_1 e^{-a r^2} sigma,
                   D psi = e^{-a r^2} gamma_1 sigma - 2a x_1 e^{-a r^2} x . sigma
    """
    fiber = make_fiber(n)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if sigma.shape != (fiber.N,):
        raise ValueError(f"fiber vector must have shape ({fiber.N},)")
    a = float(decay)
    if a <= 0.0:
        raise ValueError("decay rate must be positive")
    radius = np.sqrt(48.0 / a)  # e^{-48} ~ 1.4e-21 tail, negligible at 1e-10

    def envelope(x):
        return np.exp(-a * np.sum(x * x, axis=-1))

    def broad(x):
        return np.broadcast_to(sigma, x.shape[:-1] + sigma.shape)

    if kind == "const":

        def value(x):
            return envelope(x)[..., None] * broad(x)

        def dirac(x):
            return -2.0 * a * envelope(x)[..., None] * clifford_mul(fiber, x, broad(x))

    elif kind == "vector":

        def value(x):
            return envelope(x)[..., None] * clifford_mul(fiber, x, broad(x))

        def dirac(x):
            e = envelope(x)
            r2 = np.sum(x * x, axis=-1)
            return ((2.0 * a * r2 - n) * e)[..., None] * broad(x)

    elif kind == "coord":
        g1 = fiber.gamma_stack()[0]

        def value(x):
            return (x[..., 0] * envelope(x))[..., None] * broad(x)

        def dirac(x):
            e = envelope(x)
            first = e[..., None] * np.einsum("ab,...b->...a", g1, broad(x))
            second = (2.0 * a * x[..., 0] * e)[..., None] * clifford_mul(
                fiber, x, broad(x)
            )
            return first - second

    else:
        raise ValueError(f"unknown gaussian kind {kind!r}")

    return AnalyticSpinor(f"gauss-{kind}", n, radius, value, dirac)


def annulus_spinor(n: int, sigma, r_inner: float = 0.5, r_outer: float = 1.5):
    """Bump supported on r_inner < r < r_outer; vanishes at the origin.

    eta(r) = exp(-1 / ((r - r_inner)(r_outer - r))) inside, 0 outside;
    D psi = eta'(r) (x/r) . sigma.
    """
    fiber = make_fiber(n)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if sigma.shape != (fiber.N,):
        raise ValueError(f"fiber vector must have shape ({fiber.N},)")
    if not 0.0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")

    def eta_pair(r):
        u = (r - r_inner) * (r_outer - r)
        inside = u > 0.0
        eta = np.zeros_like(r)
        etap = np.zeros_like(r)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            ui = np.where(inside, u, 1.0)
            e = np.exp(-1.0 / ui)
            eta = np.where(inside, e, 0.0)
            etap = np.where(inside, e * (r_inner + r_outer - 2.0 * r) / ui**2, 0.0)
        return eta, etap

    def broad(x):
        return np.broadcast_to(sigma, x.shape[:-1] + sigma.shape)

    def value(x):
        r = np.linalg.norm(x, axis=-1)
        eta, _ = eta_pair(r)
        return eta[..., None] * broad(x)

    def dirac(x):
        r = np.linalg.norm(x, axis=-1)
        _, etap = eta_pair(r)
        safe_r = np.where(r > 0.0, r, 1.0)
        return (etap / safe_r)[..., None] * clifford_mul(fiber, x, broad(x))

    spinor = AnalyticSpinor("annulus", n, r_outer, value, dirac)
    spinor.inner_radius = r_inner
    return spinor


# -- spherical-shell quadrature ----------------------------------------------


def _angular_rule(n: int, level: int):
    """Unit-sphere nodes and weights; exact for low angular degree, refined
    geometrically with `level`."""
    if n == 2:
        m = 16 << level
        theta = 2.0 * np.pi * np.arange(m) / m
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        wts = np.full(m, 2.0 * np.pi / m)
        return pts, wts
    mu = 8 << level
    mphi = 16 << level
    u, wu = leggauss(mu)
    phi = 2.0 * np.pi * np.arange(mphi) / mphi
    s = np.sqrt(1.0 - u**2)
    pts = np.stack(
        [
            np.outer(s, np.cos(phi)),
            np.outer(s, np.sin(phi)),
            np.outer(u, np.ones(mphi)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    wts = (np.outer(wu, np.full(mphi, 2.0 * np.pi / mphi))).reshape(-1)
    return pts, wts


def _radial_panels(r_lo: float, r_hi: float, splits: int, dyadic_levels: int):
    """Panel list (a, b), small to large.  With r_lo == 0 the innermost range
    is covered by geometrically shrinking panels down to r_hi * 2^-levels."""
    panels = []
    if r_lo == 0.0:
        edges = [r_hi * 0.5 ** (dyadic_levels - j) for j in range(dyadic_levels + 1)]
        panels.append((edges[0] * 0.5, edges[0]))
        panels.append((0.0, edges[0] * 0.5))
        for a, b in zip(edges[:-1], edges[1:]):
            panels.append((a, b))
        panels.sort()
        return panels
    width = (r_hi - r_lo) / splits
    return [(r_lo + i * width, r_lo + (i + 1) * width) for i in range(splits)]


def shell_integral(n: int, fn, r_hi: float, level: int, r_lo: float = 0.0) -> complex:
    """Ball or annulus integral of a scalar integrand by the shell rule.

    fn maps a flat (M, n) point array to complex values.  The radial Jacobian
    r^(n-1) absorbs integrable |x|^(1-n) singularities at the origin; panels
    shrink geometrically toward 0 when r_lo == 0.  Fixed summation order, so
    results are bit-reproducible.
    """
    omega, w_omega = _angular_rule(n, level)
    q = 8 << level
    nodes, weights = leggauss(q)
    panels = _radial_panels(r_lo, r_hi, splits=8, dyadic_levels=40)
    total = 0.0 + 0.0j
    for a, b in panels:
        r = 0.5 * (b - a) * nodes + 0.5 * (b + a)
        wr = 0.5 * (b - a) * weights * r ** (n - 1)
        x = r[:, None, None] * omega[None, :, :]
        vals = np.asarray(fn(x.reshape(-1, n))).reshape(r.size, omega.shape[0])
        total += np.einsum("i,j,ij->", wr, w_omega, vals)
    return complex(total)


def _identity_integral(kern, psi, sigma, level: int) -> complex:
    lam = kern.lam

    def integrand(flat):
        return np.sum(
            np.conj(psi.dirac_value(flat) - lam * psi.value(flat))
            * green_eval(kern, flat, sigma),
            axis=-1,
        )

    r_lo = getattr(psi, "inner_radius", 0.0)
    return shell_integral(kern.n, integrand, psi.support_radius, level, r_lo=r_lo)


def verify_distributional_identity(
    kern: GreenKernel, psi, sigma, tol: float = 1e-5, max_level: int = 5
):
    """Residual |integral <(D - lam) psi, G sigma> - <psi(0), sigma>|.

    The shell quadrature is refined geometrically until two successive values
    agree to tol / 4; running out of levels raises QuadratureError with the
    last two values attached.
    """
    sigma = np.asarray(sigma, dtype=np.complex128)
    origin = np.zeros(kern.n)
    target = complex(np.vdot(psi.value(origin), sigma))
    values = []
    for level in range(max_level + 1):
        values.append(_identity_integral(kern, psi, sigma, level))
        if len(values) >= 2:
            drift = abs(values[-1] - values[-2])
            if drift <= max(tol / 4.0, 1e-14 * max(1.0, abs(values[-1]))):
                return abs(values[-1] - target)
    raise QuadratureError(
        f"shell quadrature did not settle to {tol / 4.0:.2e} "
        f"within {max_level + 1} refinement levels",
        values[-2:],
    )


# -- lattice-periodic kernel by mode sum --------------------------------------


def torus_green_mode_sum(
    geom: TorusSpinGeometry, lam: float, x, sigma, cutoff: float
):
    """Truncated Fourier sum of the periodic frequency-lambda kernel at x.

    Sums (e^{2 pi i kappa . x} (2 pi i kappa . gamma + lam) sigma) /
    (4 pi^2 |kappa|^2 - lam^2) over modes with |kappa| <= cutoff, divided by
    the cell volume.  Requires lam to stay at distance > 1e-6 from the flat
    spectrum {+-2 pi |kappa|} and |x| below the injectivity radius.
    """
    lam = float(lam)
    x = np.asarray(x, dtype=float)
    if x.shape != (geom.n,):
        raise ValueError(f"evaluation point must have shape ({geom.n},)")
    sigma = np.asarray(sigma, dtype=np.complex128)
    if sigma.shape != (geom.N,):
        raise ValueError(f"fiber vector must have shape ({geom.N},)")
    if np.linalg.norm(x) >= geom.injectivity_radius():
        raise ValueError(
            "evaluation point lies outside the injectivity radius of the pole"
        )
    smax = float(np.linalg.svd(geom.lattice, compute_uv=False)[0])
    reach = max(cutoff, abs(lam) / (2.0 * np.pi) + 1.0)
    bound = int(np.ceil(smax * reach + 0.5)) + 1
    axes = [np.arange(-bound, bound + 1, dtype=float) for _ in range(geom.n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    b = np.stack(mesh, axis=-1).reshape(-1, geom.n)
    kappa = (b + np.asarray(geom.delta)) @ geom._inv_lattice
    knorm = 2.0 * np.pi * np.linalg.norm(kappa, axis=-1)
    gap = float(np.min(np.abs(knorm - abs(lam))))
    if gap <= 1e-6:
        raise ValueError(
            f"lambda is within {gap:.2e} of the flat spectrum; mode sum undefined"
        )
    keep = knorm <= 2.0 * np.pi * cutoff
    kappa = kappa[keep]
    denom = knorm[keep] ** 2 - lam**2
    phases = np.exp(2j * np.pi * (kappa @ x))
    sig_b = np.broadcast_to(sigma, (kappa.shape[0],) + sigma.shape)
    numer = 2j * np.pi * clifford_mul(geom.fiber, kappa, sig_b) + lam * sig_b
    return np.sum((phases / denom)[:, None] * numer, axis=0) / geom.volume
