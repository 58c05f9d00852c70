"""Flat torus spin geometry on tensor grids.

A torus is R^n modulo the lattice spanned by the columns of `lattice`; spin
structures are labelled by a vector delta with entries in {0, 1/2}.  Fields
are sampled on a regular fractional grid over the fundamental domain.  The
twist carried by a nontrivial delta is absorbed into the stored trivialization:
arrays are plain periodic samples, and delta enters only by shifting the dual
lattice used in Fourier multipliers.  Physical Fourier modes are
kappa = A^{-T} (b + delta) for integer vectors b, so the flat Dirac operator
acts mode by mode as 2*pi*i kappa . gamma with spectrum {+-2*pi*|kappa|}.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .clifford import SpinorFiber, clifford_mul, make_fiber

_DELTA_VALUES = (0.0, 0.5)


class TorusSpinGeometry:
    """Lattice, spin structure offset, and sampling grid for one flat torus."""

    def __init__(self, lattice, delta, grid):
        lattice = np.array(lattice, dtype=float)
        if lattice.ndim != 2 or lattice.shape[0] != lattice.shape[1]:
            raise ValueError("lattice must be a square matrix (columns = generators)")
        n = lattice.shape[0]
        if n not in (2, 3):
            raise ValueError(f"ambient dimension must be 2 or 3, got {n}")
        if abs(np.linalg.det(lattice)) < 1e-12:
            raise ValueError("lattice matrix is singular")
        delta = tuple(float(d) for d in delta)
        if len(delta) != n or any(d not in _DELTA_VALUES for d in delta):
            raise ValueError(f"spin structure offsets must lie in {{0, 1/2}}, got {delta}")
        grid = tuple(int(g) for g in grid)
        if len(grid) != n or any(g < 8 or g % 2 for g in grid):
            raise ValueError(f"grid sizes must be even and >= 8, got {grid}")
        self.n = n
        self.lattice = lattice
        self.delta = delta
        self.grid = grid
        self.fiber: SpinorFiber = make_fiber(n)
        self.N = self.fiber.N
        self.volume = float(abs(np.linalg.det(lattice)))
        self._inv_lattice = np.linalg.inv(lattice)
        self._cache = {}

    @classmethod
    def square(cls, n=2, delta=None, grid=None, side=1.0):
        """Unit-cube torus: lattice side * Id; default grids 64^2 and 32^3."""
        if delta is None:
            delta = (0.0,) * n
        if grid is None:
            grid = 64 if n == 2 else 32
        if isinstance(grid, int):
            grid = (grid,) * n
        return cls(side * np.eye(n), delta, grid)

    def __repr__(self):
        return (
            f"TorusSpinGeometry(n={self.n}, delta={self.delta}, grid={self.grid}, "
            f"volume={self.volume:.6g})"
        )

    # -- derived data, cached ------------------------------------------------

    def cell_volume(self) -> float:
        return self.volume / int(np.prod(self.grid))

    def cell_diameter(self) -> float:
        steps = self.lattice / np.asarray(self.grid)[None, :]
        return float(np.linalg.norm(steps.sum(axis=1)))

    def injectivity_radius(self) -> float:
        """Half the shortest nonzero lattice vector (brute-force over a box)."""
        key = "injrad"
        if key not in self._cache:
            rng = range(-4, 5)
            best = np.inf
            for idx in np.ndindex(*(len(rng),) * self.n):
                m = np.array([rng[i] for i in idx], dtype=float)
                if not m.any():
                    continue
                best = min(best, float(np.linalg.norm(self.lattice @ m)))
            self._cache[key] = 0.5 * best
        return self._cache[key]

    def frac_points(self) -> np.ndarray:
        """Fractional grid coordinates, shape (*grid, n)."""
        key = "frac"
        if key not in self._cache:
            axes = [np.arange(g) / g for g in self.grid]
            mesh = np.meshgrid(*axes, indexing="ij")
            self._cache[key] = np.stack(mesh, axis=-1)
        return self._cache[key]

    def points(self) -> np.ndarray:
        """Cartesian sample points x = lattice @ frac, shape (*grid, n)."""
        key = "points"
        if key not in self._cache:
            self._cache[key] = self.frac_points() @ self.lattice.T
        return self._cache[key]

    def mode_integers(self) -> np.ndarray:
        """Integer Fourier indices per grid node (fft layout), shape (*grid, n)."""
        key = "modes"
        if key not in self._cache:
            axes = [np.fft.fftfreq(g, d=1.0 / g).astype(np.int64) for g in self.grid]
            mesh = np.meshgrid(*axes, indexing="ij")
            self._cache[key] = np.stack(mesh, axis=-1)
        return self._cache[key]

    def mode_freqs(self) -> np.ndarray:
        """Physical dual frequencies kappa = A^{-T}(b + delta), shape (*grid, n)."""
        key = "kappa"
        if key not in self._cache:
            b = self.mode_integers().astype(float) + np.asarray(self.delta)
            self._cache[key] = b @ self._inv_lattice
        return self._cache[key]

    def dirac_multiplier(self) -> np.ndarray:
        """Per-mode symbol 2*pi*i kappa . gamma, shape (*grid, N, N).  Hermitian."""
        key = "dirac_mult"
        if key not in self._cache:
            kappa = self.mode_freqs()
            stack = self.fiber.gamma_stack()
            self._cache[key] = 2j * np.pi * np.einsum("...j,jab->...ab", kappa, stack)
        return self._cache[key]

    def flat_eigenvalues(self, count: int) -> np.ndarray:
        """First `count` nonnegative flat eigenvalues 2*pi*|kappa|, ascending."""
        norms = 2.0 * np.pi * np.linalg.norm(self.mode_freqs(), axis=-1).ravel()
        return np.sort(norms)[:count]


class SpinorField:
    """Grid samples of a spinor field, shape (*grid, N), complex."""

    __slots__ = ("geometry", "values")

    def __init__(self, geometry: TorusSpinGeometry, values):
        values = np.ascontiguousarray(values, dtype=np.complex128)
        if values.shape != geometry.grid + (geometry.N,):
            raise ValueError(
                f"field shape {values.shape} does not match grid {geometry.grid} "
                f"with fiber dimension {geometry.N}"
            )
        self.geometry = geometry
        self.values = values

    def copy(self) -> "SpinorField":
        return SpinorField(self.geometry, self.values.copy())

    def __add__(self, other: "SpinorField") -> "SpinorField":
        self._check_mate(other)
        return SpinorField(self.geometry, self.values + other.values)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        self._check_mate(other)
        return SpinorField(self.geometry, self.values - other.values)

    def __mul__(self, scalar) -> "SpinorField":
        return SpinorField(self.geometry, self.values * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpinorField":
        return SpinorField(self.geometry, -self.values)

    def _check_mate(self, other):
        if not isinstance(other, SpinorField) or other.geometry is not self.geometry:
            if not isinstance(other, SpinorField) or other.geometry.grid != self.geometry.grid:
                raise ValueError("fields live on different grids")

    def modulus(self) -> np.ndarray:
        """Pointwise |psi|, shape (*grid,)."""
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=-1))


def plane_wave(geom: TorusSpinGeometry, b, sigma) -> SpinorField:
    """Plane-wave section for integer dual index b with fiber vector sigma.

    The field represented is exp(2*pi*i <b + delta, x>) sigma (dual pairing);
    the stored periodic samples carry exp(2*pi*i b . frac) with the delta twist
    absorbed into the trivialization, so |values| is constant across the grid.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (geom.n,) or np.any(b != np.round(b)):
        raise ValueError(f"dual index must be an integer vector of length {geom.n}")
    sigma = np.asarray(sigma, dtype=np.complex128)
    if sigma.shape != (geom.N,):
        raise ValueError(f"fiber vector must have shape ({geom.N},)")
    if not np.any(sigma):
        raise ValueError("fiber vector must be nonzero")
    phase = np.exp(2j * np.pi * (geom.frac_points() @ b))
    return SpinorField(geom, phase[..., None] * sigma)


def l2_inner(a: SpinorField, b: SpinorField) -> complex:
    """L^2 pairing <a, b> (antilinear in the first slot) by grid quadrature."""
    a._check_mate(b)
    return complex(np.vdot(a.values, b.values) * a.geometry.cell_volume())


def l2_norm(a: SpinorField) -> float:
    return float(np.sqrt(max(l2_inner(a, a).real, 0.0)))


def normalized(a: SpinorField) -> SpinorField:
    nrm = l2_norm(a)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero field")
    return a * (1.0 / nrm)


def _grid_axes(geom):
    return tuple(range(geom.n))


def dirac_flat(field: SpinorField) -> SpinorField:
    """Flat Dirac operator via the Fourier multiplier 2*pi*i kappa . gamma.

    Exact (to roundoff) on band-limited fields; Hermitian for l2_inner.
    """
    geom = field.geometry
    hat = np.fft.fftn(field.values, axes=_grid_axes(geom))
    out = np.einsum("...ab,...b->...a", geom.dirac_multiplier(), hat)
    return SpinorField(geom, np.fft.ifftn(out, axes=_grid_axes(geom)))


def dirac_squared_flat(field: SpinorField) -> SpinorField:
    """Scalar multiplier 4*pi^2 |kappa|^2 per mode (flat square of the Dirac op)."""
    geom = field.geometry
    hat = np.fft.fftn(field.values, axes=_grid_axes(geom))
    mult = 4.0 * np.pi**2 * np.sum(geom.mode_freqs() ** 2, axis=-1)
    return SpinorField(geom, np.fft.ifftn(mult[..., None] * hat, axes=_grid_axes(geom)))


def pointwise_scale(field: SpinorField, factor) -> SpinorField:
    """Multiply by a scalar grid function (shape (*grid,))."""
    factor = np.asarray(factor)
    if factor.shape != field.geometry.grid:
        raise ValueError("scale factor must be sampled on the same grid")
    return SpinorField(field.geometry, field.values * factor[..., None])


def grad_mul(geom: TorusSpinGeometry, f, field: SpinorField) -> SpinorField:
    """Clifford multiplication by the spectral gradient of a real scalar f."""
    f = np.asarray(f, dtype=float)
    if f.shape != geom.grid:
        raise ValueError("scalar field must be sampled on the geometry grid")
    fhat = np.fft.fftn(f)
    b = geom.mode_integers().astype(float)
    kappa0 = b @ geom._inv_lattice  # gradient of a function: no spin offset
    comps = 2j * np.pi * kappa0 * fhat[..., None]
    grad = np.real(np.fft.ifftn(comps, axes=_grid_axes(geom)))
    out = np.einsum("...j,jab,...b->...a", grad, geom.fiber.gamma_stack(), field.values)
    return SpinorField(geom, out)


def apply_j_field(field: SpinorField) -> SpinorField:
    """Antilinear structure J on stored samples.

    Stored samples live in the trivialization that absorbs the offset delta,
    so conjugation alone would land in the wrong sector; the compensating
    phase exp(-2*pi*i (2 delta) . frac) (an exact lattice mode, 2 delta is an
    integer vector) restores J psi to the same sector.  J^2 = -Id and
    commutation with the Dirac operator hold exactly on the grid.
    """
    geom = field.geometry
    out = np.einsum("ab,...b->...a", geom.fiber.j_matrix, np.conj(field.values))
    two_delta = np.asarray(geom.delta) * 2.0
    if np.any(two_delta):
        phase = np.exp(-2j * np.pi * (geom.frac_points() @ two_delta))
        out = phase[..., None] * out
    return SpinorField(geom, out)


class ConformalFamily:
    """Conformal factor family: metric scaled by (1 + t f), with 1 + t f > 0."""

    def __init__(self, geom: TorusSpinGeometry, f, t: float):
        f = np.asarray(f, dtype=float)
        if f.shape != geom.grid:
            raise ValueError("conformal direction f must be sampled on the grid")
        t = float(t)
        low = float(np.min(1.0 + t * f))
        if low <= 0.0:
            raise ValueError(f"1 + t f must stay positive; min is {low:.3g}")
        self.geom = geom
        self.f = f
        self.t = t
        # Both the operator weight and its inverse are smooth and positive.
        self.weight = (1.0 + t * f) ** (-0.25)

    def with_t(self, t: float) -> "ConformalFamily":
        return ConformalFamily(self.geom, self.f, t)


def dirac_conformal(fam: ConformalFamily, field: SpinorField) -> SpinorField:
    """Dirac operator of the scaled metric in the flat trivialization.

    psi -> w D(w psi) with w = (1 + t f)^(-1/4).  The operator is exactly
    Hermitian on the grid (w is real and diagonal, D is exactly Hermitian),
    reduces to the flat operator at t = 0, and for constant f scales the whole
    spectrum by (1 + t f)^(-1/2) exactly.
    """
    if field.geometry is not fam.geom and field.geometry.grid != fam.geom.grid:
        raise ValueError("field and family live on different grids")
    inner = pointwise_scale(field, fam.weight)
    return pointwise_scale(dirac_flat(inner), fam.weight)


# -- deterministic random fields -------------------------------------------


def random_band_spinor(geom: TorusSpinGeometry, rng, bandwidth: int) -> SpinorField:
    """Random band-limited spinor field (modes |b_i| <= bandwidth), unit L^2 norm."""
    spec = np.zeros(geom.grid + (geom.N,), dtype=np.complex128)
    modes = geom.mode_integers()
    mask = np.all(np.abs(modes) <= bandwidth, axis=-1)
    cnt = int(mask.sum())
    draws = rng.standard_normal((cnt, geom.N)) + 1j * rng.standard_normal((cnt, geom.N))
    spec[mask] = draws
    values = np.fft.ifftn(spec, axes=_grid_axes(geom))
    return normalized(SpinorField(geom, values))


def random_trig_scalar(geom: TorusSpinGeometry, rng, bandwidth: int = 3) -> np.ndarray:
    """Real trigonometric polynomial with uniform[-1, 1] coefficients.

    One cosine and one sine coefficient per dual index b with |b|_inf <=
    bandwidth, taking one representative of each {b, -b} pair in lexicographic
    order, plus a constant term.  Draw order is fixed, so a seeded generator
    reproduces the same function bit for bit.
    """
    frac = geom.frac_points()
    out = np.full(geom.grid, float(rng.uniform(-1.0, 1.0)))
    rng_box = range(-bandwidth, bandwidth + 1)
    for b in np.ndindex(*((2 * bandwidth + 1),) * geom.n):
        vec = tuple(rng_box[i] for i in b)
        if vec <= (0,) * geom.n:  # keep one of each opposite pair, skip zero
            continue
        a_c = float(rng.uniform(-1.0, 1.0))
        a_s = float(rng.uniform(-1.0, 1.0))
        phase = 2.0 * np.pi * (frac @ np.asarray(vec, dtype=float))
        out += a_c * np.cos(phase) + a_s * np.sin(phase)
    return out


# -- serialization -----------------------------------------------------------
#
# Binary layout (little endian float64 throughout, covered in docs/formats.md):
#   [n][grid_1..grid_n][delta_1..delta_n][lattice row-major, n*n]
#   [payload: re, im interleaved, C order over grid axes then the fiber axis]
# plus a JSON sidecar `<path>.json` repeating the metadata.


def save_field(field: SpinorField, path) -> None:
    geom = field.geometry
    head = [float(geom.n)]
    head.extend(float(g) for g in geom.grid)
    head.extend(float(d) for d in geom.delta)
    head.extend(float(v) for v in geom.lattice.reshape(-1))
    payload = np.empty(field.values.shape + (2,), dtype="<f8")
    payload[..., 0] = field.values.real
    payload[..., 1] = field.values.imag
    with open(path, "wb") as fh:
        fh.write(struct.pack("<" + "d" * len(head), *head))
        fh.write(payload.tobytes(order="C"))
    meta = {
        "n": geom.n,
        "grid": list(geom.grid),
        "delta": list(geom.delta),
        "lattice": [[float(v) for v in row] for row in geom.lattice],
        "fiber_dim": geom.N,
    }
    with open(str(path) + ".json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_field(path) -> SpinorField:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<d", fh.read(8))
        n = int(n)
        grid = struct.unpack("<" + "d" * n, fh.read(8 * n))
        delta = struct.unpack("<" + "d" * n, fh.read(8 * n))
        lattice = np.array(
            struct.unpack("<" + "d" * (n * n), fh.read(8 * n * n))
        ).reshape(n, n)
        geom = TorusSpinGeometry(lattice, delta, tuple(int(g) for g in grid))
        count = int(np.prod(geom.grid)) * geom.N * 2
        raw = np.frombuffer(fh.read(8 * count), dtype="<f8")
    raw = raw.reshape(geom.grid + (geom.N, 2))
    return SpinorField(geom, raw[..., 0] + 1j * raw[..., 1])
