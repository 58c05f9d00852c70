"""Clifford algebra data for spinor fibers in dimensions two and three.

The fiber is C^2 in both dimensions.  The generators are gamma_j = i*sigma_j
(Pauli matrices), so the dimension-two fiber embeds in the dimension-three one
by dropping gamma_3.  Conventions fixed here and relied on elsewhere:

* gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij Id,
* each gamma_j is skew-adjoint for the standard Hermitian product
  <u, v> = sum conj(u_i) v_i (antilinear in the first slot),
* the antilinear map J(v) = Q conj(v) with Q = sigma_2 squares to -Id and
  commutes with every gamma_j (and hence with Clifford multiplication),
* in dimension three the volume element gamma_1 gamma_2 gamma_3 is +Id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Exact Gaussian-integer entries (re, im) of the generators, one table per
# dimension.  The numeric matrices below are built from these; the exact
# symbolic layer reads them directly so both layers share one convention.
_I = (0, 1)
_MI = (0, -1)
_ONE = (1, 0)
_MONE = (-1, 0)
_ZERO = (0, 0)

GAMMA_EXACT = {
    2: (
        ((_ZERO, _I), (_I, _ZERO)),          # i*sigma_1
        ((_ZERO, _ONE), (_MONE, _ZERO)),     # i*sigma_2
    ),
    3: (
        ((_ZERO, _I), (_I, _ZERO)),
        ((_ZERO, _ONE), (_MONE, _ZERO)),
        ((_I, _ZERO), (_ZERO, _MI)),         # i*sigma_3
    ),
}

# Antilinear structure: J(v) = J_MATRIX_EXACT @ conj(v).
J_MATRIX_EXACT = ((_ZERO, _MI), (_I, _ZERO))  # sigma_2

FIBER_DIM = 2


def _to_complex(entries) -> np.ndarray:
    return np.array(
        [[complex(re, im) for (re, im) in row] for row in entries],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class SpinorFiber:
    """Clifford module data: ambient dimension, fiber dimension, generators, J."""

    n: int
    N: int
    gammas: tuple
    j_matrix: np.ndarray = field(repr=False, default=None)

    def gamma_stack(self) -> np.ndarray:
        """Generators as one (n, N, N) array, convenient for einsum contractions."""
        return np.stack(self.gammas)


def make_fiber(n: int) -> SpinorFiber:
    """Build the spinor fiber for ambient dimension n in {2, 3}."""
    if n not in (2, 3):
        raise ValueError(f"ambient dimension must be 2 or 3, got {n}")
    gammas = tuple(_to_complex(g) for g in GAMMA_EXACT[n])
    return SpinorFiber(n=n, N=FIBER_DIM, gammas=gammas, j_matrix=_to_complex(J_MATRIX_EXACT))


def clifford_mul(fiber: SpinorFiber, x, sigma):
    """Clifford multiplication x . sigma = sum_j x_j gamma_j sigma.

    x has shape (..., n) and may be real or complex; sigma has shape (..., N).
    Shapes broadcast against each other; the result has the broadcast shape
    with a trailing fiber axis.
    """
    x = np.asarray(x)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if x.shape[-1] != fiber.n:
        raise ValueError(f"vector has {x.shape[-1]} components, fiber expects {fiber.n}")
    if sigma.shape[-1] != fiber.N:
        raise ValueError(f"spinor has {sigma.shape[-1]} components, fiber expects {fiber.N}")
    return np.einsum("...j,jab,...b->...a", x, fiber.gamma_stack(), sigma)


def apply_j(fiber: SpinorFiber, sigma):
    """Antilinear structure J(sigma) = Q conj(sigma), applied along the last axis."""
    sigma = np.asarray(sigma, dtype=np.complex128)
    return np.einsum("ab,...b->...a", fiber.j_matrix, np.conj(sigma))


def real_orthogonal_basis(fiber: SpinorFiber, phi):
    """Real-orthogonal 4-frame generated by one nonzero spinor phi.

    Dimension two: (phi, e1.phi, e2.phi, e1.e2.phi).
    Dimension three: (phi, e1.phi, e2.phi, e3.phi).
    The frame is orthogonal for Re<.,.> with every vector of norm |phi|.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.shape != (fiber.N,):
        raise ValueError(f"expected a single fiber vector of shape ({fiber.N},)")
    if not np.any(phi):
        raise ValueError("frame generator must be nonzero")
    g = fiber.gammas
    if fiber.n == 2:
        return np.stack([phi, g[0] @ phi, g[1] @ phi, g[0] @ (g[1] @ phi)])
    return np.stack([phi, g[0] @ phi, g[1] @ phi, g[2] @ phi])


def volume_element(fiber: SpinorFiber) -> np.ndarray:
    """Product gamma_1 ... gamma_n.  Scalar (+Id) in dimension three."""
    out = np.eye(fiber.N, dtype=np.complex128)
    for g in fiber.gammas:
        out = out @ g
    return out
