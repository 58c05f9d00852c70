"""
Clifford fibers in dimensions 2 and 3
=====================================

The fiber model packs the gamma matrices, the antilinear map J, and the
real orthogonal splitting used everywhere else in the library.  All
entries live in {0, +-1, +-i}, so every identity below is exact.
"""

import numpy as np

from spindirac import make_fiber, clifford_mul, apply_j, volume_element

for n in (2, 3):
    fib = make_fiber(n)
    print(f"--- dimension n = {n}, fiber C^{fib.N} ---")
    for i, g in enumerate(fib.gammas):
        print(f"gamma_{i} =")
        print(np.asarray(g))

    # anticommutators: gamma_i gamma_j + gamma_j gamma_i = -2 delta_ij
    worst = 0.0
    for i in range(n):
        for j in range(n):
            gi, gj = np.asarray(fib.gammas[i]), np.asarray(fib.gammas[j])
            acc = gi @ gj + gj @ gi
            want = -2.0 * np.eye(fib.N) if i == j else 0.0
            worst = max(worst, np.max(np.abs(acc - want)))
    print(f"max anticommutator defect: {worst} (exact zero expected)")

    # J is antilinear, squares to -1, and commutes with Clifford multiplication
    jm = np.asarray(fib.j_matrix)
    print("J J-bar + I =", np.max(np.abs(jm @ jm.conj() + np.eye(fib.N))))
    v = np.array([1.0, -2.0, 0.5][:n])
    sigma = np.array([1.0 + 0.5j, -0.25j][: fib.N])
    lhs = apply_j(fib, clifford_mul(fib, v, sigma))
    rhs = clifford_mul(fib, v, apply_j(fib, sigma))
    print("J (v.sigma) - v.(J sigma):", np.max(np.abs(lhs - rhs)))

    if n == 3:
        print("volume element gamma_0 gamma_1 gamma_2 =")
        print(np.asarray(volume_element(fib)))
    print()

print("a spinor and its J-image are pointwise orthogonal:")
fib = make_fiber(2)
sigma = np.array([0.3 + 1.0j, -0.7 + 0.2j])
print("  <sigma, J sigma> =", np.vdot(sigma, apply_j(fib, sigma)))
