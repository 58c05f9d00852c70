"""First-order conformal response of eigenvalues, validated two ways.

Oracles: the exact homothety curve lambda(t) = lambda(0) (1 + t)^(-1/2) for
constant f, and seeded central differences of the solved eigenvalues for
everything else.  The discrete operator is w D w with pointwise weights, so
the analytic rate -(lambda/2) integral f |psi|^2 is the exact derivative of
the discrete eigenvalue and agreement is limited only by finite-difference
truncation and solver residuals.
"""

import math

import numpy as np
import pytest

from spindirac.perturb import (
    BranchTrackingError,
    cluster_rate_matrix,
    dirac_t_derivative,
    eigenvalue_derivative,
    fd_derivative,
    split_experiment,
)
from spindirac.spectral import eigensolve
from spindirac.torus import (
    ConformalFamily,
    TorusSpinGeometry,
    apply_j_field,
    dirac_conformal,
    dirac_flat,
    l2_inner,
    l2_norm,
    normalized,
    plane_wave,
    random_band_spinor,
    random_trig_scalar,
)

PI = math.pi


@pytest.fixture(scope="module")
def g_h0():
    return TorusSpinGeometry.square(n=2, delta=(0.5, 0.0), grid=32)


@pytest.fixture(scope="module")
def g_hh():
    return TorusSpinGeometry.square(n=2, delta=(0.5, 0.5), grid=32)


@pytest.fixture(scope="module")
def rep_h0(g_h0):
    # slots -2..2: +-pi simple, +-pi sqrt(5) in dim-4 clusters
    return eigensolve(g_h0, m=2, seed=0)


@pytest.fixture(scope="module")
def rep_hh(g_hh):
    # both positive slots share the dim-4 cluster at pi sqrt(2)
    return eigensolve(g_hh, m=2, seed=0)


def unit_trig(geom, seed, bandwidth=3):
    rng = np.random.default_rng(seed)
    f = random_trig_scalar(geom, rng, bandwidth=bandwidth)
    return f / np.max(np.abs(f))


def pair_span_overlap(candidate, reference):
    """Projection of reference onto span{candidate, J candidate}."""
    a = abs(l2_inner(candidate, reference)) ** 2
    b = abs(l2_inner(apply_j_field(candidate), reference)) ** 2
    return math.sqrt(a + b) / l2_norm(reference)


def j_closed_orthonormal(fields):
    """Gram-Schmidt basis of the J-closed span of the given fields."""
    basis = []
    for v in fields:
        for vec in (v, apply_j_field(v)):
            w = vec
            for u in basis:
                w = w - l2_inner(u, w) * u
            nw = l2_norm(w)
            assert nw > 1e-6
            basis.append(w * (1.0 / nw))
    return basis


# ---------------------------------------------------------------------------
# operator derivative


def test_constant_f_reduces_to_scaled_dirac(g_h0):
    rng = np.random.default_rng(1)
    psi = random_band_spinor(g_h0, rng, bandwidth=3)
    c = 0.7
    out = dirac_t_derivative(g_h0, c * np.ones(g_h0.grid), psi)
    want = dirac_flat(psi) * (-0.5 * c)  # gradient term drops for constant f
    assert l2_norm(out - want) <= 1e-10


def test_kernel_field_with_constant_f_maps_to_zero():
    g = TorusSpinGeometry.square(n=2, delta=(0.0, 0.0), grid=32)
    psi = plane_wave(g, (0, 0), np.array([1.0, 2.0j]))  # harmonic at delta = 0
    out = dirac_t_derivative(g, 3.0 * np.ones(g.grid), psi)
    assert l2_norm(out) <= 1e-11


def test_rayleigh_pairing_matches_rate_formula(g_h0, rep_h0):
    """<psi, dD/dt psi>.real equals the closed-form rate on an eigenfield.

    The gradient term is pointwise purely imaginary under <.,.> (Clifford
    factors are skew-adjoint), and f Dpsi = lambda f psi up to the solver
    residual, so the two sides agree to residual scale; measured 2.5e-16.
    """
    f = unit_trig(g_h0, seed=2)
    pair = rep_h0.pair(1)
    lhs = l2_inner(pair.field, dirac_t_derivative(g_h0, f, pair.field)).real
    rhs = eigenvalue_derivative(g_h0, f, pair.lam, pair.field)
    assert abs(lhs - rhs) <= 1e-8


# ---------------------------------------------------------------------------
# analytic eigenvalue rate


def test_homothety_rate_is_minus_half_lambda(rep_h0, g_h0):
    pair = rep_h0.pair(1)
    got = eigenvalue_derivative(g_h0, np.ones(g_h0.grid), pair.lam, pair.field)
    assert abs(got + 0.5 * pair.lam) <= 1e-12


def test_mean_zero_f_on_constant_density_gives_zero_rate(g_h0):
    # plane-wave eigenfield: fiber vector in the top eigenspace of the
    # frequency symbol, so |psi| is constant and only the mean of f survives
    from spindirac.clifford import make_fiber

    fib = make_fiber(2)
    sym = 2j * PI * (0.5 * fib.gammas[0])  # mode b = 0, shift (1/2, 0)
    w, v = np.linalg.eigh(sym)
    sigma = v[:, np.argmax(w)]
    psi = plane_wave(g_h0, (0, 0), sigma)
    assert l2_norm(dirac_flat(psi) - PI * psi) <= 1e-10

    f = np.cos(2.0 * PI * g_h0.frac_points()[..., 0])
    assert abs(eigenvalue_derivative(g_h0, f, PI, psi)) <= 1e-12


def test_nonnegative_f_gives_negative_rate_on_positive_branch(g_h0, rep_h0):
    rng = np.random.default_rng(5)
    f = random_trig_scalar(g_h0, rng, bandwidth=3)
    f = 0.5 + 0.5 * f / np.max(np.abs(f))  # range [0, 1], not identically 0
    assert f.min() >= 0.0
    pair = rep_h0.pair(1)
    assert pair.lam > 0
    assert eigenvalue_derivative(g_h0, f, pair.lam, pair.field) < 0.0


# ---------------------------------------------------------------------------
# finite-difference cross-check


def test_fd_on_homothety_matches_exact_curve(g_hh, rep_hh):
    """lambda(t) = lambda (1+t)^{-1/2} exactly, so fd at h = 1e-3 sits within
    the O(h^2) truncation of -lambda/2; measured difference 1.39e-6."""
    res = fd_derivative(g_hh, np.ones(g_hh.grid), 1, 1e-3, base_report=rep_hh, seed=0)
    assert abs(res.value + 0.5 * rep_hh.pair(1).lam) <= 1e-4
    assert res.h == 1e-3
    assert res.richardson is False
    assert res.lam_plus < rep_hh.pair(1).lam < res.lam_minus


def test_fd_matches_analytic_rate_five_seeded_f(g_h0, rep_h0):
    """|analytic - fd| <= max(1e-6, 5 h^2 |lambda|) on the simple branch.

    The discrete rate formula is exact, so the difference is pure
    finite-difference truncation plus solver noise; measured 4e-10..1e-8
    against the bound 1.57e-5.
    """
    pair = rep_h0.pair(1)
    h = 1e-3
    bound = max(1e-6, 5.0 * h * h * abs(pair.lam))
    for seed in range(5):
        f = unit_trig(g_h0, seed=seed)
        ana = eigenvalue_derivative(g_h0, f, pair.lam, pair.field)
        fd = fd_derivative(g_h0, f, 1, h, base_report=rep_h0, seed=0)
        assert abs(ana - fd.value) <= bound, (seed, ana, fd.value)
        assert min(fd.overlaps) > 0.99


def test_fd_error_is_quadratic_in_h_and_richardson_cancels_it(g_h0, rep_h0):
    """Halving h divides the defect by ~4; measured constant |err|/h^2 ~ 6.3e-3
    at both steps, and the h, h/2 combination leaves 5e-11."""
    pair = rep_h0.pair(1)
    f = unit_trig(g_h0, seed=2)
    ana = eigenvalue_derivative(g_h0, f, pair.lam, pair.field)

    err_h = abs(fd_derivative(g_h0, f, 1, 2e-2, base_report=rep_h0, seed=0).value - ana)
    err_h2 = abs(fd_derivative(g_h0, f, 1, 1e-2, base_report=rep_h0, seed=0).value - ana)
    assert 3.5 <= err_h / err_h2 <= 4.5
    c_measured = err_h / 2e-2**2
    print(f"fd truncation constant: |err| / h^2 = {c_measured:.3e}")
    assert abs(err_h2 / 1e-2**2 - c_measured) <= 0.2 * c_measured

    rich = fd_derivative(g_h0, f, 1, 2e-2, base_report=rep_h0, seed=0, richardson=True)
    assert rich.richardson is True
    assert len(rich.overlaps) == 4
    assert abs(rich.value - ana) <= 1e-9


def test_fd_rejects_branch_zero(g_h0):
    with pytest.raises(ValueError):
        fd_derivative(g_h0, np.ones(g_h0.grid), 0, 1e-3)


def test_fd_reports_lost_branch_instead_of_guessing(g_h0, rep_h0):
    # a negative-branch field is orthogonal to every positive eigenspace,
    # so no cluster on the + side can claim it
    f = unit_trig(g_h0, seed=2)
    with pytest.raises(BranchTrackingError) as info:
        fd_derivative(
            g_h0, f, 1, 1e-3, base_report=rep_h0, reference=rep_h0.pair(-1).field, seed=0
        )
    scored = info.value.overlaps
    assert scored and all(score < 0.9 for score, _lam in scored)


# ---------------------------------------------------------------------------
# degenerate clusters


def test_cluster_rates_pair_up_and_match_fd_slopes(g_hh, rep_hh):
    """Rate-matrix eigenvalues on the J-closed cluster basis, against central
    differences of the two split eigenvalues at h = 1e-3.

    The antilinear symmetry doubles every rate (measured pairing gap ~1e-15);
    the extremal rates match the FD slopes to ~1e-8.  The 2x2 matrix on one
    representative per pair is NOT enough here: the cross term
    <psi_a, dD/dt (J psi_b)> has magnitude ~0.1 for this f, so reduction to
    representatives must keep that quaternionic component.
    """
    f = unit_trig(g_hh, seed=11)
    p1, p2 = rep_hh.pair(1), rep_hh.pair(2)
    assert p1.cluster_id == p2.cluster_id and p1.dim_c == 4

    basis = j_closed_orthonormal([p1.field, p2.field])
    _mat, rates = cluster_rate_matrix(g_hh, f, basis)
    assert rates.shape == (4,)
    assert abs(rates[0] - rates[1]) <= 1e-10
    assert abs(rates[2] - rates[3]) <= 1e-10

    h = 1e-3
    rep_p = eigensolve(g_hh, ConformalFamily(g_hh, f, +h), m=2, seed=0)
    rep_m = eigensolve(g_hh, ConformalFamily(g_hh, f, -h), m=2, seed=0)
    lam_p = sorted([rep_p.pair(1).lam, rep_p.pair(2).lam])
    lam_m = sorted([rep_m.pair(1).lam, rep_m.pair(2).lam])
    # the branch rising at +h is the one falling at -h: pair ascending with
    # descending when forming the central differences
    slope_lo = (lam_p[0] - lam_m[1]) / (2.0 * h)
    slope_hi = (lam_p[1] - lam_m[0]) / (2.0 * h)
    assert abs(slope_lo - rates[0]) <= 1e-6
    assert abs(slope_hi - rates[3]) <= 1e-6

    cross = l2_inner(
        normalized(p1.field),
        dirac_t_derivative(g_hh, f, apply_j_field(normalized(p2.field))),
    )
    assert abs(cross) > 0.01


def test_first_order_expansion_residual_shrinks_quadratically(g_h0, rep_h0):
    """||(D_t - lambda - t dlambda) psi(t)|| at t and t/2; ratio measured 4.003."""
    pair = rep_h0.pair(1)
    f = unit_trig(g_h0, seed=2)
    dlam = eigenvalue_derivative(g_h0, f, pair.lam, pair.field)

    def defect(t):
        fam = ConformalFamily(g_h0, f, t)
        rep_t = eigensolve(g_h0, fam, m=2, seed=0)
        best = max(
            (p for p in rep_t.pairs if p.index > 0),
            key=lambda p: pair_span_overlap(p.field, pair.field),
        )
        assert pair_span_overlap(best.field, pair.field) > 0.999
        psi_t = normalized(best.field)
        return l2_norm(dirac_conformal(fam, psi_t) - (pair.lam + t * dlam) * psi_t)

    r_half = defect(5e-3)
    r_full = defect(1e-2)
    assert r_full <= 1.2e-5  # measured 4.1e-6
    assert 3.3 <= r_full / r_half <= 4.7


# ---------------------------------------------------------------------------
# splitting experiments


def test_seeded_bump_splits_cluster_into_simple_branches(g_hh):
    """Sweep of the shipped seeded deformation: the dim-4 cluster at
    pi sqrt(2) is simple from t = 0.05 on, ending with a 0.077 gap."""
    rng = np.random.default_rng(7)
    f = random_trig_scalar(g_hh, rng, bandwidth=2)
    f = 1.5 * f / np.max(np.abs(f))  # |t f| reaches 0.3 at t = 0.2
    report = split_experiment(g_hh, f, [0.0, 0.05, 0.1, 0.15, 0.2], m=2, seed=3)

    assert report.final_all_simple is True
    assert report.final_min_gap > 1e-4  # measured 0.0768
    assert report.first_all_simple_t == 0.05
    assert len(report.rows) == 5 * 4

    for row in report.rows:
        if row.t == 0.0:
            assert row.simple is False
        else:
            assert row.simple is True
        if row.t >= 0.1:
            assert row.overlap >= 0.99
    finals = sorted(row.lam for row in report.rows if row.t == 0.2 and row.branch > 0)
    assert abs(finals[0] - 4.382733485) <= 1e-6
    assert abs(finals[1] - 4.459524520) <= 1e-6


def test_uniform_f_never_splits_and_reports_it(g_hh):
    """A constant f is a pure homothety: every eigenvalue scales by
    (1+t)^{-1/2} and multiplicities are preserved, so the report simply
    records that no split happened; nothing raises."""
    report = split_experiment(g_hh, np.ones(g_hh.grid), [0.0, 0.1, 0.2], m=2, seed=0)
    assert report.final_all_simple is False
    assert report.first_all_simple_t is None
    assert all(row.simple is False for row in report.rows)

    base = {row.branch: row.lam for row in report.rows if row.t == 0.0}
    for row in report.rows:
        assert abs(row.lam * math.sqrt(1.0 + row.t) - base[row.branch]) <= 1e-12


def test_split_report_csv_round_trip(g_hh):
    report = split_experiment(g_hh, np.ones(g_hh.grid), [0.0, 0.1], m=2, seed=0)
    lines = report.to_csv().splitlines()
    assert lines[0] == "t,branch,lambda,simple,gap,overlap"
    assert len(lines) == 1 + len(report.rows)
    for line, row in zip(lines[1:], report.rows):
        t, branch, lam, simple, gap, overlap = line.split(",")
        assert float(t) == row.t
        assert int(branch) == row.branch
        assert float(lam) == row.lam  # repr round-trips exactly
        assert simple == {True: "1", False: "0", None: ""}[row.simple]
        assert float(gap) == row.gap
        assert overlap == f"{row.overlap:.6f}"


def test_split_requires_nonempty_grid(g_hh):
    with pytest.raises(ValueError):
        split_experiment(g_hh, np.ones(g_hh.grid), [], m=2, seed=0)
