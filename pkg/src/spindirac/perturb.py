"""First-order spectral response to conformal scaling.

For the family of operators D_t = w_t D w_t with w_t = (1 + t f)^(-1/4), the
derivative of D_t at t = 0 applied to a field is

    dD/dt|_0 psi = -(1/2) f D psi - (1/4) (grad f . gamma) psi,

and a normalized eigenfield psi with D psi = lambda psi responds at first
order by

    dlambda/dt|_0 = -(lambda / 2) integral f |psi|^2 dvol.

Because the grid operator is w D w with pointwise real weights, that formula
is the exact derivative of the discrete eigenvalue as well, so analytic and
finite-difference values agree to the finite-difference truncation error.
Degenerate clusters split according to the Hermitian rate matrix
<psi_a, dD/dt psi_b> restricted to the cluster.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .spectral import SpectrumReport, eigensolve
from .torus import (
    ConformalFamily,
    SpinorField,
    TorusSpinGeometry,
    apply_j_field,
    dirac_flat,
    grad_mul,
    l2_inner,
    l2_norm,
    normalized,
    pointwise_scale,
)


class BranchTrackingError(RuntimeError):
    """Eigenvalue branch could not be followed across a parameter step."""

    def __init__(self, message, overlaps=None):
        super().__init__(message)
        self.overlaps = overlaps


def dirac_t_derivative(geom: TorusSpinGeometry, f, field: SpinorField) -> SpinorField:
    """Apply the t-derivative of the conformal family at t = 0."""
    f = np.asarray(f, dtype=float)
    first = pointwise_scale(dirac_flat(field), f) * (-0.5)
    second = grad_mul(geom, f, field) * (-0.25)
    return first + second


def eigenvalue_derivative(
    geom: TorusSpinGeometry, f, lam: float, field: SpinorField
) -> float:
    """Analytic d lambda / dt at t = 0 for a normalized eigenfield."""
    f = np.asarray(f, dtype=float)
    psi = normalized(field)
    weight = l2_inner(psi, pointwise_scale(psi, f)).real
    return -0.5 * float(lam) * weight


def cluster_rate_matrix(geom: TorusSpinGeometry, f, fields: list[SpinorField]):
    """Hermitian first-order rate matrix of a degenerate cluster.

    Entries <psi_a, dD/dt psi_b> over an orthonormal cluster basis; returns
    (matrix, rates) with rates sorted ascending.  The eigenvalues are the
    slopes of the branches splitting out of the cluster.
    """
    k = len(fields)
    mat = np.zeros((k, k), dtype=complex)
    images = [dirac_t_derivative(geom, f, psi) for psi in fields]
    for a in range(k):
        for b in range(k):
            mat[a, b] = l2_inner(fields[a], images[b])
    mat = 0.5 * (mat + mat.conj().T)
    rates = np.linalg.eigvalsh(mat)
    return mat, rates


def _j_closed_basis(fields: list[SpinorField]) -> list[SpinorField]:
    """Orthonormal basis of span{v, J v} over the given fields."""
    basis = []
    for v in fields:
        for vec in (v, apply_j_field(v)):
            w = vec
            for u in basis:
                w = w - l2_inner(u, w) * u
            nw = l2_norm(w)
            if nw > 1e-6:
                basis.append(w * (1.0 / nw))
    return basis


def _cluster_projection_norm(reference: SpinorField, basis: list[SpinorField]) -> float:
    total = sum(abs(l2_inner(u, reference)) ** 2 for u in basis)
    return float(np.sqrt(total)) / l2_norm(reference)


def _pair_overlap(reference: SpinorField, field: SpinorField) -> float:
    """Projection of reference onto span{field, J field}.

    field and J field are orthonormal for a unit field (<v, Jv> = 0 always),
    so this score ignores the solver's arbitrary rotation within a
    quaternionic pair.
    """
    a = abs(l2_inner(field, reference)) ** 2
    b = abs(l2_inner(apply_j_field(field), reference)) ** 2
    return float(np.sqrt(a + b)) / l2_norm(reference)


@dataclass
class FDResult:
    value: float
    lam_plus: float
    lam_minus: float
    h: float
    overlaps: tuple
    richardson: bool


def fd_derivative(
    geom: TorusSpinGeometry,
    f,
    branch: int,
    h: float = 1e-3,
    *,
    reference: SpinorField | None = None,
    base_report: SpectrumReport | None = None,
    seed: int = 0,
    richardson: bool = False,
    overlap_floor: float = 0.9,
) -> FDResult:
    """Central-difference d lambda / dt at t = 0 for one enumerated branch.

    Branches at t = +-h are matched to the reference eigenfield by subspace
    overlap; an overlap below `overlap_floor` raises BranchTrackingError
    rather than guessing.  With richardson=True the h and h/2 stencils are
    combined to cancel the leading O(h^2) term.
    """
    if branch == 0:
        raise ValueError("branch index 0 does not exist; use +-1, +-2, ...")
    f = np.asarray(f, dtype=float)
    m = abs(branch) + 1
    if base_report is None:
        base_report = eigensolve(geom, None, m=m, seed=seed)
    ref = normalized(reference if reference is not None else base_report.pair(branch).field)
    sign = 1 if branch > 0 else -1

    def lam_at(t):
        fam = ConformalFamily(geom, f, t)
        rep = eigensolve(geom, fam, m=m, seed=seed)
        # score every cluster on the matching side by the projection of the
        # reference onto the cluster's J-closed span
        clusters = {}
        for p in rep.pairs:
            if np.sign(p.index) != sign:
                continue
            clusters.setdefault(p.cluster_id, []).append(p)
        scored = []
        for members in clusters.values():
            basis = _j_closed_basis([p.field for p in members])
            score = _cluster_projection_norm(ref, basis)
            best = max(members, key=lambda p: _pair_overlap(ref, p.field))
            scored.append((score, best.lam))
        scored.sort(key=lambda s: -s[0])
        if not scored or scored[0][0] < overlap_floor:
            raise BranchTrackingError(
                f"branch {branch} lost at t={t:+.3e}: best overlap "
                f"{scored[0][0] if scored else 0.0:.3f} < {overlap_floor}",
                overlaps=scored,
            )
        return scored[0][1], scored[0][0]

    def central(step):
        lp, op = lam_at(+step)
        lm, om = lam_at(-step)
        return (lp - lm) / (2.0 * step), lp, lm, (op, om)

    d1, lp, lm, overlaps = central(h)
    if not richardson:
        return FDResult(d1, lp, lm, h, overlaps, False)
    d2, _, _, overlaps2 = central(h / 2.0)
    value = (4.0 * d2 - d1) / 3.0
    return FDResult(value, lp, lm, h, overlaps + overlaps2, True)


@dataclass
class SplitRow:
    t: float
    branch: int
    lam: float
    simple: bool | None
    gap: float
    overlap: float


@dataclass
class SplitReport:
    rows: list[SplitRow]
    t_values: list[float]
    final_all_simple: bool
    final_min_gap: float
    first_all_simple_t: float | None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "branch", "lambda", "simple", "gap", "overlap"])
        for row in self.rows:
            writer.writerow(
                [
                    repr(row.t),
                    row.branch,
                    repr(row.lam),
                    {True: "1", False: "0", None: ""}[row.simple],
                    repr(row.gap),
                    f"{row.overlap:.6f}",
                ]
            )
        return buf.getvalue()


def split_experiment(
    geom: TorusSpinGeometry,
    f,
    t_values,
    m: int = 2,
    *,
    seed: int = 0,
) -> SplitReport:
    """Track 2m eigenvalue branches over a parameter grid and log splitting.

    At each t the m slots on each side are computed; branches are carried
    from step to step by maximal-overlap assignment between representative
    eigenfields (Hungarian matching on the overlap matrix).  Rows record the
    branch eigenvalue, its cluster simplicity, and the gap to the nearest
    distinct cluster.
    """
    f = np.asarray(f, dtype=float)
    t_values = [float(t) for t in t_values]
    if not t_values:
        raise ValueError("need at least one parameter value")
    branch_ids = [-(k + 1) for k in range(m)][::-1] + [k + 1 for k in range(m)]

    rows = []
    prev_fields = None
    first_all_simple = None
    final_all_simple = False
    final_min_gap = np.inf

    for t in t_values:
        fam = ConformalFamily(geom, f, t) if t != 0.0 else None
        rep = eigensolve(geom, fam, m=m, seed=seed)
        slot_pairs = sorted(rep.pairs, key=lambda p: p.index)
        fields = [p.field for p in slot_pairs]

        if prev_fields is None:
            assignment = list(range(len(slot_pairs)))
            overlaps = [1.0] * len(slot_pairs)
        else:
            # rotation-stable score: project the previous field onto the
            # J-closed pair span of each current slot
            score = np.zeros((len(prev_fields), len(fields)))
            for i, u in enumerate(prev_fields):
                for j, v in enumerate(fields):
                    score[i, j] = _pair_overlap(u, v)
            ri, cj = linear_sum_assignment(-score)
            assignment = [0] * len(prev_fields)
            overlaps = [0.0] * len(prev_fields)
            for i, j in zip(ri, cj):
                assignment[i] = j
                overlaps[i] = float(score[i, j])

        # gap of each slot's cluster to the nearest distinct cluster value;
        # a nonempty kernel counts as a cluster at zero
        def gap_of(pair):
            value = rep.cluster_values[pair.cluster_id]
            others = [
                abs(v - value)
                for k, v in enumerate(rep.cluster_values)
                if k != pair.cluster_id
            ]
            if rep.kernel_dim:
                others.append(abs(value))
            return min(others) if others else np.inf

        all_simple = all(p.simple is True for p in slot_pairs)
        min_gap = min(gap_of(p) for p in slot_pairs)
        for bid, i in zip(branch_ids, range(len(branch_ids))):
            p = slot_pairs[assignment[i]]
            rows.append(
                SplitRow(
                    t=t,
                    branch=bid,
                    lam=p.lam,
                    simple=p.simple,
                    gap=gap_of(p),
                    overlap=overlaps[i],
                )
            )
        if all_simple and first_all_simple is None:
            first_all_simple = t
        final_all_simple = all_simple
        final_min_gap = min_gap

        prev_fields = [fields[assignment[i]] for i in range(len(branch_ids))]

    return SplitReport(
        rows=rows,
        t_values=t_values,
        final_all_simple=final_all_simple,
        final_min_gap=float(final_min_gap),
        first_all_simple_t=first_all_simple,
    )
