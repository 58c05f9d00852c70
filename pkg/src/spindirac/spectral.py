"""Low-lying spectrum of flat and conformally scaled Dirac operators.

The solver works on the grid operator Dc (flat, or w D w with a positive
weight w), which is exactly Hermitian for the cell-volume inner product.  It
runs LOBPCG on Dc^2 with a Fourier preconditioner to capture the invariant
subspace nearest zero, then diagonalizes Dc inside that subspace to recover
signed eigenvalues.  Eigenvalues are grouped into clusters (numerically
degenerate eigenspaces); the antilinear symmetry J makes every complex
eigenspace even-dimensional, and clusters of complex dimension two are
reported as simple in the quaternionic sense.

Enumeration convention: slots -1, -2, ... walk down the negative eigenvalues
by increasing |lambda| and +1, +2, ... walk up the positive ones, with each
cluster occupying dim_C / 2 consecutive slots.  Kernel modes (|lambda| below
the kernel tolerance) are reported separately and take no slot.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, lobpcg

from .torus import (
    ConformalFamily,
    SpinorField,
    TorusSpinGeometry,
    apply_j_field,
    dirac_conformal,
    dirac_flat,
    l2_inner,
    l2_norm,
)


class SolverError(RuntimeError):
    """Eigensolver failed its residual or completeness checks."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = None if residuals is None else list(residuals)


@dataclass
class EigenPair:
    """One enumerated eigenvalue slot with a J-deflated representative."""

    index: int
    lam: float
    field: SpinorField
    residual: float
    cluster_id: int
    dim_c: int
    simple: bool | None


@dataclass
class SpectrumReport:
    geom: TorusSpinGeometry
    m: int
    pairs: list[EigenPair]
    kernel_dim: int
    kernel_fields: list[SpinorField]
    kernel_residual: float
    cluster_values: list[float]
    cluster_dims: list[int]
    stats: dict = field(default_factory=dict)

    def pair(self, index: int) -> EigenPair:
        for p in self.pairs:
            if p.index == index:
                return p
        raise KeyError(f"no eigenvalue slot {index}")

    def positive(self) -> list[EigenPair]:
        return [p for p in self.pairs if p.index > 0]

    def negative(self) -> list[EigenPair]:
        return [p for p in self.pairs if p.index < 0]

    def records(self) -> list[dict]:
        out = []
        for p in sorted(self.pairs, key=lambda q: (abs(q.lam), q.index > 0, q.index)):
            out.append(
                {
                    "index": p.index,
                    "lambda": p.lam,
                    "dimC": p.dim_c,
                    "simple": p.simple,
                    "residual": p.residual,
                }
            )
        return out

    def to_jsonl(self, config: dict | None = None) -> str:
        lines = []
        head = {"kind": "spectrum", "kernel_dim": self.kernel_dim, "m": self.m}
        if config:
            head["config"] = config
        lines.append(json.dumps(head, sort_keys=True))
        for rec in self.records():
            lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + "\n"


def kernel_dim(geom: TorusSpinGeometry) -> int:
    """Harmonic spinor count: 2 for the trivial offset, else 0 on flat tori."""
    return 2 if all(d == 0.0 for d in geom.delta) else 0


def _dof(geom):
    return int(np.prod(geom.grid)) * geom.N


def _to_fields(geom, block):
    shape = geom.grid + (geom.N, block.shape[1])
    arr = block.reshape(shape)
    return [SpinorField(geom, np.ascontiguousarray(arr[..., k])) for k in range(block.shape[1])]


def _block_apply(geom, mult, block):
    """Apply a per-mode matrix multiplier to a (dof, k) block."""
    k = block.shape[1]
    arr = block.reshape(geom.grid + (geom.N, k))
    hat = np.fft.fftn(arr, axes=tuple(range(geom.n)))
    out = np.einsum("...ab,...bk->...ak", mult, hat)
    return np.fft.ifftn(out, axes=tuple(range(geom.n))).reshape(-1, k)


def _make_operator(geom, family):
    mult = geom.dirac_multiplier()
    if family is None or family.t == 0.0:

        def apply(block):
            return _block_apply(geom, mult, block)

    else:
        w = family.weight[..., None, None]

        def apply(block):
            k = block.shape[1]
            arr = block.reshape(geom.grid + (geom.N, k)) * w
            hat = np.fft.fftn(arr, axes=tuple(range(geom.n)))
            out = np.einsum("...ab,...bk->...ak", mult, hat)
            out = np.fft.ifftn(out, axes=tuple(range(geom.n))) * w
            return out.reshape(-1, k)

    return apply


def _make_preconditioner(geom):
    denom = 4.0 * np.pi**2 * np.sum(geom.mode_freqs() ** 2, axis=-1) + 1.0

    def precon(block):
        k = block.shape[1]
        arr = block.reshape(geom.grid + (geom.N, k))
        hat = np.fft.fftn(arr, axes=tuple(range(geom.n)))
        hat /= denom[..., None, None]
        return np.fft.ifftn(hat, axes=tuple(range(geom.n))).reshape(-1, k)

    return precon


def _cluster(values, tol):
    """Split a sorted value array at gaps larger than tol."""
    groups = []
    start = 0
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > tol:
            groups.append((start, i))
            start = i
    groups.append((start, len(values)))
    return groups


def _j_pair_reps(geom, cols):
    """One representative per quaternionic pair inside a cluster basis.

    cols must be orthonormal converged columns of a J-invariant eigenspace.
    Representatives are positions into cols, so each kept field is a verbatim
    column and its residual bound survives; the running basis tracks
    span{rep, J rep}.  A column already inside that span leaves a residue of
    order residual/gap, far below the 0.5 cut; a genuinely new direction
    leaves a residue of order one.  Returns (positions, consistent):
    consistent is False when the columns do not organize into whole J-pairs,
    i.e. the cluster capture is incomplete.
    """
    reps = []
    basis = []
    for pos, c in enumerate(cols):
        v = c
        for u in basis:
            v = v - l2_inner(u, v) * u
        if l2_norm(v) < 0.5:
            continue
        reps.append(pos)
        for vec in (c, apply_j_field(c)):
            w = vec
            for u in basis:
                w = w - l2_inner(u, w) * u
            nw = l2_norm(w)
            if nw > 1e-6:
                basis.append(w * (1.0 / nw))
    return reps, len(basis) == len(cols) and 2 * len(reps) == len(cols)


def eigensolve(
    geom: TorusSpinGeometry,
    family: ConformalFamily | None = None,
    m: int = 4,
    *,
    seed: int = 0,
    residual_tol: float = 1e-8,
    cluster_tol: float = 1e-6,
    kernel_tol: float = 1e-6,
    maxiter: int = 150,
) -> SpectrumReport:
    """Compute the m nearest-to-zero eigenvalue slots on each side of 0.

    Every reported vector satisfies ||(Dc - lambda) psi|| <= residual_tol in
    L^2 norm.  Columns at the block boundary may straddle a degenerate
    cluster and fail to converge; they are dropped after the Rayleigh-Ritz
    step, and the solver retries until the enumeration window is complete
    (every used cluster even-dimensional, a converged witness eigenvalue
    beyond the last used cluster on each side, and the kernel count matching
    the spin structure).  A retry polishes the current block unmixed when it
    already spans the window at loose accuracy, and otherwise widens it with
    fresh random columns.  Exhausted retries raise SolverError.
    """
    if m < 1:
        raise ValueError("need m >= 1 eigenvalue slots")
    dof = _dof(geom)
    apply_op = _make_operator(geom, family)
    precon = _make_preconditioner(geom)
    expected_kernel = kernel_dim(geom)
    rng = np.random.default_rng(seed)
    cell = geom.cell_volume()
    sqrt_cell = float(np.sqrt(cell))

    aop = LinearOperator(
        (dof, dof),
        matvec=lambda v: apply_op(apply_op(v.reshape(-1, 1))).ravel(),
        matmat=lambda b: apply_op(apply_op(b)),
        dtype=np.complex128,
    )
    mop = LinearOperator(
        (dof, dof),
        matvec=lambda v: precon(v.reshape(-1, 1)).ravel(),
        matmat=precon,
        dtype=np.complex128,
    )

    k_sub = min(4 * m + expected_kernel + 12, dof - 4)
    attempts = 7
    polish_tol = max(1e-5, 10.0 * residual_tol)
    warm_tol = max(1e-3, polish_tol)
    last_residuals = None
    warm = None
    polish_next = False
    for attempt in range(attempts):
        if polish_next and warm is not None and warm.shape[1] > 0:
            block = warm  # re-iterate the near-converged subspace unmixed
        elif warm is not None and warm.shape[1] > 0:
            fresh = max(k_sub - warm.shape[1], 4)
            block = np.concatenate(
                [
                    warm,
                    rng.standard_normal((dof, fresh))
                    + 1j * rng.standard_normal((dof, fresh)),
                ],
                axis=1,
            )
        else:
            block = rng.standard_normal((dof, k_sub)) + 1j * rng.standard_normal(
                (dof, k_sub)
            )
        polished = polish_next
        polish_next = False
        k_sub = max(k_sub, block.shape[1])
        block, _ = np.linalg.qr(block)
        try:
            with np.errstate(all="ignore"), warnings.catch_warnings():
                warnings.simplefilter("ignore")  # boundary columns may stall
                _, vecs = lobpcg(
                    aop,
                    block,
                    M=mop,
                    largest=False,
                    tol=residual_tol / 10.0,
                    maxiter=maxiter,
                )
        except Exception as exc:  # lobpcg can fail on ill-conditioned blocks
            if attempt == attempts - 1:
                raise SolverError(f"block eigensolver failed: {exc}") from exc
            warm = None
            k_sub = min(k_sub + 2 * m + 6, dof - 4)
            continue

        # Rayleigh-Ritz for the signed operator inside the returned subspace.
        vecs, _ = np.linalg.qr(vecs)
        image = apply_op(vecs)
        small = vecs.conj().T @ image
        small = 0.5 * (small + small.conj().T)
        lams, rot = np.linalg.eigh(small)
        vecs = (vecs @ rot) / sqrt_cell
        image = (image @ rot) / sqrt_cell
        resid = np.linalg.norm(image - vecs * lams[None, :], axis=0) * sqrt_cell
        last_residuals = resid

        # keep half-decent columns for warm or polish restarts
        warm = (vecs[:, resid <= warm_tol] * sqrt_cell).copy()
        certified = resid <= 1e-4  # Hermitian: value within 1e-4 of spectrum

        def analyze(threshold):
            """Window bookkeeping for the columns converged below threshold."""
            good = resid <= threshold
            lams_g = lams[good]
            resid_g = resid[good]
            col_g = np.where(good)[0]
            order = np.argsort(lams_g, kind="stable")
            lams_g = lams_g[order]
            resid_g = resid_g[order]
            col_g = col_g[order]

            kernel_mask = np.abs(lams_g) <= kernel_tol
            kernel_ok = int(kernel_mask.sum()) == expected_kernel

            def side_view(sign):
                idx = np.where(sign * lams_g > kernel_tol)[0]
                svals = np.abs(lams_g[idx])
                inner = np.argsort(svals, kind="stable")
                return idx[inner], svals[inner]

            def plan_side(ordered, svals):
                """Groups to use for m slots plus a witness beyond them."""
                if len(ordered) == 0:
                    return None
                groups = _cluster(svals, cluster_tol)
                slots = 0
                for gi, (lo, hi) in enumerate(groups):
                    if (hi - lo) % 2:
                        return None
                    slots += (hi - lo) // 2
                    if slots >= m:
                        witness = hi < len(ordered) and (
                            svals[hi] > svals[hi - 1] + cluster_tol
                        )
                        return (gi + 1, groups) if witness else None
                return None

            neg_sorted, neg_vals = side_view(-1)
            pos_sorted, pos_vals = side_view(+1)
            neg_plan = plan_side(neg_sorted, neg_vals)
            pos_plan = plan_side(pos_sorted, pos_vals)
            sval_good = np.abs(lams_g)

            def window_complete(plan, svals, sign):
                """Every certified Ritz value inside the used window must sit
                on a good value; otherwise a cluster was partially dropped."""
                if plan is None:
                    return False
                used, groups = plan
                top = svals[groups[used - 1][1] - 1]
                vals = lams[certified & ~good]
                vals = vals[sign * vals > kernel_tol]
                for v in np.abs(vals):
                    if v < top + cluster_tol and np.min(np.abs(sval_good - v)) > 1e-3:
                        return False
                return True

            complete = (
                neg_plan is not None
                and pos_plan is not None
                and kernel_ok
                and window_complete(neg_plan, neg_vals, -1)
                and window_complete(pos_plan, pos_vals, +1)
            )
            return (
                complete,
                lams_g,
                resid_g,
                col_g,
                kernel_mask,
                neg_sorted,
                neg_plan,
                pos_sorted,
                pos_plan,
            )

        (
            complete,
            lams_g,
            resid_g,
            col_g,
            kernel_mask,
            neg_sorted,
            neg_plan,
            pos_sorted,
            pos_plan,
        ) = analyze(residual_tol)

        if complete:
            kcols = col_g[kernel_mask]
            kernel_fields = _to_fields(geom, vecs[:, kcols]) if len(kcols) else []
            _, kernel_j_ok = _j_pair_reps(geom, kernel_fields)
            kernel_res = float(resid_g[kernel_mask].max()) if len(kcols) else 0.0

            pairs = []
            cluster_values = []
            cluster_dims = []
            cid = 0
            consistent = kernel_j_ok or not len(kcols)

            def emit(ordered, plan, sign):
                nonlocal cid, consistent
                used, groups = plan
                slot = 0
                for gi in range(used):
                    lo, hi = groups[gi]
                    members = ordered[lo:hi]
                    cols = _to_fields(geom, vecs[:, col_g[members]])
                    rep_pos, j_ok = _j_pair_reps(geom, cols)
                    if not j_ok:
                        consistent = False
                        return
                    value = float(np.mean(lams_g[members]))
                    dim_c = len(members)
                    cluster_values.append(value)
                    cluster_dims.append(dim_c)
                    for pos in rep_pos:
                        slot += 1
                        if slot > m:
                            break
                        pairs.append(
                            EigenPair(
                                index=sign * slot,
                                lam=float(lams_g[members[pos]]),
                                field=cols[pos],
                                residual=float(resid_g[members[pos]]),
                                cluster_id=cid,
                                dim_c=dim_c,
                                simple=None,
                            )
                        )
                    cid += 1
                    if slot >= m:
                        break

            emit(neg_sorted, neg_plan, -1)
            if consistent:
                emit(pos_sorted, pos_plan, +1)
            if not consistent:
                k_sub = min(k_sub + 2 * m + 6, dof - 4)
                continue

            # Simplicity: complex dimension two with the cluster isolated by
            # more than the numerical smear around it.  Near-converged dropped
            # values count against the margin too.
            smear = 10.0 * max(float(resid_g.max()), 1e-12)
            lams_c = lams[certified]
            for p in pairs:
                gaps = [abs(v - p.lam) for v in lams_c if abs(v - p.lam) > cluster_tol]
                margin = min(gaps) if gaps else np.inf
                if margin <= smear:
                    p.simple = None
                elif p.dim_c == 2:
                    p.simple = True
                else:
                    p.simple = False

            return SpectrumReport(
                geom=geom,
                m=m,
                pairs=pairs,
                kernel_dim=int(kernel_mask.sum()),
                kernel_fields=kernel_fields,
                kernel_residual=kernel_res,
                cluster_values=cluster_values,
                cluster_dims=cluster_dims,
                stats={
                    "k_sub": k_sub,
                    "attempt": attempt,
                    "dropped": int(len(resid) - len(resid_g)),
                    "max_used_residual": float(resid_g.max()) if len(resid_g) else 0.0,
                },
            )

        # Incomplete at the requested residual.  When the subspace already
        # holds the whole window at loose accuracy, the block needs more
        # iterations rather than more directions.
        if not polished and analyze(polish_tol)[0]:
            polish_next = True
        else:
            k_sub = min(k_sub + 2 * m + 6, dof - 4)

    raise SolverError(
        "eigensolver did not reach the requested residual/completeness targets",
        residuals=None if last_residuals is None else last_residuals.tolist(),
    )


def check_simple(report: SpectrumReport) -> list[bool | None]:
    """Simplicity flags for slots ordered -m..-1, +1..+m."""
    ordered = sorted(report.pairs, key=lambda p: p.index)
    return [p.simple for p in ordered]
