"""Command-line entry points.

Every subcommand prints a resolved-configuration line first (JSON, sorted
keys; prefixed with '#' for CSV output) followed by deterministic records,
so identical flags and seeds reproduce identical bytes.  Exit codes: 0 on
success, 1 when a tolerance or consistency check fails, 2 for usage errors.

Config files (--config FILE) hold a JSON object whose keys are option names
with underscores; values provide defaults and explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import green, perturb, radial, spectral, zeroset
from .clifford import make_fiber
from .torus import ConformalFamily, TorusSpinGeometry, random_trig_scalar


def _emit(line=""):
    sys.stdout.write(line + "\n")


def _parse_grid(text, n):
    parts = [int(tok) for tok in str(text).split(",")]
    if len(parts) == 1:
        parts = parts * n
    if len(parts) != n:
        raise ValueError(f"grid needs 1 or {n} entries")
    return tuple(parts)


def _parse_delta(text, n):
    table = {"0": 0.0, "h": 0.5, "0.5": 0.5, "0.0": 0.0}
    parts = [table.get(tok.strip().lower()) for tok in str(text).split(",")]
    if len(parts) != n or any(p is None for p in parts):
        raise ValueError(f"delta needs {n} entries from {{0, h}}")
    return tuple(parts)


def _parse_lattice(text, n):
    text = str(text)
    if text.startswith("square"):
        side = 1.0
        if ":" in text:
            side = float(text.split(":", 1)[1])
        return side * np.eye(n)
    vals = [float(tok) for tok in text.split(",")]
    if len(vals) != n * n:
        raise ValueError(f"lattice needs {n * n} row-major entries")
    return np.array(vals).reshape(n, n)


def _resolve_geometry(ns):
    n = ns.n
    delta = ns.delta if ns.delta is not None else ",".join(["0"] * n)
    grid = ns.grid if ns.grid is not None else ("64" if n == 2 else "32")
    return TorusSpinGeometry(
        _parse_lattice(ns.lattice, n), _parse_delta(delta, n), _parse_grid(grid, n)
    )


def _resolve_direction(geom, spec, *, t0=1.0):
    """f-spec mini language: none | const:C | cos:B | sin:B | seeded:S[:AMP]."""
    spec = str(spec)
    if spec == "none":
        return None
    kind, _, rest = spec.partition(":")
    frac = geom.frac_points()
    if kind == "const":
        return np.full(geom.grid, float(rest))
    if kind in ("cos", "sin"):
        b = np.array([float(tok) for tok in rest.split(",")])
        if b.shape != (geom.n,):
            raise ValueError(f"{kind} spec needs {geom.n} integers")
        phase = 2.0 * np.pi * (frac @ b)
        return np.cos(phase) if kind == "cos" else np.sin(phase)
    if kind == "seeded":
        parts = rest.split(":")
        seed = int(parts[0])
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        f = random_trig_scalar(geom, rng, bandwidth=3)
        if len(parts) > 1:
            amp = float(parts[1])
            sup = float(np.max(np.abs(f)))
            if sup > 0:
                f = f * (amp / (abs(t0) * sup))
        return f
    raise ValueError(f"unknown f-spec {spec!r}")


def _geometry_config(geom, extra):
    cfg = {
        "n": geom.n,
        "grid": list(geom.grid),
        "delta": list(geom.delta),
        "lattice": [[float(v) for v in row] for row in geom.lattice],
    }
    cfg.update(extra)
    return cfg


def _config_line(cfg, comment=False):
    text = json.dumps(cfg, sort_keys=True)
    return ("# " + text) if comment else text


# -- subcommand bodies --------------------------------------------------------


def _cmd_spectrum(ns):
    geom = _resolve_geometry(ns)
    f = _resolve_direction(geom, ns.f_spec, t0=ns.t if ns.t else 1.0)
    family = None
    if f is not None and ns.t != 0.0:
        family = ConformalFamily(geom, f, ns.t)
    report = spectral.eigensolve(geom, family, m=ns.m, seed=ns.seed)
    cfg = _geometry_config(
        geom,
        {"command": "spectrum", "m": ns.m, "seed": ns.seed, "t": ns.t, "f_spec": ns.f_spec},
    )
    sys.stdout.write(report.to_jsonl(cfg))
    return 0


def _cmd_perturb(ns):
    if ns.branch == 0:
        raise ValueError("branch must be a nonzero integer")
    geom = _resolve_geometry(ns)
    f = _resolve_direction(geom, ns.f_spec)
    if f is None:
        raise SystemExit("perturb requires a non-trivial --f-spec")
    base = spectral.eigensolve(geom, None, m=abs(ns.branch) + 1, seed=ns.seed)
    pair = base.pair(ns.branch)
    analytic = perturb.eigenvalue_derivative(geom, f, pair.lam, pair.field)
    fd = perturb.fd_derivative(
        geom,
        f,
        ns.branch,
        ns.h,
        base_report=base,
        seed=ns.seed,
        richardson=ns.richardson,
    )
    tol = max(1e-6, 5.0 * ns.h**2 * abs(pair.lam))
    diff = abs(analytic - fd.value)
    ok = diff <= tol
    cfg = _geometry_config(
        geom,
        {
            "command": "perturb",
            "branch": ns.branch,
            "h": ns.h,
            "seed": ns.seed,
            "f_spec": ns.f_spec,
            "richardson": ns.richardson,
        },
    )
    _emit(_config_line(cfg, comment=True))
    _emit("branch,lambda,analytic,fd,abs_diff,tol,pass")
    _emit(
        f"{ns.branch},{pair.lam!r},{analytic!r},{fd.value!r},{diff!r},{tol!r},{int(ok)}"
    )
    return 0 if ok else 1


def _cmd_split(ns):
    geom = _resolve_geometry(ns)
    f = _resolve_direction(geom, ns.f_spec, t0=ns.t_max)
    if f is None:
        raise SystemExit("split requires a non-trivial --f-spec")
    t_values = [ns.t_max * k / ns.steps for k in range(ns.steps + 1)]
    report = perturb.split_experiment(geom, f, t_values, m=ns.m, seed=ns.seed)
    cfg = _geometry_config(
        geom,
        {
            "command": "split",
            "m": ns.m,
            "seed": ns.seed,
            "t_max": ns.t_max,
            "steps": ns.steps,
            "f_spec": ns.f_spec,
            "final_all_simple": report.final_all_simple,
            "final_min_gap": report.final_min_gap,
        },
    )
    _emit(_config_line(cfg, comment=True))
    sys.stdout.write(report.to_csv())
    return 0


def _cmd_zeros(ns):
    if ns.branch == 0:
        raise ValueError("branch must be a nonzero integer")
    geom = _resolve_geometry(ns)
    f = _resolve_direction(geom, ns.f_spec, t0=ns.t if ns.t else 1.0)
    family = ConformalFamily(geom, f, ns.t) if f is not None and ns.t != 0.0 else None
    report = spectral.eigensolve(geom, family, m=max(abs(ns.branch), 1), seed=ns.seed)
    pair = report.pair(ns.branch)
    candidates = zeroset.zero_report(pair.field, ns.threshold)
    mm = zeroset.min_modulus(pair.field)
    cfg = _geometry_config(
        geom,
        {
            "command": "zeros",
            "branch": ns.branch,
            "seed": ns.seed,
            "t": ns.t,
            "f_spec": ns.f_spec,
            "threshold": ns.threshold
            if ns.threshold is not None
            else zeroset.default_zero_threshold(pair.field),
        },
    )
    _emit(_config_line(cfg))
    _emit(
        json.dumps(
            {
                "kind": "min-modulus",
                "value": mm.value,
                "grid_index": list(mm.grid_index),
                "frac": list(mm.frac),
            },
            sort_keys=True,
        )
    )
    for cand in candidates:
        _emit(
            json.dumps(
                {
                    "kind": "zero-candidate",
                    "value": cand.value,
                    "grid_index": list(cand.grid_index),
                    "frac": list(cand.frac),
                    "flag": cand.flag,
                },
                sort_keys=True,
            )
        )
    _emit(json.dumps({"kind": "summary", "candidates": len(candidates)}, sort_keys=True))
    return 0


def _cmd_generic(ns):
    geom = _resolve_geometry(ns)
    stats = zeroset.genericity_trial(
        geom, ns.m, ns.trials, ns.t0, seed=ns.seed, amplitude=ns.amplitude
    )
    cfg = _geometry_config(
        geom,
        {
            "command": "generic",
            "m": ns.m,
            "trials": ns.trials,
            "t0": ns.t0,
            "seed": ns.seed,
            "amplitude": ns.amplitude,
        },
    )
    _emit(_config_line(cfg))
    _emit(stats.to_json())
    return 0 if stats.solver_failures == 0 else 1


def _cmd_green_check(ns):
    lams = [float(tok) for tok in str(ns.lam).split(",")]
    spinors = [tok.strip() for tok in str(ns.spinors).split(",") if tok.strip()]
    known = {"gauss-const", "gauss-vector", "gauss-coord", "annulus"}
    unknown = sorted(set(spinors) - known)
    if unknown:
        raise ValueError(f"unknown test spinor(s): {', '.join(unknown)}")
    cfg = {
        "command": "green-check",
        "n": ns.n,
        "lam": lams,
        "spinors": spinors,
        "tol": ns.tol,
        "annulus_tol": ns.annulus_tol,
    }
    _emit(_config_line(cfg, comment=True))
    _emit("check,spinor,lambda,residual,tol,pass")
    failures = 0

    def row(check, spinor, lam, res, tol):
        nonlocal failures
        ok = res <= tol
        failures += not ok
        _emit(f"{check},{spinor},{lam!r},{res!r},{tol!r},{int(ok)}")

    r_grid = np.array([0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0])
    for lam in (0.0, 0.5, 1.0, 3.0):
        res = float(np.max(np.abs(green.ode_residual(ns.n, lam, r_grid))))
        row("ode-residual", "", lam, res, 1e-8)
    fiber = make_fiber(ns.n)
    sigma = np.zeros(fiber.N, dtype=complex)
    sigma[0] = 1.0
    for lam in lams:
        kern = green.GreenKernel(ns.n, lam)
        for name in spinors:
            if name == "annulus":
                psi = green.annulus_spinor(ns.n, sigma)
                tol = ns.annulus_tol
            else:
                psi = green.gaussian_spinor(
                    ns.n, sigma, decay=1.0, kind=name.removeprefix("gauss-")
                )
                tol = ns.tol
            res = green.verify_distributional_identity(kern, psi, sigma, tol=tol)
            row("distributional", psi.label, lam, res, tol)
    return 0 if failures == 0 else 1


def _cmd_identities(ns):
    dims = (2, 3) if ns.n is None else (ns.n,)
    failures = 0
    _emit(_config_line({"command": "identities", "max_m": ns.max_m, "n": ns.n}, comment=True))
    _emit("check,n,vector,m,k,cases,failures,pass")

    def row(check, n, vector, m, k, cases, bad):
        nonlocal failures
        failures += bad
        _emit(f"{check},{n},{vector},{m},{k},{cases},{bad},{int(bad == 0)}")

    for n in dims:
        fiber = make_fiber(n)
        g = [np.asarray(mat) for mat in fiber.gammas]
        bad = 0
        for i in range(n):
            for j in range(n):
                acc = g[i] @ g[j] + g[j] @ g[i]
                want = -2.0 * np.eye(fiber.N) if i == j else np.zeros((fiber.N, fiber.N))
                bad += not np.array_equal(acc, want)
            bad += not np.array_equal(g[i].conj().T, -g[i])
        row("clifford-relations", n, "", "", "", n * n + n, bad)
        jm = np.asarray(fiber.j_matrix)
        bad = int(not np.array_equal(jm @ jm.conj(), -np.eye(fiber.N)))
        for i in range(n):
            bad += not np.array_equal(jm @ g[i].conj(), g[i] @ jm)
        row("quaternionic-structure", n, "", "", "", n + 1, bad)
        if n == 3:
            bad = int(not np.array_equal(g[0] @ g[1] @ g[2], np.eye(fiber.N)))
            row("volume-element", n, "", "", "", 1, bad)

    for n in dims:
        for vector in (0, 1):
            for m in range(ns.max_m + 1):
                for k in radial.admissible_k_range(n, m, vector):
                    total = 0
                    bad = 0
                    for gen in radial.space_generators(n, k, m, vector):
                        total += 1
                        try:
                            _, rem = radial.dirac_preimage(gen)
                            if not rem.is_zero():
                                bad += 1
                        except radial.PreimageError:
                            bad += 1
                    row("preimage-round-trip", n, vector, m, k, total, bad)
    return 0 if failures == 0 else 1


def _cmd_ahat(ns):
    value = zeroset.a_hat_complete_intersection(ns.k, ns.d)
    cfg = {"command": "ahat", "k": ns.k, "d": ns.d, "genus": ns.genus}
    _emit(_config_line(cfg, comment=True))
    _emit(str(value))
    if ns.genus is not None:
        _emit(str(zeroset.poincare_hopf_budget(ns.genus)))
    return 0


# -- parser ---------------------------------------------------------------


def _add_geometry_flags(p):
    p.add_argument("-n", "--n", type=int, choices=(2, 3), default=2, help="ambient dimension")
    p.add_argument("--lattice", default="square", help="'square[:side]' or n*n row-major floats")
    p.add_argument("--delta", default=None, help="spin offsets per axis, tokens 0 or h")
    p.add_argument("--grid", default=None, help="grid size, single int or per-axis list")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON file with option defaults")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spindirac",
        description="Spectra, kernels, and zero sets of Dirac operators on flat tori.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="low-lying eigenvalues and multiplicities")
    _add_geometry_flags(p)
    p.add_argument("-m", type=int, default=4, help="slots per sign side")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--f-spec", default="none")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("perturb", help="analytic vs finite-difference eigenvalue rate")
    _add_geometry_flags(p)
    p.add_argument("--branch", type=int, default=1)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--f-spec", default="cos:1,0")
    p.add_argument("--richardson", action="store_true")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("split", help="track branches of a conformal family")
    _add_geometry_flags(p)
    p.add_argument("-m", type=int, default=2)
    p.add_argument("--t-max", type=float, default=0.2)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--f-spec", default="seeded:7:0.3")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("zeros", help="zero candidates of one eigenfield")
    _add_geometry_flags(p)
    p.add_argument("--branch", type=int, default=1)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--f-spec", default="none")
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=_cmd_zeros)

    p = sub.add_parser("generic", help="random conformal directions: simplicity and zeros")
    _add_geometry_flags(p)
    p.add_argument("-m", type=int, default=2)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--t0", type=float, default=0.1)
    p.add_argument("--amplitude", type=float, default=0.3)
    p.set_defaults(func=_cmd_generic)

    p = sub.add_parser("green-check", help="fundamental solution identities on R^n")
    p.add_argument("-n", "--n", type=int, choices=(2, 3), default=2)
    p.add_argument("--lam", default="0,1.5")
    p.add_argument(
        "--spinors",
        default="gauss-const,gauss-vector,gauss-coord,annulus",
        help="comma list of test spinors (gauss-const, gauss-vector, gauss-coord, annulus)",
    )
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--annulus-tol", type=float, default=1e-8)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_green_check)

    p = sub.add_parser("identities", help="exact algebra and round-trip checks")
    p.add_argument("--max-m", type=int, default=3)
    p.add_argument("-n", "--n", type=int, choices=(2, 3), default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_identities)

    p = sub.add_parser("ahat", help="exact rational index obstruction")
    p.add_argument("-k", type=int, required=True, help="quaternionic dimension parameter")
    p.add_argument("-d", type=int, required=True, help="total degree")
    p.add_argument("--genus", type=int, default=None)
    p.set_defaults(func=_cmd_ahat)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # pre-scan for a config file so its values become defaults
    if "--config" in argv:
        at = argv.index("--config")
        if at + 1 >= len(argv):
            parser.error("--config needs a file path")
        with open(argv[at + 1], "r", encoding="utf-8") as fh:
            overrides = json.load(fh)
        if not isinstance(overrides, dict):
            parser.error("config file must hold a JSON object")
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in overrides.items() if k in known})
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (spectral.SolverError, green.QuadratureError, perturb.BranchTrackingError) as exc:
        sys.stderr.write(f"failed: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
