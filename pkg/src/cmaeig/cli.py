"""Command-line driver: ``cmaeig <command> [--config PATH] [--seed N] [--out DIR]``.

Exit codes: 0 when every check passes, 1 on a verification failure or solver
breakdown, 2 on usage or configuration errors. Reports are written with
sorted keys and no timestamps so identical runs give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import __version__
from .algebra.forms import fexprs
from .algebra.identities import verify_all
from .algebra.sampling import positivity_sample_suite
from .analysis import CSV_COLUMNS, DeformationResult, deformation_scan, spectral_scan
from .checks import derivative_checks, reduction_checks, transform_checks
from .domain import DeformationPath, DomainError, profile_ball, profile_from_config
from .radial import (
    BracketNotFound,
    IntegrationBreakdown,
    certify_convexity,
    conserved_form_residual,
    solve_lambda,
    solve_lambda_vform,
    step_halving_ratio,
    v_profile,
)
from .report import Verdict
from .solver2d import NonConvergenceError, inverse_iteration

log = logging.getLogger("cmaeig")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
UINT64_MAX = 2**64 - 1
LAMBDA_NOTE = ("lambda solves det(u_{i bar j}) = lambda (-u)^2; "
               "Lambda = 16 lambda is the constant carried by the v-equation")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


PositiveFloat = Annotated[float, Field(gt=0, allow_inf_nan=False)]


class BallSpec(_Strict):
    type: Literal["ball"]
    R: PositiveFloat = 1.0


class SuperellipseSpec(_Strict):
    type: Literal["superellipse"]
    R: PositiveFloat = 1.0
    p: Annotated[float, Field(ge=2, allow_inf_nan=False)] = 4.0
    smoothing: PositiveFloat = 0.1


class SamplesSpec(_Strict):
    type: Literal["support_samples"]
    theta: list[float]
    h: list[float]


ProfileSpec = Annotated[Union[BallSpec, SuperellipseSpec, SamplesSpec], Field(discriminator="type")]


def _grid_n(value: int) -> int:
    if value < 17 or value % 2 == 0:
        raise ValueError("grid_n must be odd and at least 17")
    return value


class AlgebraSection(_Strict):
    samples: Annotated[int, Field(ge=1)] = 1000
    mutate: Literal["none", "F12_sign", "F11_shift", "F23_shift", "F22_scale", "b_shift"] = "none"


class BallSection(_Strict):
    radius: PositiveFloat = 1.0
    tol: PositiveFloat = 1e-10
    steps: Annotated[int, Field(ge=16)] = 4096


class DomainSection(_Strict):
    profile: ProfileSpec = Field(default_factory=lambda: BallSpec(type="ball"))
    grid_n: int = 65
    tol: PositiveFloat = 1e-8
    inner_tol: PositiveFloat = 1e-10
    max_outer: Annotated[int, Field(ge=1)] = 200
    eps: PositiveFloat | None = None
    tau_rank: Annotated[float, Field(gt=0, lt=1)] = 1e-6

    _check_grid = field_validator("grid_n")(_grid_n)


class DeformSection(_Strict):
    end: ProfileSpec = Field(default_factory=lambda: SuperellipseSpec(type="superellipse"))
    steps: Annotated[int, Field(ge=2)] = 5
    grid_n: int = 65
    tol: PositiveFloat = 1e-8
    eps: PositiveFloat | None = None
    tau_rank: Annotated[float, Field(gt=0, lt=1)] = 1e-6

    _check_grid = field_validator("grid_n")(_grid_n)


class DerivativeSection(_Strict):
    count: Annotated[int, Field(ge=1)] = 100
    rtol: PositiveFloat = 1e-6
    transform_rtol: PositiveFloat = 1e-10
    round_trip_tol: PositiveFloat = 1e-12
    reduction_count: Annotated[int, Field(ge=1)] = 1000
    reduction_rtol: PositiveFloat = 1e-12


class RunConfig(_Strict):
    seed: Annotated[int, Field(ge=0, le=UINT64_MAX)] = 42
    verify_algebra: AlgebraSection = Field(default_factory=AlgebraSection)
    solve_ball: BallSection = Field(default_factory=BallSection)
    solve_domain: DomainSection = Field(default_factory=DomainSection)
    deform: DeformSection = Field(default_factory=DeformSection)
    check_derivatives: DerivativeSection = Field(default_factory=DerivativeSection)


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    """Strict parse of the JSON document at ``path`` with dotted-path overrides."""
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = data
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise UsageError(f"config section {p!r} must be an object")
        node[leaf] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise UsageError(f"invalid config: {exc}") from exc


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _lambda_fields(lam: float) -> dict:
    return {"lambda": lam, "Lambda": 16.0 * lam, "lambda_note": LAMBDA_NOTE}


def _print_checks(verdict: Verdict) -> None:
    for c in verdict.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.tag:<22} {c.name}  {c.detail}".rstrip())


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

_MUTATIONS = {
    "F12_sign": lambda F: F.mutated(F12=-F.F12),
    "F11_shift": lambda F: F.mutated(F11=F.F11 + _var("d1")),
    "F23_shift": lambda F: F.mutated(F23=F.F23 + _var("v1")),
    "F22_scale": lambda F: F.mutated(F22=F.F22 * 2),
    "b_shift": lambda F: F.mutated(b=F.b + 1),
}


def _var(name):
    from .algebra.poly import variables
    return variables(name)[0]


def cmd_verify_algebra(cfg: RunConfig, out: Path) -> int:
    sec = cfg.verify_algebra
    F = fexprs()
    if sec.mutate != "none":
        F = _MUTATIONS[sec.mutate](F)
    verdict = verify_all(F)
    sampling = positivity_sample_suite(sec.samples, cfg.seed)
    verdict.add(f"positivity sampling ({sampling.accepted} admissible samples)", "Claim3.sampled",
                sampling.ok, f"violations {sum(sampling.violations.values())}")
    _print_checks(verdict)
    write_json(out / "report.json", {
        "command": "verify-algebra",
        "version": __version__,
        "seed": cfg.seed,
        "mutate": sec.mutate,
        "ok": verdict.ok,
        "checks": verdict.as_list(),
        "sampling": sampling.as_dict(),
    })
    return EXIT_OK if verdict.ok else EXIT_FAIL


def cmd_solve_ball(cfg: RunConfig, out: Path) -> int:
    sec = cfg.solve_ball
    R = sec.radius
    step = R / sec.steps
    lam, sol = solve_lambda(R, tol=sec.tol, step=step)
    lam_v = solve_lambda_vform(R, step=step, guess=lam)
    cert = certify_convexity(sol)
    v, v1, v2 = v_profile(sol)
    verdict = Verdict()
    agree = abs(lam_v - lam) / lam
    verdict.add("u-form and v-form eigenvalues agree", "Eq4.3", agree <= 1e-6, f"rel diff {agree:.3e}")
    verdict.add("v'' > 0 and lifted Hessian positive on [0, 0.99R]", "Lemma4.1", cert.ok,
                f"min v'' {cert.min_vpp:.6g}, min eigenvalue {cert.min_hessian_eig:.6g}")
    _print_checks(verdict)
    print(f"lambda = {lam:.15g}  (Lambda = 16 lambda = {16 * lam:.15g})")
    write_csv(out / "radial.csv", ["r", "u", "u_prime", "v", "v_prime", "v_second"],
              zip(sol.grid, sol.u, sol.uprime, v, v1, v2))
    write_json(out / "report.json", {
        "command": "solve-ball",
        "version": __version__,
        "radius": R,
        "steps": sec.steps,
        **_lambda_fields(lam),
        "lambda_vform": lam_v,
        "lambda_R4": lam * R**4,
        "step_halving_ratio": step_halving_ratio(lam, R),
        "conserved_form_residual": conserved_form_residual(sol),
        "certificate": {"ok": cert.ok, "min_vpp": cert.min_vpp,
                        "min_hessian_eig": cert.min_hessian_eig, "points": cert.points},
        "ok": verdict.ok,
        "checks": verdict.as_list(),
    })
    return EXIT_OK if verdict.ok else EXIT_FAIL


def _solution_document(sol, profile_spec: dict) -> dict:
    mesh = sol.mesh
    return {
        "profile": profile_spec,
        "grid_n": mesh.n,
        "h": mesh.h,
        "extent": mesh.L,
        **_lambda_fields(sol.lam),
        "residual_inf": sol.residual_inf,
        "iterations": sol.iterations,
        "layout": "row-major u[i, j] at (r1, r2) = (i h, j h); 0 outside the domain",
        "u": mesh.scatter(sol.u, fill=0.0).ravel(),
    }


def cmd_solve_domain(cfg: RunConfig, out: Path) -> int:
    sec = cfg.solve_domain
    spec = sec.profile.model_dump()
    profile = profile_from_config(spec)
    sol = inverse_iteration(profile, sec.grid_n, tol=sec.tol, inner_tol=sec.inner_tol,
                            max_outer=sec.max_outer)
    report = spectral_scan(sol, sec.eps, sec.tau_rank)
    verdict = Verdict()
    verdict.add("eigen-residual below tolerance", "Eq1.3", sol.residual_inf <= sec.tol,
                f"residual {sol.residual_inf:.3e}")
    verdict.add("log-concave on Omega_eps", "Thm1.1", report.log_concave,
                f"min eigenvalue {report.interior_min_eig:.6g}")
    verdict.add("constant full rank on Omega_eps", "Cor3.3", report.min_rank == 4,
                f"rank {report.min_rank}..{report.max_rank}")
    verdict.add("boundary strip strictly convex", "Lemma4.2", bool(report.strip_ok))
    payload = {
        "command": "solve-domain",
        "version": __version__,
        "profile": spec,
        "grid_n": sec.grid_n,
        **_lambda_fields(sol.lam),
        "residual_inf": sol.residual_inf,
        "iterations": sol.iterations,
        "spectral": report.summary(),
        "ok": verdict.ok,
        "checks": verdict.as_list(),
    }
    if spec["type"] == "ball":
        lam_radial, _ = solve_lambda(spec["R"])
        payload["lambda_radial"] = lam_radial
        payload["lambda_rel_error"] = (sol.lam - lam_radial) / lam_radial
    _print_checks(verdict)
    print(f"lambda = {sol.lam:.12g}  (Lambda = 16 lambda = {16 * sol.lam:.12g})")
    write_csv(out / "spectral.csv", CSV_COLUMNS, report.rows())
    write_json(out / "solution.json", _solution_document(sol, spec))
    write_json(out / "report.json", payload)
    return EXIT_OK if verdict.ok else EXIT_FAIL


def cmd_deform(cfg: RunConfig, out: Path) -> int:
    sec = cfg.deform
    spec = sec.end.model_dump()
    path = DeformationPath(profile_from_config(spec), profile_ball(1.0))
    solutions = []

    def solver(profile, grid_n, lam_guess, tol):
        sol = inverse_iteration(profile, grid_n, tol=tol, lam_guess=lam_guess)
        solutions.append(sol)
        return sol

    result: DeformationResult = deformation_scan(path, sec.steps, sec.grid_n, sec.eps,
                                                 sec.tau_rank, sec.tol, solver)
    verdict = Verdict()
    rows = []
    for k, step in enumerate(result.steps):
        detail = step.error or (f"lambda {step.lam:.8g}, min eigenvalue "
                                f"{step.report.interior_min_eig:.4g}, rank {step.report.min_rank}")
        verdict.add(f"t = {step.t:g}: converged, rank 4, log-concave, strip", "Thm1.1.deform",
                    step.ok, detail)
        if step.report is not None:
            rows.extend(step.report.rows())
    for k, sol in enumerate(solutions):
        doc = _solution_document(sol, sol.profile.params)
        write_json(out / f"solution_{k:02d}.json", doc)
    _print_checks(verdict)
    write_csv(out / "spectral.csv", CSV_COLUMNS, rows)
    write_json(out / "report.json", {
        "command": "deform",
        "version": __version__,
        "end": spec,
        "steps": sec.steps,
        "grid_n": sec.grid_n,
        "lambda_note": LAMBDA_NOTE,
        "scan": [s.summary() for s in result.steps],
        "first_failure": result.first_failure,
        "ok": verdict.ok,
        "checks": verdict.as_list(),
    })
    return EXIT_OK if verdict.ok else EXIT_FAIL


def cmd_check_derivatives(cfg: RunConfig, out: Path) -> int:
    sec = cfg.check_derivatives
    verdict, errors = derivative_checks(sec.count, cfg.seed, sec.rtol)
    tv, terr = transform_checks(sec.count, cfg.seed, sec.transform_rtol, sec.round_trip_tol)
    rv, rerr = reduction_checks(sec.reduction_count, cfg.seed, sec.reduction_rtol)
    verdict.extend(tv)
    verdict.extend(rv)
    _print_checks(verdict)
    if not verdict.ok:
        print(f"failing check: {verdict.first_failure}", file=sys.stderr)
    write_json(out / "report.json", {
        "command": "check-derivatives",
        "version": __version__,
        "seed": cfg.seed,
        "rtol": sec.rtol,
        "max_errors": {**errors, **terr, **rerr},
        "ok": verdict.ok,
        "checks": verdict.as_list(),
    })
    return EXIT_OK if verdict.ok else EXIT_FAIL


COMMANDS = {
    "verify-algebra": cmd_verify_algebra,
    "solve-ball": cmd_solve_ball,
    "solve-domain": cmd_solve_domain,
    "deform": cmd_deform,
    "check-derivatives": cmd_check_derivatives,
}


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--out", metavar="DIR", default="cmaeig-out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="cmaeig", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-algebra", parents=[common], help="exact algebra and sampling suite")
    p.add_argument("--samples", type=int)
    p.add_argument("--mutate", choices=list(AlgebraSection.model_fields["mutate"].annotation.__args__),
                   help="corrupt one first-derivative table (harness check)")

    p = sub.add_parser("solve-ball", parents=[common], help="radial eigenpair and convexity certificate")
    p.add_argument("--radius", type=float)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("solve-domain", parents=[common], help="2D eigen-solve and spectral scan")
    p.add_argument("--grid-n", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--domain", metavar="JSON", help="profile description, e.g. '{\"type\": \"ball\"}'")

    p = sub.add_parser("deform", parents=[common], help="scan along the Minkowski path from the ball")
    p.add_argument("--steps", type=int)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("check-derivatives", parents=[common], help="finite-difference validation")
    p.add_argument("--count", type=int)
    p.add_argument("--rtol", type=float)
    return parser


def _overrides(args) -> dict:
    section = args.command.replace("-", "_")
    out = {"seed": args.seed}
    for name in ("samples", "mutate", "radius", "tol", "grid_n", "steps", "count", "rtol"):
        if hasattr(args, name):
            out[f"{section}.{name}"] = getattr(args, name)
    if getattr(args, "domain", None) is not None:
        try:
            out["solve_domain.profile"] = json.loads(args.domain)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed --domain JSON: {exc}") from exc
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, Path(args.out))
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergenceError, IntegrationBreakdown, BracketNotFound) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
