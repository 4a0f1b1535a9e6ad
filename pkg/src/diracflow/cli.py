"""Batch front end: run scenarios, verify structures, solve boundary problems.

Commands (exit codes: 0 ok, 1 check failure, 2 domain/attainability/leaf
or configuration error, 3 solver divergence):

* ``run <config>``   -> trajectory.csv + diagnostics.json
* ``check <config>`` -> structure_report.json
* ``dvp <config>``   -> path.csv + diagnostics.json

``<config>`` is a JSON document with a top-level ``scenario`` key (a
catalog name or an inline structure spec) and an ``overrides`` object;
a bare catalog name is also accepted.  Field entries in inline specs are
coordinate expressions such as ``"x**2 + y"``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .algebroid import horizontality_report, lichnerowicz_d_value
from .dirac import (
    CONVENTIONS,
    DiracStructure,
    build_dirac,
    check_poisson_primitive,
    check_primitive,
    dirac_algebroid,
    omega_D_form,
    omega_D_matrix,
    point_frame,
    verify_structure,
)
from .errors import (
    AttainabilityError,
    DiracflowError,
    DomainError,
    LeafMismatchError,
    SolveDivergenceError,
    StructureError,
)
from .fields import (
    Chart,
    ChartMap,
    DiffBackend,
    OneFormField,
    ScalarField,
    SkewMatrixField,
    VectorField,
    poisson_jacobi_residual,
    two_form_closedness_residual,
)
from .integrators import (
    DiscretePath,
    IlsFunctional,
    IntegratorConfig,
    Theorem1Functional,
    discrete_trajectory,
    dvp_solve,
    integrate_dirac_hamiltonian,
    stationarity_residual,
)
from .mechanics import fiber_derivative, ils_residual, reconstruct_velocities
from .sampling import sample_box
from .scenarios import Scenario, builtin, builtin_names

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_DOMAIN = 2
EXIT_SOLVER = 3

_SAFE_FUNCS = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
               "log": np.log, "sqrt": np.sqrt, "pi": np.pi, "e": np.e,
               "abs": abs}


class ConfigError(DiracflowError):
    """Malformed or inconsistent run configuration."""


def _compile_expression(expr: str, names: tuple[str, ...]):
    """Callable point -> value for a coordinate expression string."""
    code = compile(expr, "<config>", "eval")
    for name in code.co_names:
        if name not in names and name not in _SAFE_FUNCS:
            raise ConfigError(f"unknown symbol {name!r} in expression {expr!r}")

    def func(x):
        env = dict(zip(names, x))
        env.update(_SAFE_FUNCS)
        return eval(code, {"__builtins__": {}}, env)

    return func


def _fmt(value) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(value))


# ---------------------------------------------------------------------------
# configuration loading
# ---------------------------------------------------------------------------

def _load_config(arg: str) -> dict:
    if arg in builtin_names():
        return {"scenario": arg, "overrides": {}}
    path = Path(arg)
    if not path.exists():
        raise ConfigError(f"config {arg!r} is neither a file nor a known scenario "
                          f"(known: {', '.join(builtin_names())})")
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict) or "scenario" not in cfg:
        raise ConfigError("config must be an object with a 'scenario' key")
    cfg.setdefault("overrides", {})
    return cfg


def _parse_cli_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--override expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


_SCALAR_OVERRIDES = {"h", "T", "newton_tol", "membership_tol"}
_KNOWN_OVERRIDES = _SCALAR_OVERRIDES | {
    "method", "quadrature", "N", "x0", "q0", "v0", "endpoints", "functional",
    "hamiltonian", "newton_max_iter", "samples",
}


def _apply_overrides(scenario: Scenario, overrides: dict) -> Scenario:
    unknown = set(overrides) - _KNOWN_OVERRIDES
    if unknown:
        raise ConfigError(f"unknown override keys {sorted(unknown)}")
    cfg_updates = {}
    for key in ("h", "method", "quadrature", "newton_tol", "newton_max_iter",
                "membership_tol"):
        if key in overrides:
            cfg_updates[key] = overrides[key]
    updates = {}
    if cfg_updates:
        updates["cfg"] = dataclasses.replace(scenario.cfg, **cfg_updates)
    if "T" in overrides:
        updates["T"] = float(overrides["T"])
    for key in ("x0", "q0", "v0"):
        if key in overrides:
            value = np.asarray(overrides[key], dtype=float)
            expect = scenario.chart.dim
            if value.shape != (expect,):
                raise ConfigError(f"{key} must have {expect} components")
            updates[key] = value
    if "hamiltonian" in overrides:
        if scenario.dynamics != "hamiltonian":
            raise ConfigError("hamiltonian override applies to Hamiltonian scenarios")
        func = _compile_expression(str(overrides["hamiltonian"]),
                                   scenario.chart.coordinate_names)
        updates["hamiltonian"] = ScalarField(scenario.chart, func, name="H(override)")
    if "membership_tol" in overrides:
        updates["membership_tol"] = float(overrides["membership_tol"])
    return dataclasses.replace(scenario, **updates) if updates else scenario


# ---------------------------------------------------------------------------
# inline structure specs
# ---------------------------------------------------------------------------

def _inline_chart(spec: dict) -> Chart:
    dim = int(spec["dim"])
    coords = tuple(spec.get("coords", ())) or tuple(f"x{i+1}" for i in range(dim))
    box = spec.get("box")
    sample = (tuple(box[0]), tuple(box[1])) if box else ((-1.0,) * dim, (1.0,) * dim)
    return Chart(dim=dim, coordinate_names=coords, sample_box=sample)


def _inline_skew(chart: Chart, entries: dict, variance: str, name: str) -> SkewMatrixField:
    n = chart.dim
    compiled = {}
    for key, expr in entries.items():
        i, j = (int(p) for p in key.split(","))
        compiled[(i, j)] = _compile_expression(str(expr), chart.coordinate_names)

    def func(x):
        zero = 0.0 * x[0]
        m = np.empty((n, n), dtype=object)
        m[:] = zero
        for (i, j), f in compiled.items():
            v = f(x)
            m[i, j] = v + zero
            m[j, i] = -1.0 * v + zero
        if np.asarray(x).dtype != object:
            return m.astype(float)
        return m

    return SkewMatrixField(chart, func, variance, name=name)


def _inline_structure(spec: dict) -> tuple[DiracStructure, Chart, dict]:
    chart = _inline_chart(spec)
    kind = spec.get("kind")
    extras = {}
    if kind == "form":
        omega = _inline_skew(chart, spec["entries"], SkewMatrixField.COVARIANT, "inline form")
        extras["omega"] = omega
        D = build_dirac({"form": omega}, almost_dirac=True)
    elif kind == "poisson":
        pi = _inline_skew(chart, spec["entries"], SkewMatrixField.CONTRAVARIANT, "inline bivector")
        extras["pi"] = pi
        D = build_dirac({"poisson": pi}, almost_dirac=True)
    elif kind == "foliation":
        fields = [VectorField(chart, _vector_expr(chart, comps))
                  for comps in spec["fields"]]
        cofields = [OneFormField(chart, _vector_expr(chart, comps))
                    for comps in spec.get("cofields", [])] or None
        g = None
        if "g" in spec:
            target = Chart(len(spec["g"]))
            g = ChartMap(chart, target, _vector_expr(chart, spec["g"]), name="g")
        D = build_dirac({"foliation": {"fields": fields, "cofields": cofields, "g": g}},
                        almost_dirac=bool(spec.get("almost_dirac", False)))
    else:
        raise ConfigError(f"inline scenario kind must be form/poisson/foliation, got {kind!r}")
    return D, chart, extras


def _vector_expr(chart: Chart, comps):
    funcs = [_compile_expression(str(c), chart.coordinate_names) for c in comps]

    def func(x):
        zero = 0.0 * x[0]
        vals = [f(x) + zero for f in funcs]
        if np.asarray(x).dtype != object:
            return np.asarray(vals, dtype=float)
        out = np.empty(len(vals), dtype=object)
        out[:] = vals
        return out

    return func


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_hamiltonian(scenario: Scenario, out: Path, seed: int) -> dict:
    traj = integrate_dirac_hamiltonian(
        scenario.structure, scenario.hamiltonian, scenario.x0, scenario.T,
        scenario.cfg, scenario.casimirs)
    names = list(scenario.chart.coordinate_names)
    cas_names = [c.name or f"casimir{k}" for k, c in enumerate(scenario.casimirs)]
    header = ["t"] + names + ["H"] + cas_names + ["membership_residual", "kernel_dim"]
    rows = []
    for k in range(traj.times.size):
        row = [_fmt(traj.times[k])]
        row += [_fmt(v) for v in traj.states[k]]
        row.append(_fmt(traj.energy_values[k]))
        row += [_fmt(v) for v in traj.casimir_values[k]]
        row.append(_fmt(traj.membership_residuals[k]))
        row.append(str(int(traj.kernel_dims[k])))
        rows.append(row)
    _write_csv(out / "trajectory.csv", header, rows)

    diag = {
        "scenario": scenario.name,
        "dynamics": "hamiltonian",
        "method": traj.method,
        "steps": int(traj.times.size - 1),
        "T": scenario.T,
        "seed": seed,
        "energy_drift": float(np.max(np.abs(traj.energy_values - traj.energy_values[0]))),
        "casimir_drifts": {
            name: float(np.max(np.abs(traj.casimir_values[:, k] - traj.casimir_values[0, k])))
            for k, name in enumerate(cas_names)
        },
        "max_membership_residual": float(traj.membership_residuals.max()),
        "max_kernel_dim": int(traj.kernel_dims.max()),
        "conventions": CONVENTIONS,
    }
    if scenario.analytic is not None:
        end = scenario.analytic(traj.times[-1])
        diag["analytic_endpoint_error"] = float(np.max(np.abs(traj.states[-1] - end)))
    if float(traj.membership_residuals.max()) > scenario.cfg.membership_tol:
        raise AttainabilityError(traj.states[-1],
                                 float(traj.membership_residuals.max()),
                                 scenario.cfg.membership_tol)
    return diag


def _run_lagrangian(scenario: Scenario, out: Path, seed: int) -> dict:
    cfg = scenario.cfg
    h = float(cfg.h)
    n_steps = max(2, int(round(scenario.T / h)))
    path = discrete_trajectory(
        scenario.lagrangian, scenario.q0, scenario.v0, n_steps, cfg,
        theta=scenario.theta, constraint=scenario.constraint,
        backend=scenario.structure.backend)
    velocities = reconstruct_velocities(path.times, path.nodes)
    residuals = ils_residual(scenario.structure, scenario.lagrangian,
                             path.nodes, velocities, path.times,
                             scenario.structure.backend)
    energies = np.array([scenario.energy(q, v) if scenario.energy else np.nan
                         for q, v in zip(path.nodes, velocities)])
    names = list(scenario.chart.coordinate_names)
    header = ["t"] + names + ["H"] + ["membership_residual", "kernel_dim"]
    rows = []
    for k in range(path.times.size):
        row = [_fmt(path.times[k])]
        row += [_fmt(v) for v in path.nodes[k]]
        row.append(_fmt(energies[k]))
        row.append(_fmt(residuals[k]))
        row.append("0")
        rows.append(row)
    _write_csv(out / "trajectory.csv", header, rows)

    diag = {
        "scenario": scenario.name,
        "dynamics": "lagrangian",
        "quadrature": cfg.quadrature,
        "steps": int(path.times.size - 1),
        "T": scenario.T,
        "seed": seed,
        "energy_drift": float(np.nanmax(np.abs(energies - energies[0]))),
        "max_membership_residual": float(residuals.max()),
        "stationarity_residual": float(stationarity_residual(path)),
        "conventions": CONVENTIONS,
    }
    if scenario.constraint is not None:
        g0 = np.atleast_1d(scenario.constraint(path.nodes[0]))
        drift = max(float(np.max(np.abs(np.atleast_1d(scenario.constraint(q)) - g0)))
                    for q in path.nodes)
        diag["constraint_drift"] = drift
    if scenario.analytic is not None:
        end = scenario.analytic(path.times[-1])
        diag["analytic_endpoint_error"] = float(np.max(np.abs(path.nodes[-1] - end)))
    if float(residuals.max()) > cfg.membership_tol:
        raise AttainabilityError(path.nodes[-1], float(residuals.max()),
                                 cfg.membership_tol)
    return diag


def cmd_run(args) -> int:
    config = _load_config(args.config)
    overrides = dict(config.get("overrides", {}))
    overrides.update(_parse_cli_overrides(args.override))
    if not isinstance(config["scenario"], str):
        return _run_inline(config, overrides, args)
    scenario = _apply_overrides(builtin(config["scenario"]), overrides)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if scenario.dynamics == "hamiltonian":
        diag = _run_hamiltonian(scenario, out, args.seed)
    elif scenario.dynamics == "lagrangian":
        diag = _run_lagrangian(scenario, out, args.seed)
    else:
        raise ConfigError(f"scenario {scenario.name!r} declares no dynamics; "
                          "use the check command")
    _write_json(out / "diagnostics.json", diag)
    return EXIT_OK


def _run_inline(config: dict, overrides: dict, args) -> int:
    spec = config["scenario"]
    D, chart, extras = _inline_structure(spec)
    if "hamiltonian" not in spec and "hamiltonian" not in overrides:
        raise ConfigError("inline run needs a 'hamiltonian' expression")
    h_expr = overrides.get("hamiltonian", spec.get("hamiltonian"))
    H = ScalarField(chart, _compile_expression(str(h_expr), chart.coordinate_names))
    x0 = np.asarray(overrides.get("x0", spec.get("x0")), dtype=float)
    cfg = IntegratorConfig(
        h=float(overrides.get("h", spec.get("h", 1e-3))),
        method=str(overrides.get("method", "explicit_rk4")),
        membership_tol=float(overrides.get("membership_tol", 1e-6)))
    scen = Scenario(name=str(spec.get("name", "inline")), description="inline",
                    chart=chart, structure=D, dynamics="hamiltonian",
                    hamiltonian=H, x0=x0,
                    T=float(overrides.get("T", spec.get("T", 1.0))), cfg=cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    diag = _run_hamiltonian(scen, out, args.seed)
    _write_json(out / "diagnostics.json", diag)
    return EXIT_OK


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def _structure_checks(D: DiracStructure, samples, expect_involutivity_failure: bool,
                      extras: dict) -> dict:
    report = verify_structure(D, samples)
    result = {
        "isotropy_max": report.isotropy_max,
        "involutivity_max": report.involutivity_max,
        "rank_ok": report.rank_ok,
        "isotropy_ok": report.isotropy_ok,
        "involutivity_ok": report.involutivity_ok,
        "almost_dirac": D.almost_dirac,
        "expected_involutivity_failure": expect_involutivity_failure,
    }
    checks = [report.rank_ok, report.isotropy_ok]
    if expect_involutivity_failure:
        checks.append(not report.involutivity_ok)
    else:
        checks.append(report.involutivity_ok)

    if "pi" in extras:
        jac = max(poisson_jacobi_residual(extras["pi"], x, D.backend) for x in samples)
        result["jacobi_residual"] = jac
        checks.append(jac <= 1e-6)
    if "omega" in extras:
        closed = max(two_form_closedness_residual(extras["omega"], x, D.backend)
                     for x in samples)
        result["closedness_residual"] = closed
        checks.append(closed <= 1e-6)

    if not D.almost_dirac or expect_involutivity_failure:
        algebroid = dirac_algebroid(D)
        form = omega_D_form(D)
        horiz = horizontality_report(algebroid, form, samples, tol=1e-8)
        d_res = max(float(np.max(np.abs(lichnerowicz_d_value(algebroid, form, x))))
                    for x in samples)
        result["omega_D_horizontal"] = horiz.eta_horizontal
        result["omega_D_kernel_contraction"] = horiz.max_eta_contraction
        result["omega_D_closedness"] = d_res
        checks.append(horiz.eta_horizontal)
        checks.append(d_res <= 1e-5)
    result["passed"] = all(checks)
    return result


def cmd_check(args) -> int:
    config = _load_config(args.config)
    overrides = dict(config.get("overrides", {}))
    overrides.update(_parse_cli_overrides(args.override))
    count = int(overrides.pop("samples", 100))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if isinstance(config["scenario"], str):
        scenario = _apply_overrides(builtin(config["scenario"]), overrides)
        samples = scenario.structure_samples(count, seed=args.seed)
        extras = {"pi": scenario.pi} if scenario.pi is not None else {}
        result = _structure_checks(scenario.structure, samples,
                                   scenario.expected_involutivity_failure, extras)
        result["scenario"] = scenario.name

        if scenario.pi is not None and scenario.poisson_primitive is not None:
            pts = scenario.singular_samples(25, seed=args.seed) or \
                scenario.samples(count, seed=args.seed)
            rep = check_poisson_primitive(scenario.pi, scenario.poisson_primitive,
                                          pts, tol=1e-6,
                                          backend=scenario.structure.backend)
            result["poisson_primitive"] = {
                "lie_condition": rep.lie_condition,
                "tangency": rep.tangency,
                "max_lie_residual": rep.max_lie_residual,
                "max_tangency_residual": rep.max_tangency_residual,
            }
            result["passed"] = result["passed"] and rep.lie_condition and rep.tangency
        if scenario.primitive_tau is not None:
            pts = scenario.singular_samples(25, seed=args.seed) or \
                scenario.samples(min(count, 50), seed=args.seed)
            rep = check_primitive(scenario.structure, scenario.primitive_tau, pts,
                                  tol=1e-6)
            result["primitive"] = {
                "horizontal": rep.horizontal,
                "d_theta_equals_omega": rep.d_theta_equals_omega,
                "max_horizontality_residual": rep.max_horizontality_residual,
                "max_d_residual": rep.max_d_residual,
            }
            result["passed"] = (result["passed"] and rep.horizontal
                                and rep.d_theta_equals_omega)
        for k, C in enumerate(scenario.casimirs):
            worst = 0.0
            for x in scenario.samples(count, seed=args.seed):
                frame = point_frame(scenario.structure, x)
                from .fields import gradient
                dC = gradient(C, x, scenario.structure.backend)
                worst = max(worst, float(np.max(np.abs(frame.vector_block.T @ dC))))
            result.setdefault("casimir_residuals", {})[C.name or f"C{k}"] = worst
            result["passed"] = result["passed"] and worst <= 1e-8
    else:
        D, chart, extras = _inline_structure(config["scenario"])
        lower, upper = chart.sample_box
        samples = sample_box(lower, upper, count, seed=args.seed)
        result = _structure_checks(
            D, samples, bool(config["scenario"].get("expect_involutivity_failure", False)),
            extras)
        result["scenario"] = str(config["scenario"].get("name", "inline"))

    _write_json(out / "structure_report.json", result)
    print(f"check {result['scenario']}: {'pass' if result['passed'] else 'FAIL'}")
    return EXIT_OK if result["passed"] else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# dvp
# ---------------------------------------------------------------------------

def cmd_dvp(args) -> int:
    config = _load_config(args.config)
    overrides = dict(config.get("overrides", {}))
    overrides.update(_parse_cli_overrides(args.override))
    if not isinstance(config["scenario"], str):
        raise ConfigError("dvp requires a catalog scenario")
    scenario = _apply_overrides(builtin(config["scenario"]),
                                {k: v for k, v in overrides.items()
                                 if k not in ("N", "endpoints", "functional")})
    if "endpoints" not in overrides:
        raise ConfigError("dvp needs an 'endpoints' override: [[start], [end]]")
    endpoints = np.asarray(overrides["endpoints"], dtype=float)
    if endpoints.shape != (2, scenario.chart.dim):
        raise ConfigError(f"endpoints must be two points of dim {scenario.chart.dim}")
    N = int(overrides.get("N", 100))
    if N < 2:
        raise ConfigError("N must be at least 2")
    tag = overrides.get("functional",
                        "theorem1" if scenario.dynamics == "hamiltonian" else "ils")

    if tag == "theorem1":
        if scenario.theta_tau is None or scenario.hamiltonian is None:
            raise ConfigError(
                f"scenario {scenario.name!r} has no variational one-form for "
                "the theorem1 functional")
        functional = Theorem1Functional(scenario.structure, scenario.theta_tau,
                                        scenario.hamiltonian,
                                        quadrature=scenario.cfg.quadrature)
    elif tag == "ils":
        if scenario.lagrangian is None:
            raise ConfigError(f"scenario {scenario.name!r} has no Lagrangian")
        functional = IlsFunctional(scenario.lagrangian, scenario.theta,
                                   scenario.constraint, scenario.cfg.quadrature,
                                   scenario.structure.backend)
    else:
        raise ConfigError(f"unknown functional tag {tag!r}")

    times = np.linspace(0.0, scenario.T, N + 1)
    frac = np.linspace(0.0, 1.0, N + 1)[:, None]
    guess = endpoints[0][None, :] * (1.0 - frac) + endpoints[1][None, :] * frac
    template = DiscretePath(times, guess, functional)
    solved = dvp_solve(template, scenario.cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = list(scenario.chart.coordinate_names)
    header = ["t"] + names
    if solved.multipliers is not None:
        header += [f"lambda{j}" for j in range(solved.multipliers.shape[1])]
    rows = []
    for k in range(solved.times.size):
        row = [_fmt(solved.times[k])] + [_fmt(v) for v in solved.nodes[k]]
        if solved.multipliers is not None:
            if 1 <= k <= solved.times.size - 2:
                row += [_fmt(v) for v in solved.multipliers[k - 1]]
            else:
                row += [""] * solved.multipliers.shape[1]
        rows.append(row)
    _write_csv(out / "path.csv", header, rows)

    diag = {
        "scenario": scenario.name,
        "functional": tag,
        "N": N,
        "quadrature": scenario.cfg.quadrature,
        "seed": args.seed,
        "stationarity_residual": float(stationarity_residual(solved)),
        "newton_iterations": getattr(solved, "newton_iterations", None),
        "conventions": CONVENTIONS,
    }
    if scenario.analytic is not None:
        exact = np.stack([scenario.analytic(t) for t in solved.times])
        diag["analytic_path_error"] = float(np.max(np.abs(solved.nodes - exact)))
    _write_json(out / "diagnostics.json", diag)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diracflow",
        description="Dirac-structure dynamics: run, check, and solve "
                    "boundary problems on the builtin scenario catalog.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("check", cmd_check), ("dvp", cmd_dvp)):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON config file or builtin scenario name")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=0, help="sampling seed")
        p.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, AttainabilityError, LeafMismatchError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SolveDivergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except StructureError as exc:
        print(f"structure check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
