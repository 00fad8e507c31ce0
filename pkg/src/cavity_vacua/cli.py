"""Command line interface: configuration, orchestration and deterministic
CSV/JSON export for every computation in the library.

Subcommands
-----------
geometry       coupling matrix + (eta, nu) summary for a lattice
polariton      classical bright/dark polariton branches over an omega_p grid
ground         single ground-state point (documented column set)
sweep          1D parameter sweep of ground-state observables
phase-diagram  alpha x epsilon grid with per-cell phase labels
adiabatic      field-quadrature potential V(X)
qfunction      spin Husimi function of the ground state
analytics      closed-form values as JSON on stdout
run            schema-validated JSON config driving the above

CSV files are RFC 4180 with a header row, 12 significant digits and `.` as
the decimal separator; rows are sorted by the sweep axes before writing, so
the worker count never changes the output bytes.  Booleans are written as
1/0.  Exit codes: 1 unknown subcommand, 2 config/schema violation,
3 Hilbert-space dimension guard, 4 unwritable output path.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np
import jsonschema

from . import __version__
from . import analytics as an
from . import classical_modes as cm
from . import geometry as geo
from . import groundstate as gst
from . import quantum_model as qm

GROUND_COLUMNS = [
    "g", "alpha", "epsilon", "N", "energy", "photon_number", "mean_a",
    "mean_Sx", "delta_Sx2", "u2", "phi2", "S1", "Sd", "n_max_used",
    "converged", "omega0", "lambda",
]

MODELS = ["EDM", "CQEDFull", "CoulombTLS", "Polaron", "LMG", "EffectiveSpin", "HP"]
LATTICES = ["slab_square", "line_stack", "triangular_layer", "tilted_line",
            "pair_of_pairs"]
SWEEP_VARS = ["g", "alpha", "epsilon", "omega0", "lambda"]

DETERMINISM_NOTE = ("seedless exact diagonalization; identical config yields "
                    "byte-identical CSV")


# ---------------------------------------------------------------- formatting

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "nan"
    if isinstance(x, str):
        return x
    return "%.12g" % float(x)


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(args) -> str:
    out = args.out
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------- geometry

def _add_lattice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lattice", choices=LATTICES, default="slab_square")
    p.add_argument("--nx", type=int, default=10, help="sites per side / chain length")
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--d", type=float, default=10.0, help="plate separation (units of r0)")
    p.add_argument("--theta", type=float, default=0.0, help="dipole tilt from the z axis (rad)")
    p.add_argument("--dx", type=float, default=0.7, help="pair-of-pairs intra-pair offset")
    p.add_argument("--boundary", choices=[b.value for b in geo.Boundary],
                   default=geo.Boundary.INFINITE_PLATES.value)
    p.add_argument("--image-cutoff", type=int, default=50)


def _ensemble_from_args(args) -> geo.DipoleEnsemble:
    boundary = geo.Boundary(args.boundary)
    kw = dict(boundary=boundary, image_cutoff=args.image_cutoff)
    if args.lattice == "slab_square":
        return geo.slab_square(args.nx, args.layers, args.d, **kw)
    if args.lattice == "line_stack":
        return geo.line_stack(args.nx, args.d, **kw)
    if args.lattice == "triangular_layer":
        return geo.triangular_layer(args.nx, args.d, **kw)
    if args.lattice == "tilted_line":
        return geo.tilted_line(args.nx, args.d, args.theta, **kw)
    return geo.pair_of_pairs(args.dx, args.d, **kw)


def _lattice_echo(args) -> dict:
    return {"lattice": args.lattice, "nx": args.nx, "layers": args.layers,
            "d": args.d, "theta": args.theta, "dx": args.dx,
            "boundary": args.boundary, "image_cutoff": args.image_cutoff}


def cmd_geometry(args) -> int:
    out = _outdir(args)
    ens = _ensemble_from_args(args)
    coupling = geo.coupling_matrix(ens)
    rows = [(i, j, coupling.D[i, j])
            for i in range(ens.n) for j in range(ens.n)]
    _write_csv(os.path.join(out, "coupling.csv"), ["row", "col", "value"], rows)
    summary = {
        "N": ens.n,
        "eta": coupling.eta,
        "nu": geo.filling_factor(ens, ens.volume),
        "boundary": coupling.boundary.value,
        "image_cutoff": coupling.image_cutoff,
        "max_truncation_residual": coupling.max_truncation_residual,
    }
    _write_manifest(os.path.join(out, "geometry.json"), summary)
    return 0


# ---------------------------------------------------------------- polariton

def _signed_sqrt(x: float) -> float:
    return math.copysign(math.sqrt(abs(x)), x)


def cmd_polariton(args) -> int:
    out = _outdir(args)
    ens = _ensemble_from_args(args)
    coupling = geo.coupling_matrix(ens)
    nu = geo.filling_factor(ens, ens.volume)
    grid = (np.geomspace if args.log else np.linspace)(
        args.omega_p_min, args.omega_p_max, args.points)
    rows = []
    for wp in grid:
        params = cm.ClassicalParams(omega0=args.omega0, omega_c=args.omega_c,
                                    omega_p=float(wp))
        decomp = cm.decompose(coupling, params, nu)
        branches = cm.bright_branches(params, coupling.eta, nu)
        omega_sq, stable = cm.full_spectrum(decomp, params)
        dark = decomp.omega_n_sq[decomp.nu_n < 1e-10 * max(decomp.nu_n.max(), 1e-300)]
        if dark.size == 0:
            dark_min = dark_max = float("nan")
        else:
            dark_min, dark_max = _signed_sqrt(dark.min()), _signed_sqrt(dark.max())
        rows.append((wp, _signed_sqrt(branches.omega_plus_sq),
                     _signed_sqrt(branches.omega_minus_sq),
                     dark_min, dark_max, int(np.sum(omega_sq < 0))))
    header = ["omega_p", "Omega_plus", "Omega_minus", "dark_min", "dark_max",
              "unstable_count"]
    _write_csv(os.path.join(out, "polariton.csv"), header, rows)
    _write_manifest(os.path.join(out, "polariton_manifest.json"), {
        "command": "polariton", "version": __version__,
        "geometry": _lattice_echo(args),
        "omega0": args.omega0, "omega_c": args.omega_c,
        "omega_p_grid": {"min": args.omega_p_min, "max": args.omega_p_max,
                         "points": args.points, "scale": "log" if args.log else "linear"},
        "eta": coupling.eta, "nu": nu, "columns": header,
        "determinism": DETERMINISM_NOTE,
    })
    return 0


# ---------------------------------------------------------------- points

def _add_model_args(p: argparse.ArgumentParser, model_choice: bool = True) -> None:
    if model_choice:
        p.add_argument("--model", choices=MODELS, default="EDM")
    p.add_argument("--omega0", type=float, default=1.0)
    p.add_argument("--omega-c", type=float, default=1.0)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--g", type=float, default=None)
    grp.add_argument("--alpha", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--lambda", dest="lambda_bias", type=float, default=1e-3,
                   help="symmetry-breaking bias field")
    p.add_argument("--n-max", type=int, default=None,
                   help="photon cutoff (default: adaptive policy)")
    p.add_argument("--xi-bar", type=float, default=1.0)


def _params_from_args(args) -> qm.ModelParams:
    if args.alpha is not None:
        g = an.g_from_alpha(args.alpha, args.omega_c)
    else:
        g = args.g if args.g is not None else 0.5
    return qm.ModelParams(omega0=args.omega0, g=g, epsilon=args.epsilon,
                          n_dipoles=args.N, omega_c=args.omega_c,
                          lambda_bias=args.lambda_bias, n_max=args.n_max,
                          xi_bar=args.xi_bar)


def _params_echo(p: qm.ModelParams) -> dict:
    return {"omega0": p.omega0, "omega_c": p.omega_c, "g": p.g,
            "alpha": p.alpha, "epsilon": p.epsilon, "N": p.n_dipoles,
            "lambda": p.lambda_bias, "n_max": p.n_max, "xi_bar": p.xi_bar}


def _needs_geometry(model: str) -> bool:
    return model in ("CQEDFull", "CoulombTLS", "Polaron")


def _spin_only_row(state: gst.GroundState, params: qm.ModelParams) -> dict:
    v = state.vector
    sx, sy, sz, _ = qm.collective_spin_ops(params.n_dipoles)
    mean_sx = float(np.real(v @ (sx @ v)))
    var_sx = float(np.real(v @ (sx @ sx @ v))) - mean_sx ** 2
    r = np.array([np.real(np.vdot(v, o @ v)) for o in (sx, sy, sz)]) * 2.0 / params.n_dipoles
    rn = min(np.linalg.norm(r), 1.0)
    probs = np.array([(1 + rn) / 2, (1 - rn) / 2])
    probs = probs[probs > 1e-15]
    s1 = float(-(probs * np.log2(probs)).sum())
    nan = float("nan")
    return dict(energy=state.energy, photon_number=nan, mean_a=nan,
                mean_Sx=mean_sx, delta_Sx2=var_sx, u2=nan, phi2=nan,
                S1=s1, Sd=0.0, n_max_used=0, converged=True)


def _point_row(model: str, params: qm.ModelParams,
               coupling: Optional[geo.CouplingMatrix], nu: Optional[float]) -> list:
    if model == "EDM":
        state = gst.converged_ground(qm.build_edm, params)
        obs = gst.measure(state)
        vals = _obs_to_dict(state, obs)
    elif model == "CQEDFull":
        state = gst.converged_ground(lambda p: qm.build_cqed_full(p, coupling, nu), params)
        vals = _obs_to_dict(state, gst.measure(state))
    elif model == "CoulombTLS":
        state = gst.converged_ground(lambda p: qm.build_coulomb_tls(p, coupling, nu), params)
        vals = _obs_to_dict(state, gst.measure(state))
    elif model == "Polaron":
        state = gst.converged_ground(lambda p: qm.build_polaron(p, coupling, nu), params)
        vals = _obs_to_dict(state, gst.measure(state))
    elif model == "LMG":
        vals = _spin_only_row(gst.solve_ground(qm.build_lmg(params)), params)
    elif model == "EffectiveSpin":
        vals = _spin_only_row(gst.solve_ground(qm.build_effective_spin(params)), params)
    elif model == "HP":
        res = an.hp_bogoliubov(params.omega0, params.omega_c, params.epsilon,
                               params.g * math.sqrt(params.n_dipoles))
        nan = float("nan")
        vals = dict(energy=nan, photon_number=res.gs_photon_number, mean_a=nan,
                    mean_Sx=nan, delta_Sx2=nan, u2=nan, phi2=nan, S1=nan,
                    Sd=nan, n_max_used=0, converged=res.stable)
    else:  # pragma: no cover
        raise ValueError(f"unknown model {model}")
    return [params.g, params.alpha, params.epsilon, params.n_dipoles,
            vals["energy"], vals["photon_number"], vals["mean_a"],
            vals["mean_Sx"], vals["delta_Sx2"], vals["u2"], vals["phi2"],
            vals["S1"], vals["Sd"], vals["n_max_used"], vals["converged"],
            params.omega0, params.lambda_bias]


def _obs_to_dict(state: gst.GroundState, obs: gst.Observables) -> dict:
    return dict(energy=obs.energy, photon_number=obs.photon_number,
                mean_a=obs.mean_a, mean_Sx=obs.mean_sx, delta_Sx2=obs.var_sx,
                u2=obs.u2, phi2=obs.phi2, S1=obs.entropy_spin1,
                Sd=obs.entropy_dicke, n_max_used=state.params.n_max,
                converged=state.cutoff_converged)


def _solve_task(task) -> list:
    model, pdict, coupling, nu = task
    return _point_row(model, qm.ModelParams(**pdict), coupling, nu)


def _run_points(model: str, param_list, coupling, nu, workers: int):
    tasks = [(model, _to_kwargs(p), coupling, nu) for p in param_list]
    if workers <= 1 or len(tasks) <= 1:
        return [_solve_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_task, tasks))


def _to_kwargs(p: qm.ModelParams) -> dict:
    return dict(omega0=p.omega0, g=p.g, epsilon=p.epsilon, n_dipoles=p.n_dipoles,
                omega_c=p.omega_c, lambda_bias=p.lambda_bias, n_max=p.n_max,
                xi_bar=p.xi_bar)


def _coupling_for(args, model: str):
    if not _needs_geometry(model):
        return None, None
    ens = _ensemble_from_args(args)
    coupling = geo.coupling_matrix(ens)
    return coupling, geo.filling_factor(ens, ens.volume)


def cmd_ground(args) -> int:
    out = _outdir(args)
    params = _params_from_args(args)
    coupling, nu = _coupling_for(args, args.model)
    t0 = time.monotonic()
    row = _point_row(args.model, params, coupling, nu)
    _write_csv(os.path.join(out, "ground.csv"), GROUND_COLUMNS, [row])
    _write_manifest(os.path.join(out, "ground_manifest.json"), {
        "command": "ground", "version": __version__, "model": args.model,
        "params": _params_echo(params),
        "geometry": _lattice_echo(args) if _needs_geometry(args.model) else None,
        "columns": GROUND_COLUMNS, "rows": 1,
        "wall_time_s": time.monotonic() - t0,
        "determinism": DETERMINISM_NOTE,
    })
    return 0


def _sweep_grid(vmin: float, vmax: float, points: int, log: bool) -> np.ndarray:
    if points < 2:
        raise ValueError("a sweep axis needs at least 2 points")
    return (np.geomspace if log else np.linspace)(vmin, vmax, points)


def _vary(params: qm.ModelParams, var: str, value: float) -> qm.ModelParams:
    if var == "g":
        return params.with_(g=float(value))
    if var == "alpha":
        return params.with_(g=an.g_from_alpha(float(value), params.omega_c))
    if var == "epsilon":
        return params.with_(epsilon=float(value))
    if var == "omega0":
        return params.with_(omega0=float(value))
    if var == "lambda":
        return params.with_(lambda_bias=float(value))
    raise ValueError(f"unknown sweep variable {var!r}")


def cmd_sweep(args) -> int:
    out = _outdir(args)
    base = _params_from_args(args)
    coupling, nu = _coupling_for(args, args.model)
    grid = _sweep_grid(args.min, args.max, args.points, args.log)
    order = np.argsort(grid)
    grid = grid[order]
    param_list = [_vary(base, args.var, v) for v in grid]
    t0 = time.monotonic()
    rows = _run_points(args.model, param_list, coupling, nu, args.workers)
    _write_csv(os.path.join(out, "sweep.csv"), GROUND_COLUMNS, rows)
    _write_manifest(os.path.join(out, "sweep_manifest.json"), {
        "command": "sweep", "version": __version__, "model": args.model,
        "params": _params_echo(base),
        "geometry": _lattice_echo(args) if _needs_geometry(args.model) else None,
        "sweep": {"variable": args.var, "min": args.min, "max": args.max,
                  "points": args.points, "scale": "log" if args.log else "linear"},
        "columns": GROUND_COLUMNS, "rows": len(rows),
        "workers": args.workers, "wall_time_s": time.monotonic() - t0,
        "determinism": DETERMINISM_NOTE,
    })
    return 0


def _phase_row_task(task):
    pdicts, alphas, epsilon = task
    rows = [_point_row("EDM", qm.ModelParams(**pd), None, None) for pd in pdicts]
    obs = [gst.Observables(r[4], r[6], r[5], r[7], float("nan"), r[8], float("nan"),
                           r[9], r[10], r[11], r[12]) for r in rows]
    gvals = [r[0] for r in rows]
    labels = gst.classify(gvals, obs, epsilon).labels
    return [row + [label.value] for row, label in zip(rows, labels)]


def cmd_phase_diagram(args) -> int:
    out = _outdir(args)
    base = _params_from_args(args)
    alphas = _sweep_grid(args.alpha_min, args.alpha_max, args.alpha_points, True)
    epss = _sweep_grid(args.eps_min, args.eps_max, args.eps_points, False)
    tasks = []
    for eps in epss:
        pdicts = [_to_kwargs(_vary(base.with_(epsilon=float(eps)), "alpha", a))
                  for a in alphas]
        tasks.append((pdicts, alphas, float(eps)))
    t0 = time.monotonic()
    if args.workers <= 1:
        chunks = [_phase_row_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            chunks = list(pool.map(_phase_row_task, tasks))
    header = GROUND_COLUMNS + ["phase"]
    rows = [row for chunk in chunks for row in chunk]
    _write_csv(os.path.join(out, "phase_diagram.csv"), header, rows)
    _write_manifest(os.path.join(out, "phase_diagram_manifest.json"), {
        "command": "phase-diagram", "version": __version__, "model": "EDM",
        "params": _params_echo(base),
        "alpha_grid": {"min": args.alpha_min, "max": args.alpha_max,
                       "points": args.alpha_points, "scale": "log"},
        "epsilon_grid": {"min": args.eps_min, "max": args.eps_max,
                         "points": args.eps_points, "scale": "linear"},
        "columns": header, "rows": len(rows), "workers": args.workers,
        "wall_time_s": time.monotonic() - t0,
        "determinism": DETERMINISM_NOTE,
    })
    return 0


def cmd_adiabatic(args) -> int:
    out = _outdir(args)
    params = _params_from_args(args)
    x = np.linspace(args.x_min, args.x_max, args.x_points)
    v = gst.adiabatic_potential(params, x)
    _write_csv(os.path.join(out, "adiabatic.csv"), ["x", "V"], list(zip(x, v)))
    _write_manifest(os.path.join(out, "adiabatic_manifest.json"), {
        "command": "adiabatic", "version": __version__,
        "params": _params_echo(params),
        "x_grid": {"min": args.x_min, "max": args.x_max, "points": args.x_points},
        "columns": ["x", "V"], "rows": len(x),
        "determinism": DETERMINISM_NOTE,
    })
    return 0


def cmd_qfunction(args) -> int:
    out = _outdir(args)
    params = _params_from_args(args)
    state = gst.converged_ground(qm.build_edm, params)
    theta, phi, q = gst.q_function(state, args.n_theta, args.n_phi)
    rows = [(t, p, q[i, j]) for i, t in enumerate(theta) for j, p in enumerate(phi)]
    _write_csv(os.path.join(out, "qfunction.csv"), ["theta", "phi", "Q"], rows)
    _write_manifest(os.path.join(out, "qfunction_manifest.json"), {
        "command": "qfunction", "version": __version__,
        "params": _params_echo(params),
        "grid": {"n_theta": args.n_theta, "n_phi": args.n_phi},
        "columns": ["theta", "phi", "Q"], "rows": len(rows),
        "determinism": DETERMINISM_NOTE,
    })
    return 0


# ---------------------------------------------------------------- analytics

def cmd_analytics(args) -> int:
    f = args.formula
    if f == "critical-coupling":
        val = an.critical_coupling(args.omega0, args.omega_c, args.epsilon, args.N)
        payload = {"g_c": val}
    elif f == "mean-fields":
        g_c = an.critical_coupling(args.omega0, args.omega_c, args.epsilon, args.N)
        a_mf, sx_mf = an.mean_fields(args.g, g_c, args.N, args.omega_c)
        payload = {"g_c": g_c, "mean_a": a_mf, "mean_Sx": sx_mf}
    elif f == "hp":
        res = an.hp_bogoliubov(args.omega0, args.omega_c, args.epsilon, args.G)
        payload = {"omega_plus": res.omega_plus, "omega_minus": res.omega_minus,
                   "photon_number": res.gs_photon_number, "stable": res.stable}
    elif f == "photon-limit":
        payload = {"photon_limit": an.hp_photon_limit(args.epsilon)}
    elif f == "photon-weak":
        payload = {"photon_number": an.photon_number_weak(
            args.omega0, args.omega_c, args.epsilon, args.N, args.g)}
    elif f == "voltage-kink":
        payload = {"u_ratio": an.voltage_kink(args.epsilon, args.omega0, args.omega_c)}
    elif f == "critical-epsilon":
        payload = {"epsilon_c": an.critical_epsilon(args.alpha, args.omega0,
                                                    args.omega_c, args.N),
                   "asymptote": an.critical_epsilon_asymptote(
                       args.alpha, args.omega0, args.omega_c)}
    elif f == "alpha":
        payload = {"alpha": an.alpha_from_g(args.g, args.omega_c)}
    elif f == "g":
        payload = {"g": an.g_from_alpha(args.alpha, args.omega_c)}
    elif f == "bright-branches":
        b = cm.bright_branches(cm.ClassicalParams(args.omega0, args.omega_c,
                                                  args.omega_p),
                               args.eta, args.nu)
        payload = {"Omega_plus_sq": b.omega_plus_sq,
                   "Omega_minus_sq": b.omega_minus_sq, "stable": b.stable}
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown formula {f!r}")
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


# ---------------------------------------------------------------- run config

NUMBER = {"type": "number"}
RUN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "params"],
    "properties": {
        "model": {"enum": MODELS},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["omega0"],
            "properties": {
                "omega0": NUMBER, "omega_c": NUMBER,
                "g": {"type": "number", "minimum": 0},
                "alpha": {"type": "number", "minimum": 0},
                "epsilon": NUMBER,
                "N": {"type": "integer", "minimum": 1},
                "lambda": NUMBER,
                "n_max": {"type": "integer", "minimum": 1},
                "xi_bar": {"type": "number", "minimum": 1},
            },
        },
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lattice"],
            "properties": {
                "lattice": {"enum": LATTICES},
                "nx": {"type": "integer", "minimum": 1},
                "layers": {"type": "integer", "minimum": 1},
                "d": {"type": "number", "exclusiveMinimum": 0},
                "theta": NUMBER, "dx": {"type": "number", "exclusiveMinimum": 0},
                "boundary": {"enum": [b.value for b in geo.Boundary]},
                "image_cutoff": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "array",
            "minItems": 1,
            "maxItems": 2,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["variable", "min", "max", "points"],
                "properties": {
                    "variable": {"enum": SWEEP_VARS},
                    "min": NUMBER, "max": NUMBER,
                    "points": {"type": "integer", "minimum": 2},
                    "scale": {"enum": ["linear", "log"]},
                },
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"},
                           "prefix": {"type": "string"}},
        },
        "workers": {"type": "integer", "minimum": 1},
    },
}


def _apply_override(config: dict, spec: str) -> None:
    if "=" not in spec:
        raise ValueError(f"override {spec!r} is not of the form key=value")
    key, raw = spec.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _params_from_config(cfg: dict) -> qm.ModelParams:
    p = cfg.get("params", {})
    omega_c = p.get("omega_c", 1.0)
    if "alpha" in p and "g" not in p:
        g = an.g_from_alpha(p["alpha"], omega_c)
    else:
        g = p.get("g", 0.5)
    return qm.ModelParams(omega0=p["omega0"], g=g, epsilon=p.get("epsilon", 0.0),
                          n_dipoles=p.get("N", 4), omega_c=omega_c,
                          lambda_bias=p.get("lambda", 1e-3),
                          n_max=p.get("n_max"), xi_bar=p.get("xi_bar", 1.0))


def _coupling_from_config(cfg: dict, model: str):
    if not _needs_geometry(model):
        return None, None
    if "geometry" not in cfg:
        raise jsonschema.ValidationError(
            f"model {model} requires a geometry block")
    gcfg = cfg["geometry"]
    ns = argparse.Namespace(
        lattice=gcfg["lattice"], nx=gcfg.get("nx", 10),
        layers=gcfg.get("layers", 1), d=gcfg.get("d", 10.0),
        theta=gcfg.get("theta", 0.0), dx=gcfg.get("dx", 0.7),
        boundary=gcfg.get("boundary", geo.Boundary.INFINITE_PLATES.value),
        image_cutoff=gcfg.get("image_cutoff", 50))
    ens = _ensemble_from_args(ns)
    return geo.coupling_matrix(ens), geo.filling_factor(ens, ens.volume)


def cmd_run(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    for spec in args.override or []:
        _apply_override(config, spec)
    jsonschema.validate(config, RUN_SCHEMA)
    outputs = config.get("outputs", {})
    out = args.out if args.out != "." or "dir" not in outputs else outputs["dir"]
    os.makedirs(out, exist_ok=True)
    prefix = outputs.get("prefix", "run")
    workers = args.workers or config.get("workers", 1)
    model = config["model"]
    base = _params_from_config(config)
    coupling, nu = _coupling_from_config(config, model)
    axes = config.get("sweep", [])
    t0 = time.monotonic()
    if not axes:
        rows = [_point_row(model, base, coupling, nu)]
        header = GROUND_COLUMNS
    elif len(axes) == 1:
        ax = axes[0]
        grid = _sweep_grid(ax["min"], ax["max"], ax["points"],
                           ax.get("scale", "linear") == "log")
        param_list = [_vary(base, ax["variable"], v) for v in np.sort(grid)]
        rows = _run_points(model, param_list, coupling, nu, workers)
        header = GROUND_COLUMNS
    else:
        ax0, ax1 = axes
        grid0 = np.sort(_sweep_grid(ax0["min"], ax0["max"], ax0["points"],
                                    ax0.get("scale", "linear") == "log"))
        grid1 = np.sort(_sweep_grid(ax1["min"], ax1["max"], ax1["points"],
                                    ax1.get("scale", "linear") == "log"))
        param_list = [_vary(_vary(base, ax0["variable"], v0), ax1["variable"], v1)
                      for v0 in grid0 for v1 in grid1]
        rows = _run_points(model, param_list, coupling, nu, workers)
        header = GROUND_COLUMNS
    csv_path = os.path.join(out, prefix + ".csv")
    _write_csv(csv_path, header, rows)
    _write_manifest(os.path.join(out, prefix + "_manifest.json"), {
        "command": "run", "version": __version__, "config": config,
        "model": model, "params": _params_echo(base),
        "columns": header, "rows": len(rows), "workers": workers,
        "wall_time_s": time.monotonic() - t0,
        "determinism": DETERMINISM_NOTE,
    })
    return 0


# ---------------------------------------------------------------- wiring

def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CAVITY_VACUA_WORKERS", "1")))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavity-vacua",
        description="dipole-ensemble cavity QED vacua: geometry, polaritons, "
                    "exact-diagonalization ground states and phase diagrams")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--workers", type=int, default=_default_workers())

    p = sub.add_parser("geometry", help="coupling matrix and eta/nu summary "
                       "(coupling.csv: row,col,value; geometry.json)")
    _add_lattice_args(p)
    common(p)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("polariton", help="classical polariton branches "
                       "(columns: omega_p,Omega_plus,Omega_minus,dark_min,"
                       "dark_max,unstable_count)")
    _add_lattice_args(p)
    p.add_argument("--omega0", type=float, default=1.0)
    p.add_argument("--omega-c", type=float, default=1.0)
    p.add_argument("--omega-p-min", type=float, default=0.01)
    p.add_argument("--omega-p-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=60)
    p.add_argument("--log", action="store_true")
    common(p)
    p.set_defaults(func=cmd_polariton)

    ground_cols = ",".join(GROUND_COLUMNS)
    p = sub.add_parser("ground", help=f"single ground state (columns: {ground_cols})")
    _add_model_args(p)
    _add_lattice_args(p)
    common(p)
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("sweep", help=f"1D sweep (columns: {ground_cols})")
    _add_model_args(p)
    _add_lattice_args(p)
    p.add_argument("--var", choices=SWEEP_VARS, default="g")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--log", action="store_true")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phase-diagram", help="alpha x epsilon grid with phase "
                       f"labels (columns: {ground_cols},phase)")
    _add_model_args(p, model_choice=False)
    p.add_argument("--alpha-min", type=float, default=1e-2)
    p.add_argument("--alpha-max", type=float, default=10.0)
    p.add_argument("--alpha-points", type=int, default=40)
    p.add_argument("--eps-min", type=float, default=-0.5)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-points", type=int, default=40)
    common(p)
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("adiabatic", help="field-quadrature potential V(X) "
                       "(columns: x,V)")
    _add_model_args(p, model_choice=False)
    p.add_argument("--x-min", type=float, default=-8.0)
    p.add_argument("--x-max", type=float, default=8.0)
    p.add_argument("--x-points", type=int, default=161)
    common(p)
    p.set_defaults(func=cmd_adiabatic)

    p = sub.add_parser("qfunction", help="spin Husimi function of the ground "
                       "state (columns: theta,phi,Q)")
    _add_model_args(p, model_choice=False)
    p.add_argument("--n-theta", type=int, default=91)
    p.add_argument("--n-phi", type=int, default=181)
    common(p)
    p.set_defaults(func=cmd_qfunction)

    p = sub.add_parser("analytics", help="closed-form values as JSON on stdout")
    p.add_argument("formula", choices=[
        "critical-coupling", "mean-fields", "hp", "photon-limit",
        "photon-weak", "voltage-kink", "critical-epsilon", "alpha", "g",
        "bright-branches"])
    p.add_argument("--omega0", type=float, default=1.0)
    p.add_argument("--omega-c", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--G", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--omega-p", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.1)
    p.set_defaults(func=cmd_analytics)

    p = sub.add_parser("run", help="execute a schema-validated JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help="dot-path override into the config")
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    known = {"geometry", "polariton", "ground", "sweep", "phase-diagram",
             "adiabatic", "qfunction", "analytics", "run"}
    if not argv or (not argv[0].startswith("-") and argv[0] not in known):
        parser.print_usage(sys.stderr)
        return 1
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except jsonschema.ValidationError as err:
        print(f"config error: {err.message}", file=sys.stderr)
        return 2
    except qm.DimensionError as err:
        print(f"dimension guard: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"output error: {err}", file=sys.stderr)
        return 4
    except (ValueError, geo.GeometryError) as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
