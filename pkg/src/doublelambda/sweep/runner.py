"""Experiment orchestration and deterministic CSV/JSON emission."""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..atom_bloch import AtomParams
from ..coefficients import (
    MasterCoefficients,
    build_coefficients,
    random_master_coefficients,
    rate_constants,
)
from ..errors import ConfigError, DoubleLambdaError, StepFailure, TruncationOverflow, UndefinedG2
from ..fock_backend import BACKEND
from ..fock_oracle import evolve_fock_escalating, vacuum
from ..moments import MomentState, duan_parameter, evolve_moments, g2_of_state
from ..regimes import reit_coefficients, reit_scan_column
from ..steady_state import (
    classify_stability,
    entanglement_verdict,
    rotate_phase,
    steady_closed_form,
    steady_linear_solve,
)
from .config import ExperimentConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FINDING = 3
EXIT_NUMERICAL = 4


@dataclass
class RunResult:
    mode: str
    columns: list
    rows: list
    summary: dict
    exit_code: int = EXIT_OK
    extra_files: dict = field(default_factory=dict)


# ------------------------------------------------------------ formatting


def fmt(value) -> str:
    """Shortest round-trip text for floats; lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path: Path, columns, rows, comment: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {comment}; columns: {', '.join(columns)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(c)) for c in columns])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# ------------------------------------------------------------ coefficients


def resolve_coefficients(cfg: ExperimentConfig, seed: int | None = None) -> MasterCoefficients:
    spec = cfg.coefficients or {"kind": "pipeline"}
    atom = cfg.atom
    kind = spec["kind"]
    if kind == "pipeline":
        return build_coefficients(atom).master
    if kind == "reit":
        return reit_coefficients(spec["xi"], atom.kappa_s, atom.kappa_a, atom.phi)
    if kind == "pure-loss":
        return MasterCoefficients.pure_loss(atom.kappa_s, atom.kappa_a, atom.phi)
    if kind == "random-weak":
        rng = np.random.default_rng(0 if seed is None else seed)
        return random_master_coefficients(rng, spec.get("scale", 0.1), kappa=atom.kappa_s,
                                          phi=atom.phi)
    vals = {k: complex(*v) for k, v in spec.get("values", {}).items()}
    base = MasterCoefficients.pure_loss(atom.kappa_s, atom.kappa_a, atom.phi)
    try:
        return base.replace(**vals)
    except TypeError as exc:
        raise ConfigError(f"coefficients.values: {exc}") from None


def _err(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}".replace("\n", " ")


# ------------------------------------------------------------ modes


def run_coeffs(cfg: ExperimentConfig, seed=None) -> RunResult:
    cs = build_coefficients(cfg.atom)
    rows = []

    def add(group, name, v):
        v = complex(v)
        rows.append({"group": group, "name": name, "re": v.real, "im": v.imag})

    for k in ("p_aa", "p_bb", "p_cc", "p_dd", "p_ab", "p_ba", "p_cd", "p_dc"):
        add("atom", k, getattr(cs.atom, k))
    for k, v in asdict(cs.denominators).items():
        add("denominators", k, v)
    for k, v in cs.elements.as_dict().items():
        add("elements", k, v)
    for k in ("c_loss1", "c_gain1", "c_loss2", "c_gain2", "c1", "c2", "c3", "c4"):
        add("master", k, getattr(cs.master, k))
    for k, v in asdict(cs.rates).items():
        add("rates", k, v)
    summary = {"relation_residual": cs.master.relation_residual,
               "bloch_residual": cs.atom.residual}
    return RunResult("coeffs", ["group", "name", "re", "im"], rows, summary)


def _time_grid(times: dict) -> np.ndarray:
    num = times.get("num", 201)
    t_end = times["t_end"]
    if times.get("spacing") == "log":
        return np.concatenate([[0.0], np.geomspace(t_end * 1e-6, t_end, num - 1)])
    return np.linspace(0.0, t_end, num)


def run_evolve(cfg: ExperimentConfig, seed=None) -> RunResult:
    mc = resolve_coefficients(cfg, seed)
    rc = rate_constants(mc)
    t_eval = _time_grid(cfg.times)
    cols = ["t", "n1", "n2", "re_w", "im_w", "g2", "duan_d"]
    try:
        traj = evolve_moments(MomentState.vacuum(), mc, rc, cfg.times["t_end"],
                              tol=cfg.times.get("tol", 1e-9), t_eval=t_eval)
    except StepFailure as exc:
        return RunResult("evolve", cols, [], {"error": _err(exc)}, EXIT_NUMERICAL)
    rows = []
    for s in traj:
        try:
            g2 = g2_of_state(s)
        except UndefinedG2:
            g2 = None
        rows.append({"t": s.t, "n1": s.n1, "n2": s.n2, "re_w": s.w.real, "im_w": s.w.imag,
                     "g2": g2, "duan_d": duan_parameter(s).duan_d})
    d = [r["duan_d"] for r in rows]
    i = int(np.argmin(d))
    stable, eig = classify_stability(mc, rc)
    summary = {"min_duan_d": d[i], "t_at_min": rows[i]["t"], "stable": stable,
               "max_drift_real": max(e.real for e in eig),
               "final": {k: rows[-1][k] for k in cols}}
    return RunResult("evolve", cols, rows, summary)


def run_steady(cfg: ExperimentConfig, seed=None) -> RunResult:
    mc = resolve_coefficients(cfg, seed)
    rc = rate_constants(mc)
    phis = cfg.grid.get("phi", [mc.phi])
    cols = ["phi", "n1", "n2", "re_w", "im_w", "duan_d", "stable", "entangled",
            "boundary", "closed_vs_linear", "error"]
    try:
        sm = steady_closed_form(mc, rc)
        lin = steady_linear_solve(mc, rc)
    except DoubleLambdaError as exc:
        return RunResult("steady", cols, [{"phi": mc.phi, "error": _err(exc)}],
                         {"error": _err(exc)}, EXIT_NUMERICAL)
    scale = max(abs(sm.n1), abs(sm.n2), abs(sm.w), 1e-300)
    dev = max(abs(sm.n1 - lin.n1), abs(sm.n2 - lin.n2), abs(sm.e_amplitude - lin.e_amplitude)) / scale
    rows = []
    for p in phis:
        s = rotate_phase(sm, p)
        d = 2.0 * (1.0 + s.n1 + s.n2 + 2.0 * s.w.real)
        row = {"phi": p, "n1": s.n1, "n2": s.n2, "re_w": s.w.real, "im_w": s.w.imag,
               "duan_d": d, "stable": s.stable, "boundary": s.boundary,
               "closed_vs_linear": dev, "error": ""}
        if s.stable:
            row["entangled"] = entanglement_verdict(s).entangled
        else:
            row["entangled"] = False
            row["error"] = "DisregardedUnstable: steady state is dynamically unstable"
        rows.append(row)
    summary = {"stable": sm.stable, "closed_vs_linear": dev,
               "eigenvalues": list(sm.drift_eigenvalues), "m_denominator": sm.m_denominator,
               "min_duan_d": min(r["duan_d"] for r in rows)}
    return RunResult("steady", cols, rows, summary)


def _pool_map(fn, args_list, workers: int):
    if workers <= 1 or len(args_list) <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(fn, *a) for a in args_list]
        return [f.result() for f in futs]


def _check_expect(cfg: ExperimentConfig, rows) -> tuple[bool, dict]:
    exp = cfg.expect
    if not exp or "entangled_region" not in exp:
        return True, {}
    lo, hi = exp.get("phi_range", [-math.inf, math.inf])
    if cfg.raw.get("angle_unit") == "deg":
        lo, hi = math.radians(lo), math.radians(hi)
    eps = 1e-12
    sel = [r for r in rows if lo - eps <= r["phi"] <= hi + eps]
    found = any(r["entangled"] for r in sel)
    ok = found == exp["entangled_region"]
    return ok, {"expected_entangled_region": exp["entangled_region"],
                "found_entangled_region": found, "points_checked": len(sel)}


def run_scan_reit(cfg: ExperimentConfig, seed=None, workers: int = 1) -> RunResult:
    phis = cfg.grid["phi"]
    safety = cfg.grid.get("kappa_safety", 1.01)
    args = [(cfg.atom, oc, phis, safety) for oc in cfg.grid["omega_c"]]
    cols_out = _pool_map(reit_scan_column, args, workers)
    cols = ["phi_deg", "phi", "omega_c", "duan_d", "n1", "n2", "stable", "entangled",
            "kappa", "error"]
    rows = []
    for col in cols_out:
        for r in col:
            rows.append({"phi_deg": math.degrees(r.phi), "phi": r.phi, "omega_c": r.omega_c,
                         "duan_d": r.duan_d, "n1": r.n1, "n2": r.n2, "stable": r.stable,
                         "entangled": r.entangled, "kappa": r.kappa, "error": r.error})
    good = [r for r in rows if not r["error"] and r["stable"]]
    summary = {"points": len(rows), "stable_points": len(good),
               "error_points": sum(1 for r in rows if r["error"])}
    code = EXIT_OK
    if good:
        best = min(good, key=lambda r: r["duan_d"])
        ent = [r for r in good if r["entangled"]]
        summary.update({
            "min_duan_d": best["duan_d"], "phi_deg_at_min": best["phi_deg"],
            "omega_c_at_min": best["omega_c"], "entangled_points": len(ent),
            "max_n_entangled": max((max(r["n1"], r["n2"]) for r in ent), default=None),
        })
    elif rows:
        code = EXIT_NUMERICAL
    ok, info = _check_expect(cfg, rows)
    summary.update(info)
    if not ok:
        code = EXIT_FINDING
    return RunResult("scan-reit", cols, rows, summary, code)


def drr_row_block(omega: float, kappas, phis, atom: AtomParams) -> list[dict]:
    out = []
    for kap in kappas:
        params = atom.replace(omega_p=float(omega), omega_c=float(omega), delta_p=0.0,
                              delta_c=0.0, kappa_s=float(kap), kappa_a=float(kap))
        try:
            mc = build_coefficients(params).master
            sm = steady_closed_form(mc, rate_constants(mc))
            err = ""
        except DoubleLambdaError as exc:
            sm, err = None, _err(exc)
        for p in phis:
            row = {"omega": float(omega), "kappa": float(kap), "phi": p,
                   "phi_deg": math.degrees(p), "error": err}
            if sm is not None:
                s = rotate_phase(sm, p)
                d = 2.0 * (1.0 + s.n1 + s.n2 + 2.0 * s.w.real)
                row.update({"n1": s.n1, "n2": s.n2, "re_w": s.w.real, "im_w": s.w.imag,
                            "duan_d": d, "stable": s.stable,
                            "entangled": bool(s.stable and 0.0 < d < 2.0)})
            out.append(row)
    return out


def run_scan_drr(cfg: ExperimentConfig, seed=None, workers: int = 1) -> RunResult:
    phis, kappas = cfg.grid["phi"], cfg.grid["kappa"]
    args = [(om, kappas, phis, cfg.atom) for om in cfg.grid["omega"]]
    rows = [r for block in _pool_map(drr_row_block, args, workers) for r in block]
    cols = ["omega", "kappa", "phi_deg", "phi", "n1", "n2", "re_w", "im_w", "duan_d",
            "stable", "entangled", "error"]
    stable = [r for r in rows if r.get("stable")]
    violations = [r for r in stable if r["duan_d"] < 2.0 - 1e-9]
    summary = {"points": len(rows), "stable_points": len(stable),
               "violations": len(violations)}
    if stable:
        best = min(stable, key=lambda r: r["duan_d"])
        summary.update({"min_duan_d": best["duan_d"], "omega_at_min": best["omega"],
                        "kappa_at_min": best["kappa"], "phi_deg_at_min": best["phi_deg"]})
    code = EXIT_FINDING if violations else (EXIT_OK if stable else EXIT_NUMERICAL)
    return RunResult("scan-drr", cols, rows, summary, code)


def oracle_horizon(mc: MasterCoefficients, t_end: float | None = None) -> float:
    """Default ``10/kappa``; capped at ``5/growth rate`` for unstable sets."""
    t = t_end if t_end is not None else 10.0 / min(mc.kappa_s, mc.kappa_a)
    stable, eig = classify_stability(mc, rate_constants(mc))
    if not stable:
        t = min(t, 5.0 / max(e.real for e in eig))
    return t


def compare_oracle(cfg: ExperimentConfig, seed=None) -> RunResult:
    """Fock-space oracle versus the moment equations over a common time grid."""
    oc = cfg.oracle or {}
    mc = resolve_coefficients(cfg, seed)
    mc_moment = mc.replace(c2=-mc.c2) if oc.get("corrupt") == "c2-sign" else mc
    t_end = oracle_horizon(mc, oc.get("t_end"))
    t_eval = np.linspace(0.0, t_end, oc.get("num", 21))
    tol = oc.get("tolerance", 1e-4)
    cols = ["t", "n1_fock", "n1_moment", "n2_fock", "n2_moment",
            "re_w_fock", "re_w_moment", "im_w_fock", "im_w_moment"]
    try:
        run = evolve_fock_escalating(vacuum(oc.get("n_max", 12)), mc, t_end, t_eval=t_eval,
                                     leak_budget=oc.get("leak_budget", 1e-6))
        mom = evolve_moments(MomentState.vacuum(), mc_moment, rate_constants(mc_moment),
                             t_end, tol=1e-11, t_eval=t_eval)
    except (TruncationOverflow, StepFailure) as exc:
        return RunResult("oracle-compare", cols, [], {"error": _err(exc)}, EXIT_NUMERICAL)

    rows, dn1, dn2, dw, excess = [], 0.0, 0.0, 0.0, 0.0
    for f, m in zip(run.moments, mom):
        rows.append({"t": f.t, "n1_fock": f.n1, "n1_moment": m.n1, "n2_fock": f.n2,
                     "n2_moment": m.n2, "re_w_fock": f.w.real, "re_w_moment": m.w.real,
                     "im_w_fock": f.w.imag, "im_w_moment": m.w.imag})
        diffs = (abs(f.n1 - m.n1), abs(f.n2 - m.n2), abs(f.w - m.w))
        refs = (abs(m.n1), abs(m.n2), abs(m.w))
        dn1, dn2, dw = max(dn1, diffs[0]), max(dn2, diffs[1]), max(dw, diffs[2])
        for d, r in zip(diffs, refs):
            excess = max(excess, d / max(tol, 1e-3 * r))
    passed = excess <= 1.0
    summary = {"max_abs_dn1": dn1, "max_abs_dn2": dn2, "max_abs_dw": dw,
               "tolerance": tol, "passed": passed, "t_end": t_end, "n_max": run.n_max,
               "max_leak": run.max_leak, "max_trace_error": run.max_trace_error,
               "min_eigenvalue": run.min_eigenvalue, "corrupt": oc.get("corrupt"),
               "backend": BACKEND}
    extra = {}
    if cfg.output.get("dump_populations"):
        p = run.final.populations
        extra["populations.csv"] = (
            ["n1", "n2", "p"],
            [{"n1": i, "n2": j, "p": float(p[i, j])} for i in range(p.shape[0])
             for j in range(p.shape[1])],
        )
    return RunResult("oracle-compare", cols, rows, summary,
                     EXIT_OK if passed else EXIT_FINDING, extra)


_DISPATCH = {
    "coeffs": run_coeffs,
    "evolve": run_evolve,
    "steady": run_steady,
    "scan-reit": run_scan_reit,
    "scan-drr": run_scan_drr,
    "oracle-compare": compare_oracle,
}


def execute(cfg: ExperimentConfig, seed=None, workers: int = 1) -> RunResult:
    fn = _DISPATCH[cfg.mode]
    if cfg.mode in ("scan-reit", "scan-drr"):
        return fn(cfg, seed, workers)
    return fn(cfg, seed)


def run(cfg: ExperimentConfig, out_dir, workers: int = 1, seed: int | None = None) -> RunResult:
    """Execute ``cfg`` and write the CSV data file(s) plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = execute(cfg, seed, workers)
    name = cfg.output_name
    write_csv(out / name, result.columns, result.rows, f"doublelambda {cfg.mode}")
    files = [name]
    for fname, (cols, rows) in result.extra_files.items():
        write_csv(out / fname, cols, rows, f"doublelambda {cfg.mode} {fname[:-4]}")
        files.append(fname)
    manifest = {
        "mode": cfg.mode,
        "source": cfg.source,
        "config": cfg.raw,
        "resolved_atom": asdict(cfg.atom),
        "resolved_grid_sizes": {k: (len(v) if isinstance(v, list) else v)
                                for k, v in cfg.grid.items()},
        "seed": seed,
        "workers": workers,
        "outputs": files,
        "summary": result.summary,
        "exit_code": result.exit_code,
        "versions": {"doublelambda": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version(),
                     "fock_backend": BACKEND},
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return result
