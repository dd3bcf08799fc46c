"""Command-line front end: figure data as CSV plus a cross-check battery.

Every CSV has a one-line header and is accompanied by a ``.meta.json``
sidecar holding the configuration and numerical residuals.  Floats are
written in shortest round-trip form, so reruns with the same configuration
produce byte-identical files.

Exit status: 0 on success, 1 when a verification check fails (or the
integrator gives up), 2 on a configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adiabaticity import (
    _energies,
    _q_general,
    _q_husimi,
    ermakov_lewis_invariant,
    q_tt_rho_form,
    q_tt_simple,
)
from .closed_form import START_SLOPE_TOL, closed_form_state, rho_closed, rho_dot_closed
from .cpo import CpoTrajectory, OscillatorVariant, integrate
from .errors import IntegrationError, TTQPOError
from .oracle import oracle_probabilities
from .schedule import (
    FrequencySchedule,
    make_constant_schedule,
    make_cubic_schedule,
    spectrum_validity_intervals,
)
from .transition import generating_function, probability_table, transition_probability

__all__ = ["RunConfig", "main", "build_parser", "run_verify", "FIGURE_FINAL_TIMES"]

COMMANDS = ("trajectory", "qfactor", "probabilities", "verify", "figures")
FIGURE_FINAL_TIMES = (0.2, 0.5, 2.0)
FIGURE_FREQUENCIES = (2.0, 4.0)

TRAJECTORY_CSV = ("t", "mu", "mu_dot", "nu", "nu_dot", "wronskian", "e_mu", "e_nu")
QFACTOR_CSV = (
    "t",
    "q_tt",
    "q_star",
    "e_mu_over_Omega",
    "e_nu_over_Omega",
    "E_mu_over_omega",
    "E_nu_over_omega",
    "defined",
)
PROBABILITIES_CSV = ("t", "p00_tt", "p11_tt", "p00_ad", "p11_ad", "defined")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    schedule: dict
    variant: str = "tt"
    rel_tol: float = 1e-10
    n_output: int = 1001
    n_max: int = 80
    output_path: str | None = None
    inject_mismatch: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.n_output < 2:
            raise ValueError("--samples must be at least 2")
        if self.n_max < 0:
            raise ValueError("--n-max must be non-negative")
        OscillatorVariant(self.variant)

    def build_schedule(self) -> FrequencySchedule:
        return FrequencySchedule.from_dict(self.schedule)


@dataclass
class Check:
    name: str
    residual: float
    bound: float
    passed: bool = field(init=False)
    skipped: bool = False
    detail: str = ""

    def __post_init__(self):
        self.passed = self.skipped or bool(self.residual <= self.bound)


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return repr(float(value))


def _write_csv(path: Path, header, columns) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def _sidecar(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta.json")


def _metadata(cfg: RunConfig, command: str, residuals: dict) -> dict:
    return {
        "package": "ttqpo",
        "version": __version__,
        "command": command,
        "config": {
            "schedule": cfg.schedule,
            "variant": cfg.variant,
            "rel_tol": cfg.rel_tol,
            "samples": cfg.n_output,
            "n_max": cfg.n_max,
        },
        "residuals": residuals,
    }


# ---------------------------------------------------------------------------
# data products


def _trajectory(cfg: RunConfig, s: FrequencySchedule, variant) -> CpoTrajectory:
    return integrate(s, variant, rel_tol=cfg.rel_tol, n_output=cfg.n_output)


def _spectrum(s: FrequencySchedule, n: int) -> list:
    return [list(iv) for iv in spectrum_validity_intervals(s, max(n, 2001))]


def write_trajectory(cfg: RunConfig, s: FrequencySchedule, variant, path: Path) -> None:
    traj = _trajectory(cfg, s, variant)
    en = _energies(traj, s, traj.times, strict=False)
    _write_csv(
        path,
        TRAJECTORY_CSV,
        [traj.times, traj.mu, traj.mu_dot, traj.nu, traj.nu_dot, traj.wronskian_values, en.e_mu, en.e_nu],
    )
    residuals = {"wronskian_max_drift": traj.wronskian_max_drift, "spectrum_undefined_intervals": _spectrum(s, cfg.n_output)}
    meta = _metadata(cfg, "trajectory", residuals)
    meta["config"]["variant"] = OscillatorVariant(variant).value
    _write_json(_sidecar(path), meta)


def _q_curves(cfg: RunConfig, s: FrequencySchedule):
    tt = _trajectory(cfg, s, OscillatorVariant.TT)
    ad = _trajectory(cfg, s, OscillatorVariant.ADIABATIC)
    t = tt.times
    defined = s.big_omega_sq(t) > 0
    q_tt = np.asarray(_q_general(tt, s, t, strict=False), dtype=float)
    q_star = np.asarray(_q_husimi(ad, s, t), dtype=float)
    return tt, ad, t, defined, q_tt, q_star


def write_qfactor(cfg: RunConfig, s: FrequencySchedule, path: Path) -> None:
    tt, ad, t, defined, q_tt, q_star = _q_curves(cfg, s)
    e_tt = _energies(tt, s, t, strict=False)
    e_ad = _energies(ad, s, t, strict=False)
    _write_csv(path, QFACTOR_CSV, [t, q_tt, q_star, e_tt.j_mu, e_tt.j_nu, e_ad.j_mu, e_ad.j_nu, defined])
    residuals = {
        "wronskian_max_drift_tt": tt.wronskian_max_drift,
        "wronskian_max_drift_adiabatic": ad.wronskian_max_drift,
        "q_tt_min": float(np.nanmin(q_tt)),
        "q_tt_max": float(np.nanmax(q_tt)),
        "q_star_max": float(np.max(q_star)),
        "spectrum_undefined_intervals": _spectrum(s, cfg.n_output),
    }
    _write_json(_sidecar(path), _metadata(cfg, "qfactor", residuals))


def _p_diag(q: np.ndarray, level: int) -> np.ndarray:
    # Q can undershoot 1 by the integration error; Q < 1 is unphysical, so clip
    out = np.full(q.shape, np.nan)
    for i, value in enumerate(q):
        if math.isfinite(value):
            out[i] = transition_probability(level, level, max(float(value), 1.0))
    return out


def write_probabilities(cfg: RunConfig, s: FrequencySchedule, path: Path) -> None:
    tt, ad, t, defined, q_tt, q_star = _q_curves(cfg, s)
    q_tt = np.where(defined, q_tt, np.nan)
    columns = [t, _p_diag(q_tt, 0), _p_diag(q_tt, 1), _p_diag(q_star, 0), _p_diag(q_star, 1), defined]
    _write_csv(path, PROBABILITIES_CSV, columns)
    residuals = {
        "wronskian_max_drift_tt": tt.wronskian_max_drift,
        "wronskian_max_drift_adiabatic": ad.wronskian_max_drift,
        "q_tt_undershoot": float(max(0.0, 1.0 - np.nanmin(q_tt))),
        "q_star_undershoot": float(max(0.0, 1.0 - np.min(q_star))),
        "spectrum_undefined_intervals": _spectrum(s, cfg.n_output),
    }
    _write_json(_sidecar(path), _metadata(cfg, "probabilities", residuals))


# ---------------------------------------------------------------------------
# verification battery


def _scaled(base: float, rel_tol: float, factor: float = 1e3) -> float:
    return max(base, factor * rel_tol)


def _flat_ends(s: FrequencySchedule) -> bool:
    return abs(float(s.omega_dot(s.t0))) <= START_SLOPE_TOL and abs(float(s.omega_dot(s.tf))) <= START_SLOPE_TOL


def _oracle_times(tt: CpoTrajectory, s: FrequencySchedule, count: int = 3) -> list[float]:
    t = tt.times
    ok = (np.abs(tt.mu) > 0.05) & (s.big_omega_sq(t) > 0) & (t > s.t0) & (t < s.tf)
    candidates = t[ok]
    if candidates.size == 0:
        return []
    picks = np.unique(np.linspace(0, candidates.size - 1, count + 2)[1:-1].round().astype(int))
    return [float(candidates[i]) for i in picks]


def run_verify(cfg: RunConfig, s: FrequencySchedule) -> list[Check]:
    rel_tol = cfg.rel_tol
    checks: list[Check] = []
    try:
        tt = _trajectory(cfg, s, OscillatorVariant.TT)
        ad = _trajectory(cfg, s, OscillatorVariant.ADIABATIC)
    except IntegrationError as exc:
        return [Check("integration", math.inf, 0.0, detail=str(exc))]

    for name, traj in (("wronskian_tt", tt), ("wronskian_adiabatic", ad)):
        checks.append(Check(name, traj.wronskian_max_drift, 100.0 * rel_tol))

    t = tt.times
    defined = s.big_omega_sq(t) > 0
    flat = _flat_ends(s)
    if not flat:
        checks.append(Check("closed_forms", 0.0, 0.0, skipped=True, detail="omega_dot does not vanish at both ends"))
        return checks

    mu_c, _, nu_c, _ = closed_form_state(s, t)
    err = max(np.max(np.abs(mu_c - tt.mu)), np.max(np.abs(nu_c - tt.nu)))
    checks.append(Check("closed_form_vs_ode", float(err), _scaled(1e-7, rel_tol)))

    td = t[defined]
    source = ad if cfg.inject_mismatch else tt
    q_gen = np.asarray(_q_general(source, s, td, strict=True))
    q_simple = np.asarray(q_tt_simple(s, td))
    q_rho = np.asarray(q_tt_rho_form(s, td))
    q_err = max(np.max(np.abs(q_gen - q_simple)), np.max(np.abs(q_rho - q_simple)))
    detail = "general form fed an adiabatic trajectory (negative control)" if cfg.inject_mismatch else ""
    checks.append(Check("q_forms_agree", float(q_err), _scaled(1e-7, rel_tol), detail=detail))
    checks.append(Check("q_at_least_one", float(max(0.0, 1.0 - np.min(q_simple))), 1e-9))

    e_end = _energies(tt, s, s.tf, strict=True)
    w0, wf = s.omega_initial, s.omega_final
    e_err = max(abs(e_end.e_mu - wf / (2 * w0)), abs(e_end.e_nu - w0 * wf / 2))
    checks.append(Check("endpoint_energies", float(e_err), _scaled(1e-6, rel_tol)))

    rho, rho_dot = rho_closed(s), rho_dot_closed(s)
    el = [ermakov_lewis_invariant(tt, rho, b, t, rho_dot=rho_dot) for b in ("mu", "nu")]
    el_err = max(float(np.max(np.abs(np.asarray(v) - 0.5))) for v in el)
    checks.append(Check("ermakov_lewis", el_err, _scaled(1e-7, rel_tol)))

    times = _oracle_times(tt, s)
    if times:
        worst = 0.0
        for when in times:
            res = oracle_probabilities(tt, s, when, 4)
            table = probability_table(q_tt_simple(s, when), 4)
            worst = max(worst, float(np.max(np.abs(res.probs - table.probs))))
        checks.append(Check("oracle_vs_closed_form", worst, _scaled(1e-4, rel_tol, 1e2)))
    else:
        checks.append(Check("oracle_vs_closed_form", 0.0, 0.0, skipped=True, detail="no admissible time"))

    q_probe = float(q_tt_simple(s, times[0])) if times else 1.5
    table = probability_table(q_probe, cfg.n_max)
    probs = table.probs
    parity = np.add.outer(np.arange(cfg.n_max + 1), np.arange(cfg.n_max + 1)) % 2 == 1
    checks.append(Check("parity_exact_zero", float(np.max(np.abs(probs[parity]), initial=0.0)), 0.0))
    checks.append(Check("symmetry_exact", float(np.max(np.abs(probs - probs.T))), 0.0))
    identity = probability_table(1.0, min(cfg.n_max, 20)).probs
    checks.append(Check("identity_at_q_one", float(np.max(np.abs(identity - np.eye(len(identity))))), 1e-10))

    n_cols = min(cfg.n_max, 4) + 1
    checks.append(Check("column_sums", float(np.max(np.abs(table.column_sums[:n_cols] - 1.0))), 1e-8))
    powers = np.arange(cfg.n_max + 1)
    gf_err = 0.0
    for u, v in ((0.1, 0.2), (0.3, -0.4), (-0.5, 0.5)):
        series = float((v**powers) @ probs @ (u**powers))
        gf_err = max(gf_err, abs(series - generating_function(q_probe, u, v)))
    checks.append(Check("generating_function_series", gf_err, 1e-8))
    return checks


def _report(checks: list[Check], cfg: RunConfig) -> dict:
    return {
        "package": "ttqpo",
        "version": __version__,
        "command": "verify",
        "config": {
            "schedule": cfg.schedule,
            "rel_tol": cfg.rel_tol,
            "samples": cfg.n_output,
            "n_max": cfg.n_max,
            "inject_mismatch": cfg.inject_mismatch,
        },
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--schedule", choices=("cubic", "constant"), default="cubic")
    common.add_argument("--schedule-file", help="JSON schedule document (overrides --schedule and its parameters)")
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--tf", type=float, default=0.5)
    common.add_argument("--omega0", type=float, default=2.0)
    common.add_argument("--omegaf", type=float, default=4.0)
    common.add_argument("--variant", choices=("tt", "adiabatic"), default="tt")
    common.add_argument("--rel-tol", type=float, default=1e-10)
    common.add_argument("--samples", type=int, default=1001, help="number of output times")
    common.add_argument("--n-max", type=int, default=80, help="largest quantum number in probability tables")
    common.add_argument("--out", help="output file (directory for 'figures')")

    parser = argparse.ArgumentParser(prog="ttqpo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trajectory", parents=[common], help="classical solutions and energies")
    sub.add_parser("qfactor", parents=[common], help="adiabaticity parameters and invariant ratios")
    sub.add_parser("probabilities", parents=[common], help="P00 and P11 over time for both oscillators")
    verify = sub.add_parser("verify", parents=[common], help="run the cross-check battery")
    verify.add_argument(
        "--inject-mismatch",
        action="store_true",
        help="feed the general Q formula an adiabatic trajectory; verification must fail",
    )
    sub.add_parser("figures", parents=[common], help="all figure data for tf in 0.2, 0.5, 2.0")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.schedule_file:
        doc = json.loads(Path(args.schedule_file).read_text())
    elif args.schedule == "constant":
        doc = make_constant_schedule(args.t0, args.tf, args.omega0).to_dict()
    else:
        doc = make_cubic_schedule(args.t0, args.tf, args.omega0, args.omegaf).to_dict()
    return RunConfig(
        command=args.command,
        schedule=doc,
        variant=args.variant,
        rel_tol=args.rel_tol,
        n_output=args.samples,
        n_max=args.n_max,
        output_path=args.out,
        inject_mismatch=getattr(args, "inject_mismatch", False),
    )


def _default_out(cfg: RunConfig) -> Path:
    if cfg.output_path:
        return Path(cfg.output_path)
    if cfg.command == "figures":
        return Path("figures")
    return Path(f"{cfg.command}.csv")


def _run_figures(cfg: RunConfig, out_dir: Path) -> None:
    w0, wf = FIGURE_FREQUENCIES
    for tf in FIGURE_FINAL_TIMES:
        s = make_cubic_schedule(0.0, tf, w0, wf)
        sub = RunConfig(**{**asdict(cfg), "schedule": s.to_dict()})
        tag = f"tf{tf:g}"
        for variant in OscillatorVariant:
            write_trajectory(sub, s, variant, out_dir / f"fig1_trajectory_{variant.value}_{tag}.csv")
        write_qfactor(sub, s, out_dir / f"fig2_qfactor_{tag}.csv")
        write_probabilities(sub, s, out_dir / f"fig3_probabilities_{tag}.csv")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if not 1e-13 <= cfg.rel_tol <= 1e-3:
            raise ValueError("--rel-tol must lie in [1e-13, 1e-3]")
        s = cfg.build_schedule()
    except (OSError, ValueError, TTQPOError) as exc:
        print(f"ttqpo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = _default_out(cfg)
    try:
        if cfg.command == "verify":
            checks = run_verify(cfg, s)
            for c in checks:
                status = "SKIP" if c.skipped else ("PASS" if c.passed else "FAIL")
                print(f"{status} {c.name}: residual={c.residual:.3e} bound={c.bound:.1e} {c.detail}".rstrip())
            report = _report(checks, cfg)
            if cfg.output_path:
                _write_json(out, report)
            return EXIT_OK if report["passed"] else EXIT_FAILED
        if cfg.command == "trajectory":
            write_trajectory(cfg, s, cfg.variant, out)
        elif cfg.command == "qfactor":
            write_qfactor(cfg, s, out)
        elif cfg.command == "probabilities":
            write_probabilities(cfg, s, out)
        else:
            _run_figures(cfg, out)
    except IntegrationError as exc:
        print(f"ttqpo: integration failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"ttqpo: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
