"""Command-line driver: analyze, construct, verify, simulate, peakon, step-demo.

Every run writes its outputs under ``--output-dir`` together with a
``manifest.json`` index.  Exit codes: 0 success, 2 invalid input, 3 a
construction stage failed, 4 a verification tolerance failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import tomli

from fwshock.matcher import MatchError, match_algebraic, match_on_trajectories
from fwshock.pde_sim import SimulationError, track_wave
from fwshock.phase_plane import (
    PlanarPoint,
    RegimeError,
    WaveParams,
    equilibria,
    first_integral_H,
    jacobian,
    make_params,
    regime_diagnostics,
    saddle_data,
)
from fwshock.profile import (
    Profile,
    ProfileError,
    load_profile,
    peakon_profile,
    reconstruct_profile,
    save_profile,
    step_profile,
)
from fwshock.shooting import ShootingConfig, ShootingError, shoot_P, shoot_Q
from fwshock.verifier import Tolerances, full_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_STAGE = 3
EXIT_TOLERANCE = 4

COMMANDS = ("analyze", "construct", "verify", "simulate", "peakon", "step-demo")

# per-command grid defaults: profile grid for construct, PDE window and cells otherwise
_DEFAULTS = {
    "construct": {"L": 40.0, "n": 4001},
    "verify": {"L": 40.0, "n": 4001},
    "analyze": {"L": 40.0, "n": 4001},
    "simulate": {"L": 60.0, "n": 6000, "T": 5.0},
    "peakon": {"L": 60.0, "n": 6000, "T": 3.0},
    # the step has nonzero tails, so the relative L1 error shrinks with the window;
    # the default window only just contains the deformed region
    "step-demo": {"L": 10.0, "n": 1000, "T": 1.0},
}


class InputError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, msg: str):
        super().__init__(f"{stage}: {msg}")
        self.stage = stage


@dataclass
class RunConfig:
    command: str
    A: float | None = None
    B: float | None = None
    L: float = 40.0
    n: int = 4001
    T: float = 1.0
    samples: int = 11
    cfl: float = 0.4
    output_dir: str = "out"
    format: str = "csv"
    emit_plot_script: bool = False
    profile: str | None = None
    c: float | None = None
    alpha: float | None = None
    xi_min: float = 0.1
    tolerances: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if not self.n >= 16:
            raise InputError(f"n must be at least 16, got {self.n}")
        if not self.L > 0:
            raise InputError(f"L must be positive, got {self.L}")
        if not self.T >= 0:
            raise InputError(f"T must be nonnegative, got {self.T}")
        if self.samples < 2:
            raise InputError("samples must be at least 2")
        if self.format not in ("csv", "json"):
            raise InputError(f"format must be csv or json, got {self.format!r}")
        needs_ab = {"analyze", "construct", "step-demo"}
        if self.command == "simulate" and self.profile is None:
            needs_ab.add("simulate")
        if self.command in needs_ab and (self.A is None or self.B is None):
            raise InputError(f"{self.command} requires --A and --B")
        if self.command == "verify" and self.profile is None:
            raise InputError("verify requires --profile")
        unknown = set(self.tolerances) - {f.name for f in fields(Tolerances)}
        if unknown:
            raise InputError(f"unknown tolerance keys {sorted(unknown)}")

    def params(self) -> WaveParams:
        try:
            return make_params(self.A, self.B)
        except (RegimeError, ValueError, TypeError) as exc:
            raise InputError(str(exc)) from exc


# {{{ argument handling


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwshock",
        description="Discontinuous traveling waves of the Fornberg-Whitham equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML file with default values for the flags")
        p.add_argument("--A", type=float, help="left asymptote")
        p.add_argument("--B", type=float, help="right asymptote")
        p.add_argument("--L", type=float, help="half-width of the grid or window")
        p.add_argument("--n", type=int, help="grid nodes (construct) or cells (simulations)")
        p.add_argument("-o", "--output-dir", dest="output_dir")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument(
            "--plot", dest="emit_plot_script", action="store_const", const=True,
            help="also write a gnuplot script",
        )

    helps = {
        "analyze": "parameters, equilibria and saddle data",
        "construct": "build the shock profile",
        "verify": "residual report for a saved profile",
        "simulate": "evolve a shock profile with the PDE solver",
        "peakon": "evolve the peakon with the PDE solver",
        "step-demo": "evolve the pure step to show it deforms",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        common(p)
        if name in ("simulate", "peakon", "step-demo"):
            p.add_argument("--T", type=float, help="final time")
            p.add_argument("--samples", type=int, help="tracking sample times")
            p.add_argument("--cfl", type=float)
        if name in ("verify", "simulate"):
            p.add_argument("--profile", help="profile CSV written by construct")
        if name == "verify":
            p.add_argument("--c", type=float, help="override the wave speed")
            p.add_argument("--alpha", type=float, help="override the integration constant")
            p.add_argument("--xi-min", dest="xi_min", type=float)
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    """Merge defaults, the ``--config`` file and explicit flags (in that order)."""
    values: dict = {"command": ns.command, **_DEFAULTS[ns.command]}
    if getattr(ns, "config", None):
        try:
            with open(ns.config, "rb") as fh:
                data = tomli.load(fh)
        except (OSError, tomli.TOMLDecodeError) as exc:
            raise InputError(f"cannot read config {ns.config}: {exc}") from exc
        known = {f.name for f in fields(RunConfig)} - {"command"}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        values.update(data)
    for k, v in vars(ns).items():
        if k != "config" and v is not None:
            values[k] = v
    try:
        cfg = RunConfig(**values)
        cfg.n = int(cfg.n)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    cfg.validate()
    return cfg


# }}}


# {{{ output helpers


class Outputs:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.root = Path(cfg.output_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name

    def json(self, name: str, data) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(data, indent=2) + "\n")
        return p

    def manifest(self, exit_code: int, message: str = "", summary: dict | None = None) -> None:
        data = {
            "command": self.cfg.command,
            "config": asdict(self.cfg),
            "exit_code": exit_code,
            "message": message,
            "outputs": sorted(set(self.files)),
            "summary": summary or {},
        }
        (self.root / "manifest.json").write_text(json.dumps(data, indent=2) + "\n")


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _write_profile(out: Outputs, profile: Profile, stem: str, extra: dict | None = None) -> str:
    if out.cfg.format == "csv":
        name = f"{stem}.csv"
        save_profile(profile, out.path(name), extra)
        out.files.append(f"{stem}.json")
        return name
    name = f"{stem}_data.json"
    out.json(
        name,
        {
            "xi": profile.xi.tolist(),
            "W": profile.grid.samples.tolist(),
            "Wprime": profile.derivative_grid.samples.tolist(),
            "W_sidecar": profile.grid.sidecar(),
            **(extra or {}),
        },
    )
    return name


# }}}


# {{{ commands


def cmd_analyze(cfg: RunConfig, out: Outputs) -> tuple[int, dict]:
    p = cfg.params()
    diag = regime_diagnostics(p)
    info: dict = {"params": p.to_dict(), "regime": asdict(diag)}

    try:
        eqs = equilibria(p)
    except RegimeError as exc:
        eqs = ()
        info["equilibria_note"] = str(exc)
    info["equilibria"] = []
    for name, e in zip(("S-", "S+"), eqs):
        ev = np.linalg.eigvals(jacobian(p, e))
        info["equilibria"].append(
            {
                "name": name,
                "U": e.U,
                "V": e.V,
                "eigenvalues": [[float(z.real), float(z.imag)] for z in sorted(ev, key=lambda z: (z.real, z.imag))],
                "H": first_integral_H(p, e),
            }
        )
    if p.A - p.B > 2.0:
        sm, sp = saddle_data(p)
        info["saddles"] = {
            k: {
                "location": [s.location.U, s.location.V],
                "lambda": [s.eigenvalue_neg, s.eigenvalue_pos],
                "eigvec_neg": list(s.eigvec_neg),
                "eigvec_pos": list(s.eigvec_pos),
            }
            for k, s in (("S-", sm), ("S+", sp))
        }
    info["H_levels"] = {
        "S-": first_integral_H(p, PlanarPoint(p.B, 0.0)),
        "S+": first_integral_H(p, PlanarPoint(p.A, 0.0)),
    }

    print(f"A = {p.A:g}, B = {p.B:g}")
    print(f"c = {p.c:.15g}, alpha = {p.alpha:.15g}")
    print(f"shock regime: {diag.shock_regime} ({diag.note})")
    print(f"alpha <= c: {diag.alpha_le_c}, |A - B| <= 2: {diag.small_jump}")
    for e in info["equilibria"]:
        lams = ", ".join(
            f"{re:.12g}" if im == 0 else f"{re:.12g}{im:+.12g}i" for re, im in e["eigenvalues"]
        )
        print(f"{e['name']} = ({e['U']:.12g}, 0): eigenvalues {lams}")
    for k, s in info.get("saddles", {}).items():
        print(f"{k} eigenvectors: stable {s['eigvec_neg']}, unstable {s['eigvec_pos']}")
    print(f"H(S-) = {info['H_levels']['S-']:.15g}, H(S+) = {info['H_levels']['S+']:.15g}")
    out.json("analysis.json", info)
    return EXIT_OK, {"c": p.c, "alpha": p.alpha, "shock_regime": diag.shock_regime}


def construct(p: WaveParams, L: float, n: int, cfg: ShootingConfig | None = None):
    """Shooting, matching and profile assembly; failures name their stage."""
    if not p.shock_regime:
        raise StageError("regime", f"B + 2 < c < A fails (A={p.A:g}, B={p.B:g}, c={p.c:g})")
    try:
        P = shoot_P(p, cfg)
    except (ShootingError, RegimeError) as exc:
        raise StageError("shoot_P", str(exc)) from exc
    try:
        Q = shoot_Q(p, cfg)
    except (ShootingError, RegimeError) as exc:
        raise StageError("shoot_Q", str(exc)) from exc
    try:
        hint = match_algebraic(p)
        jump = match_on_trajectories(P, Q, hint=hint)
    except MatchError as exc:
        raise StageError("match", str(exc)) from exc
    try:
        profile = reconstruct_profile(P, Q, jump, L=L, n=n)
    except (ProfileError, ValueError) as exc:
        raise StageError("profile", str(exc)) from exc
    return P, Q, jump, profile


def cmd_construct(cfg: RunConfig, out: Outputs) -> tuple[int, dict]:
    p = cfg.params()
    P, Q, jump, profile = construct(p, cfg.L, cfg.n)
    name = _write_profile(out, profile, "profile")
    out.json("jump.json", {"params": p.to_dict(), **jump.to_dict(), "rh_defect": jump.rh_defect(p.c), "derivative_defect": jump.derivative_defect()})
    if cfg.format == "csv":
        P.to_csv(out.path("orbit_P.csv"))
        Q.to_csv(out.path("orbit_Q.csv"))
        out.files += ["orbit_P.json", "orbit_Q.json"]
    if cfg.emit_plot_script and cfg.format == "csv":
        _plot_profile(out, name, jump.U_left, jump.U_right)
    print(f"c = {p.c:.15g}, alpha = {p.alpha:.15g}")
    print(f"W(0-) = {jump.U_left:.12g}, W(0+) = {jump.U_right:.12g}")
    print(f"W'(0-) = {jump.V_left:.12g}, W'(0+) = {jump.V_right:.12g}")
    print(f"profile: {out.root / name}")
    return EXIT_OK, {"jump": jump.to_dict()}


def _verify_params(cfg: RunConfig, meta: dict) -> WaveParams:
    if cfg.A is not None and cfg.B is not None:
        p = cfg.params()
    elif "params" in meta:
        p = WaveParams.from_dict(meta["params"])
    elif cfg.c is not None and cfg.alpha is not None:
        p = WaveParams(A=math.nan, B=math.nan, c=cfg.c, alpha=cfg.alpha)
    else:
        raise InputError("verify needs --A/--B, --c/--alpha, or params in the profile manifest")
    if cfg.c is not None:
        p = replace(p, c=cfg.c)
    if cfg.alpha is not None:
        p = replace(p, alpha=cfg.alpha)
    return p


def cmd_verify(cfg: RunConfig, out: Outputs) -> tuple[int, dict]:
    path = Path(cfg.profile)
    try:
        profile = load_profile(path)
        meta = json.loads(path.with_suffix(".json").read_text())
    except (ProfileError, OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    p = _verify_params(cfg, meta)
    tol = Tolerances(**cfg.tolerances)
    report = full_report(profile, p, xi_min=cfg.xi_min)
    out.json("report.json", report.to_dict(tol))
    failures = report.failures(tol)
    for k in ("rh_residual", "deriv_residual", "wode1_sup", "const_sup", "second_order_sup"):
        print(f"{k:18s} {getattr(report, k):.3e}")
    for x, v in report.wode1_probes:
        print(f"wode1 at xi={x:+g}     {v:+.6e}")
    for k, v in report.weak_form_values:
        print(f"weak_form[{k}] {v:+.3e}")
    for f in report.flags:
        print(f"note: {f}")
    if failures:
        print("FAIL: " + ", ".join(failures))
        return EXIT_TOLERANCE, {"failures": failures}
    print("PASS")
    return EXIT_OK, {"failures": []}


def _track(cfg: RunConfig, out: Outputs, profile, c: float, n_cells: int, stem: str):
    return track_wave(
        profile,
        c,
        cfg.T,
        cfg.samples,
        domain=(-cfg.L, cfg.L),
        n_cells=n_cells,
        cfl=cfg.cfl,
        snapshot_path=out.path(f"{stem}.csv") if stem else None,
    )


def _report_track(report, out: Outputs, name: str = "track.json") -> dict:
    data = report.to_dict()
    out.json(name, data)
    speed = report.measured_speed
    print(f"feature: {report.feature}")
    print(f"measured speed: {speed:.6g} (expected {report.c_expected:.6g})")
    print(f"relative L1 shape error: {report.shape_error_L1:.3e} (absolute {report.shape_error_L1_abs:.3e})")
    if math.isfinite(report.shock_position_error):
        print(f"position error: {report.shock_position_error:.3f} cells")
    return {k: _finite(data[k]) for k in ("measured_speed", "shape_error_L1", "shock_position_error")}


def _simulation_profile_n(cfg: RunConfig) -> int:
    # profile samples at half the cell width
    return 2 * cfg.n + 1


def cmd_simulate(cfg: RunConfig, out: Outputs) -> tuple[int, dict]:
    if cfg.profile is not None:
        path = Path(cfg.profile)
        try:
            profile = load_profile(path)
            meta = json.loads(path.with_suffix(".json").read_text())
        except (ProfileError, OSError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        c = profile.c if profile.c is not None else meta.get("params", {}).get("c")
        if c is None:
            raise InputError("profile manifest carries no wave speed")
    else:
        p = cfg.params()
        *_, profile = construct(p, cfg.L, _simulation_profile_n(cfg))
        c = p.c
    try:
        report = _track(cfg, out, profile, c, cfg.n, "snapshots")
    except SimulationError as exc:
        raise StageError("simulate", str(exc)) from exc
    if cfg.emit_plot_script:
        _plot_snapshots(out, "snapshots.csv", report.times_sampled)
    return EXIT_OK, _report_track(report, out)


def cmd_peakon(cfg: RunConfig, out: Outputs) -> tuple[int, dict]:
    profile = peakon_profile(L=cfg.L, n=_simulation_profile_n(cfg))
    try:
        report = _track(cfg, out, profile, 4.0 / 3.0, cfg.n, "snapshots")
    except SimulationError as exc:
        raise StageError("simulate", str(exc)) from exc
    if cfg.emit_plot_script:
        _plot_snapshots(out, "snapshots.csv", report.times_sampled)
    return EXIT_OK, _report_track(report, out)


def cmd_step_demo(cfg: RunConfig, out: Outputs) -> tuple[int, dict]:
    p = cfg.params()
    profile = step_profile(p.A, p.B, L=cfg.L, n=_simulation_profile_n(cfg))
    try:
        fine = _track(cfg, out, profile, p.c, cfg.n, "snapshots")
        coarse = _track(cfg, out, profile, p.c, cfg.n // 2, "")
    except SimulationError as exc:
        raise StageError("simulate", str(exc)) from exc
    if cfg.emit_plot_script:
        _plot_snapshots(out, "snapshots.csv", fine.times_sampled)
    summary = _report_track(fine, out)
    out.json("track_coarse.json", coarse.to_dict())
    print(f"relative L1 shape error at half resolution: {coarse.shape_error_L1:.3e}")
    summary["shape_error_L1_coarse"] = coarse.shape_error_L1
    return EXIT_OK, summary


_HANDLERS = {
    "analyze": cmd_analyze,
    "construct": cmd_construct,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "peakon": cmd_peakon,
    "step-demo": cmd_step_demo,
}


# }}}


# {{{ gnuplot scripts


def _plot_profile(out: Outputs, csv_name: str, w_left: float, w_right: float) -> None:
    script = "\n".join(
        [
            "set datafile separator ','",
            "set key off",
            "set xlabel 'xi'",
            "set ylabel 'W'",
            f"set arrow from 0,{float(w_right)!r} to 0,{float(w_left)!r} nohead dashtype 2",
            f"plot '{csv_name}' every ::1 using 1:2 with lines",
            "",
        ]
    )
    out.path("profile.gp").write_text(script)


def _plot_snapshots(out: Outputs, csv_name: str, times: list[float]) -> None:
    terms = ", ".join(
        f"'{csv_name}' every ::1 using 2:($1=={float(t)!r} ? $3 : 1/0) with lines title 't={t:g}'"
        for t in times
    )
    script = "\n".join(
        ["set datafile separator ','", "set xlabel 'x'", "set ylabel 'u'", f"plot {terms}", ""]
    )
    out.path("snapshots.gp").write_text(script)


# }}}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    out = Outputs(cfg)
    try:
        code, summary = _HANDLERS[cfg.command](cfg, out)
    except InputError as exc:
        out.manifest(EXIT_INPUT, str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as exc:
        out.manifest(EXIT_STAGE, str(exc), {"failed_stage": exc.stage})
        print(f"error: stage {exc}", file=sys.stderr)
        return EXIT_STAGE
    out.manifest(code, "", summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
