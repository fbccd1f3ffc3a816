"""Command-line front end: one subcommand per experiment.

Configuration lives in an INI file (key/value with sections); any key can be
overridden with repeated `--set section.key=value` flags.  Every command
writes versioned CSV files plus a JSON manifest (config snapshot, code
version, per-file checksums, wall-clock timings) into the output directory,
which the GCMCHAOS_OUTDIR environment variable overrides.  Data files are
written atomically and are byte-identical across reruns with the same config
and seed; manifests carry timings and are audit metadata, not data.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .classical import (
    IntegrationError,
    freg,
    l2_bounds,
    l2_section_map,
    poincare_section,
)
from .model import ModelParams
from .spectra import (
    EigensolverError,
    expectation_all,
    operator_matrix,
    solve,
    wavefunction_density,
)
from .stats import FitError, brody_fit, unfold

CSV_VERSION_LINE = "# gcmchaos-csv v1"
OUTDIR_ENV = "GCMCHAOS_OUTDIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key path."""


@dataclass
class RunConfig:
    model: ModelParams
    quantization: str
    n_max: int
    b: float | None               # None = automatic oscillator length
    energy: float
    seed: int
    n_traj: int
    n_crossings: int
    n_samples: int
    sali_time: float
    t_max: float
    avg_tol: float
    integ_tol: float
    mesh_nx: int
    mesh_npx: int
    freg_energies: list[float]
    bounds_b: list[float]
    brody_window: tuple[float, float]
    brody_poly_degree: int
    outdir: Path

    def snapshot(self) -> dict:
        d = {
            "model": {"A": self.model.A, "B": self.model.B, "C": self.model.C,
                      "hbar": self.model.hbar, "K": self.model.K},
            "run": {"quantization": self.quantization},
            "basis": {"n_max": self.n_max,
                      "b": "auto" if self.b is None else self.b},
            "classical": {
                "energy": self.energy, "seed": self.seed,
                "n_traj": self.n_traj, "n_crossings": self.n_crossings,
                "n_samples": self.n_samples, "sali_time": self.sali_time,
                "t_max": self.t_max, "avg_tol": self.avg_tol,
                "integ_tol": self.integ_tol, "mesh_nx": self.mesh_nx,
                "mesh_npx": self.mesh_npx,
                "freg_energies": self.freg_energies,
                "bounds_b": self.bounds_b,
            },
            "brody": {"window_lo": self.brody_window[0],
                      "window_hi": self.brody_window[1],
                      "poly_degree": self.brody_poly_degree},
            "outputs": {"directory": str(self.outdir)},
        }
        return d


_DEFAULTS = {
    "model": {"a": "-1.0", "b": "0.0", "c": "1.0", "hbar": "0.1", "k": "1.0"},
    "run": {"quantization": "2d-even"},
    "basis": {"n_max": "60", "b": "auto"},
    "classical": {
        "energy": "0.2", "seed": "0", "n_traj": "100", "n_crossings": "1000",
        "n_samples": "200", "sali_time": "1e4", "t_max": "2e4",
        "avg_tol": "1e-3", "integ_tol": "1e-10", "mesh_nx": "100",
        "mesh_npx": "100", "freg_energies": "0.2", "bounds_b": "0.24",
    },
    "brody": {"window_lo": "0.0", "window_hi": "1.0", "poly_degree": "7"},
    "outputs": {"directory": "out"},
}


def _get(cp, section, key, conv, check=None):
    raw = cp.get(section, key)
    try:
        val = conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} ({exc})") from exc
    if check is not None and not check(val):
        raise ConfigError(f"{section}.{key}: invalid value {val!r}")
    return val


def _float_list(raw: str) -> list[float]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return [float(s) for s in items]


def load_config(path: Path | None, overrides: list[str]) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read_dict(_DEFAULTS)
    if path is not None:
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        with open(path) as fh:
            try:
                cp.read_file(fh)
            except configparser.Error as exc:
                raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        keypath, value = item.split("=", 1)
        section, key = keypath.split(".", 1)
        if section not in cp or key.lower() not in cp[section]:
            raise ConfigError(f"{section}.{key}: unknown configuration key")
        cp.set(section, key, value)

    for section in cp.sections():
        if section not in _DEFAULTS:
            raise ConfigError(f"{section}: unknown configuration section")
        for key in cp[section]:
            if key not in _DEFAULTS[section]:
                raise ConfigError(f"{section}.{key}: unknown configuration key")

    try:
        model = ModelParams(
            A=_get(cp, "model", "a", float),
            B=_get(cp, "model", "b", float),
            C=_get(cp, "model", "c", float),
            hbar=_get(cp, "model", "hbar", float),
            K=_get(cp, "model", "k", float),
        )
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc

    quant = _get(cp, "run", "quantization", str.lower,
                 check=lambda q: q in ("2d-even", "2d-odd", "5d"))
    b_raw = cp.get("basis", "b").strip().lower()
    b = None if b_raw in ("auto", "") else _get(cp, "basis", "b", float,
                                                check=lambda v: v > 0)
    outdir = Path(os.environ.get(OUTDIR_ENV) or cp.get("outputs", "directory"))
    window = (_get(cp, "brody", "window_lo", float),
              _get(cp, "brody", "window_hi", float))
    if window[0] >= window[1]:
        raise ConfigError("brody.window_lo: window must satisfy lo < hi")
    return RunConfig(
        model=model,
        quantization=quant,
        n_max=_get(cp, "basis", "n_max", int, check=lambda v: v >= 0),
        b=b,
        energy=_get(cp, "classical", "energy", float),
        seed=_get(cp, "classical", "seed", int, check=lambda v: v >= 0),
        n_traj=_get(cp, "classical", "n_traj", int, check=lambda v: v > 0),
        n_crossings=_get(cp, "classical", "n_crossings", int,
                         check=lambda v: v > 0),
        n_samples=_get(cp, "classical", "n_samples", int, check=lambda v: v > 0),
        sali_time=_get(cp, "classical", "sali_time", float,
                       check=lambda v: v > 0),
        t_max=_get(cp, "classical", "t_max", float, check=lambda v: v > 0),
        avg_tol=_get(cp, "classical", "avg_tol", float, check=lambda v: v > 0),
        integ_tol=_get(cp, "classical", "integ_tol", float,
                       check=lambda v: 0 < v < 1e-4),
        mesh_nx=_get(cp, "classical", "mesh_nx", int, check=lambda v: v >= 4),
        mesh_npx=_get(cp, "classical", "mesh_npx", int, check=lambda v: v >= 4),
        freg_energies=_get(cp, "classical", "freg_energies", _float_list),
        bounds_b=_get(cp, "classical", "bounds_b", _float_list),
        brody_window=window,
        brody_poly_degree=_get(cp, "brody", "poly_degree", int,
                               check=lambda v: 1 <= v <= 15),
        outdir=outdir,
    )


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_atomic(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, newline="\n")
    os.replace(tmp, path)


def _write_csv(path: Path, header: list[str], rows, comments: list[str] = ()):
    lines = [CSV_VERSION_LINE]
    lines.extend(f"# {c}" for c in comments)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Manifest:
    def __init__(self, command: str, cfg: RunConfig):
        self.command = command
        self.cfg = cfg
        self.files: dict[str, str] = {}
        self.t0 = time.monotonic()

    def add(self, path: Path):
        self.files[path.name] = _sha256(path)

    def write(self):
        payload = {
            "command": self.command,
            "code_version": __version__,
            "config": self.cfg.snapshot(),
            "files": self.files,
            "timings": {"wall_s": round(time.monotonic() - self.t0, 3)},
        }
        path = self.cfg.outdir / f"{self.command}.manifest.json"
        _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _prepare(cfg: RunConfig, command: str) -> _Manifest:
    cfg.outdir.mkdir(parents=True, exist_ok=True)
    return _Manifest(command, cfg)


def cmd_spectrum(cfg: RunConfig) -> int:
    manifest = _prepare(cfg, "spectrum")
    sol = solve(cfg.model, cfg.quantization, cfg.n_max, cfg.b)
    rows = [
        (i, sol.energies[i], int(i < sol.n_converged))
        for i in range(sol.dimension)
    ]
    out = cfg.outdir / "spectrum.csv"
    _write_csv(out, ["index", "energy", "converged"], rows,
               comments=[f"quantization={sol.quantization} n_max={sol.N_max} "
                         f"b={sol.b!r} n_converged={sol.n_converged}"])
    manifest.add(out)
    manifest.write()
    print(f"spectrum: {sol.dimension} levels ({sol.n_converged} converged) "
          f"-> {out}")
    return EXIT_OK


def cmd_lattice(cfg: RunConfig, operators: list[str]) -> int:
    manifest = _prepare(cfg, "lattice")
    sol = solve(cfg.model, cfg.quantization, cfg.n_max, cfg.b)
    if sol.n_converged < 1:
        raise EigensolverError("no converged levels; raise basis.n_max")
    cols = {}
    for name in operators:
        cols[name] = expectation_all(sol, operator_matrix(sol, name))
    header = ["index", "energy"] + [f"p_{n.lower()}" for n in operators]
    rows = []
    for i in range(sol.n_converged):
        rows.append([i, sol.energies[i]] + [cols[n][i] for n in operators])
    out = cfg.outdir / "lattice.csv"
    _write_csv(out, header, rows,
               comments=[f"quantization={sol.quantization} n_max={sol.N_max} "
                         f"b={sol.b!r}"])
    manifest.add(out)
    manifest.write()
    print(f"lattice: {sol.n_converged} converged levels, "
          f"operators={','.join(operators)} -> {out}")
    return EXIT_OK


def cmd_wavefunction(cfg: RunConfig, levels: list[int], n_points: int,
                     half_width: float | None) -> int:
    manifest = _prepare(cfg, "wavefunction")
    sol = solve(cfg.model, cfg.quantization, cfg.n_max, cfg.b)
    for i in levels:
        grid = wavefunction_density(sol, i, n_points=n_points,
                                    half_width=half_width)
        if grid.kind == "cartesian":
            names = ("x", "y")
        else:
            names = ("beta", "gamma")
        rows = []
        for iy, yv in enumerate(grid.y):
            for ix, xv in enumerate(grid.x):
                rows.append((xv, yv, grid.values[iy, ix]))
        out = cfg.outdir / f"wavefunction_{i:04d}.csv"
        _write_csv(
            out, [names[0], names[1], "density"], rows,
            comments=[
                f"level={i} energy={sol.energies[i]!r} kind={grid.kind}",
                f"{names[0]}_range=[{grid.x[0]!r},{grid.x[-1]!r}] "
                f"{names[1]}_range=[{grid.y[0]!r},{grid.y[-1]!r}] "
                f"points={n_points}",
                f"normalization={grid.norm!r} deficit={1.0 - grid.norm!r}",
            ],
        )
        manifest.add(out)
        print(f"wavefunction level {i}: norm={grid.norm:.4f} -> {out}")
    manifest.write()
    return EXIT_OK


def cmd_poincare(cfg: RunConfig) -> int:
    manifest = _prepare(cfg, "poincare")
    records = poincare_section(cfg.model, cfg.energy, cfg.n_traj,
                               cfg.n_crossings, cfg.seed)
    rows = []
    for tid, rec in enumerate(records):
        for x, px in rec.crossings:
            rows.append((tid, x, px))
    out = cfg.outdir / "section.csv"
    _write_csv(out, ["traj_id", "x", "px"], rows,
               comments=[f"E={cfg.energy!r} n_traj={cfg.n_traj} "
                         f"n_crossings={cfg.n_crossings} seed={cfg.seed}"])
    manifest.add(out)
    manifest.write()
    print(f"poincare: {len(rows)} crossings -> {out}")
    return EXIT_OK


def cmd_l2map(cfg: RunConfig) -> int:
    manifest = _prepare(cfg, "l2map")
    m = l2_section_map(cfg.model, cfg.energy, cfg.mesh_nx, cfg.mesh_npx,
                       cfg.t_max, cfg.avg_tol, cfg.integ_tol)
    rows = []
    for ipx, pxv in enumerate(m.px):
        for ix, xv in enumerate(m.x):
            masked = bool(m.mask[ipx, ix])
            rows.append((xv, pxv, "nan" if masked else _fmt(m.values[ipx, ix]),
                         int(masked)))
    out = cfg.outdir / "l2map.csv"
    _write_csv(out, ["x", "px", "value", "mask"], rows,
               comments=[f"E={cfg.energy!r} mesh={cfg.mesh_nx}x{cfg.mesh_npx} "
                         f"t_max={cfg.t_max!r} avg_tol={cfg.avg_tol!r}"])
    manifest.add(out)
    manifest.write()
    print(f"l2map: {cfg.mesh_nx}x{cfg.mesh_npx} mesh, "
          f"{int(m.mask.sum())} masked cells -> {out}")
    return EXIT_OK


def cmd_freg(cfg: RunConfig) -> int:
    manifest = _prepare(cfg, "freg")
    rows = []
    for E in cfg.freg_energies:
        r = freg(cfg.model, E, cfg.n_samples, cfg.sali_time, cfg.seed)
        rows.append((E, r.f_reg, r.stderr, r.n_samples))
    out = cfg.outdir / "freg.csv"
    _write_csv(out, ["E", "f_reg", "stderr", "n"], rows,
               comments=[f"B={cfg.model.B!r} seed={cfg.seed} "
                         f"sali_time={cfg.sali_time!r}"])
    manifest.add(out)
    manifest.write()
    print(f"freg: {len(rows)} energies -> {out}")
    return EXIT_OK


def cmd_bounds(cfg: RunConfig) -> int:
    manifest = _prepare(cfg, "bounds")
    params_list = [
        ModelParams(A=cfg.model.A, B=b, C=cfg.model.C, hbar=cfg.model.hbar,
                    K=cfg.model.K)
        for b in cfg.bounds_b
    ]
    rows_out = []
    for row in l2_bounds(params_list, cfg.energy, cfg.n_samples, cfg.t_max,
                         cfg.seed, cfg.avg_tol, cfg.integ_tol):
        rows_out.append((row.B, row.l2_min, row.l2_max, row.n_converged))
    out = cfg.outdir / "bounds.csv"
    _write_csv(out, ["B", "l2_min", "l2_max", "n_converged_samples"], rows_out,
               comments=[f"E={cfg.energy!r} n_samples={cfg.n_samples} "
                         f"seed={cfg.seed} t_max={cfg.t_max!r}"])
    manifest.add(out)
    manifest.write()
    print(f"bounds: {len(rows_out)} B values -> {out}")
    return EXIT_OK


def cmd_brody(cfg: RunConfig, window: tuple[float, float] | None) -> int:
    manifest = _prepare(cfg, "brody")
    lo, hi = window if window is not None else cfg.brody_window
    sol = solve(cfg.model, cfg.quantization, cfg.n_max, cfg.b)
    sample = unfold(sol.energies[:sol.n_converged], (lo, hi),
                    cfg.brody_poly_degree)
    fit = brody_fit(sample)
    out = cfg.outdir / "brody.csv"
    _write_csv(out, ["window_lo", "window_hi", "omega", "ci_lo", "ci_hi", "n"],
               [(lo, hi, fit.omega_raw, fit.ci_lo, fit.ci_hi, sample.count)],
               comments=[f"B={cfg.model.B!r} quantization={cfg.quantization} "
                         f"clipped_omega={fit.omega!r}"])
    manifest.add(out)
    manifest.write()
    print(f"brody: omega={fit.omega_raw:.3f} on [{lo}, {hi}] "
          f"({sample.count} levels) -> {out}")
    return EXIT_OK


def _parse_levels(raw: str) -> list[int]:
    try:
        return [int(s) for s in raw.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"--levels: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcmchaos",
        description="Peres lattices and classical chaos for the quartic "
                    "collective model",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="INI configuration file (defaults apply if omitted)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE",
                       help="override a configuration key")

    common(sub.add_parser("spectrum", help="eigenvalues to spectrum.csv"))

    p = sub.add_parser("lattice", help="Peres averages to lattice.csv")
    common(p)
    p.add_argument("--operators", default="L2,Hprime,H0",
                   help="comma-separated subset of L2,Hprime,H0")

    p = sub.add_parser("wavefunction", help="density grids per level")
    common(p)
    p.add_argument("--levels", required=True,
                   help="comma-separated converged level indices")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--half-width", type=float, default=None)

    common(sub.add_parser("poincare", help="section crossings to section.csv"))
    common(sub.add_parser("l2map", help="classical <L2> mesh to l2map.csv"))
    common(sub.add_parser("freg", help="regular fractions to freg.csv"))
    common(sub.add_parser("bounds", help="classical <L2> bounds to bounds.csv"))

    p = sub.add_parser("brody", help="Brody fit of the unfolded window")
    common(p)
    p.add_argument("--window", default=None, metavar="LO,HI")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "lattice":
            ops = [o.strip() for o in args.operators.split(",") if o.strip()]
            for o in ops:
                if o not in ("L2", "Hprime", "H0"):
                    raise ConfigError(f"--operators: unknown operator {o!r}")
            return cmd_lattice(cfg, ops)
        if args.command == "wavefunction":
            return cmd_wavefunction(cfg, _parse_levels(args.levels),
                                    args.points, args.half_width)
        if args.command == "poincare":
            return cmd_poincare(cfg)
        if args.command == "l2map":
            return cmd_l2map(cfg)
        if args.command == "freg":
            return cmd_freg(cfg)
        if args.command == "bounds":
            return cmd_bounds(cfg)
        if args.command == "brody":
            window = None
            if args.window is not None:
                parts = args.window.split(",")
                if len(parts) != 2:
                    raise ConfigError("--window expects LO,HI")
                window = (float(parts[0]), float(parts[1]))
            return cmd_brody(cfg, window)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    except IndexError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EigensolverError, IntegrationError, FitError, FloatingPointError,
            ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
