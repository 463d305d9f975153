"""Command-line entry point.

Subcommands: simulate, energy-check, fixed-points, portrait, bifurcation,
convergence. Exit codes: 0 success, 1 runtime/model error, 2 usage error.

Run configuration is a flat ``key = value`` text file (``#`` starts a comment)
overridden by ``--set key=value`` and the dedicated flags.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from chevron.core import ChevronParams, Grid2D, SimState
from chevron.energy import (
    EnergyRecord,
    EnergyRecorder,
    Regime,
    bound_at,
    check_dissipativity,
    lyapunov_weights,
    regime_of,
)
from chevron.initial import PRNG_NAME, InitialCondition, RandomIC, SingleModeIC, make_initial, parse_ic
from chevron.io import (
    CsvFormatError,
    SnapshotError,
    read_numeric_csv,
    snapshot_name,
    write_csv,
    write_snapshot,
    fmt,
)
from chevron.pde import BlowUpError, Scheme, StepperConfig, convergence_errors, run, stable_dt
from chevron.reduced_ode import (
    ReducedParams,
    System,
    bifurcation_scan,
    count_boundary,
    critical_chi,
    fixed_points,
    portrait,
    seed_grid,
)

log = logging.getLogger("chevron")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
ORDER_THRESHOLDS = {Scheme.RK4_EXPLICIT: 3.5, Scheme.IMEX_EULER: 0.9}

DEFAULTS = {
    "tau": "1.0",
    "D1": "1.0",
    "D2": "0.5",
    "c1": "0.5",
    "c2": "1.0",
    "h": "0.5",
    "beta": "0.5",
    "nx": "64",
    "ny": "64",
    "Lx": "1.0",
    "Ly": "1.0",
    "scheme": "imex",
    "dt": "1e-3",
    "safety": "0.8",
    "state_bound": "2.0",
    "t_end": "20.0",
    "observe_every": "0.1",
    "snapshot_every": "0",
    "ic": "random:0:1.0",
    "output_dir": "out",
}


class ConfigError(ValueError):
    """Invalid configuration: reported as a usage error."""


@dataclass(frozen=True)
class RunConfig:
    params: ChevronParams
    grid: Grid2D
    stepper: StepperConfig
    t_end: float
    observe_every: float
    ic: InitialCondition
    output_dir: Path
    snapshot_every: float = 0.0
    dt_policy: str = "fixed"
    state_bound: float = 2.0

    def to_mapping(self) -> dict[str, str]:
        """Flat key/value form; feeding it back through :func:`build_config` reproduces the run."""
        m = {k: fmt(v) for k, v in self.params.as_dict().items()}
        m.update(
            nx=str(self.grid.nx),
            ny=str(self.grid.ny),
            Lx=fmt(self.grid.Lx),
            Ly=fmt(self.grid.Ly),
            scheme=self.stepper.scheme.value,
            dt=fmt(self.stepper.dt),
            safety=fmt(self.stepper.safety),
            state_bound=fmt(self.state_bound),
            t_end=fmt(self.t_end),
            observe_every=fmt(self.observe_every),
            snapshot_every=fmt(self.snapshot_every),
            ic=self.ic.describe(),
            output_dir=str(self.output_dir),
        )
        return m


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def build_config(values: dict[str, str], seed: int | None = None) -> RunConfig:
    merged = dict(DEFAULTS)
    unknown = set(values) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged.update(values)
    try:
        params = ChevronParams(**{k: float(merged[k]) for k in ("tau", "D1", "D2", "c1", "c2", "h", "beta")})
        grid = Grid2D(int(merged["nx"]), int(merged["ny"]), float(merged["Lx"]), float(merged["Ly"]))
        scheme = Scheme(merged["scheme"].lower())
        safety = float(merged["safety"])
        state_bound = float(merged["state_bound"])
        if merged["dt"].lower() == "auto":
            dt = stable_dt(params, grid, state_bound, safety)
            policy = "auto"
        else:
            dt = float(merged["dt"])
            policy = "fixed"
        stepper = StepperConfig(scheme, dt, safety)
        t_end = float(merged["t_end"])
        observe_every = float(merged["observe_every"])
        snapshot_every = float(merged["snapshot_every"])
        ic = parse_ic(merged["ic"], seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    if not observe_every > 0:
        raise ConfigError("observe_every must be positive")
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise ConfigError("t_end must be finite and non-negative")
    if snapshot_every < 0:
        raise ConfigError("snapshot_every must be non-negative")
    return RunConfig(
        params, grid, stepper, t_end, observe_every, ic, Path(merged["output_dir"]), snapshot_every, policy, state_bound
    )


ENERGY_HEADER = EnergyRecord.header()


class EnergyCsvWriter:
    """Observer appending one energy row per call, flushed so partial logs survive a blow-up."""

    def __init__(self, path: Path, recorder: EnergyRecorder):
        self.recorder = recorder
        self.fh = path.open("w", newline="")
        self.fh.write(",".join(ENERGY_HEADER) + "\n")

    def __call__(self, state: SimState) -> None:
        self.recorder(state)
        rec = self.recorder.records[-1]
        self.fh.write(",".join(fmt(v) for v in rec.as_row()) + "\n")
        self.fh.flush()

    def close(self) -> None:
        self.fh.close()


class SnapshotWriter:
    def __init__(self, out_dir: Path, every: float, t0: float):
        self.out_dir = out_dir
        self.every = every
        self.next_t = t0

    def __call__(self, state: SimState) -> None:
        if self.every <= 0:
            return
        if state.t >= self.next_t - 1e-9 * self.every:
            write_snapshot(self.out_dir / snapshot_name(state.t), state)
            while self.next_t <= state.t + 1e-9 * self.every:
                self.next_t += self.every


def write_run_meta(path: Path, cfg: RunConfig, extra: dict[str, str]) -> None:
    lines = ["# chevron run metadata; usable as --config to reproduce the run"]
    for k, v in extra.items():
        lines.append(f"# {k}: {v}")
    for k, v in cfg.to_mapping().items():
        lines.append(f"{k} = {v}")
    path.write_text("\n".join(lines) + "\n")


def cmd_simulate(cfg: RunConfig, quiet: bool = False) -> int:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        initial = make_initial(cfg.ic, cfg.grid)
    except (OSError, SnapshotError, ValueError) as exc:
        print(f"error: initial condition: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    regime = regime_of(cfg.params)
    seed = cfg.ic.seed if isinstance(cfg.ic, RandomIC) else "n/a"
    write_run_meta(
        out / "run_meta.txt",
        cfg,
        {
            "regime": regime.value,
            "prng": PRNG_NAME,
            "seed": str(seed),
            "dt_policy": cfg.dt_policy,
            "t_start": fmt(initial.t),
        },
    )
    recorder = EnergyRecorder(cfg.params, regime)
    writer = EnergyCsvWriter(out / "energy.csv", recorder)
    snaps = SnapshotWriter(out, cfg.snapshot_every, initial.t)
    status = EXIT_OK
    try:
        final = run(initial, cfg.params, cfg.stepper, max(cfg.t_end, initial.t), [writer, snaps], cfg.observe_every)
        write_snapshot(out / "checkpoint.chev", final)
    except BlowUpError as exc:
        print(f"error: {exc}; partial outputs kept in {out}", file=sys.stderr)
        status = EXIT_RUNTIME
    finally:
        writer.close()
    report = check_dissipativity(recorder.records, regime)
    (out / "dissipativity.txt").write_text(report.summary() + "\n")
    if not quiet:
        print(report.summary())
    return status


def cmd_energy_check(csv_path, params: ChevronParams, area: float, quiet: bool = False) -> int:
    try:
        rows = read_numeric_csv(csv_path, ENERGY_HEADER)
    except (OSError, CsvFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    regime = regime_of(params)
    L0, t0 = rows[0][6], rows[0][0]
    records = []
    for r in rows:
        values = dict(zip(ENERGY_HEADER, r))
        values["bound"] = bound_at(params, L0, values["t"] - t0, area, regime)
        records.append(EnergyRecord(**values))
    report = check_dissipativity(records, regime)
    if not quiet:
        print(report.summary())
    if regime is Regime.NONE:
        print("warning: parameters outside the dissipative regimes; nothing checked", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_RUNTIME


FIXED_POINT_HEADER = ["rho", "phi", "re_l1", "im_l1", "re_l2", "im_l2", "kind"]


def format_fixed_points(points) -> str:
    lines = [f"{'rho':>12} {'phi':>12} {'lambda1':>26} {'lambda2':>26}  kind"]
    for fp in points:
        l1, l2 = fp.eigenvalues
        lines.append(
            f"{fp.rho:12.8f} {fp.phi:12.8f} {l1.real:12.6g}{l1.imag:+12.6g}i {l2.real:12.6g}{l2.imag:+12.6g}i  "
            f"{fp.kind.value}"
        )
    return "\n".join(lines)


def cmd_fixed_points(system: System, rp: ReducedParams, out_dir: Path, quiet: bool = False) -> int:
    points = fixed_points(system, rp)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "fixed_points.csv", FIXED_POINT_HEADER, (fp.as_row() for fp in points))
    if not quiet:
        print(format_fixed_points(points))
    return EXIT_OK


def basin_label(fp) -> str:
    return "UNRESOLVED" if fp is None else f"({fmt(fp.rho)};{fmt(fp.phi)})"


def cmd_portrait(system, rp, seeds, t_end, dt, out_dir: Path, quiet: bool = False) -> int:
    orbits = portrait(system, rp, seeds, t_end, dt)
    out_dir.mkdir(parents=True, exist_ok=True)

    def rows():
        for k, orb in enumerate(orbits):
            label = basin_label(orb.basin)
            for t, r, f in orb.samples:
                yield (k, t, r, f, label)

    write_csv(out_dir / "portrait.csv", ["orbit_id", "t", "rho", "phi", "basin"], rows())
    if not quiet:
        counts: dict[str, int] = {}
        for orb in orbits:
            counts[basin_label(orb.basin)] = counts.get(basin_label(orb.basin), 0) + 1
        print(f"{len(orbits)} orbits")
        for label, n in sorted(counts.items()):
            print(f"  basin {label}: {n}")
    return EXIT_OK


def cmd_bifurcation(c1_values, chi_values, c2, h, tau, out_dir: Path, quiet: bool = False) -> int:
    table = bifurcation_scan(c1_values, chi_values, c2, h, tau)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "bifurcation.csv", ["c1", "chi", "count"], table)
    if not quiet:
        print(f"{'c1':>8} {'last chi>0':>12} {'first chi=0':>12} {'critical_chi':>13}")
        for c1 in c1_values:
            cell = count_boundary(table, float(c1))
            crit = critical_chi(float(c1))
            a, b = cell if cell else (math.nan, math.nan)
            print(f"{c1:8.4g} {a:12.6g} {b:12.6g} {crit if crit is not None else math.nan:13.6g}")
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, schemes, t_final: float | None, dt: float | None, quiet: bool = False) -> int:
    """Self-convergence order of each scheme; exits 1 if any falls below its threshold."""
    initial = make_initial(cfg.ic, cfg.grid)
    status = EXIT_OK
    for scheme in schemes:
        if scheme is Scheme.RK4_EXPLICIT:
            tf, h = t_final or 0.01, dt or 4e-5
        else:
            tf, h = t_final or 0.1, dt or 1e-3
        try:
            errors = convergence_errors(cfg.params, initial, scheme, tf, h)
        except BlowUpError as exc:
            cap = stable_dt(cfg.params, cfg.grid, cfg.state_bound)
            print(
                f"error: {scheme.value} blew up with dt={h:g} ({exc}); "
                f"the explicit stability cap for this grid is about {cap:.3g}",
                file=sys.stderr,
            )
            status = EXIT_RUNTIME
            continue
        if errors[0] == 0 or errors[1] == 0:
            print(f"error: {scheme.value}: identical runs, order undefined", file=sys.stderr)
            status = EXIT_RUNTIME
            continue
        order = math.log2(errors[0] / errors[1])
        ok = order >= ORDER_THRESHOLDS[scheme]
        if not quiet:
            errs = ", ".join(f"{e:.3e}" for e in errors)
            print(f"{scheme.value}: dt={h:g} t={tf:g} errors=[{errs}] observed order {order:.4f} "
                  f"({'ok' if ok else 'below'} threshold {ORDER_THRESHOLDS[scheme]})")
        if not ok:
            status = EXIT_RUNTIME
    return status


def parse_range(text: str) -> list[float]:
    """``a``, ``a,b,c`` or inclusive ``start:step:stop``."""
    text = text.strip()
    if ":" in text:
        parts = [float(s) for s in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0 or parts[2] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:step:stop")
        start, step, stop = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(n)]
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value run configuration file")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="PRNG seed for random initial data")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary on standard output")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chevron", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the PDE with energy diagnostics")
    _common(sim)
    sim.add_argument("--ic", help="zero | random:SEED:AMP | single_mode:KX:KY:AMP | file:PATH")
    sim.add_argument("--t-end", type=float)
    sim.add_argument("--dt", help="step size or 'auto'")
    sim.add_argument("--scheme", choices=[s.value for s in Scheme])

    ec = sub.add_parser("energy-check", help="re-verify an energy.csv against the absorbing bound")
    _common(ec)
    ec.add_argument("csv", type=Path)

    for name, help_text in (("fixed-points", "equilibria of a reduced system"), ("portrait", "phase-portrait orbits")):
        sp = sub.add_parser(name, help=help_text)
        _common(sp)
        sp.add_argument("--system", required=True, choices=[s.value for s in System])
        sp.add_argument("--h", type=float, required=True)
        sp.add_argument("--tau", type=float, default=1.0)
        sp.add_argument("--c1", type=float, default=0.0)
        sp.add_argument("--c2", type=float, default=0.0)
        sp.add_argument("--chi", type=float, default=0.0)
        if name == "portrait":
            sp.add_argument("--n-rho", type=int, default=7)
            sp.add_argument("--n-phi", type=int, default=7)
            sp.add_argument("--t-end", type=float, default=100.0)
            sp.add_argument("--dt", type=float, default=0.01)

    bif = sub.add_parser("bifurcation", help="count nontrivial equilibria over (c1, chi)")
    _common(bif)
    bif.add_argument("--c1", type=parse_range, required=True)
    bif.add_argument("--chi", type=parse_range, required=True)
    bif.add_argument("--c2", type=float, default=1.0)
    bif.add_argument("--h", type=float, default=0.5)
    bif.add_argument("--tau", type=float, default=1.0)

    conv = sub.add_parser("convergence", help="self-convergence order of the time integrators")
    _common(conv)
    conv.add_argument("--scheme", choices=["rk4", "imex", "both"], default="both")
    conv.add_argument("--t-final", type=float)
    conv.add_argument("--dt", type=float)
    return parser


def _run_config(args, extra: dict[str, str] | None = None) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        values[k.strip()] = v.strip()
    values.update(extra or {})
    if args.out is not None:
        values["output_dir"] = str(args.out)
    return build_config(values, args.seed)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            extra = {}
            if args.ic:
                extra["ic"] = args.ic
            if args.t_end is not None:
                extra["t_end"] = repr(args.t_end)
            if args.dt:
                extra["dt"] = args.dt
            if args.scheme:
                extra["scheme"] = args.scheme
            return cmd_simulate(_run_config(args, extra), args.quiet)
        if args.command == "energy-check":
            cfg = _run_config(args)
            return cmd_energy_check(args.csv, cfg.params, cfg.grid.area(), args.quiet)
        if args.command == "convergence":
            extra = {} if (args.config or any(s.startswith("ic=") for s in args.set)) else {"ic": "single_mode:3:3:1.0"}
            cfg = _run_config(args, extra)
            schemes = list(Scheme) if args.scheme == "both" else [Scheme(args.scheme)]
            return cmd_convergence(cfg, schemes, args.t_final, args.dt, args.quiet)
        out = args.out or Path(".")
        if args.command in ("fixed-points", "portrait"):
            rp = ReducedParams(args.tau, args.c1, args.c2, args.h, args.chi)
            system = System(args.system)
            if args.command == "fixed-points":
                return cmd_fixed_points(system, rp, out, args.quiet)
            seeds = seed_grid(args.n_rho, args.n_phi)
            return cmd_portrait(system, rp, seeds, args.t_end, args.dt, out, args.quiet)
        if args.command == "bifurcation":
            return cmd_bifurcation(args.c1, args.chi, args.c2, args.h, args.tau, out, args.quiet)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
